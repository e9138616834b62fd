#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cfbench/evaluation.hpp"

namespace cfb::report {

/// Results rows with an added log10(RMSE) column, in table order.
std::string appendix_csv(const ResultsTable& table);

/// One bar chart of log10(RMSE) per (dataset, predicted variable); bars are
/// the model/target cells. Returns (file name, SVG text) pairs.
std::vector<std::pair<std::string, std::string>> log_rmse_charts(const ResultsTable& table);

}  // namespace cfb::report
