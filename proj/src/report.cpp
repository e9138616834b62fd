#include "cfbench/report.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "cfbench/svg.hpp"
#include "csv_util.hpp"

namespace cfb::report {

std::string appendix_csv(const ResultsTable& table) {
  std::ostringstream out;
  out << "RMSE,log10_RMSE,variable,Dataset,Model,Target,diverged,collision\n";
  for (const auto& r : table.rows()) {
    const double lg = r.rmse > 0.0 ? std::log10(r.rmse) : -std::numeric_limits<double>::infinity();
    out << detail::format_double(r.rmse) << ',' << detail::format_double(lg) << ',' << to_string(r.variable)
        << ',' << r.dataset << ',' << r.model << ',' << to_string(r.target) << ',' << (r.diverged ? 1 : 0)
        << ',' << (r.collision ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<std::pair<std::string, std::string>> log_rmse_charts(const ResultsTable& table) {
  struct Series {
    std::vector<std::string> labels;
    std::vector<double> values;
  };
  std::map<std::pair<std::string, std::string>, Series> groups;
  for (const auto& r : table.rows()) {
    auto& s = groups[{r.dataset, std::string(to_string(r.variable))}];
    s.labels.push_back(r.model + "/" + std::string(to_string(r.target)) + (r.diverged || r.collision ? "*" : ""));
    s.values.push_back(r.rmse > 0.0 && std::isfinite(r.rmse) ? std::log10(r.rmse)
                                                               : std::numeric_limits<double>::quiet_NaN());
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, s] : groups) {
    const std::string title = key.first + ": log10 RMSE(" + key.second + ")";
    out.emplace_back("log_rmse_" + key.first + "_" + key.second + ".svg",
                     svg::bar_chart(title, "log10 RMSE", s.labels, s.values));
  }
  return out;
}

}  // namespace cfb::report
