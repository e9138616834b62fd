#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cfb::svg {

/// One marker per label on a [0, 1] axis, with an optional dashed
/// horizontal reference line (p-value plots).
std::string cross_plot(const std::string& title, const std::vector<std::string>& labels,
                       const std::vector<double>& values, std::optional<double> threshold);

/// Vertical bars, one per label. Negative values hang below the zero line,
/// which keeps log-scale data readable.
std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& labels, const std::vector<double>& values);

std::string escape(const std::string& text);

}  // namespace cfb::svg
