#include "cfbench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cfbench/error.hpp"

namespace cfb::svg {

namespace {

constexpr double kLeft = 70.0;
constexpr double kTop = 40.0;
constexpr double kPlotH = 300.0;
constexpr double kBottom = 170.0;  // room for rotated labels

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void check_sizes(const std::vector<std::string>& labels, const std::vector<double>& values) {
  if (labels.size() != values.size()) {
    throw Error(Errc::LengthMismatch, "plot labels and values differ in length");
  }
}

struct Frame {
  double width;
  double step;
};

Frame open(std::ostringstream& out, const std::string& title, std::size_t n) {
  const double step = 22.0;
  const double width = kLeft + step * static_cast<double>(std::max<std::size_t>(n, 1)) + 40.0;
  const double height = kTop + kPlotH + kBottom;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  return {width, step};
}

void x_labels(std::ostringstream& out, const std::vector<std::string>& labels, double step) {
  const double y = kTop + kPlotH + 8.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x = kLeft + step * (static_cast<double>(i) + 0.5);
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" transform=\"rotate(60 " << num(x)
        << ' ' << num(y) << ")\">" << escape(labels[i]) << "</text>\n";
  }
}

void axes(std::ostringstream& out, double width, double lo, double hi) {
  const double right = width - 40.0;
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kTop + kPlotH) << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + kPlotH) << "\" x2=\"" << num(right)
      << "\" y2=\"" << num(kTop + kPlotH) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    const double y = kTop + kPlotH - kPlotH * i / 4.0;
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
        << tick(v) << "</text>\n";
  }
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string cross_plot(const std::string& title, const std::vector<std::string>& labels,
                       const std::vector<double>& values, std::optional<double> threshold) {
  check_sizes(labels, values);
  std::ostringstream out;
  const Frame f = open(out, title, labels.size());
  axes(out, f.width, 0.0, 1.0);
  auto y_of = [](double v) { return kTop + kPlotH * (1.0 - std::clamp(v, 0.0, 1.0)); };
  if (threshold) {
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y_of(*threshold)) << "\" x2=\""
        << num(f.width - 40.0) << "\" y2=\"" << num(y_of(*threshold))
        << "\" stroke=\"red\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kLeft + f.step * (static_cast<double>(i) + 0.5);
    const double y = y_of(values[i]);
    const bool hit = threshold && values[i] < *threshold;
    const char* color = hit ? "red" : "black";
    out << "<path d=\"M" << num(x - 4) << ' ' << num(y - 4) << " L" << num(x + 4) << ' ' << num(y + 4)
        << " M" << num(x - 4) << ' ' << num(y + 4) << " L" << num(x + 4) << ' ' << num(y - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
  }
  x_labels(out, labels, f.step);
  out << "<text x=\"16\" y=\"" << num(kTop + kPlotH / 2) << "\" transform=\"rotate(-90 16 "
      << num(kTop + kPlotH / 2) << ")\" text-anchor=\"middle\">p-value</text>\n</svg>\n";
  return out.str();
}

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& labels, const std::vector<double>& values) {
  check_sizes(labels, values);
  double lo = 0.0, hi = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  std::ostringstream out;
  const Frame f = open(out, title, labels.size());
  axes(out, f.width, lo, hi);
  auto y_of = [&](double v) { return kTop + kPlotH * (hi - v) / (hi - lo); };
  const double zero = y_of(0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    const double x = kLeft + f.step * static_cast<double>(i) + 3.0;
    const double y = y_of(values[i]);
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(std::min(y, zero)) << "\" width=\""
        << num(f.step - 6.0) << "\" height=\"" << num(std::abs(zero - y))
        << "\" fill=\"steelblue\"/>\n";
  }
  x_labels(out, labels, f.step);
  out << "<text x=\"16\" y=\"" << num(kTop + kPlotH / 2) << "\" transform=\"rotate(-90 16 "
      << num(kTop + kPlotH / 2) << ")\" text-anchor=\"middle\">" << escape(y_label)
      << "</text>\n</svg>\n";
  return out.str();
}

}  // namespace cfb::svg
