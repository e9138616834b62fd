#include "cfbench/anova.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "cfbench/error.hpp"
#include "cfbench/svg.hpp"
#include "csv_util.hpp"

namespace cfb::anova {

std::string_view to_string(Factor f) {
  switch (f) {
    case Factor::Dataset: return "Dataset";
    case Factor::Model: return "Model";
    case Factor::Target: return "Target";
  }
  return "?";
}

Factor parse_factor(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "dataset" || lower == "data") return Factor::Dataset;
  if (lower == "model") return Factor::Model;
  if (lower == "target") return Factor::Target;
  throw Error(Errc::InvalidConfig, "unknown factor '" + std::string(name) + "' (dataset, model, target)");
}

namespace {

std::string level_of(const ResultsRow& row, Factor f) {
  switch (f) {
    case Factor::Dataset: return row.dataset;
    case Factor::Model: return row.model;
    case Factor::Target: return std::string(to_string(row.target));
  }
  return {};
}

struct Coding {
  Factor factor;
  std::vector<std::string> levels;  // levels[0] is the reference
};

Coding code_factor(const std::vector<ResultsRow>& rows, Factor f) {
  std::set<std::string> seen;
  for (const auto& r : rows) seen.insert(level_of(r, f));
  if (seen.size() < 2) {
    throw Error(Errc::SingleLevelFactor, std::string(to_string(f)) + " has " +
                                             std::to_string(seen.size()) + " level(s); need at least 2");
  }
  return {f, std::vector<std::string>(seen.begin(), seen.end())};
}

struct LsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd fitted;
  double rss = 0.0;
};

LsFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    Eigen::ColPivHouseholderQR<Eigen::MatrixXd>* keep = nullptr) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    throw Error(Errc::PerfectCollinearity, "design matrix has rank " + std::to_string(qr.rank()) +
                                               " < " + std::to_string(X.cols()) + " columns");
  }
  LsFit out;
  out.coef = qr.solve(y);
  out.fitted = X * out.coef;
  out.rss = (y - out.fitted).squaredNorm();
  if (keep) *keep = std::move(qr);
  return out;
}

double two_sided_p(double t, double dof) { return std::min(1.0, 2.0 * t_cdf(-std::abs(t), dof)); }

}  // namespace

Design dummy_encode(const std::vector<ResultsRow>& rows, const std::vector<Factor>& factors,
                    const std::optional<FactorPair>& interaction) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  std::map<Factor, Coding> codings;
  for (Factor f : factors) codings.emplace(f, code_factor(rows, f));
  if (interaction) {
    if (interaction->first == interaction->second) {
      throw Error(Errc::InvalidConfig, "interaction needs two different factors");
    }
    for (Factor f : {interaction->first, interaction->second}) {
      if (!codings.count(f)) codings.emplace(f, code_factor(rows, f));
    }
  }

  std::vector<Eigen::VectorXd> cols{Eigen::VectorXd::Ones(n)};
  Design d;
  d.labels.push_back("(Intercept)");
  d.groups.push_back("(Intercept)");
  auto indicator = [&](Factor f, const std::string& level) {
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = level_of(rows[static_cast<std::size_t>(i)], f) == level ? 1.0 : 0.0;
    return c;
  };
  for (Factor f : factors) {
    const auto& levels = codings.at(f).levels;
    for (std::size_t j = 1; j < levels.size(); ++j) {
      cols.push_back(indicator(f, levels[j]));
      d.labels.push_back(std::string(to_string(f)) + "(" + levels[j] + ")");
      d.groups.emplace_back(to_string(f));
    }
  }
  if (interaction) {
    const auto& la = codings.at(interaction->first).levels;
    const auto& lb = codings.at(interaction->second).levels;
    const std::string group =
        std::string(to_string(interaction->first)) + ":" + std::string(to_string(interaction->second));
    for (std::size_t i = 1; i < la.size(); ++i) {
      const Eigen::VectorXd ca = indicator(interaction->first, la[i]);
      for (std::size_t j = 1; j < lb.size(); ++j) {
        cols.push_back(ca.cwiseProduct(indicator(interaction->second, lb[j])));
        d.labels.push_back(la[i] + "-" + lb[j]);
        d.groups.push_back(group);
      }
    }
  }
  d.X.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) d.X.col(static_cast<Eigen::Index>(j)) = cols[j];
  return d;
}

AnovaTable ols_fit(const Design& design, const Eigen::VectorXd& y) {
  const Eigen::Index n = design.X.rows();
  const Eigen::Index p = design.X.cols();
  if (y.size() != n) throw Error(Errc::DimensionMismatch, "design rows and y differ in length");
  if (n < p + 1) {
    throw Error(Errc::TooFewRows, std::to_string(n) + " rows cannot fit " + std::to_string(p) +
                                      " coefficients with a residual degree of freedom");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  const LsFit fit = least_squares(design.X, y, &qr);

  AnovaTable t;
  t.n = static_cast<std::size_t>(n);
  t.df_residual = static_cast<std::size_t>(n - p);
  t.residual_variance = fit.rss / static_cast<double>(t.df_residual);
  t.fitted = fit.fitted;
  const double tss = (y.array() - y.mean()).square().sum();
  t.r_squared = tss > 0.0 ? 1.0 - fit.rss / tss : 1.0;

  // (X'X)^-1 = P (R'R)^-1 P'
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd cov = qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();

  const bool exact = t.residual_variance < kZeroResidual;
  const double coef_tol = 1e-9 * (1.0 + y.cwiseAbs().maxCoeff());
  const auto dof = static_cast<double>(t.df_residual);
  for (Eigen::Index j = 0; j < p; ++j) {
    Term term;
    term.label = design.labels[static_cast<std::size_t>(j)];
    term.coefficient = fit.coef[j];
    term.std_error = std::sqrt(t.residual_variance * cov(j, j));
    if (exact) {
      const bool nonzero = std::abs(term.coefficient) > coef_tol;
      term.t = nonzero ? std::copysign(std::numeric_limits<double>::infinity(), term.coefficient) : 0.0;
      term.p = nonzero ? 0.0 : 1.0;
    } else {
      term.t = term.coefficient / term.std_error;
      term.p = two_sided_p(term.t, dof);
    }
    term.significant = term.p < 0.05;
    t.terms.push_back(term);
  }

  std::vector<std::string> groups;
  for (const auto& g : design.groups) {
    if (g != "(Intercept)" && std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto& g : groups) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (design.groups[static_cast<std::size_t>(j)] != g) keep.push_back(j);
    }
    Eigen::MatrixXd Xr(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) Xr.col(static_cast<Eigen::Index>(j)) = design.X.col(keep[j]);
    const double rss_r = least_squares(Xr, y).rss;
    Omnibus o;
    o.group = g;
    o.df = static_cast<std::size_t>(p) - keep.size();
    const double extra = std::max(0.0, rss_r - fit.rss);
    if (exact) {
      const bool moved = extra > kZeroResidual * static_cast<double>(n);
      o.F = moved ? std::numeric_limits<double>::infinity() : 0.0;
      o.p = moved ? 0.0 : 1.0;
    } else {
      o.F = (extra / static_cast<double>(o.df)) / t.residual_variance;
      o.p = 1.0 - f_cdf(o.F, static_cast<double>(o.df), dof);
    }
    t.omnibus.push_back(o);
  }
  return t;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(Errc::InvalidDof, "incomplete beta needs a, b > 0");
  if (std::isnan(x)) return x;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  // Modified Lentz evaluation of the continued fraction.
  auto cf = [](double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
      const double m2 = 2.0 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < eps) break;
    }
    return h;
  };
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * cf(a, b, x) / a;
  return 1.0 - front * cf(b, a, 1.0 - x) / b;
}

double t_cdf(double x, double dof) {
  if (!(dof >= 1.0)) throw Error(Errc::InvalidDof, "t distribution needs dof >= 1");
  if (std::isnan(x)) return x;
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  if (x == 0.0) return 0.5;
  const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, dof / (dof + x * x));
  return x > 0.0 ? 1.0 - tail : tail;
}

double f_cdf(double x, double d1, double d2) {
  if (!(d1 >= 1.0) || !(d2 >= 1.0)) throw Error(Errc::InvalidDof, "F distribution needs dofs >= 1");
  if (std::isnan(x)) return x;
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

AnovaTable run_anova(const ResultsTable& results, TargetKind dependent, const AnovaSpec& spec) {
  if (spec.factors.empty() && !spec.interaction) throw Error(Errc::InvalidConfig, "ANOVA needs at least one factor");
  std::vector<ResultsRow> rows;
  for (const auto& r : results.rows()) {
    if (r.variable != dependent) continue;
    if (!std::isfinite(r.rmse)) continue;  // failed cells carry no RMSE
    if (spec.exclude_diverged && (r.diverged || r.collision)) continue;
    rows.push_back(r);
  }
  const Design design = dummy_encode(rows, spec.factors, spec.interaction);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // A zero RMSE has no logarithm; floor it instead of dropping the row.
    y[static_cast<Eigen::Index>(i)] = spec.log_rmse ? std::log(std::max(rows[i].rmse, 1e-12)) : rows[i].rmse;
  }
  AnovaTable t = ols_fit(design, y);
  t.dependent = std::string(spec.log_rmse ? "log RMSE(" : "RMSE(") + std::string(to_string(dependent)) + ")";
  std::string formula = t.dependent + " ~ 1";
  for (Factor f : spec.factors) formula += " + " + std::string(to_string(f));
  if (spec.interaction) {
    formula += " + " + std::string(to_string(spec.interaction->first)) + ":" +
               std::string(to_string(spec.interaction->second));
  }
  t.formula = formula;
  return t;
}

std::string to_csv(const AnovaTable& table) {
  using detail::format_double;
  std::ostringstream out;
  out << "kind,term,coefficient,std_error,t,p,significant,df\n";
  for (const auto& term : table.terms) {
    out << "coefficient,\"" << term.label << "\"," << format_double(term.coefficient) << ','
        << format_double(term.std_error) << ',' << format_double(term.t) << ',' << format_double(term.p)
        << ',' << (term.significant ? 1 : 0) << ',' << table.df_residual << '\n';
  }
  for (const auto& o : table.omnibus) {
    out << "omnibus,\"" << o.group << "\",,," << format_double(o.F) << ',' << format_double(o.p) << ','
        << (o.p < 0.05 ? 1 : 0) << ',' << o.df << '\n';
  }
  return out.str();
}

std::string to_svg(const AnovaTable& table) {
  std::vector<std::string> labels;
  std::vector<double> p;
  for (std::size_t i = 1; i < table.terms.size(); ++i) {
    labels.push_back(table.terms[i].label);
    p.push_back(table.terms[i].p);
  }
  return svg::cross_plot(table.formula, labels, p, 0.05);
}

}  // namespace cfb::anova
