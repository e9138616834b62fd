#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfbench/evaluation.hpp"

namespace cfb::anova {

enum class Factor { Dataset, Model, Target };

inline constexpr Factor kAllFactors[] = {Factor::Dataset, Factor::Model, Factor::Target};

std::string_view to_string(Factor f);
Factor parse_factor(std::string_view name);

using FactorPair = std::pair<Factor, Factor>;

/// Treatment-coded design matrix. Column 0 is the intercept; `groups[j]`
/// names the term a column belongs to ("Dataset", "Model:Target", ...).
struct Design {
  Eigen::MatrixXd X;
  std::vector<std::string> labels;
  std::vector<std::string> groups;
};

/// The alphabetically first level of each factor is the reference. Main
/// columns are labeled "Factor(Level)"; interaction columns are products of
/// main columns labeled "Level1-Level2". Throws SingleLevelFactor.
Design dummy_encode(const std::vector<ResultsRow>& rows, const std::vector<Factor>& factors,
                    const std::optional<FactorPair>& interaction);

struct Term {
  std::string label;
  double coefficient = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool significant = false;  // p < 0.05
};

/// Nested-model F test for dropping one term group.
struct Omnibus {
  std::string group;
  std::size_t df = 0;
  double F = 0.0;
  double p = 1.0;
};

struct AnovaTable {
  std::string dependent;
  std::string formula;
  std::vector<Term> terms;  // intercept first
  std::vector<Omnibus> omnibus;
  std::size_t n = 0;
  std::size_t df_residual = 0;
  double residual_variance = 0.0;
  double r_squared = 0.0;
  Eigen::VectorXd fitted;
};

/// Residual variance below this counts as an exact fit.
inline constexpr double kZeroResidual = 1e-12;

/// Least squares by column-pivoted QR with two-sided t p-values on n - p
/// degrees of freedom. Throws TooFewRows and PerfectCollinearity.
AnovaTable ols_fit(const Design& design, const Eigen::VectorXd& y);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

/// Student t and Fisher F CDFs; InvalidDof when a dof is below 1.
double t_cdf(double x, double dof);
double f_cdf(double x, double d1, double d2);

struct AnovaSpec {
  std::vector<Factor> factors{std::begin(kAllFactors), std::end(kAllFactors)};
  std::optional<FactorPair> interaction;
  bool log_rmse = false;          // analyze log(RMSE) instead of RMSE
  bool exclude_diverged = false;  // drop rows flagged diverged or collision
};

/// Fits RMSE of the `dependent` variable against the requested factors.
AnovaTable run_anova(const ResultsTable& results, TargetKind dependent, const AnovaSpec& spec);

/// Columns: term, coefficient, std_error, t, p, significant; omnibus rows follow
/// with kind "omnibus".
std::string to_csv(const AnovaTable& table);

/// p-value per non-intercept term with the 0.05 line.
std::string to_svg(const AnovaTable& table);

}  // namespace cfb::anova
