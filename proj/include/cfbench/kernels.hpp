#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cfb {

enum class KernelKind { Rbf, Exponential, RationalQuadratic, Mlp, Matern32, Matern52 };

inline constexpr KernelKind kAllKernels[] = {KernelKind::Rbf,      KernelKind::Exponential,
                                             KernelKind::RationalQuadratic, KernelKind::Mlp,
                                             KernelKind::Matern32, KernelKind::Matern52};

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

/// Covariance function and its hyperparameters.
///
/// Stationary kinds use the scaled distance r = sqrt(sum_i (x_i - y_i)^2 / l_i^2)
/// with either one shared lengthscale or one per input dimension (ARD):
///   RBF                  s2 * exp(-r^2 / 2)
///   Exponential          s2 * exp(-r)
///   RationalQuadratic    s2 * (1 + r^2 / 2)^(-alpha)
///   Matern32             s2 * (1 + sqrt3 r) exp(-sqrt3 r)
///   Matern52             s2 * (1 + sqrt5 r + 5/3 r^2) exp(-sqrt5 r)
/// MLP is the arcsine kernel
///   s2 * 2/pi * asin((w x.y + b) / sqrt((w x.x + b + 1)(w y.y + b + 1)))
/// with w = sigma_w2, b = sigma_b2.
struct KernelConfig {
  KernelKind kind = KernelKind::Matern52;
  double variance = 1.0;
  std::vector<double> lengthscales{1.0};
  double alpha = 1.0;
  double sigma_w2 = 1.0;
  double sigma_b2 = 1.0;

  bool stationary() const noexcept { return kind != KernelKind::Mlp; }

  /// Throws DimensionMismatch if the lengthscales fit neither 1 nor `dim`
  /// inputs, InvalidConfig for non-positive hyperparameters.
  void validate(std::size_t dim) const;

  /// Hyperparameters in log space, in gradient order:
  ///   stationary: variance, lengthscales..., [alpha for RationalQuadratic]
  ///   MLP:        variance, sigma_w2, sigma_b2
  std::vector<double> log_hyperparams() const;
  void set_log_hyperparams(std::span<const double> theta);
  std::vector<std::string> hyperparam_names() const;

  bool operator==(const KernelConfig&) const = default;
};

/// Single evaluation; reference path used by tests against gram().
double eval(const KernelConfig& cfg, std::span<const double> x, std::span<const double> y);

/// K(i, j) = k(X.row(i), Y.row(j)).
Eigen::MatrixXd gram(const KernelConfig& cfg, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Symmetric Gram matrix of one point set (upper triangle mirrored).
Eigen::MatrixXd gram(const KernelConfig& cfg, const Eigen::MatrixXd& X);

/// dK/dtheta_j for each log-hyperparameter, same order as log_hyperparams().
std::vector<Eigen::MatrixXd> grad_log_hyperparams(const KernelConfig& cfg, const Eigen::MatrixXd& X);

}  // namespace cfb
