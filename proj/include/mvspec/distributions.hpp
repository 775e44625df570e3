#pragma once

#include <Eigen/Dense>

#include "mvspec/error.hpp"
#include "mvspec/rng.hpp"

namespace mvspec {

/// IG(shape, rate): density rate^shape / Gamma(shape) x^{-shape-1} exp(-rate / x).
struct InverseGamma {
  double shape = 1.0;
  double rate = 1.0;

  double log_pdf(double x) const;
  double mode() const { return rate / (shape + 1.0); }
  double sample(Rng& rng) const;
};

/// Generalized inverse Gaussian, density proportional to
/// x^{p-1} exp(-(a x + b / x) / 2) on x > 0.
struct GeneralizedInverseGaussian {
  double p = 1.0;
  double a = 1.0;
  double b = 1.0;

  /// Log density without the Bessel normalizing constant.
  double log_kernel(double x) const;
  double mode() const;
  /// Ratio-of-uniforms rejection (Hormann & Leydold 2014): mode-shifted
  /// bounding rectangle when the density is far from the origin, plain
  /// rectangle otherwise, and a three-piece envelope for the
  /// non-T-concave corner (p < 1, sqrt(ab) small). a = 0 and b = 0 reduce to
  /// inverse-gamma and gamma draws.
  double sample(Rng& rng) const;
};

/// Probability vector over the consecutive integers first, first + 1, ...
struct DiscreteDistribution {
  int first = 0;
  Eigen::VectorXd prob;

  /// Normalizes unnormalized log masses with log-sum-exp.
  static DiscreteDistribution from_log_mass(int first, const Eigen::VectorXd& log_mass);
  int sample(Rng& rng) const;
  int mode() const;
};

/// Log density of N(0, s2) truncated to (0, inf): log 2 - log sqrt(2 pi s2) - x^2 / (2 s2).
double log_half_normal_pdf(double x, double s2);

/// Gamma(shape, rate) draw.
double sample_gamma(double shape, double rate, Rng& rng);

}  // namespace mvspec
