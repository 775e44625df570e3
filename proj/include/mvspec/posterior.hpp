#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mvspec/distributions.hpp"
#include "mvspec/spectrum.hpp"
#include "mvspec/whittle.hpp"

namespace mvspec {

/// Full parameter state of the hierarchical model.
///
///   alpha_m | s2          ~ N(0, s2) truncated to (0, inf)
///   s2                    ~ IG(2, 2)
///   sigma2_m | nu0, sigma02 ~ IG(nu0 / 2, nu0 sigma02 / 2)
///   sigma02               ~ IG(2, 2)
///   p(nu0) propto exp(-nu0), nu0 in {1, ..., nu0_max}
///   p(rho) propto 1 over positive-definite correlation matrices
struct ModelParams {
  Eigen::VectorXd alpha;
  Eigen::VectorXd sigma2;
  Eigen::MatrixXd rho;
  double s2 = 1.0;
  int nu0 = 1;
  double sigma02 = 1.0;
  double delta = 1.0;

  int elements() const { return static_cast<int>(alpha.size()); }
  std::vector<QuasiMaternParams> spectral() const;
  /// Default starting point for M elements: alpha = 1, sigma2 = 1, rho = I,
  /// s2 = 1, nu0 = 2, sigma02 = 1.
  static ModelParams initial(int m, double delta = 1.0);
};

struct PriorConfig {
  double s2_shape = 2.0;
  double s2_rate = 2.0;
  double sigma02_shape = 2.0;
  double sigma02_rate = 2.0;
  /// p(nu0) propto exp(-nu0_rate nu0).
  double nu0_rate = 1.0;
  int nu0_max = 100;

  void validate() const;
};

/// Sum of prior log-densities; -infinity off the support. The nu0 term is
/// -nu0 (unnormalized) and the rho term is 0.
double log_prior(const ModelParams& p, const PriorConfig& cfg);

/// log_prior + whittle_loglik_mvt.
double log_posterior(const ModelParams& p, const WhittleContext& ctx, const PriorConfig& cfg);

/// IG(2 + M/2, 2 + sum alpha^2 / 2). The half-normal truncation constant is
/// exactly 2 for every s2, so the truncation does not enter the conditional.
InverseGamma s2_full_conditional(const Eigen::VectorXd& alphas, const PriorConfig& cfg);

/// Normalized conditional over {1, ..., nu0_max}.
DiscreteDistribution nu0_full_conditional(const Eigen::VectorXd& sigma2s, double sigma02, const PriorConfig& cfg);

/// GIG(p = M nu0/2 - 2, a = nu0 sum sigma_m^{-2}, b = 4) under the default
/// IG(2, 2) hyperprior; in general p = M nu0/2 - shape, b = 2 rate.
GeneralizedInverseGaussian sigma02_full_conditional(const Eigen::VectorXd& sigma2s, int nu0, const PriorConfig& cfg);

/// Prior IG(nu0/2, nu0 sigma02/2) on each sigma2_m.
inline InverseGamma sigma2_prior(int nu0, double sigma02) { return {nu0 / 2.0, nu0 * sigma02 / 2.0}; }

}  // namespace mvspec
