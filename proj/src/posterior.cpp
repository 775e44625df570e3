#include "mvspec/posterior.hpp"

#include <cmath>
#include <limits>

namespace mvspec {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<QuasiMaternParams> ModelParams::spectral() const {
  std::vector<QuasiMaternParams> out;
  for (int m = 0; m < elements(); ++m) out.push_back({sigma2[m], alpha[m], delta});
  return out;
}

ModelParams ModelParams::initial(int m, double delta) {
  ModelParams p;
  p.alpha = Eigen::VectorXd::Ones(m);
  p.sigma2 = Eigen::VectorXd::Ones(m);
  p.rho = Eigen::MatrixXd::Identity(m, m);
  p.s2 = 1.0;
  p.nu0 = 2;
  p.sigma02 = 1.0;
  p.delta = delta;
  return p;
}

void PriorConfig::validate() const {
  if (!(s2_shape > 0 && s2_rate > 0 && sigma02_shape > 0 && sigma02_rate > 0 && nu0_rate > 0))
    throw InputError("prior hyperparameters must be positive");
  if (nu0_max < 1) throw InputError("nu0_max must be >= 1");
}

double log_prior(const ModelParams& p, const PriorConfig& cfg) {
  const int m_count = p.elements();
  if (p.sigma2.size() != m_count || p.rho.rows() != m_count) return kNegInf;
  if (!(p.s2 > 0.0) || !(p.sigma02 > 0.0) || p.nu0 < 1 || p.nu0 > cfg.nu0_max) return kNegInf;
  if (!CoherenceMatrix::is_valid(p.rho)) return kNegInf;

  double lp = 0.0;
  for (int m = 0; m < m_count; ++m) {
    if (!(p.alpha[m] > 0.0) || !(p.sigma2[m] > 0.0)) return kNegInf;
    lp += log_half_normal_pdf(p.alpha[m], p.s2);
    lp += sigma2_prior(p.nu0, p.sigma02).log_pdf(p.sigma2[m]);
  }
  lp += InverseGamma{cfg.s2_shape, cfg.s2_rate}.log_pdf(p.s2);
  lp += InverseGamma{cfg.sigma02_shape, cfg.sigma02_rate}.log_pdf(p.sigma02);
  lp += -cfg.nu0_rate * p.nu0;
  return lp;
}

double log_posterior(const ModelParams& p, const WhittleContext& ctx, const PriorConfig& cfg) {
  const double lp = log_prior(p, cfg);
  if (!std::isfinite(lp)) return kNegInf;
  return lp + whittle_loglik_mvt(ctx, p.spectral(), CoherenceMatrix(p.rho));
}

InverseGamma s2_full_conditional(const Eigen::VectorXd& alphas, const PriorConfig& cfg) {
  return {cfg.s2_shape + alphas.size() / 2.0, cfg.s2_rate + alphas.squaredNorm() / 2.0};
}

DiscreteDistribution nu0_full_conditional(const Eigen::VectorXd& sigma2s, double sigma02, const PriorConfig& cfg) {
  const double sum_log = sigma2s.array().log().sum();
  const double sum_inv = sigma2s.array().inverse().sum();
  const double m_count = double(sigma2s.size());
  Eigen::VectorXd log_mass(cfg.nu0_max);
  for (int nu0 = 1; nu0 <= cfg.nu0_max; ++nu0) {
    const double h = nu0 / 2.0;
    log_mass[nu0 - 1] = -cfg.nu0_rate * nu0 + m_count * (h * std::log(h * sigma02) - std::lgamma(h)) -
                        (h + 1.0) * sum_log - h * sigma02 * sum_inv;
  }
  return DiscreteDistribution::from_log_mass(1, log_mass);
}

GeneralizedInverseGaussian sigma02_full_conditional(const Eigen::VectorXd& sigma2s, int nu0, const PriorConfig& cfg) {
  const double m_count = double(sigma2s.size());
  return {m_count * nu0 / 2.0 - cfg.sigma02_shape, nu0 * sigma2s.array().inverse().sum(), 2.0 * cfg.sigma02_rate};
}

}  // namespace mvspec
