#include "mvspec/whittle.hpp"

#include <cmath>
#include <limits>

namespace mvspec {

WhittleContext WhittleContext::build(const MultiLattice& tapered, double adjustment, WhittleOptions options) {
  tapered.validate();
  if (!(adjustment > 0.0)) throw InputError("taper adjustment must be positive");

  WhittleContext ctx;
  ctx.grid_ = fourier_grid(tapered.rows(), tapered.cols(), tapered.delta);
  ctx.options_ = options;
  ctx.adjustment_ = adjustment;

  const double n = double(tapered.size());
  const double scale = std::sqrt(n / adjustment);
  ctx.spectra_.adjustment_corrected = true;
  for (const auto& z : tapered.values) ctx.spectra_.coefficients.push_back(dft2(z) * scale);

  const auto& g = ctx.grid_;
  for (Eigen::Index j1 = 0; j1 < g.n1; ++j1)
    for (Eigen::Index j2 = 0; j2 < g.n2; ++j2)
      if (!(options.exclude_dc && j1 == 0 && j2 == 0)) ctx.used_index_.push_back(j1 * g.n2 + j2);

  const auto used = static_cast<Eigen::Index>(ctx.used_index_.size());
  const int m_count = tapered.elements();
  ctx.sin2_.resize(used);
  ctx.coeffs_.resize(m_count, used);
  for (Eigen::Index k = 0; k < used; ++k) {
    const auto j1 = ctx.used_index_[k] / g.n2;
    const auto j2 = ctx.used_index_[k] % g.n2;
    ctx.sin2_[k] = lattice_sin2(g.omega1[j1], g.omega2[j2], g.delta);
    for (int m = 0; m < m_count; ++m) ctx.coeffs_(m, k) = ctx.spectra_.coefficients[m](j1, j2);
  }

  ctx.cross_.resize(used, m_count * m_count);
  for (int m = 0; m < m_count; ++m) {
    for (int m2 = m; m2 < m_count; ++m2) {
      const Eigen::VectorXd p = (ctx.coeffs_.row(m).array() * ctx.coeffs_.row(m2).array().conjugate()).real();
      ctx.cross_.col(m * m_count + m2) = p;
      ctx.cross_.col(m2 * m_count + m) = p;
    }
  }
  return ctx;
}

WhittleContext WhittleContext::build(const TaperedLattice& tapered, WhittleOptions options) {
  return build(tapered.data, tapered.taper.adjustment, options);
}

double whittle_loglik_uni(const Eigen::MatrixXcd& F, const QuasiMaternParams& p, const FourierGrid& grid,
                          bool exclude_dc) {
  if (F.rows() != grid.n1 || F.cols() != grid.n2) throw InputError("whittle_loglik_uni: shape mismatch");
  p.validate();
  double total = 0.0;
  for (Eigen::Index j1 = 0; j1 < grid.n1; ++j1) {
    for (Eigen::Index j2 = 0; j2 < grid.n2; ++j2) {
      if (exclude_dc && j1 == 0 && j2 == 0) continue;
      const double f = quasi_matern_sd(p.sigma2, p.alpha, p.delta, grid.omega1[j1], grid.omega2[j2]);
      if (!(f > 0.0)) throw NumericalError("whittle_loglik_uni: non-positive spectral density");
      total += std::log(f) + std::norm(F(j1, j2)) / f;
    }
  }
  return -0.5 * total;
}

double whittle_loglik_mvt(const WhittleContext& ctx, const std::vector<QuasiMaternParams>& params,
                          const CoherenceMatrix& rho) {
  const int m_count = ctx.elements();
  if (static_cast<int>(params.size()) != m_count || rho.size() != m_count)
    throw InputError("whittle_loglik_mvt: parameter dimension does not match the data");
  const auto used = ctx.used();
  if (used == 0) throw InputError("whittle_loglik_mvt: empty frequency set");

  Eigen::MatrixXd re(m_count, used), im(m_count, used);
  double sum_log_f = 0.0;
  const auto& g = ctx.grid();
  for (int m = 0; m < m_count; ++m) {
    params[m].validate();
    for (Eigen::Index k = 0; k < used; ++k) {
      const auto j1 = ctx.used_index()[k] / g.n2;
      const auto j2 = ctx.used_index()[k] % g.n2;
      const double f = quasi_matern_sd(params[m].sigma2, params[m].alpha, params[m].delta, g.omega1[j1], g.omega2[j2]);
      if (!(f > 0.0)) throw NumericalError("whittle_loglik_mvt: non-positive spectral density");
      sum_log_f += std::log(f);
      const double inv_root = 1.0 / std::sqrt(f);
      re(m, k) = ctx.coefficients()(m, k).real() * inv_root;
      im(m, k) = ctx.coefficients()(m, k).imag() * inv_root;
    }
  }

  const Eigen::MatrixXd w_re = rho.llt().solve(re);
  const Eigen::MatrixXd w_im = rho.llt().solve(im);
  // v^* rho^{-1} v summed over frequencies
  const double quad_re = re.cwiseProduct(w_re).sum() + im.cwiseProduct(w_im).sum();
  const double quad_im = re.cwiseProduct(w_im).sum() - im.cwiseProduct(w_re).sum();
  if (std::abs(quad_im) > 1e-8 * std::max(1.0, std::abs(quad_re)))
    throw NumericalError("whittle_loglik_mvt: quadratic form is not real");

  return -0.5 * (double(used) * rho.log_det() + sum_log_f + quad_re);
}

double loglik_directional_derivative(const WhittleContext& ctx, const std::vector<QuasiMaternParams>& params,
                                     const CoherenceMatrix& rho, const ParamDirection& direction, double eps) {
  const int m_count = static_cast<int>(params.size());
  const auto shifted = [&](double t) {
    std::vector<QuasiMaternParams> p = params;
    for (int m = 0; m < m_count; ++m) {
      if (direction.log_sigma2.size()) p[m].sigma2 *= std::exp(t * direction.log_sigma2[m]);
      if (direction.log_alpha.size()) p[m].alpha *= std::exp(t * direction.log_alpha[m]);
    }
    Eigen::MatrixXd r = rho.matrix();
    if (direction.rho.size()) {
      r += t * direction.rho;
      r.diagonal().setOnes();
    }
    if (!CoherenceMatrix::is_valid(r)) throw InputError("perturbation leaves the positive-definite domain");
    return whittle_loglik_mvt(ctx, p, CoherenceMatrix(r));
  };
  return (shifted(eps) - shifted(-eps)) / (2.0 * eps);
}

LikelihoodCache::LikelihoodCache(const WhittleContext& ctx, const std::vector<QuasiMaternParams>& params,
                                 const CoherenceMatrix& rho)
    : ctx_(&ctx), params_(params), rho_(rho) {
  const int m_count = ctx.elements();
  if (static_cast<int>(params.size()) != m_count || rho.size() != m_count)
    throw InputError("LikelihoodCache: parameter dimension does not match the data");
  if (ctx.used() == 0) throw InputError("LikelihoodCache: empty frequency set");
  sigma2_.resize(m_count);
  root_.resize(ctx.used(), m_count);
  sum_log_h_.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    params[m].validate();
    sigma2_[m] = params[m].sigma2;
    fill_root(params[m].alpha, root_.col(m), sum_log_h_[m]);
  }
  moments_.resize(m_count, m_count);
  for (int m = 0; m < m_count; ++m)
    for (int m2 = m; m2 < m_count; ++m2)
      moments_(m, m2) = moments_(m2, m) =
          (ctx.cross_periodogram(m, m2).array() * root_.col(m).array() * root_.col(m2).array()).sum();
  loglik_ = evaluate(sigma2_, sum_log_h_, moments_, rho_.llt(), rho_.log_det());
}

void LikelihoodCache::fill_root(double alpha, Eigen::Ref<Eigen::VectorXd> u, double& sum_log_h) const {
  const double a = alpha / ctx_->grid().delta;
  // (sigma2 / f)^{1/2} = base^{(nu+1)/2}, which is the base itself for nu = 1
  static_assert(QuasiMaternParams::nu == 1.0);
  u = (1.0 + a * a * ctx_->sin2().array()).matrix();
  sum_log_h = -2.0 * u.array().log().sum();
}

double LikelihoodCache::evaluate(const Eigen::VectorXd& sigma2, const Eigen::VectorXd& sum_log_h,
                                 const Eigen::MatrixXd& moments, const Eigen::LLT<Eigen::MatrixXd>& llt,
                                 double log_det) const {
  const double n = double(ctx_->used());
  const Eigen::VectorXd inv_sd = sigma2.array().rsqrt();
  const Eigen::MatrixXd s = inv_sd.asDiagonal() * moments * inv_sd.asDiagonal();
  const double quad = llt.solve(s).trace();
  const double log_f = n * sigma2.array().log().sum() + sum_log_h.sum();
  return -0.5 * (n * log_det + log_f + quad);
}

double LikelihoodCache::propose_alpha(int m, double alpha) {
  staged_m_ = m;
  staged_alpha_ = alpha;
  staged_root_.resize(ctx_->used());
  fill_root(alpha, staged_root_, staged_sum_log_h_);
  const int m_count = ctx_->elements();
  staged_row_.resize(m_count);
  for (int k = 0; k < m_count; ++k) {
    const auto p = ctx_->cross_periodogram(m, k).array() * staged_root_.array();
    staged_row_[k] = (k == m) ? (p * staged_root_.array()).sum() : (p * root_.col(k).array()).sum();
  }
  Eigen::MatrixXd moments = moments_;
  moments.row(m) = staged_row_.transpose();
  moments.col(m) = staged_row_;
  Eigen::VectorXd sum_log_h = sum_log_h_;
  sum_log_h[m] = staged_sum_log_h_;
  staged_loglik_ = evaluate(sigma2_, sum_log_h, moments, rho_.llt(), rho_.log_det());
  return staged_loglik_;
}

void LikelihoodCache::accept_alpha() {
  if (staged_m_ < 0) throw std::logic_error("accept_alpha without a staged proposal");
  const int m = staged_m_;
  root_.col(m) = staged_root_;
  sum_log_h_[m] = staged_sum_log_h_;
  moments_.row(m) = staged_row_.transpose();
  moments_.col(m) = staged_row_;
  params_[m].alpha = staged_alpha_;
  loglik_ = staged_loglik_;
  staged_m_ = -1;
}

double LikelihoodCache::loglik_with_sigma2(int m, double sigma2) const {
  Eigen::VectorXd s = sigma2_;
  s[m] = sigma2;
  return evaluate(s, sum_log_h_, moments_, rho_.llt(), rho_.log_det());
}

void LikelihoodCache::set_sigma2(int m, double sigma2) {
  sigma2_[m] = sigma2;
  params_[m].sigma2 = sigma2;
  loglik_ = evaluate(sigma2_, sum_log_h_, moments_, rho_.llt(), rho_.log_det());
}

double LikelihoodCache::loglik_with_rho(const Eigen::MatrixXd& rho) const {
  Eigen::LLT<Eigen::MatrixXd> llt(rho);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const auto diag = llt.matrixLLT().diagonal();
  if (!(diag.array() > 0.0).all()) return -std::numeric_limits<double>::infinity();
  return evaluate(sigma2_, sum_log_h_, moments_, llt, 2.0 * diag.array().log().sum());
}

void LikelihoodCache::set_rho(const CoherenceMatrix& rho) {
  rho_ = rho;
  loglik_ = evaluate(sigma2_, sum_log_h_, moments_, rho_.llt(), rho_.log_det());
}

}  // namespace mvspec
