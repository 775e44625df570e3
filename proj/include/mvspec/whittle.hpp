#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mvspec/gridio.hpp"
#include "mvspec/spectrum.hpp"

namespace mvspec {

struct WhittleOptions {
  /// Drop omega = (0,0) from every frequency sum.
  bool exclude_dc = false;
};

/// Immutable spectral summary of a (tapered) lattice: DFT coefficients
/// scaled by sqrt(N / adjustment), the lattice sin^2 term at each used
/// frequency, and the real cross-periodograms Re(F_m conj(F_m')).
/// Shared read-only between chains.
class WhittleContext {
 public:
  /// `tapered` is the taper-weighted data; `adjustment` the taper's
  /// prod_d sum_j w_d(j)^2 (n1 * n2 when untapered).
  static WhittleContext build(const MultiLattice& tapered, double adjustment, WhittleOptions options = {});
  static WhittleContext build(const TaperedLattice& tapered, WhittleOptions options = {});

  const FourierGrid& grid() const { return grid_; }
  const SpectralField& spectra() const { return spectra_; }
  int elements() const { return static_cast<int>(spectra_.coefficients.size()); }
  double adjustment() const { return adjustment_; }
  const WhittleOptions& options() const { return options_; }

  /// Number of frequencies entering the sums (N, or N - 1 without DC).
  Eigen::Index used() const { return sin2_.size(); }
  /// Row-major (j1, j2) index of every used frequency.
  const std::vector<Eigen::Index>& used_index() const { return used_index_; }
  /// sin^2(delta w1/2) + sin^2(delta w2/2) per used frequency.
  const Eigen::VectorXd& sin2() const { return sin2_; }
  /// Used coefficients, one row per element.
  const Eigen::MatrixXcd& coefficients() const { return coeffs_; }
  /// Column m * M + m2 holds Re(F_m conj(F_m2)) over the used frequencies.
  const Eigen::MatrixXd& cross_periodogram() const { return cross_; }
  auto cross_periodogram(int m, int m2) const { return cross_.col(m * elements() + m2); }

 private:
  FourierGrid grid_;
  SpectralField spectra_;
  WhittleOptions options_;
  double adjustment_ = 0.0;
  std::vector<Eigen::Index> used_index_;
  Eigen::VectorXd sin2_;
  Eigen::MatrixXcd coeffs_;
  Eigen::MatrixXd cross_;
};

/// -1/2 sum_j [log f(w_j) + |F_j|^2 / f(w_j)] with F from dft2 (optionally
/// adjustment-corrected). Exact Gaussian log-likelihood under the
/// block-circulant covariance plus (N/2) log(2 pi N).
double whittle_loglik_uni(const Eigen::MatrixXcd& F, const QuasiMaternParams& p, const FourierGrid& grid,
                          bool exclude_dc = false);

/// -1/2 [N log det rho + sum_j sum_m log f_m(w_j) + sum_j v_j^* rho^{-1} v_j],
/// v_j = diag(f^{-1/2}(w_j)) F(Z_j). One Cholesky of rho per call.
double whittle_loglik_mvt(const WhittleContext& ctx, const std::vector<QuasiMaternParams>& params,
                          const CoherenceMatrix& rho);

/// Perturbation direction in (log sigma2, log alpha, rho off-diagonals).
struct ParamDirection {
  Eigen::VectorXd log_sigma2;
  Eigen::VectorXd log_alpha;
  /// Symmetric with zero diagonal.
  Eigen::MatrixXd rho;
};

/// Central finite-difference directional derivative of whittle_loglik_mvt.
/// Throws InputError when a perturbed point leaves the valid domain.
double loglik_directional_derivative(const WhittleContext& ctx, const std::vector<QuasiMaternParams>& params,
                                     const CoherenceMatrix& rho, const ParamDirection& direction,
                                     double eps = 1e-5);

/// Incremental evaluator for the sampler. Holds, for the current
/// (sigma2, alpha), the element-wise inverse root densities and the
/// frequency-summed quadratic moments T_{mm'} = sum_j P_{mm'}(j) u_m(j) u_m'(j)
/// with u = (sigma2 / f)^{1/2}. Changing alpha_m costs O(M N); changing
/// sigma2 or rho costs O(M^3).
class LikelihoodCache {
 public:
  LikelihoodCache(const WhittleContext& ctx, const std::vector<QuasiMaternParams>& params,
                  const CoherenceMatrix& rho);

  double loglik() const { return loglik_; }
  const std::vector<QuasiMaternParams>& params() const { return params_; }
  const CoherenceMatrix& rho() const { return rho_; }

  /// sum_j |F_j^(m)|^2 (sigma2_m / f_m(w_j)) at the current alpha_m.
  double quadratic_moment(int m) const { return moments_(m, m); }
  /// sum_j Re P_{mm'}(j) u_m(j) u_m'(j), the cross analogue.
  double moment(int m, int m2) const { return moments_(m, m2); }

  /// Log-likelihood if alpha_m were `alpha`; stages the candidate.
  double propose_alpha(int m, double alpha);
  /// Commits the most recently staged alpha.
  void accept_alpha();

  double loglik_with_sigma2(int m, double sigma2) const;
  void set_sigma2(int m, double sigma2);

  /// -infinity when `rho` is not positive definite.
  double loglik_with_rho(const Eigen::MatrixXd& rho) const;
  void set_rho(const CoherenceMatrix& rho);

 private:
  double evaluate(const Eigen::VectorXd& sigma2, const Eigen::VectorXd& sum_log_h, const Eigen::MatrixXd& moments,
                  const Eigen::LLT<Eigen::MatrixXd>& llt, double log_det) const;
  void fill_root(double alpha, Eigen::Ref<Eigen::VectorXd> u, double& sum_log_h) const;

  const WhittleContext* ctx_;
  std::vector<QuasiMaternParams> params_;
  CoherenceMatrix rho_;
  Eigen::VectorXd sigma2_;
  Eigen::MatrixXd root_;  // used x M
  Eigen::VectorXd sum_log_h_;
  Eigen::MatrixXd moments_;
  double loglik_ = 0.0;

  int staged_m_ = -1;
  double staged_alpha_ = 0.0;
  double staged_sum_log_h_ = 0.0;
  Eigen::VectorXd staged_root_;
  Eigen::VectorXd staged_row_;
  double staged_loglik_ = 0.0;
};

}  // namespace mvspec
