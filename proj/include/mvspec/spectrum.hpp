#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "mvspec/error.hpp"

namespace mvspec {

using Frequency = std::array<double, 2>;
using Lag = std::array<int, 2>;

/// Fourier frequencies of an n1 x n2 lattice with spacing delta, mapped to
/// the principal domain (-pi/delta, pi/delta]. Index (j1, j2) carries
/// omega = (2 pi j1 / (n1 delta), 2 pi j2 / (n2 delta)) after wrapping.
struct FourierGrid {
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  double delta = 1.0;
  Eigen::VectorXd omega1;
  Eigen::VectorXd omega2;

  Eigen::Index size() const { return n1 * n2; }
  Frequency omega(Eigen::Index j1, Eigen::Index j2) const { return {omega1[j1], omega2[j2]}; }
  /// Row-major listing of every frequency pair.
  std::vector<Frequency> frequencies() const;
};

FourierGrid fourier_grid(Eigen::Index n1, Eigen::Index n2, double delta = 1.0);

/// Per-element spectral parameters. The smoothness is fixed at nu = 1.
struct QuasiMaternParams {
  static constexpr double nu = 1.0;

  double sigma2 = 1.0;
  double alpha = 1.0;
  double delta = 1.0;

  void validate() const;
};

/// Rejects any smoothness other than 1.
QuasiMaternParams make_quasi_matern(double sigma2, double alpha, double delta = 1.0, double nu = 1.0);

/// sin^2(delta w1 / 2) + sin^2(delta w2 / 2).
template <typename Scalar>
Scalar lattice_sin2(Scalar w1, Scalar w2, Scalar delta) {
  const Scalar s1 = std::sin(delta * w1 / Scalar(2));
  const Scalar s2 = std::sin(delta * w2 / Scalar(2));
  return s1 * s1 + s2 * s2;
}

/// sigma2 / (1 + (alpha/delta)^2 (sin^2(delta w1/2) + sin^2(delta w2/2)))^(nu+1), nu = 1.
template <typename Scalar>
Scalar quasi_matern_sd(Scalar sigma2, Scalar alpha, Scalar delta, Scalar w1, Scalar w2) {
  const Scalar a = alpha / delta;
  const Scalar base = Scalar(1) + a * a * lattice_sin2(w1, w2, delta);
  return sigma2 / (base * base);
}

/// Checked evaluation; throws InputError when omega leaves [-pi/delta, pi/delta]^2.
double quasi_matern_sd(const QuasiMaternParams& p, const Frequency& omega);

/// Marginal density evaluated over the whole grid, shape n1 x n2.
Eigen::MatrixXd density_grid(const QuasiMaternParams& p, const FourierGrid& grid);

/// Symmetric positive-definite correlation matrix, constant across
/// frequencies. Construction validates the invariants.
class CoherenceMatrix {
 public:
  CoherenceMatrix() = default;
  explicit CoherenceMatrix(Eigen::MatrixXd rho);

  static CoherenceMatrix identity(int m) { return CoherenceMatrix(Eigen::MatrixXd::Identity(m, m)); }
  /// True when `rho` is square, symmetric, unit-diagonal with off-diagonals
  /// in (-1, 1) and Cholesky succeeds.
  static bool is_valid(const Eigen::MatrixXd& rho);

  int size() const { return static_cast<int>(rho_.rows()); }
  const Eigen::MatrixXd& matrix() const { return rho_; }
  double operator()(int i, int j) const { return rho_(i, j); }
  double log_det() const { return log_det_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

 private:
  Eigen::MatrixXd rho_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

/// rho_{m,m'} sqrt(f_m(omega) f_m'(omega)).
double cross_sd(const QuasiMaternParams& pm, const QuasiMaternParams& pm2, double rho_mm2, const Frequency& omega);

/// diag(f^{1/2}(omega)) rho diag(f^{1/2}(omega)).
Eigen::MatrixXd spectral_matrix(const std::vector<QuasiMaternParams>& params, const CoherenceMatrix& rho,
                                const Frequency& omega);

/// F_j = (1/N) sum_s Z(s) exp(-i omega_j . s); exact for any n1, n2.
Eigen::MatrixXcd dft2(const Eigen::MatrixXd& lattice);

/// Inverse of dft2: Z(s) = sum_j F_j exp(i omega_j . s).
Eigen::MatrixXcd inverse_dft2(const Eigen::MatrixXcd& coefficients);

/// DFT coefficients of each element. When `adjustment_corrected` is set the
/// coefficients were scaled by sqrt(N / taper adjustment).
struct SpectralField {
  std::vector<Eigen::MatrixXcd> coefficients;
  bool adjustment_corrected = false;
};

/// c(h) = sum_j exp(i omega_j . h) rho f_{m}^{1/2} f_{m'}^{1/2} at every
/// periodic lag; entry (h1, h2) holds lag (h1 mod n1, h2 mod n2).
Eigen::MatrixXd cov_lag_table(const QuasiMaternParams& pm, const QuasiMaternParams& pm2, double rho,
                              const FourierGrid& grid);

/// Same as cov_lag_table from precomputed density grids.
Eigen::MatrixXd cov_lag_table(const Eigen::MatrixXd& fm, const Eigen::MatrixXd& fm2, double rho);

/// Covariance at the requested integer lags; |h1| < n1 and |h2| < n2.
std::vector<double> cov_curve(const QuasiMaternParams& pm, const QuasiMaternParams& pm2, double rho,
                              const FourierGrid& grid, const std::vector<Lag>& lags);

/// (0,0), (1,0), ..., (h_max,0).
std::vector<Lag> axis_lags(int h_max);

}  // namespace mvspec
