#include "mvspec/spectrum.hpp"

#include <unsupported/Eigen/FFT>

#include <string>

namespace mvspec {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd axis_frequencies(Eigen::Index n, double delta) {
  Eigen::VectorXd w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // 2 pi j / n wrapped into (-pi, pi]; j <= n/2 stays put
    const double idx = (2 * j <= n) ? double(j) : double(j) - double(n);
    w[j] = 2.0 * kPi * idx / (double(n) * delta);
  }
  return w;
}

// In-place 1-D transforms along every column, then every row.
template <bool Forward>
void fft2_inplace(Eigen::MatrixXcd& a) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<std::complex<double>> in, out;
  in.resize(a.rows());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) in[r] = a(r, c);
    if constexpr (Forward) fft.fwd(out, in); else fft.inv(out, in);
    for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = out[r];
  }
  in.resize(a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) in[c] = a(r, c);
    if constexpr (Forward) fft.fwd(out, in); else fft.inv(out, in);
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = out[c];
  }
}

}  // namespace

std::vector<Frequency> FourierGrid::frequencies() const {
  std::vector<Frequency> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index j1 = 0; j1 < n1; ++j1)
    for (Eigen::Index j2 = 0; j2 < n2; ++j2) out.push_back(omega(j1, j2));
  return out;
}

FourierGrid fourier_grid(Eigen::Index n1, Eigen::Index n2, double delta) {
  if (n1 < 2 || n2 < 2) throw InputError("fourier_grid: dimensions must be >= 2");
  if (!(delta > 0.0)) throw InputError("fourier_grid: delta must be positive");
  return FourierGrid{n1, n2, delta, axis_frequencies(n1, delta), axis_frequencies(n2, delta)};
}

void QuasiMaternParams::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InputError("quasi-Matern sigma2 must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("quasi-Matern alpha must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InputError("quasi-Matern delta must be positive");
}

QuasiMaternParams make_quasi_matern(double sigma2, double alpha, double delta, double nu) {
  if (nu != QuasiMaternParams::nu) throw InputError("quasi-Matern smoothness is fixed at nu = 1");
  QuasiMaternParams p{sigma2, alpha, delta};
  p.validate();
  return p;
}

double quasi_matern_sd(const QuasiMaternParams& p, const Frequency& omega) {
  const double bound = kPi / p.delta * (1.0 + 1e-12);
  if (std::abs(omega[0]) > bound || std::abs(omega[1]) > bound)
    throw InputError("quasi_matern_sd: frequency outside the principal domain");
  return quasi_matern_sd(p.sigma2, p.alpha, p.delta, omega[0], omega[1]);
}

Eigen::MatrixXd density_grid(const QuasiMaternParams& p, const FourierGrid& grid) {
  Eigen::MatrixXd f(grid.n1, grid.n2);
  for (Eigen::Index j1 = 0; j1 < grid.n1; ++j1)
    for (Eigen::Index j2 = 0; j2 < grid.n2; ++j2)
      f(j1, j2) = quasi_matern_sd(p.sigma2, p.alpha, p.delta, grid.omega1[j1], grid.omega2[j2]);
  return f;
}

bool CoherenceMatrix::is_valid(const Eigen::MatrixXd& rho) {
  if (rho.rows() == 0 || rho.rows() != rho.cols() || !rho.allFinite()) return false;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    if (rho(i, i) != 1.0) return false;
    for (Eigen::Index j = 0; j < i; ++j) {
      if (rho(i, j) != rho(j, i) || !(std::abs(rho(i, j)) < 1.0)) return false;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(rho);
  return llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all();
}

CoherenceMatrix::CoherenceMatrix(Eigen::MatrixXd rho) : rho_(std::move(rho)) {
  if (!is_valid(rho_))
    throw InputError("coherence matrix rho must be a symmetric positive-definite correlation matrix");
  llt_.compute(rho_);
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double cross_sd(const QuasiMaternParams& pm, const QuasiMaternParams& pm2, double rho_mm2, const Frequency& omega) {
  if (!(std::abs(rho_mm2) <= 1.0)) throw InputError("cross_sd: |rho| must not exceed 1");
  return rho_mm2 * std::sqrt(quasi_matern_sd(pm, omega) * quasi_matern_sd(pm2, omega));
}

Eigen::MatrixXd spectral_matrix(const std::vector<QuasiMaternParams>& params, const CoherenceMatrix& rho,
                                const Frequency& omega) {
  if (static_cast<int>(params.size()) != rho.size())
    throw InputError("spectral_matrix: parameter count does not match coherence dimension");
  Eigen::VectorXd root(rho.size());
  for (int m = 0; m < rho.size(); ++m) root[m] = std::sqrt(quasi_matern_sd(params[m], omega));
  return root.asDiagonal() * rho.matrix() * root.asDiagonal();
}

Eigen::MatrixXcd dft2(const Eigen::MatrixXd& lattice) {
  if (!lattice.allFinite()) throw InputError("dft2: lattice contains non-finite values");
  Eigen::MatrixXcd a = lattice.cast<std::complex<double>>();
  fft2_inplace<true>(a);
  a /= double(lattice.size());
  return a;
}

Eigen::MatrixXcd inverse_dft2(const Eigen::MatrixXcd& coefficients) {
  Eigen::MatrixXcd a = coefficients;
  fft2_inplace<false>(a);
  return a;
}

Eigen::MatrixXd cov_lag_table(const Eigen::MatrixXd& fm, const Eigen::MatrixXd& fm2, double rho) {
  const Eigen::MatrixXcd cross = (rho * (fm.array() * fm2.array()).sqrt()).matrix().cast<std::complex<double>>();
  const Eigen::MatrixXcd c = inverse_dft2(cross);
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if (c.imag().cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NumericalError("cov_lag_table: covariance has a non-negligible imaginary part");
  return c.real();
}

Eigen::MatrixXd cov_lag_table(const QuasiMaternParams& pm, const QuasiMaternParams& pm2, double rho,
                              const FourierGrid& grid) {
  return cov_lag_table(density_grid(pm, grid), density_grid(pm2, grid), rho);
}

std::vector<double> cov_curve(const QuasiMaternParams& pm, const QuasiMaternParams& pm2, double rho,
                              const FourierGrid& grid, const std::vector<Lag>& lags) {
  for (const auto& h : lags) {
    if (std::abs(h[0]) >= grid.n1 || std::abs(h[1]) >= grid.n2)
      throw InputError("cov_curve: lag (" + std::to_string(h[0]) + "," + std::to_string(h[1]) + ") out of range");
  }
  const Eigen::MatrixXd table = cov_lag_table(pm, pm2, rho, grid);
  std::vector<double> out;
  out.reserve(lags.size());
  for (const auto& h : lags) {
    const auto i = (h[0] % grid.n1 + grid.n1) % grid.n1;
    const auto j = (h[1] % grid.n2 + grid.n2) % grid.n2;
    out.push_back(table(i, j));
  }
  return out;
}

std::vector<Lag> axis_lags(int h_max) {
  std::vector<Lag> lags;
  for (int h = 0; h <= h_max; ++h) lags.push_back({h, 0});
  return lags;
}

}  // namespace mvspec
