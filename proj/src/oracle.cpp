#include "mvspec/oracle.hpp"

#include <cmath>
#include <numbers>

#include "mvspec/whittle.hpp"

namespace mvspec {

Eigen::MatrixXd dense_cov_matrix(const std::vector<QuasiMaternParams>& params, const CoherenceMatrix& rho,
                                 Eigen::Index n1, Eigen::Index n2) {
  const int m = static_cast<int>(params.size());
  if (m == 0) throw InputError("dense_cov_matrix: no elements");
  if (rho.size() != m) throw InputError("dense_cov_matrix: rho dimension mismatch");
  const Eigen::Index n = n1 * n2;
  if (n1 < 1 || n2 < 1 || m * n > kDenseSizeLimit)
    throw InputError("dense_cov_matrix: M * N exceeds " + std::to_string(kDenseSizeLimit));

  const double delta = params.front().delta;
  const auto grid = fourier_grid(n1, n2, delta);
  std::vector<Eigen::MatrixXd> f(m);
  for (int k = 0; k < m; ++k) f[k] = density_grid(params[k], grid);

  // covariance at each periodic lag, by direct summation
  const auto lag_table = [&](int a, int b) {
    Eigen::MatrixXd table(n1, n2);
    double max_imag = 0.0, scale = 0.0;
    for (Eigen::Index h1 = 0; h1 < n1; ++h1)
      for (Eigen::Index h2 = 0; h2 < n2; ++h2) {
        std::complex<double> sum = 0.0;
        for (Eigen::Index j1 = 0; j1 < n1; ++j1)
          for (Eigen::Index j2 = 0; j2 < n2; ++j2) {
            const double phase = 2.0 * std::numbers::pi * (double(j1 * h1) / n1 + double(j2 * h2) / n2);
            const double fab = rho(a, b) * std::sqrt(f[a](j1, j2) * f[b](j1, j2));
            sum += std::polar(fab, phase);
          }
        table(h1, h2) = sum.real();
        max_imag = std::max(max_imag, std::abs(sum.imag()));
        scale = std::max(scale, std::abs(sum));
      }
    if (max_imag > 1e-10 * std::max(1.0, scale)) throw NumericalError("dense covariance has an imaginary part");
    return table;
  };

  Eigen::MatrixXd cov(m * n, m * n);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      const auto table = lag_table(a, b);
      for (Eigen::Index s = 0; s < n; ++s)
        for (Eigen::Index t = 0; t < n; ++t) {
          const Eigen::Index h1 = ((s / n2 - t / n2) % n1 + n1) % n1;
          const Eigen::Index h2 = ((s % n2 - t % n2) % n2 + n2) % n2;
          cov(a * n + s, b * n + t) = table(h1, h2);
          cov(b * n + t, a * n + s) = table(h1, h2);
        }
    }
  return (0.5 * (cov + cov.transpose())).eval();
}

Eigen::VectorXd stack_lattice(const MultiLattice& data) {
  const Eigen::Index n1 = data.rows(), n2 = data.cols(), n = n1 * n2;
  Eigen::VectorXd z(data.elements() * n);
  for (int k = 0; k < data.elements(); ++k)
    for (Eigen::Index i = 0; i < n1; ++i)
      for (Eigen::Index j = 0; j < n2; ++j) z[k * n + i * n2 + j] = data.values[k](i, j);
  return z;
}

double dense_loglik(const MultiLattice& data, const Eigen::MatrixXd& cov) {
  const Eigen::VectorXd z = stack_lattice(data);
  if (cov.rows() != z.size() || cov.cols() != z.size()) throw InputError("dense_loglik: shape mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("dense_loglik: covariance is not positive definite");
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double quad = z.dot(llt.solve(z));
  return -0.5 * (log_det + quad) - 0.5 * double(z.size()) * std::log(2.0 * std::numbers::pi);
}

OracleReport compare_likelihoods(const MultiLattice& data, const std::vector<QuasiMaternParams>& params,
                                 const CoherenceMatrix& rho, OracleOptions options) {
  data.validate();
  OracleReport r;
  r.elements = data.elements();
  r.n1 = data.rows();
  r.n2 = data.cols();
  const double n = double(r.n1 * r.n2);
  const double mn = double(r.elements) * n;

  const auto tapered = apply_taper(data, options.taper_r);
  const auto ctx = WhittleContext::build(tapered);
  r.whittle = whittle_loglik_mvt(ctx, params, rho);
  r.dense = dense_loglik(data, dense_cov_matrix(params, rho, r.n1, r.n2));
  r.constant = options.wrong_constant ? -0.5 * mn * std::log(2.0 * std::numbers::pi)
                                      : -0.5 * mn * std::log(2.0 * std::numbers::pi * n);
  r.abs_discrepancy = std::abs(r.whittle + r.constant - r.dense);
  r.rel_discrepancy = r.abs_discrepancy / std::max(std::abs(r.dense), 1e-300);
  r.exact = options.taper_r == 0.0;
  r.pass = r.exact && r.rel_discrepancy <= options.tolerance;
  return r;
}

OracleInstance random_oracle_instance(Rng& rng, int m, Eigen::Index max_n) {
  if (m < 1 || max_n < 2) throw InputError("random_oracle_instance: need m >= 1 and max_n >= 2");
  std::uniform_int_distribution<Eigen::Index> side(2, max_n);
  std::uniform_real_distribution<double> s2(0.5, 3.0), al(0.2, 5.0);
  OracleInstance out;
  const Eigen::Index n1 = side(rng), n2 = side(rng);
  for (int k = 0; k < m; ++k) out.params.push_back({s2(rng), al(rng), 1.0});

  Eigen::MatrixXd b(m, m + 1);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = std_normal(rng);
  Eigen::MatrixXd s = b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd inv_sd = s.diagonal().cwiseSqrt().cwiseInverse();
  s = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
  s.diagonal().setOnes();
  out.rho = CoherenceMatrix(0.5 * (s + s.transpose()));

  out.data.delta = 1.0;
  for (int k = 0; k < m; ++k) {
    Eigen::MatrixXd z(n1, n2);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = std_normal(rng);
    out.data.labels.push_back("Z" + std::to_string(k + 1));
    out.data.values.push_back(z);
  }
  return out;
}

}  // namespace mvspec
