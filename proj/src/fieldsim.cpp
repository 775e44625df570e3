#include "mvspec/fieldsim.hpp"

#include <cmath>

#include "mvspec/rng.hpp"

namespace mvspec {

void SimConfig::validate() const {
  if (n1 < 2 || n2 < 2) throw InputError("simulation lattice must be at least 2x2");
  if (!(delta > 0.0)) throw InputError("simulation delta must be positive");
  if (params.empty()) throw InputError("simulation needs at least one element");
  for (const auto& p : params) p.validate();
  if (rho.size() != elements()) throw InputError("rho dimension does not match the number of elements");
  if (!labels.empty() && static_cast<int>(labels.size()) != elements())
    throw InputError("label count does not match the number of elements");
  if (replicates < 1) throw InputError("replicate count must be >= 1");
}

MultiLattice simulate_from_noise(const SimConfig& cfg, const Eigen::VectorXd& noise) {
  cfg.validate();
  const int m = cfg.elements();
  const auto n1 = cfg.n1, n2 = cfg.n2;
  if (noise.size() != m * n1 * n2) throw InputError("noise vector must have M * N entries");

  const auto grid = fourier_grid(n1, n2, cfg.delta);
  std::vector<Eigen::MatrixXd> root_f(m);
  for (int k = 0; k < m; ++k) {
    auto p = cfg.params[k];
    p.delta = cfg.delta;
    root_f[k] = density_grid(p, grid).array().sqrt();
  }
  const Eigen::MatrixXd chol = cfg.rho.llt().matrixL();

  std::vector<Eigen::MatrixXcd> spec(m, Eigen::MatrixXcd::Zero(n1, n2));
  Eigen::Index at = 0;
  Eigen::VectorXd scale(m);
  for (Eigen::Index j1 = 0; j1 < n1; ++j1) {
    for (Eigen::Index j2 = 0; j2 < n2; ++j2) {
      const Eigen::Index p1 = (n1 - j1) % n1, p2 = (n2 - j2) % n2;
      const bool self = (p1 == j1 && p2 == j2);
      if (!self && (p1 * n2 + p2) < (j1 * n2 + j2)) continue;  // filled from its partner
      for (int k = 0; k < m; ++k) scale[k] = root_f[k](j1, j2);
      if (self) {
        const Eigen::VectorXd z = scale.asDiagonal() * (chol * noise.segment(at, m));
        at += m;
        for (int k = 0; k < m; ++k) spec[k](j1, j2) = z[k];
      } else {
        const Eigen::VectorXd re = scale.asDiagonal() * (chol * noise.segment(at, m)) / std::sqrt(2.0);
        const Eigen::VectorXd im = scale.asDiagonal() * (chol * noise.segment(at + m, m)) / std::sqrt(2.0);
        at += 2 * m;
        for (int k = 0; k < m; ++k) {
          spec[k](j1, j2) = {re[k], im[k]};
          spec[k](p1, p2) = {re[k], -im[k]};
        }
      }
    }
  }

  MultiLattice out;
  out.delta = cfg.delta;
  for (int k = 0; k < m; ++k) {
    out.labels.push_back(cfg.labels.empty() ? "Z" + std::to_string(k + 1) : cfg.labels[k]);
    const Eigen::MatrixXcd z = inverse_dft2(spec[k]);
    const double size = std::max(1.0, z.cwiseAbs().maxCoeff());
    if (z.imag().cwiseAbs().maxCoeff() > 1e-10 * size)
      throw NumericalError("simulated field has a non-negligible imaginary residue");
    out.values.push_back(z.real());
  }
  return out;
}

std::vector<MultiLattice> simulate_field(const SimConfig& cfg) {
  cfg.validate();
  const auto total = cfg.elements() * cfg.n1 * cfg.n2;
  std::vector<MultiLattice> out;
  Eigen::VectorXd noise(total);
  for (int r = 0; r < cfg.replicates; ++r) {
    auto rng = make_stream(cfg.seed, static_cast<std::uint64_t>(r));
    for (Eigen::Index k = 0; k < total; ++k) noise[k] = std_normal(rng);
    out.push_back(simulate_from_noise(cfg, noise));
  }
  return out;
}

Eigen::MatrixXd simulation_map(const SimConfig& cfg) {
  cfg.validate();
  const int m = cfg.elements();
  const auto n = cfg.n1 * cfg.n2;
  Eigen::MatrixXd a(m * n, m * n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m * n);
  for (Eigen::Index c = 0; c < m * n; ++c) {
    e.setZero();
    e[c] = 1.0;
    const auto field = simulate_from_noise(cfg, e);
    for (int k = 0; k < m; ++k)
      for (Eigen::Index i = 0; i < cfg.n1; ++i)
        for (Eigen::Index j = 0; j < cfg.n2; ++j) a(k * n + i * cfg.n2 + j, c) = field.values[k](i, j);
  }
  return a;
}

std::vector<double> empirical_cov_by_replicate(const std::vector<MultiLattice>& replicates, int m, int m2,
                                               const Lag& h) {
  std::vector<double> out;
  for (const auto& rep : replicates) {
    const auto& a = rep.values.at(m);
    const auto& b = rep.values.at(m2);
    const auto n1 = a.rows(), n2 = a.cols();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n1; ++i)
      for (Eigen::Index j = 0; j < n2; ++j)
        sum += a(i, j) * b(((i + h[0]) % n1 + n1) % n1, ((j + h[1]) % n2 + n2) % n2);
    out.push_back(sum / double(n1 * n2));
  }
  return out;
}

double empirical_cov(const std::vector<MultiLattice>& replicates, int m, int m2, const Lag& h) {
  if (replicates.size() < 2) throw InputError("empirical_cov needs at least two replicates");
  const auto per = empirical_cov_by_replicate(replicates, m, m2, h);
  double sum = 0.0;
  for (double v : per) sum += v;
  return sum / double(per.size());
}

}  // namespace mvspec
