#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "mvspec/gridio.hpp"
#include "mvspec/spectrum.hpp"

namespace mvspec {

struct SimConfig {
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  double delta = 1.0;
  std::vector<QuasiMaternParams> params;
  CoherenceMatrix rho;
  std::vector<std::string> labels;
  std::uint64_t seed = 1;
  int replicates = 1;

  int elements() const { return static_cast<int>(params.size()); }
  void validate() const;
};

/// Exact circulant spectral synthesis: Z(s) = sum_j exp(i w_j . s) Zhat_j
/// with Hermitian-paired complex Gaussian increments of covariance
/// f(w_j) = diag(f^{1/2}) rho diag(f^{1/2}). Replicate r uses RNG stream r.
std::vector<MultiLattice> simulate_field(const SimConfig& cfg);

/// The deterministic synthesis map applied to M N standard normals.
MultiLattice simulate_from_noise(const SimConfig& cfg, const Eigen::VectorXd& noise);

/// Matrix of the synthesis map: column k is simulate_from_noise(e_k),
/// rows ordered element-major with row-major sites. Its Gram matrix A A'
/// is the implied field covariance.
Eigen::MatrixXd simulation_map(const SimConfig& cfg);

/// Monte Carlo c_{m,m'}(h): mean over replicates and all periodic site
/// pairs of Z_m(s) Z_m'(s + h).
double empirical_cov(const std::vector<MultiLattice>& replicates, int m, int m2, const Lag& h);

/// Per-replicate estimates behind empirical_cov, for Monte Carlo error bars.
std::vector<double> empirical_cov_by_replicate(const std::vector<MultiLattice>& replicates, int m, int m2,
                                               const Lag& h);

}  // namespace mvspec
