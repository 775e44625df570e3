#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mvspec/gridio.hpp"
#include "mvspec/rng.hpp"
#include "mvspec/spectrum.hpp"

namespace mvspec {

/// Largest M * n1 * n2 the dense builder accepts.
inline constexpr Eigen::Index kDenseSizeLimit = 4096;

/// Dense covariance from the discrete Fourier sum, element-major with
/// row-major sites: entry ((m, s), (m', s')) = sum_j exp(i w_j.(s - s')) f_mm'(w_j).
Eigen::MatrixXd dense_cov_matrix(const std::vector<QuasiMaternParams>& params, const CoherenceMatrix& rho,
                                 Eigen::Index n1, Eigen::Index n2);

/// Data stacked in the same element-major, row-major order.
Eigen::VectorXd stack_lattice(const MultiLattice& data);

/// -1/2 (log det S + z' S^{-1} z) - (MN/2) log 2 pi.
double dense_loglik(const MultiLattice& data, const Eigen::MatrixXd& cov);

struct OracleReport {
  int elements = 0;
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  double whittle = 0.0;
  double dense = 0.0;
  /// Added to the Whittle value before comparing.
  double constant = 0.0;
  double abs_discrepancy = 0.0;
  double rel_discrepancy = 0.0;
  /// False when tapered; no verdict is given then.
  bool exact = true;
  bool pass = false;
};

struct OracleOptions {
  double taper_r = 0.0;
  double tolerance = 1e-9;
  /// Debug: use (MN/2) log 2 pi, dropping the log N term.
  bool wrong_constant = false;
};

OracleReport compare_likelihoods(const MultiLattice& data, const std::vector<QuasiMaternParams>& params,
                                 const CoherenceMatrix& rho, OracleOptions options = {});

struct OracleInstance {
  MultiLattice data;
  std::vector<QuasiMaternParams> params;
  CoherenceMatrix rho;
};

/// Random small instance: n1, n2 in [2, max_n], sigma2 in (0.5, 3),
/// alpha in (0.2, 5), rho a random correlation matrix, standard normal data.
OracleInstance random_oracle_instance(Rng& rng, int m, Eigen::Index max_n = 6);

}  // namespace mvspec
