#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "mvspec/error.hpp"

namespace mvspec {

/// M aligned real-valued n1 x n2 grids sharing a spacing delta.
struct MultiLattice {
  double delta = 1.0;
  std::vector<std::string> labels;
  std::vector<Eigen::MatrixXd> values;

  Eigen::Index rows() const { return values.empty() ? 0 : values.front().rows(); }
  Eigen::Index cols() const { return values.empty() ? 0 : values.front().cols(); }
  Eigen::Index size() const { return rows() * cols(); }
  int elements() const { return static_cast<int>(values.size()); }

  /// Throws InputError unless shapes agree, n1, n2 >= 2, M >= 1 and all
  /// values are finite.
  void validate() const;
};

/// Reads a manifest `{"delta": d, "elements": [{"label": l, "file": f}, ...]}`
/// with one headerless CSV matrix per element. Paths resolve relative to the
/// manifest.
MultiLattice load_multilattice(const std::filesystem::path& manifest_path);

/// Writes `manifest.json` and one CSV per element into `dir`. Numbers use the
/// shortest round-trip representation, so output is byte-stable.
void write_multilattice(const MultiLattice& data, const std::filesystem::path& dir);

Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path);

/// Optional log transform followed by optional per-element mean removal.
MultiLattice preprocess(const MultiLattice& data, bool take_log, bool center);

/// Tukey (cosine) taper evaluated at j = 0/n, ..., (n-1)/n. `r` is the
/// fraction of the unit interval ramped at each boundary.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> taper_weights(Eigen::Index n, Scalar r) {
  if (n < 2) throw InputError("taper_weights: n must be >= 2");
  if (!(r >= Scalar(0) && r < Scalar(1))) throw InputError("taper_weights: r must lie in [0, 1)");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(n);
  if (r == Scalar(0)) return w;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar half = r / Scalar(2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Scalar j = Scalar(k) / Scalar(n);
    if (j < half) {
      w[k] = Scalar(0.5) * (Scalar(1) + std::cos(two_pi / r * (j - half)));
    } else if (j >= Scalar(1) - half) {
      w[k] = Scalar(0.5) * (Scalar(1) + std::cos(two_pi / r * (j - Scalar(1) + half)));
    }
  }
  return w;
}

struct TaperSpec {
  double r = 0.0;
  Eigen::VectorXd weights1;
  Eigen::VectorXd weights2;
  /// prod_d sum_j w_d(j)^2; equals n1 * n2 for r = 0.
  double adjustment = 0.0;
};

TaperSpec make_taper(Eigen::Index n1, Eigen::Index n2, double r);

struct TaperedLattice {
  MultiLattice data;
  TaperSpec taper;
};

TaperedLattice apply_taper(const MultiLattice& data, double r);

}  // namespace mvspec
