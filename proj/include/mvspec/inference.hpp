#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

#include "mvspec/sampler.hpp"
#include "mvspec/spectrum.hpp"

namespace mvspec {

/// Regression weights of element j on the others in the Gaussian
/// conditional: rho[j,-j] rho[-j,-j]^{-1}, ordered by remaining index.
Eigen::VectorXd cond_coefficients(const Eigen::MatrixXd& rho, int j);

struct CovCurveSummary {
  int m = 0;
  int m2 = 0;
  /// Physical distances h * delta.
  std::vector<double> lags;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

struct CondCoefSummary {
  int target = 0;
  std::vector<int> regressors;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

struct SummaryOptions {
  /// Largest axis lag in grid steps; negative means min(n1, n2) / 2.
  int lag_max = -1;
  double level = 0.95;
};

struct ChainSummary {
  /// Marginal curves (m == m2) first, then cross pairs m < m2 lexicographically.
  std::vector<CovCurveSummary> curves;
  std::vector<CondCoefSummary> coefficients;
};

/// Pointwise posterior means and equal-tailed credible bands of every
/// covariance curve along lags (0,0)..(lag_max,0), plus per-draw
/// conditional coefficients for every target element.
ChainSummary summarize_chain(const PosteriorChain& chain, const FourierGrid& grid, SummaryOptions options = {});

/// Type-7 (linear interpolation) empirical quantile of `values`.
double empirical_quantile(std::vector<double> values, double prob);

struct DependenceEdge {
  int a = 0;
  int b = 0;
  char sign = '+';
};

struct DependenceGraph {
  std::vector<std::string> nodes;
  /// a < b, sorted lexicographically.
  std::vector<DependenceEdge> edges;
  std::vector<std::string> warnings;
};

/// Edge (a, b) iff both directed coefficient intervals exclude zero and the
/// two posterior means share a sign.
DependenceGraph build_graph(const std::vector<CondCoefSummary>& coefs, const std::vector<std::string>& labels);

/// Undirected DOT with edge labels "+" and "-"; deterministic ordering.
std::string to_dot(const DependenceGraph& graph);
void export_graph(const DependenceGraph& graph, const std::filesystem::path& path);

/// CSV columns: pair,lag,mean,lo,hi with pair "<label>:<label>".
void write_curve_csv(const std::vector<CovCurveSummary>& curves, const std::vector<std::string>& labels,
                     const std::filesystem::path& path);
/// CSV columns: target,regressor,mean,lo,hi.
void write_coefficient_csv(const std::vector<CondCoefSummary>& coefs, const std::vector<std::string>& labels,
                           const std::filesystem::path& path);

struct CoefficientTable {
  std::vector<std::string> labels;
  std::vector<CondCoefSummary> coefficients;
};
CoefficientTable read_coefficient_csv(const std::filesystem::path& path);

}  // namespace mvspec
