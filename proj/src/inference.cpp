#include "mvspec/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace mvspec {

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Mean via running update: exact when every value is identical.
double running_mean(const std::vector<double>& v) {
  double mean = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) mean += (v[k] - mean) / double(k + 1);
  return mean;
}

struct Band {
  double mean, lo, hi;
};

Band band(const std::vector<double>& draws, double level) {
  const double tail = (1.0 - level) / 2.0;
  return {running_mean(draws), empirical_quantile(draws, tail), empirical_quantile(draws, 1.0 - tail)};
}

}  // namespace

Eigen::VectorXd cond_coefficients(const Eigen::MatrixXd& rho, int j) {
  const int m = static_cast<int>(rho.rows());
  if (j < 0 || j >= m) throw InputError("cond_coefficients: target index out of range");
  if (m == 1) return Eigen::VectorXd(0);
  std::vector<int> rest;
  for (int k = 0; k < m; ++k)
    if (k != j) rest.push_back(k);
  Eigen::MatrixXd minor(m - 1, m - 1);
  Eigen::VectorXd cross(m - 1);
  for (int a = 0; a < m - 1; ++a) {
    cross[a] = rho(j, rest[a]);
    for (int b = 0; b < m - 1; ++b) minor(a, b) = rho(rest[a], rest[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(minor);
  if (llt.info() != Eigen::Success) throw NumericalError("cond_coefficients: singular minor");
  // row vector rho[j,-j] minor^{-1}; minor is symmetric
  return llt.solve(cross);
}

double empirical_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (double(values.size()) - 1.0) * prob;
  const auto k = static_cast<std::size_t>(std::floor(h));
  if (k + 1 >= values.size()) return values.back();
  return values[k] + (h - double(k)) * (values[k + 1] - values[k]);
}

ChainSummary summarize_chain(const PosteriorChain& chain, const FourierGrid& grid, SummaryOptions options) {
  if (chain.size() == 0) throw InputError("summarize_chain: empty chain");
  if (!(options.level > 0.0 && options.level < 1.0)) throw InputError("credible level must lie in (0, 1)");
  const int m = chain.elements;
  const int lag_max = options.lag_max < 0 ? static_cast<int>(std::min(grid.n1, grid.n2) / 2) : options.lag_max;
  if (lag_max >= grid.n1) throw InputError("lag_max exceeds the lattice");

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < m; ++a) pairs.emplace_back(a, a);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) pairs.emplace_back(a, b);

  const auto draws = static_cast<std::size_t>(chain.size());
  // curve_draws[pair][lag][draw]
  std::vector<std::vector<std::vector<double>>> curve_draws(
      pairs.size(), std::vector<std::vector<double>>(lag_max + 1, std::vector<double>(draws)));
  std::vector<std::vector<std::vector<double>>> coef_draws(
      m, std::vector<std::vector<double>>(std::max(m - 1, 0), std::vector<double>(draws)));

  std::vector<Eigen::MatrixXd> f(m);
  for (std::size_t d = 0; d < draws; ++d) {
    const auto p = chain.draw(static_cast<Eigen::Index>(d), grid.delta);
    for (int k = 0; k < m; ++k) f[k] = density_grid({p.sigma2[k], p.alpha[k], grid.delta}, grid);
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const auto [a, b] = pairs[q];
      const Eigen::MatrixXd table = cov_lag_table(f[a], f[b], a == b ? 1.0 : p.rho(a, b));
      for (int h = 0; h <= lag_max; ++h) curve_draws[q][h][d] = table(h, 0);
    }
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd c = cond_coefficients(p.rho, j);
      for (int k = 0; k < m - 1; ++k) coef_draws[j][k][d] = c[k];
    }
  }

  ChainSummary out;
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    CovCurveSummary s;
    s.m = pairs[q].first;
    s.m2 = pairs[q].second;
    for (int h = 0; h <= lag_max; ++h) {
      const auto b = band(curve_draws[q][h], options.level);
      s.lags.push_back(h * grid.delta);
      s.mean.push_back(b.mean);
      s.lo.push_back(b.lo);
      s.hi.push_back(b.hi);
    }
    out.curves.push_back(std::move(s));
  }
  for (int j = 0; j < m; ++j) {
    CondCoefSummary s;
    s.target = j;
    for (int k = 0, r = 0; k < m; ++k) {
      if (k == j) continue;
      const auto b = band(coef_draws[j][r++], options.level);
      s.regressors.push_back(k);
      s.mean.push_back(b.mean);
      s.lo.push_back(b.lo);
      s.hi.push_back(b.hi);
    }
    out.coefficients.push_back(std::move(s));
  }
  return out;
}

DependenceGraph build_graph(const std::vector<CondCoefSummary>& coefs, const std::vector<std::string>& labels) {
  const int m = static_cast<int>(labels.size());
  if (static_cast<int>(coefs.size()) != m) throw InputError("build_graph: need one coefficient summary per element");

  // interval[a][b]: summary of the coefficient on b when a is the target
  struct Entry {
    double mean = 0, lo = 0, hi = 0;
    bool present = false;
  };
  std::vector<std::vector<Entry>> table(m, std::vector<Entry>(m));
  for (const auto& s : coefs) {
    if (s.target < 0 || s.target >= m) throw InputError("build_graph: target index out of range");
    for (std::size_t k = 0; k < s.regressors.size(); ++k)
      table[s.target][s.regressors[k]] = {s.mean[k], s.lo[k], s.hi[k], true};
  }

  DependenceGraph g;
  g.nodes = labels;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const auto& ab = table[a][b];
      const auto& ba = table[b][a];
      if (!ab.present || !ba.present) throw InputError("build_graph: missing coefficient for a pair");
      const auto excludes_zero = [](const Entry& e) { return e.lo > 0.0 || e.hi < 0.0; };
      if (!excludes_zero(ab) || !excludes_zero(ba)) continue;
      if ((ab.mean > 0.0) != (ba.mean > 0.0)) {
        const std::string msg = "sign disagreement between " + labels[a] + " and " + labels[b] + "; no edge";
        std::clog << "warning: " << msg << "\n";
        g.warnings.push_back(msg);
        continue;
      }
      g.edges.push_back({a, b, ab.mean > 0.0 ? '+' : '-'});
    }
  }
  return g;
}

std::string to_dot(const DependenceGraph& graph) {
  std::ostringstream out;
  out << "graph dependence {\n";
  for (const auto& n : graph.nodes) out << "  \"" << n << "\";\n";
  for (const auto& e : graph.edges)
    out << "  \"" << graph.nodes[e.a] << "\" -- \"" << graph.nodes[e.b] << "\" [label=\"" << e.sign << "\"];\n";
  out << "}\n";
  return out.str();
}

void export_graph(const DependenceGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write graph file " + path.string());
  out << to_dot(graph);
  if (!out) throw InputError("write failed for " + path.string());
}

void write_curve_csv(const std::vector<CovCurveSummary>& curves, const std::vector<std::string>& labels,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "pair,lag,mean,lo,hi\n";
  for (const auto& c : curves) {
    const std::string pair = labels.at(c.m) + ":" + labels.at(c.m2);
    for (std::size_t h = 0; h < c.lags.size(); ++h)
      out << pair << ',' << num(c.lags[h]) << ',' << num(c.mean[h]) << ',' << num(c.lo[h]) << ',' << num(c.hi[h])
          << '\n';
  }
  if (!out) throw InputError("write failed for " + path.string());
}

void write_coefficient_csv(const std::vector<CondCoefSummary>& coefs, const std::vector<std::string>& labels,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "target,regressor,mean,lo,hi\n";
  for (const auto& s : coefs)
    for (std::size_t k = 0; k < s.regressors.size(); ++k)
      out << labels.at(s.target) << ',' << labels.at(s.regressors[k]) << ',' << num(s.mean[k]) << ','
          << num(s.lo[k]) << ',' << num(s.hi[k]) << '\n';
  if (!out) throw InputError("write failed for " + path.string());
}

CoefficientTable read_coefficient_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open coefficient file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("target,regressor,mean,lo,hi", 0) != 0)
    throw InputError(path.string() + ": missing coefficient header");

  struct Row {
    std::string target, regressor;
    double mean, lo, hi;
  };
  std::vector<Row> rows;
  CoefficientTable table;
  std::map<std::string, int> index;
  const auto intern = [&](const std::string& label) {
    auto it = index.find(label);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(table.labels.size());
    index.emplace(label, id);
    table.labels.push_back(label);
    return id;
  };
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw InputError(path.string() + ": line " + std::to_string(lineno) + " needs 5 fields");
    Row r{cells[0], cells[1], 0, 0, 0};
    double* dst[] = {&r.mean, &r.lo, &r.hi};
    for (int k = 0; k < 3; ++k) {
      const auto& c = cells[2 + k];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), *dst[k]);
      if (ec != std::errc() || ptr != c.data() + c.size())
        throw InputError(path.string() + ": malformed number on line " + std::to_string(lineno));
    }
    intern(r.target);
    rows.push_back(r);
  }
  for (const auto& r : rows) intern(r.regressor);

  table.coefficients.resize(table.labels.size());
  for (std::size_t k = 0; k < table.labels.size(); ++k) table.coefficients[k].target = static_cast<int>(k);
  for (const auto& r : rows) {
    auto& s = table.coefficients[index.at(r.target)];
    s.regressors.push_back(index.at(r.regressor));
    s.mean.push_back(r.mean);
    s.lo.push_back(r.lo);
    s.hi.push_back(r.hi);
  }
  return table;
}

}  // namespace mvspec
