#include <doctest.h>

#include <cmath>

#include "mvspec/fieldsim.hpp"
#include "mvspec/oracle.hpp"
#include "support/tempdir.hpp"

using namespace mvspec;

namespace {

SimConfig two_element(Eigen::Index n1, Eigen::Index n2, double rho12, std::uint64_t seed, int reps) {
  SimConfig s;
  s.n1 = n1;
  s.n2 = n2;
  s.params = {make_quasi_matern(1.0, 2.0), make_quasi_matern(1.5, 1.2)};
  Eigen::MatrixXd r(2, 2);
  r << 1, rho12, rho12, 1;
  s.rho = CoherenceMatrix(r);
  s.seed = seed;
  s.replicates = reps;
  return s;
}

}  // namespace

TEST_CASE("synthesis map covariance equals the dense covariance") {
  for (auto [n1, n2] : {std::pair<int, int>{8, 8}, {5, 6}, {3, 4}}) {
    const auto s = two_element(n1, n2, 0.6, 1, 1);
    const Eigen::MatrixXd a = simulation_map(s);
    const Eigen::MatrixXd implied = a * a.transpose();
    const Eigen::MatrixXd dense = dense_cov_matrix(s.params, s.rho, n1, n2);
    CHECK((implied - dense).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("simulation is deterministic per seed and replicate") {
  const auto a = simulate_field(two_element(6, 7, 0.3, 4, 3));
  const auto b = simulate_field(two_element(6, 7, 0.3, 4, 3));
  REQUIRE(a.size() == 3);
  CHECK(a[2].values[1] == b[2].values[1]);
  CHECK(a[0].values[0] != a[1].values[0]);
  CHECK(a[0].labels == std::vector<std::string>{"Z1", "Z2"});
}

TEST_CASE("single-site mean is zero within four standard errors") {
  SimConfig s;
  s.n1 = s.n2 = 4;
  s.params = {make_quasi_matern(1.0, 1.0)};
  s.rho = CoherenceMatrix::identity(1);
  s.replicates = 10000;
  s.seed = 5;
  const auto reps = simulate_field(s);
  double sum = 0.0, sq = 0.0;
  for (const auto& r : reps) {
    sum += r.values[0](1, 2);
    sq += r.values[0](1, 2) * r.values[0](1, 2);
  }
  const double mean = sum / 10000, sd = std::sqrt(sq / 10000 - mean * mean);
  CHECK(std::abs(mean) < 4 * sd / 100);
}

TEST_CASE("empirical covariance at small lags within three standard errors") {
  const auto s = two_element(8, 8, 0.6, 6, 200);
  const auto reps = simulate_field(s);
  const auto grid = fourier_grid(8, 8);
  for (auto [a, b] : {std::pair<int, int>{0, 0}, {1, 1}, {0, 1}}) {
    const auto exact = cov_curve(s.params[a], s.params[b], s.rho(a, b), grid, {{0, 0}, {1, 0}, {0, 1}});
    int k = 0;
    for (Lag h : {Lag{0, 0}, Lag{1, 0}, Lag{0, 1}}) {
      const auto per = empirical_cov_by_replicate(reps, a, b, h);
      double mean = 0.0, sq = 0.0;
      for (double v : per) mean += v / per.size();
      for (double v : per) sq += (v - mean) * (v - mean);
      const double se = std::sqrt(sq / (per.size() - 1) / per.size());
      CHECK(std::abs(mean - exact[k++]) < 3 * se);
    }
  }
}

TEST_CASE("empirical covariance edge cases") {
  MultiLattice zero;
  zero.labels = {"a"};
  zero.values = {Eigen::MatrixXd::Zero(4, 4)};
  CHECK(empirical_cov({zero, zero}, 0, 0, {1, 0}) == 0.0);
  CHECK_THROWS_AS(empirical_cov({zero}, 0, 0, {0, 0}), InputError);

  SimConfig s;
  s.n1 = s.n2 = 8;
  s.params = {make_quasi_matern(2.0, 1e-9)};
  s.rho = CoherenceMatrix::identity(1);
  s.replicates = 400;
  s.seed = 8;
  const auto v = empirical_cov(simulate_field(s), 0, 0, {0, 0});
  CHECK(v == doctest::Approx(64 * 2.0).epsilon(0.05));
}

TEST_CASE("empirical covariance converges with 10^4 replicates on 8x8") {
  auto s = two_element(8, 8, 0.6, 9, 10000);
  const auto reps = simulate_field(s);
  const auto exact = cov_curve(s.params[0], s.params[1], 0.6, fourier_grid(8, 8), {{1, 0}});
  CHECK(empirical_cov(reps, 0, 1, {1, 0}) == doctest::Approx(exact[0]).epsilon(0.03));
}

TEST_CASE("written fields load back through gridio") {
  testsupport::TempDir dir;
  auto s = two_element(5, 9, 0.2, 10, 1);
  s.labels = {"As", "Fe"};
  const auto f = simulate_field(s).front();
  write_multilattice(f, dir.path);
  const auto back = load_multilattice(dir.path / "manifest.json");
  CHECK(back.labels == s.labels);
  CHECK(back.values[1] == f.values[1]);
}

TEST_CASE("invalid simulation configs") {
  auto s = two_element(8, 8, 0.2, 1, 1);
  s.replicates = 0;
  CHECK_THROWS_AS(simulate_field(s), InputError);
  s = two_element(8, 8, 0.2, 1, 1);
  s.rho = CoherenceMatrix::identity(3);
  CHECK_THROWS_AS(simulate_field(s), InputError);
  s = two_element(8, 8, 0.2, 1, 1);
  CHECK_THROWS_AS(simulate_from_noise(s, Eigen::VectorXd::Zero(10)), InputError);
}
