#include <doctest.h>

#include <cmath>
#include <fstream>

#include "mvspec/gridio.hpp"
#include "support/tempdir.hpp"

using namespace mvspec;
using testsupport::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("manifest with two 2x2 grids loads") {
  TempDir dir;
  write_text(dir.path / "a.csv", "1,2\n3,4\n");
  write_text(dir.path / "b.csv", "5,6\n7,8\n");
  write_text(dir.path / "manifest.json",
             R"({"delta": 1.0, "elements": [{"label": "As", "file": "a.csv"}, {"label": "Fe", "file": "b.csv"}]})");
  const auto d = load_multilattice(dir.path / "manifest.json");
  CHECK(d.elements() == 2);
  CHECK(d.rows() == 2);
  CHECK(d.cols() == 2);
  CHECK(d.labels[1] == "Fe");
  CHECK(d.values[1](1, 0) == 7.0);
}

TEST_CASE("shape mismatch between elements is rejected") {
  TempDir dir;
  write_text(dir.path / "a.csv", "1,2\n3,4\n");
  write_text(dir.path / "b.csv", "1,2\n3,4\n5,6\n");
  write_text(dir.path / "manifest.json",
             R"({"delta": 1.0, "elements": [{"label": "A", "file": "a.csv"}, {"label": "B", "file": "b.csv"}]})");
  CHECK_THROWS_AS(load_multilattice(dir.path / "manifest.json"), InputError);
}

TEST_CASE("ragged or non-numeric csv rows are rejected") {
  TempDir dir;
  write_text(dir.path / "ragged.csv", "1,2\n3\n");
  write_text(dir.path / "text.csv", "1,x\n3,4\n");
  CHECK_THROWS_AS(read_csv_matrix(dir.path / "ragged.csv"), InputError);
  CHECK_THROWS_AS(read_csv_matrix(dir.path / "text.csv"), InputError);
}

TEST_CASE("five 35x45 elements round-trip through the manifest writer") {
  TempDir dir;
  MultiLattice d;
  for (int m = 0; m < 5; ++m) {
    d.labels.push_back("E" + std::to_string(m));
    d.values.push_back(Eigen::MatrixXd::Random(35, 45));
  }
  write_multilattice(d, dir.path);
  const auto back = load_multilattice(dir.path / "manifest.json");
  CHECK(back.elements() == 5);
  CHECK(back.size() == 1575);
  for (int m = 0; m < 5; ++m) CHECK(back.values[m] == d.values[m]);
}

TEST_CASE("preprocess centers and log-transforms") {
  MultiLattice d;
  d.labels = {"c", "e"};
  d.values = {Eigen::MatrixXd::Constant(2, 2, 2.5), Eigen::MatrixXd(2, 2)};
  d.values[1] << std::exp(1.0), std::exp(3.0), std::exp(1.0), std::exp(3.0);
  const auto c = preprocess(d, false, true);
  CHECK(c.values[0].cwiseAbs().maxCoeff() == 0.0);
  const auto l = preprocess(d, true, true);
  CHECK(l.values[1](0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(l.values[1](0, 1) == doctest::Approx(1.0).epsilon(1e-14));

  d.values[1](0, 0) = -1.0;
  CHECK_THROWS_AS(preprocess(d, true, false), InputError);
}

TEST_CASE("centering an arsenic-like layer with log-mean 7.23") {
  MultiLattice d;
  d.labels = {"As"};
  Eigen::MatrixXd z = Eigen::MatrixXd::Random(35, 45) * 0.3;
  z.array() += 7.23 - z.mean();
  d.values = {z.array().exp().matrix()};
  const auto c = preprocess(d, true, true);
  CHECK(std::abs(c.values[0].mean()) < 1e-14);
}

TEST_CASE("taper weights") {
  const auto w = taper_weights(10, 0.2);
  CHECK(std::abs(w[0]) < 1e-15);
  CHECK(w[5] == 1.0);
  CHECK(taper_weights(7, 0.0) == Eigen::VectorXd::Ones(7));
  CHECK_THROWS_AS(taper_weights(10, 1.0), InputError);
  CHECK_THROWS_AS(taper_weights(10, -0.1), InputError);
  CHECK(taper_weights<float>(10, 0.2f).size() == 10);
}

TEST_CASE("taper adjustment matches independent sums") {
  CHECK(make_taper(10, 10, 0.2).adjustment == doctest::Approx(81.0).epsilon(1e-12));
  // independent direct summation of the 35x45, r = 0.1 window
  CHECK(make_taper(35, 45, 0.1).adjustment == doctest::Approx(1382.6763113249222).epsilon(1e-12));
  CHECK(make_taper(6, 9, 0.0).adjustment == 54.0);
}

TEST_CASE("zero taper leaves data unchanged and a 10 percent taper zeroes the corners") {
  MultiLattice d;
  d.labels = {"a"};
  d.values = {Eigen::MatrixXd::Random(35, 45)};
  const auto same = apply_taper(d, 0.0);
  CHECK(same.data.values[0] == d.values[0]);
  CHECK(same.taper.adjustment == 1575.0);
  const auto t = apply_taper(d, 0.10);
  CHECK(std::abs(t.data.values[0](0, 0)) < 1e-15);
  CHECK(std::abs(t.data.values[0](0, 44)) < 1e-15);
  CHECK(std::abs(t.data.values[0](34, 0)) < 1e-15);
}
