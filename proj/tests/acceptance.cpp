// One PASS/FAIL line per acceptance criterion. Seeds are fixed here and
// never tuned against outcomes.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "mvspec/fieldsim.hpp"
#include "mvspec/inference.hpp"
#include "mvspec/oracle.hpp"
#include "mvspec/sampler.hpp"
#include "support/kernels.hpp"
#include "support/tempdir.hpp"

using namespace mvspec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  failures += !o.pass;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double column_mean(const PosteriorChain& c, const std::string& name) { return c.draws.col(c.column(name)).mean(); }

std::vector<double> column_values(const PosteriorChain& c, const std::string& name) {
  const auto col = c.draws.col(c.column(name));
  return {col.data(), col.data() + col.size()};
}

Eigen::MatrixXd normalize(const Eigen::MatrixXd& s) {
  const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd r = d.asDiagonal() * s * d.asDiagonal();
  r = (0.5 * (r + r.transpose())).eval();
  r.diagonal().setOnes();
  return r;
}

// Simulate, preprocess with defaults, taper, fit.
PosteriorChain fit_synthetic(const SimConfig& sim, const SamplerConfig& cfg, double taper) {
  const auto field = simulate_field(sim).front();
  const auto ctx = WhittleContext::build(apply_taper(preprocess(field, false, true), taper));
  return run_chain(ctx, ModelParams::initial(sim.elements()), cfg, 0);
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  auto rng = make_stream(1001);
  double worst = 0.0;
  int passed = 0;
  for (int t = 0; t < 25; ++t) {
    const auto inst = random_oracle_instance(rng, 1 + t % 3, 6);
    const auto r = compare_likelihoods(inst.data, inst.params, inst.rho);
    worst = std::max(worst, r.rel_discrepancy);
    passed += r.rel_discrepancy <= 1e-9;
  }
  const double secs = seconds_since(start);
  return {passed == 25 && secs < 5.0,
          fmt("%d/25 trials within 1e-9 relative, worst %.2e, %.3f s (limit 5 s)", passed, worst, secs)};
}

Outcome eigenvalue_diagonalization() {
  const auto p = make_quasi_matern(1.7, 3.2);
  const auto c = dense_cov_matrix({p}, CoherenceMatrix::identity(1), 6, 6);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  const Eigen::MatrixXd f = density_grid(p, fourier_grid(6, 6)) * 36.0;
  std::vector<double> want(f.data(), f.data() + f.size());
  std::sort(want.begin(), want.end());
  double worst = 0.0;
  for (int k = 0; k < 36; ++k) worst = std::max(worst, std::abs(es.eigenvalues()[k] - want[k]));
  return {worst <= 1e-9, fmt("max |eigenvalue - N f| = %.2e (limit 1e-9)", worst)};
}

struct Benchmark {
  SimConfig sim;
  PosteriorChain chain;
  double seconds = 0.0;
};

const Benchmark& recovery_benchmark() {
  static const Benchmark b = [] {
    Benchmark out;
    out.sim.n1 = out.sim.n2 = 64;
    out.sim.params = {make_quasi_matern(1.0, 3.0), make_quasi_matern(2.0, 5.0), make_quasi_matern(0.5, 2.0)};
    Eigen::MatrixXd r(3, 3);
    r << 1, 0.5, 0.2, 0.5, 1, -0.3, 0.2, -0.3, 1;
    out.sim.rho = CoherenceMatrix(r);
    out.sim.seed = 1003;
    const auto start = Clock::now();
    out.chain = fit_synthetic(out.sim, SamplerConfig{}, 0.10);
    out.seconds = seconds_since(start);
    return out;
  }();
  return b;
}

Outcome parameter_recovery() {
  const auto& b = recovery_benchmark();
  const auto& c = b.chain;
  bool ok = c.size() == 8000 && b.seconds <= 900.0;
  std::ostringstream d;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const std::string name = "rho_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
      const auto v = column_values(c, name);
      const double truth = b.sim.rho(i, j), mean = column_mean(c, name);
      const double lo = empirical_quantile(v, 0.025), hi = empirical_quantile(v, 0.975);
      const bool good = lo <= truth && truth <= hi && std::abs(mean - truth) <= 0.10;
      ok = ok && good;
      d << fmt("%s true %.2f mean %.3f [%.3f, %.3f]; ", name.c_str(), truth, mean, lo, hi);
    }
  for (int k = 0; k < 3; ++k) {
    const double truth = b.sim.params[k].alpha, mean = column_mean(c, "alpha_" + std::to_string(k + 1));
    ok = ok && std::abs(mean - truth) <= 0.30 * truth;
    d << fmt("alpha_%d true %.1f mean %.3f; ", k + 1, truth, mean);
  }
  d << fmt("%.1f s (limit 900 s)", b.seconds);
  return {ok, d.str()};
}

Outcome conditional_independence() {
  Eigen::MatrixXd k(4, 4);
  k << 1, -0.4, 0.3, 0, -0.4, 1, -0.35, 0.3, 0.3, -0.35, 1, -0.4, 0, 0.3, -0.4, 1;
  const Eigen::MatrixXd rho = normalize(k.inverse());
  const std::vector<std::string> labels{"A", "B", "C", "D"};
  int omitted = 0, all_signs = 0;
  std::ostringstream d;
  for (int rep = 0; rep < 10; ++rep) {
    SimConfig sim;
    sim.n1 = sim.n2 = 64;
    sim.params = {make_quasi_matern(1.0, 3.0), make_quasi_matern(1.5, 4.0), make_quasi_matern(0.8, 2.5),
                  make_quasi_matern(1.2, 3.5)};
    sim.rho = CoherenceMatrix(rho);
    sim.seed = 1100 + rep;
    const auto chain = fit_synthetic(sim, SamplerConfig{}, 0.10);
    const auto summary = summarize_chain(chain, fourier_grid(64, 64), {1, 0.95});
    const auto g = build_graph(summary.coefficients, labels);
    bool zero_edge = false, signs = true;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        const auto it = std::find_if(g.edges.begin(), g.edges.end(),
                                     [&](const DependenceEdge& e) { return e.a == a && e.b == b; });
        if (k(a, b) == 0.0) {
          zero_edge = zero_edge || it != g.edges.end();
        } else {
          const char want = -k(a, b) > 0 ? '+' : '-';
          signs = signs && it != g.edges.end() && it->sign == want;
        }
      }
    omitted += !zero_edge;
    all_signs += signs;
    d << (zero_edge ? 'x' : '.') << (signs ? '+' : '!');
  }
  return {omitted >= 8 && all_signs >= 8,
          fmt("zero pair omitted in %d/10, all planted edges with correct sign in %d/10 (need 8 each) [%s]", omitted,
              all_signs, d.str().c_str())};
}

Outcome acceptance_rates() {
  const auto& b = recovery_benchmark();
  bool ok = true;
  std::ostringstream d;
  for (int k = 1; k <= 3; ++k) {
    const double a = b.chain.acceptance.at("alpha_" + std::to_string(k));
    ok = ok && a >= 0.3 && a <= 0.5;
    d << fmt("alpha_%d %.3f; ", k, a);
  }
  SimConfig sim;
  sim.n1 = sim.n2 = 64;
  sim.params = {make_quasi_matern(1.0, 3.0)};
  sim.rho = CoherenceMatrix::identity(1);
  sim.seed = 1005;
  const auto chain = fit_synthetic(sim, SamplerConfig{}, 0.10);
  const double s = chain.acceptance.at("sigma2_1");
  ok = ok && std::abs(s - 1.0) <= 1e-12;
  d << fmt("M=1 sigma2 rate %.15f (alpha_1 %.3f)", s, chain.acceptance.at("alpha_1"));
  return {ok, d.str()};
}

Outcome kernel_conditionals() {
  const double s2 = testsupport::s2_kernel_pvalue(10000, 1201);
  const auto h = testsupport::hyper_kernel_pvalues(10000, 1202);
  const double rho = testsupport::rho_kernel_pvalue(10000, 1203);
  const auto sig = testsupport::sigma2_kernel_check(10000, 1204);
  const bool ok = s2 > 0.001 && h.nu0 > 0.001 && h.sigma02 > 0.001 && rho > 0.001 && sig.pvalue > 0.001;
  return {ok, fmt("p-values: s2 KS %.3g, nu0 chi2 %.3g, sigma02 KS %.3g, rho_12 KS %.3g, sigma2 (M=1) KS %.3g "
                  "(reject below 0.001)",
                  s2, h.nu0, h.sigma02, rho, sig.pvalue)};
}

Outcome simulator_exactness() {
  SimConfig s;
  s.n1 = s.n2 = 8;
  s.params = {make_quasi_matern(1.0, 2.0), make_quasi_matern(1.5, 1.2)};
  Eigen::MatrixXd r(2, 2);
  r << 1, 0.6, 0.6, 1;
  s.rho = CoherenceMatrix(r);
  const Eigen::MatrixXd a = simulation_map(s);
  const double gap = ((a * a.transpose()) - dense_cov_matrix(s.params, s.rho, 8, 8)).cwiseAbs().maxCoeff();

  s.seed = 1301;
  s.replicates = 200;
  const auto reps = simulate_field(s);
  const auto grid = fourier_grid(8, 8);
  bool mc = true;
  std::ostringstream d;
  for (auto [m, m2] : {std::pair<int, int>{0, 0}, {1, 1}, {0, 1}}) {
    const double exact = cov_curve(s.params[m], s.params[m2], s.rho(m, m2), grid, {{1, 0}})[0];
    const auto per = empirical_cov_by_replicate(reps, m, m2, {1, 0});
    double mean = 0.0, sq = 0.0;
    for (double v : per) mean += v / per.size();
    for (double v : per) sq += (v - mean) * (v - mean);
    const double se = std::sqrt(sq / (per.size() - 1) / per.size());
    mc = mc && std::abs(mean - exact) <= 3 * se;
    d << fmt("c_%d%d(1,0) %.4f vs %.4f (%.2f SE); ", m + 1, m2 + 1, mean, exact, std::abs(mean - exact) / se);
  }
  d << fmt("map covariance gap %.2e (limit 1e-9)", gap);
  return {gap <= 1e-9 && mc, d.str()};
}

Outcome scaling_contract() {
  const auto time_for = [](Eigen::Index n) {
    SimConfig s;
    s.n1 = s.n2 = n;
    for (int k = 0; k < 5; ++k) s.params.push_back(make_quasi_matern(1.0 + 0.2 * k, 2.0 + k));
    s.rho = CoherenceMatrix::identity(5);
    s.seed = 1002;
    const auto field = simulate_field(s).front();
    std::vector<QuasiMaternParams> ps = s.params;
    double best = 1e300, sink = 0.0;
    for (int rep = 0; rep < 15; ++rep) {
      const auto start = Clock::now();
      const auto ctx = WhittleContext::build(field, double(n * n));
      sink += whittle_loglik_mvt(ctx, ps, s.rho);
      best = std::min(best, seconds_since(start));
    }
    if (!std::isfinite(sink)) throw NumericalError("non-finite likelihood in timing run");
    return best;
  };
  const double t64 = time_for(64), t128 = time_for(128);
  return {t128 <= 6.0 * t64, fmt("64x64 %.2f ms, 128x128 %.2f ms, ratio %.2f (limit 6)", t64 * 1e3, t128 * 1e3,
                                 t128 / t64)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome full_scale_end_to_end() {
  testsupport::TempDir dir;
  nlohmann::json params = nlohmann::json::parse(R"({
    "n1": 35, "n2": 45, "delta": 1.0, "seed": 1401,
    "elements": [
      {"label": "As", "sigma2": 1.0, "alpha": 3.0},
      {"label": "Fe", "sigma2": 2.0, "alpha": 2.0},
      {"label": "Ni", "sigma2": 0.5, "alpha": 4.0},
      {"label": "Cr", "sigma2": 1.5, "alpha": 2.5},
      {"label": "Pb", "sigma2": 1.0, "alpha": 5.0}]})");
  Eigen::MatrixXd k(5, 5);
  k << 1, -0.35, 0.3, 0, 0, -0.35, 1, 0, 0, 0.2, 0.3, 0, 1, 0, 0, 0, 0, 0, 1, -0.3, 0, 0.2, 0, -0.3, 1;
  const Eigen::MatrixXd rho = normalize(k.inverse());
  params["rho"] = nlohmann::json::array();
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd row = rho.row(i).transpose();
    params["rho"].push_back(std::vector<double>(row.data(), row.data() + 5));
  }
  std::ofstream(dir.path / "params.json") << params.dump();

  const auto cli = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) throw std::runtime_error("mvspec " + args[0] + " exited " + std::to_string(code) + ": " + err.str());
  };
  const auto start = Clock::now();
  const auto sim = dir.path / "sim";
  cli({"simulate", "--config", (dir.path / "params.json").string(), "--out", sim.string()});
  std::map<std::string, PosteriorChain> chains;
  for (const std::string taper : {"0.10", "0.05", "0.15"}) {
    const auto out = dir.path / ("fit_" + taper);
    cli({"fit", "--data", (sim / "manifest.json").string(), "--taper", taper, "--seed", "1401", "--out",
         out.string()});
    chains[taper] = read_chain_csv(out / "chain.csv");
  }
  const auto main = dir.path / "fit_0.10";
  cli({"summarize", "--in", main.string(), "--out", main.string()});
  cli({"graph", "--in", main.string(), "--out", main.string()});
  const double secs = seconds_since(start);

  const auto count_pairs = [](const std::string& text) {
    std::set<std::string> pairs;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) pairs.insert(line.substr(0, line.find(',')));
    return pairs.size();
  };
  const auto marginal = count_pairs(slurp(main / "cov_curves.csv"));
  const auto cross = count_pairs(slurp(main / "cross_cov.csv"));
  const auto coefs = read_coefficient_csv(main / "coefficients.csv");
  std::size_t coef_rows = 0;
  for (const auto& c : coefs.coefficients) coef_rows += c.regressors.size();
  const bool dot = slurp(main / "graph.dot").rfind("graph dependence {", 0) == 0;
  const bool bands = slurp(main / "cross_cov.csv").rfind("pair,lag,mean,lo,hi\n", 0) == 0;

  double worst = 0.0;
  for (const auto& name : chain_columns(5))
    if (name.rfind("rho_", 0) == 0)
      for (const std::string t : {"0.05", "0.15"})
        worst = std::max(worst, std::abs(column_mean(chains[t], name) - column_mean(chains["0.10"], name)));

  const bool ok = chains["0.10"].size() == 8000 && marginal == 5 && cross == 10 && coef_rows == 20 && dot && bands &&
                  worst <= 0.05 && secs <= 1800.0;
  return {ok, fmt("%ld draws, %zu marginal + %zu cross curves (bands %s), %zu coefficient rows, DOT %s; max |rho mean shift| "
                  "across 5%%/15%% tapers %.4f (limit 0.05); %.1f s for three fits (limit 1800 s)",
                  long(chains["0.10"].size()), marginal, cross, bands ? "ok" : "missing", coef_rows, dot ? "ok" : "missing", worst, secs)};
}

}  // namespace

int main() {
  report("oracle-equivalence", oracle_equivalence);
  report("eigenvalue-diagonalization", eigenvalue_diagonalization);
  report("parameter-recovery", parameter_recovery);
  report("conditional-independence-recovery", conditional_independence);
  report("acceptance-rate-tuning", acceptance_rates);
  report("kernel-conditional-correctness", kernel_conditionals);
  report("simulator-exactness", simulator_exactness);
  report("scaling-contract", scaling_contract);
  report("full-scale-end-to-end", full_scale_end_to_end);
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
