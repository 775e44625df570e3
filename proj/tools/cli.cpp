#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mvspec/fieldsim.hpp"
#include "mvspec/gridio.hpp"
#include "mvspec/inference.hpp"
#include "mvspec/oracle.hpp"
#include "mvspec/sampler.hpp"

namespace mvspec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {


json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Flags given on the command line override the config file, which
// overrides the defaults.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> taper;
  std::optional<int> iters, burnin, thin, chains, trials;
  std::optional<std::string> data, in, out;
  bool log = false, no_center = false, exclude_dc = false, wrong_constant = false;
};

template <typename T>
T pick(const std::optional<T>& flag, const json& cfg, const char* key, T fallback) {
  if (flag) return *flag;
  if (cfg.contains(key)) {
    try {
      return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InputError(std::string("config key '") + key + "': " + e.what());
    }
  }
  return fallback;
}

bool pick_flag(bool flag, const json& cfg, const char* key, bool fallback) {
  if (flag) return true;
  return cfg.contains(key) ? cfg.at(key).get<bool>() : fallback;
}

fs::path out_dir(const Flags& f, const json& cfg) {
  const fs::path dir = pick<std::string>(f.out, cfg, "out", ".");
  fs::create_directories(dir);
  return dir;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw InputError(name + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != rows)
      throw InputError(name + " must be square");
    for (Eigen::Index k = 0; k < rows; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

int cmd_simulate(const Flags& f, const json& cfg, std::ostream& out) {
  SimConfig sim;
  sim.n1 = cfg.value("n1", 0);
  sim.n2 = cfg.value("n2", 0);
  sim.delta = cfg.value("delta", 1.0);
  sim.seed = pick<std::uint64_t>(f.seed, cfg, "seed", 1);
  if (!cfg.contains("elements")) throw InputError("simulate: config needs an 'elements' array");
  for (const auto& e : cfg.at("elements")) {
    sim.labels.push_back(e.value("label", "Z" + std::to_string(sim.labels.size() + 1)));
    sim.params.push_back(make_quasi_matern(e.at("sigma2").get<double>(), e.at("alpha").get<double>(), sim.delta,
                                           e.value("nu", 1.0)));
  }
  const int m = sim.elements();
  const Eigen::MatrixXd rho =
      cfg.contains("rho") ? matrix_from_json(cfg.at("rho"), "rho") : Eigen::MatrixXd::Identity(m, m);
  if (rho.rows() != m) throw InputError("rho: dimension does not match the number of elements");
  if (!CoherenceMatrix::is_valid(rho))
    throw InputError("rho: not a symmetric positive-definite correlation matrix");
  sim.rho = CoherenceMatrix(rho);

  const auto dir = out_dir(f, cfg);
  const auto field = simulate_field(sim).front();
  write_multilattice(field, dir);

  json echo = cfg;
  echo["seed"] = sim.seed;
  echo["rho"] = matrix_to_json(rho);
  write_json(echo, dir / "params.json");
  out << "wrote " << m << " elements of " << sim.n1 << "x" << sim.n2 << " to " << dir.string() << "\n";
  return 0;
}

int cmd_fit(const Flags& f, const json& cfg, std::ostream& out) {
  const auto manifest = pick<std::string>(f.data, cfg, "data", "");
  if (manifest.empty()) throw InputError("fit: no data manifest given (--data or config 'data')");

  SamplerConfig sc;
  sc.iters = pick(f.iters, cfg, "iters", sc.iters);
  sc.burnin = pick(f.burnin, cfg, "burnin", sc.burnin);
  sc.thin = pick(f.thin, cfg, "thin", sc.thin);
  sc.seed = pick<std::uint64_t>(f.seed, cfg, "seed", sc.seed);
  sc.adapt_window = cfg.value("adapt_window", sc.adapt_window);
  sc.griddy.grid_size = cfg.value("grid_size", sc.griddy.grid_size);
  sc.prior.nu0_max = cfg.value("nu0_max", sc.prior.nu0_max);
  sc.validate();
  const double taper = pick(f.taper, cfg, "taper", 0.10);
  const int chains = pick(f.chains, cfg, "chains", 1);
  if (chains < 1) throw InputError("fit: chains must be >= 1");
  const bool take_log = pick_flag(f.log, cfg, "log", false);
  const bool center = !f.no_center && cfg.value("center", true);
  WhittleOptions wo;
  wo.exclude_dc = pick_flag(f.exclude_dc, cfg, "exclude_dc", false);

  const auto start = std::chrono::steady_clock::now();
  const auto raw = load_multilattice(manifest);
  const auto tapered = apply_taper(preprocess(raw, take_log, center), taper);
  const auto ctx = WhittleContext::build(tapered, wo);
  const auto init = ModelParams::initial(ctx.elements(), raw.delta);
  const auto prepared = std::chrono::steady_clock::now();

  PosteriorChain chain = chains == 1 ? run_chain(ctx, init, sc, 0) : pool_chains(run_chains(ctx, init, sc, chains));
  const auto done = std::chrono::steady_clock::now();

  const auto dir = out_dir(f, cfg);
  write_chain_csv(chain, dir / "chain.csv");

  json side;
  side["seed"] = sc.seed;
  side["chains"] = chains;
  side["draws"] = chain.size();
  side["n1"] = raw.rows();
  side["n2"] = raw.cols();
  side["delta"] = raw.delta;
  side["labels"] = raw.labels;
  side["acceptance"] = chain.acceptance;
  side["final_alpha_sd"] = std::vector<double>(chain.final_alpha_sd.data(),
                                               chain.final_alpha_sd.data() + chain.final_alpha_sd.size());
  side["timings"] = {{"prepare_seconds", std::chrono::duration<double>(prepared - start).count()},
                     {"sampling_seconds", std::chrono::duration<double>(done - prepared).count()}};
  side["config"] = {{"data", manifest},      {"iters", sc.iters},       {"burnin", sc.burnin},
                    {"thin", sc.thin},       {"seed", sc.seed},         {"taper", taper},
                    {"chains", chains},      {"log", take_log},         {"center", center},
                    {"exclude_dc", wo.exclude_dc}, {"grid_size", sc.griddy.grid_size},
                    {"nu0_max", sc.prior.nu0_max}, {"adapt_window", sc.adapt_window}};
  write_json(side, dir / "chain.json");
  out << "stored " << chain.size() << " draws in " << (dir / "chain.csv").string() << "\n";
  for (const auto& [k, v] : chain.acceptance) out << "  acceptance " << k << " = " << v << "\n";
  return 0;
}

int cmd_summarize(const Flags& f, const json& cfg, std::ostream& out) {
  const fs::path in = pick<std::string>(f.in, cfg, "in", ".");
  const auto side = read_json(in / "chain.json");
  const auto chain = read_chain_csv(in / "chain.csv");
  const auto labels = side.at("labels").get<std::vector<std::string>>();
  if (static_cast<int>(labels.size()) != chain.elements) throw InputError("chain.json labels do not match chain.csv");
  const auto grid = fourier_grid(side.at("n1").get<Eigen::Index>(), side.at("n2").get<Eigen::Index>(),
                                 side.at("delta").get<double>());
  SummaryOptions so;
  so.level = cfg.value("level", so.level);
  so.lag_max = cfg.value("lag_max", so.lag_max);

  const auto summary = summarize_chain(chain, grid, so);
  std::vector<CovCurveSummary> marginal, cross;
  for (const auto& c : summary.curves) (c.m == c.m2 ? marginal : cross).push_back(c);

  const auto dir = out_dir(f, cfg);
  write_curve_csv(marginal, labels, dir / "cov_curves.csv");
  write_curve_csv(cross, labels, dir / "cross_cov.csv");
  write_coefficient_csv(summary.coefficients, labels, dir / "coefficients.csv");
  out << "summarized " << chain.size() << " draws: " << marginal.size() << " marginal and " << cross.size()
      << " cross curves\n";
  return 0;
}

int cmd_graph(const Flags& f, const json& cfg, std::ostream& out) {
  const fs::path in = pick<std::string>(f.in, cfg, "in", ".");
  const auto table = read_coefficient_csv(in / "coefficients.csv");
  const auto graph = build_graph(table.coefficients, table.labels);
  const auto dir = out_dir(f, cfg);
  export_graph(graph, dir / "graph.dot");
  out << "graph: " << graph.nodes.size() << " nodes, " << graph.edges.size() << " edges\n";
  return 0;
}

int cmd_oracle_check(const Flags& f, const json& cfg, std::ostream& out) {
  const int trials = pick(f.trials, cfg, "trials", 25);
  const auto seed = pick<std::uint64_t>(f.seed, cfg, "seed", 1);
  const int max_m = cfg.value("max_elements", 3);
  const Eigen::Index max_n = cfg.value("max_side", 6);
  OracleOptions opts;
  opts.tolerance = cfg.value("tolerance", 1e-9);
  opts.wrong_constant = pick_flag(f.wrong_constant, cfg, "wrong_constant", false);
  if (trials < 1 || max_m < 1) throw InputError("oracle-check: trials and max_elements must be >= 1");

  auto rng = make_stream(seed, 0);
  json report;
  report["seed"] = seed;
  report["tolerance"] = opts.tolerance;
  report["wrong_constant"] = opts.wrong_constant;
  report["trials"] = json::array();
  bool all = true;
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_oracle_instance(rng, 1 + t % max_m, max_n);
    const auto r = compare_likelihoods(inst.data, inst.params, inst.rho, opts);
    all = all && r.pass;
    report["trials"].push_back({{"elements", r.elements},
                                {"n1", r.n1},
                                {"n2", r.n2},
                                {"whittle", r.whittle},
                                {"dense", r.dense},
                                {"constant", r.constant},
                                {"abs_discrepancy", r.abs_discrepancy},
                                {"rel_discrepancy", r.rel_discrepancy},
                                {"pass", r.pass}});
  }
  report["pass"] = all;
  out << report.dump(2) << "\n";
  if (f.out || cfg.contains("out")) write_json(report, out_dir(f, cfg) / "oracle_report.json");
  return all ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian spectral inference for multivariate lattice fields", "mvspec"};
  app.require_subcommand(1);
  Flags f;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--seed", f.seed, "RNG seed");
    sub->add_option("--out", f.out, "Output directory");
  };
  auto* simulate = app.add_subcommand("simulate", "Simulate a multivariate field from a parameter file");
  common(simulate);
  auto* fit = app.add_subcommand("fit", "Run the MCMC sampler on a lattice manifest");
  common(fit);
  fit->add_option("--data", f.data, "Data manifest (manifest.json)");
  fit->add_option("--taper", f.taper, "Taper fraction r in [0, 1)");
  fit->add_option("--iters", f.iters, "Total iterations");
  fit->add_option("--burnin", f.burnin, "Burn-in iterations");
  fit->add_option("--thin", f.thin, "Thinning interval");
  fit->add_option("--chains", f.chains, "Independent chains run concurrently");
  fit->add_flag("--log", f.log, "Log-transform the data");
  fit->add_flag("--no-center", f.no_center, "Skip mean removal");
  fit->add_flag("--exclude-dc", f.exclude_dc, "Drop the zero frequency");
  auto* summarize = app.add_subcommand("summarize", "Covariance curves and conditional coefficients from a chain");
  common(summarize);
  summarize->add_option("--in", f.in, "Directory holding chain.csv and chain.json");
  auto* graph = app.add_subcommand("graph", "Dependence graph from coefficient summaries");
  common(graph);
  graph->add_option("--in", f.in, "Directory holding coefficients.csv");
  auto* oracle = app.add_subcommand("oracle-check", "Compare the Whittle and dense likelihoods");
  common(oracle);
  oracle->add_option("--trials", f.trials, "Number of random instances");
  oracle->add_flag("--wrong-constant", f.wrong_constant, "Debug: drop the log N term of the constant");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const json cfg = f.config.empty() ? json::object() : read_json(f.config);
    if (!cfg.is_object()) throw InputError("config must be a JSON object");
    if (simulate->parsed()) return cmd_simulate(f, cfg, out);
    if (fit->parsed()) return cmd_fit(f, cfg, out);
    if (summarize->parsed()) return cmd_summarize(f, cfg, out);
    if (graph->parsed()) return cmd_graph(f, cfg, out);
    return cmd_oracle_check(f, cfg, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mvspec::cli
