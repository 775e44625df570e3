#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mvspec/posterior.hpp"
#include "mvspec/rng.hpp"
#include "mvspec/whittle.hpp"

namespace mvspec {

struct GriddyGibbsConfig {
  /// Cells per pass; odd and >= 3.
  int grid_size = 41;
  /// Feasible intervals narrower than this leave the entry unchanged.
  double boundary_tol = 1e-8;
  /// Extra zoom passes are taken while fewer than `min_support_cells` cells
  /// carry mass within exp(-log_mass_cut) of the peak, up to `max_passes`.
  int max_passes = 6;
  int min_support_cells = 33;
  double log_mass_cut = 15.0;

  void validate() const;
};

struct SamplerConfig {
  int iters = 10000;
  int burnin = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  int adapt_window = 100;
  double initial_alpha_sd = 0.1;
  GriddyGibbsConfig griddy;
  PriorConfig prior;

  void validate() const;
  /// (iters - burnin) / thin.
  int stored_draws() const { return (iters - burnin) / thin; }
};

struct KernelCounter {
  long attempts = 0;
  long accepts = 0;
  long window_attempts = 0;
  long window_accepts = 0;
  long post_attempts = 0;
  long post_accepts = 0;

  void record(bool accepted, bool post_burnin);
  double post_rate() const { return post_attempts ? double(post_accepts) / double(post_attempts) : 0.0; }
  double window_rate() const { return window_attempts ? double(window_accepts) / double(window_attempts) : 0.0; }
};

/// Mutable state of one chain. Owns its RNG stream and an incremental
/// likelihood evaluator over a shared read-only context.
class KernelState {
 public:
  KernelState(const WhittleContext& ctx, const ModelParams& init, const SamplerConfig& cfg, Rng rng);

  const ModelParams& params() const { return params_; }
  const LikelihoodCache& likelihood() const { return cache_; }
  const WhittleContext& context() const { return *ctx_; }
  const SamplerConfig& config() const { return cfg_; }
  Rng& rng() { return rng_; }

  long iteration = 0;
  bool post_burnin = false;
  Eigen::VectorXd alpha_sd;
  std::vector<KernelCounter> alpha_stats;
  std::vector<KernelCounter> sigma2_stats;
  long narrow_interval_events = 0;
  long numerical_events = 0;

  /// log of the MH ratio for moving alpha_m to `proposal` (-inf if <= 0).
  double alpha_log_ratio(int m, double proposal);
  /// Independence proposal for sigma2_m: an IG with shape (nu0 + N) / 2 whose
  /// mode matches the exact conditional given rho and the other elements.
  /// For M = 1 it is the marginal conjugate IG, i.e. the full conditional.
  InverseGamma sigma2_proposal(int m) const;
  double sigma2_log_ratio(int m, double proposal) const;

  /// Feasible open interval for rho_(i,j) with every other entry fixed.
  std::pair<double, double> rho_interval(int i, int j) const;
  /// Log conditional (flat prior) of rho_(i,j) = x; -inf off the PD set.
  double rho_log_conditional(int i, int j, double x) const;

  void set_alpha_after_proposal();
  void set_sigma2(int m, double v);
  void set_rho(const Eigen::MatrixXd& rho);
  void set_hypers(double s2, int nu0, double sigma02);

 private:
  const WhittleContext* ctx_;
  SamplerConfig cfg_;
  ModelParams params_;
  LikelihoodCache cache_;
  Rng rng_;
  int staged_m_ = -1;
  double staged_alpha_ = 0.0;
};

/// Feasible interval of rho(i,j) = rho(j,i) = x keeping `rho` positive
/// definite, by bisection on Cholesky success from the current value.
std::pair<double, double> feasible_interval(const Eigen::MatrixXd& rho, int i, int j, double tol = 1e-13);

/// Random-walk MH step; returns the acceptance probability used.
double update_alpha(KernelState& state, int m);
/// Independence MH step with the marginal conjugate proposal; returns the
/// acceptance probability used.
double update_sigma2(KernelState& state, int m);
/// Griddy Gibbs draw of rho(i,j); returns false when the interval was too
/// narrow to move.
bool update_rho_entry(KernelState& state, int i, int j);
/// s2, then nu0, then sigma02 from their full conditionals.
void update_hypers(KernelState& state);
/// Multiplies each alpha proposal SD by 1.25 above a 0.5 windowed
/// acceptance rate and by 0.8 below 0.3, then resets the window.
void adapt_proposals(KernelState& state);

struct PosteriorChain {
  int elements = 0;
  std::vector<std::string> columns;
  Eigen::MatrixXd draws;
  int iters = 0;
  int burnin = 0;
  int thin = 1;
  std::uint64_t seed = 0;
  /// Post-burn-in acceptance rate per kernel ("alpha_1", "sigma2_1", ...).
  std::map<std::string, double> acceptance;
  Eigen::VectorXd final_alpha_sd;
  double seconds = 0.0;

  Eigen::Index size() const { return draws.rows(); }
  ModelParams draw(Eigen::Index i, double delta = 1.0) const;
  /// Column index by name; throws InputError if absent.
  Eigen::Index column(const std::string& name) const;
};

std::vector<std::string> chain_columns(int m);

/// Sweeps alpha_1..M, sigma2_1..M, rho pairs in lexicographic order, then
/// hyperparameters. Deterministic given (cfg.seed, stream).
PosteriorChain run_chain(const WhittleContext& ctx, const ModelParams& init, const SamplerConfig& cfg,
                         std::uint64_t stream = 0);
/// Builds the spectral context from already preprocessed, tapered data.
PosteriorChain run_chain(const TaperedLattice& data, const SamplerConfig& cfg, WhittleOptions options = {});

/// Independent chains on distinct sub-streams, run concurrently.
std::vector<PosteriorChain> run_chains(const WhittleContext& ctx, const ModelParams& init, const SamplerConfig& cfg,
                                       int chains);

/// Draws of all chains stacked in chain order; acceptance rates averaged.
PosteriorChain pool_chains(const std::vector<PosteriorChain>& chains);

/// Chain CSV: header row of parameter names, one row per stored draw.
void write_chain_csv(const PosteriorChain& chain, const std::filesystem::path& path);
PosteriorChain read_chain_csv(const std::filesystem::path& path);

}  // namespace mvspec
