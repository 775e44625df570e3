#include "mvspec/sampler.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <thread>

namespace mvspec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_pd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all();
}

}  // namespace

void GriddyGibbsConfig::validate() const {
  if (grid_size < 3 || grid_size % 2 == 0) throw InputError("griddy Gibbs grid size must be odd and >= 3");
  if (!(boundary_tol > 0.0)) throw InputError("griddy Gibbs boundary tolerance must be positive");
  if (max_passes < 1 || min_support_cells < 1 || !(log_mass_cut > 0.0))
    throw InputError("griddy Gibbs refinement settings must be positive");
}

void SamplerConfig::validate() const {
  if (!(iters > burnin && burnin >= 0)) throw InputError("need iters > burnin >= 0");
  if (thin < 1) throw InputError("thin must be >= 1");
  if (adapt_window < 1) throw InputError("adaptation window must be >= 1");
  if (!(initial_alpha_sd > 0.0)) throw InputError("initial alpha proposal SD must be positive");
  griddy.validate();
  prior.validate();
}

void KernelCounter::record(bool accepted, bool post_burnin) {
  ++attempts;
  ++window_attempts;
  accepts += accepted;
  window_accepts += accepted;
  if (post_burnin) {
    ++post_attempts;
    post_accepts += accepted;
  }
}

KernelState::KernelState(const WhittleContext& ctx, const ModelParams& init, const SamplerConfig& cfg, Rng rng)
    : ctx_(&ctx), cfg_(cfg), params_(init), cache_(ctx, init.spectral(), CoherenceMatrix(init.rho)), rng_(rng) {
  const int m = init.elements();
  if (m != ctx.elements()) throw InputError("initial parameters do not match the number of elements");
  if (!std::isfinite(log_prior(init, cfg.prior))) throw InputError("initial parameters lie outside the prior support");
  alpha_sd = Eigen::VectorXd::Constant(m, cfg.initial_alpha_sd);
  alpha_stats.resize(m);
  sigma2_stats.resize(m);
}

double KernelState::alpha_log_ratio(int m, double proposal) {
  if (!(proposal > 0.0)) return kNegInf;
  const double current = params_.alpha[m];
  const double ll = cache_.propose_alpha(m, proposal);
  staged_m_ = m;
  staged_alpha_ = proposal;
  return (ll - cache_.loglik()) + log_half_normal_pdf(proposal, params_.s2) - log_half_normal_pdf(current, params_.s2);
}

void KernelState::set_alpha_after_proposal() {
  if (staged_m_ < 0) throw std::logic_error("no staged alpha proposal");
  cache_.accept_alpha();
  params_.alpha[staged_m_] = staged_alpha_;
  staged_m_ = -1;
}

InverseGamma KernelState::sigma2_proposal(int m) const {
  // Conditional kernel in s = sigma2_m: s^-(k+1) exp(-c / (2 s) - b / sqrt(s)).
  const double n = double(ctx_->used());
  const double k = (params_.nu0 + n) / 2.0;
  const Eigen::MatrixXd prec = cache_.rho().llt().solve(Eigen::MatrixXd::Identity(params_.elements(), params_.elements()));
  const double c = params_.nu0 * params_.sigma02 + prec(m, m) * cache_.quadratic_moment(m);
  double b = 0.0;
  for (int j = 0; j < params_.elements(); ++j)
    if (j != m) b += prec(m, j) * cache_.moment(m, j) / std::sqrt(params_.sigma2[j]);
  if (b == 0.0) return {k, c / 2.0};
  const double t = (0.5 * b + std::sqrt(0.25 * b * b + 2.0 * (k + 1.0) * c)) / (2.0 * (k + 1.0));
  return {k, (k + 1.0) * t * t};
}

double KernelState::sigma2_log_ratio(int m, double proposal) const {
  if (!(proposal > 0.0)) return kNegInf;
  const double current = params_.sigma2[m];
  const auto prior = sigma2_prior(params_.nu0, params_.sigma02);
  const auto q = sigma2_proposal(m);
  return (cache_.loglik_with_sigma2(m, proposal) - cache_.loglik()) + (prior.log_pdf(proposal) - prior.log_pdf(current)) +
         (q.log_pdf(current) - q.log_pdf(proposal));
}

void KernelState::set_sigma2(int m, double v) {
  params_.sigma2[m] = v;
  cache_.set_sigma2(m, v);
}

std::pair<double, double> KernelState::rho_interval(int i, int j) const {
  return feasible_interval(params_.rho, i, j);
}

double KernelState::rho_log_conditional(int i, int j, double x) const {
  Eigen::MatrixXd r = params_.rho;
  r(i, j) = r(j, i) = x;
  return cache_.loglik_with_rho(r);
}

void KernelState::set_rho(const Eigen::MatrixXd& rho) {
  cache_.set_rho(CoherenceMatrix(rho));
  params_.rho = rho;
}

void KernelState::set_hypers(double s2, int nu0, double sigma02) {
  params_.s2 = s2;
  params_.nu0 = nu0;
  params_.sigma02 = sigma02;
}

std::pair<double, double> feasible_interval(const Eigen::MatrixXd& rho, int i, int j, double tol) {
  if (i == j) throw InputError("feasible_interval: diagonal entries are fixed at 1");
  Eigen::MatrixXd r = rho;
  const auto pd_at = [&](double x) {
    r(i, j) = r(j, i) = x;
    return is_pd(r);
  };
  const double x0 = rho(i, j);
  if (!pd_at(x0)) throw InputError("feasible_interval: current matrix is not positive definite");
  const auto boundary = [&](double inside, double outside) {
    while (std::abs(outside - inside) > tol) {
      const double mid = 0.5 * (inside + outside);
      if (mid == inside || mid == outside) break;
      (pd_at(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  return {boundary(x0, -1.0), boundary(x0, 1.0)};
}

double update_alpha(KernelState& state, int m) {
  const double current = state.params().alpha[m];
  const double proposal = current + state.alpha_sd[m] * std_normal(state.rng());
  double log_r = kNegInf;
  if (proposal > 0.0) {
    log_r = state.alpha_log_ratio(m, proposal);
    if (std::isnan(log_r)) {
      ++state.numerical_events;
      std::clog << "warning: NaN in alpha_" << m + 1 << " acceptance ratio at iteration " << state.iteration
                << "; rejecting\n";
      log_r = kNegInf;
    }
  }
  const double prob = log_r >= 0.0 ? 1.0 : std::exp(log_r);
  const bool accept = uniform01(state.rng()) < prob;
  if (accept) state.set_alpha_after_proposal();
  state.alpha_stats[m].record(accept, state.post_burnin);
  return prob;
}

double update_sigma2(KernelState& state, int m) {
  const double proposal = state.sigma2_proposal(m).sample(state.rng());
  double log_r = state.sigma2_log_ratio(m, proposal);
  if (std::isnan(log_r)) {
    ++state.numerical_events;
    std::clog << "warning: NaN in sigma2_" << m + 1 << " acceptance ratio at iteration " << state.iteration
              << "; rejecting\n";
    log_r = kNegInf;
  }
  const double prob = log_r >= 0.0 ? 1.0 : std::exp(log_r);
  const bool accept = uniform01(state.rng()) < prob;
  if (accept) state.set_sigma2(m, proposal);
  state.sigma2_stats[m].record(accept, state.post_burnin);
  return prob;
}

bool update_rho_entry(KernelState& state, int i, int j) {
  const auto& cfg = state.config().griddy;
  auto [lo, hi] = state.rho_interval(i, j);
  if (hi - lo < cfg.boundary_tol) {
    ++state.narrow_interval_events;
    std::clog << "warning: feasible interval for rho_" << i + 1 << "_" << j + 1 << " is narrower than "
              << cfg.boundary_tol << " at iteration " << state.iteration << "\n";
    return false;
  }

  const int g = cfg.grid_size;
  Eigen::VectorXd ll(g);
  double width = 0.0;
  for (int pass = 0; pass < cfg.max_passes; ++pass) {
    width = (hi - lo) / g;
    for (int k = 0; k < g; ++k) ll[k] = state.rho_log_conditional(i, j, lo + (k + 0.5) * width);
    const double top = ll.maxCoeff();
    if (!std::isfinite(top)) {
      ++state.numerical_events;
      std::clog << "warning: no finite conditional mass for rho_" << i + 1 << "_" << j + 1 << "\n";
      return false;
    }
    int first = g, last = -1;
    for (int k = 0; k < g; ++k) {
      if (ll[k] >= top - cfg.log_mass_cut) {
        first = std::min(first, k);
        last = std::max(last, k);
      }
    }
    if (last - first + 1 >= cfg.min_support_cells || pass + 1 == cfg.max_passes) break;
    const double new_lo = lo + std::max(first - 1, 0) * width;
    const double new_hi = lo + std::min(last + 2, g) * width;
    lo = new_lo;
    hi = new_hi;
  }

  const auto cell = DiscreteDistribution::from_log_mass(0, ll).sample(state.rng());
  const double x = lo + (cell + uniform01(state.rng())) * width;
  Eigen::MatrixXd r = state.params().rho;
  r(i, j) = r(j, i) = x;
  if (!is_pd(r)) {
    ++state.numerical_events;
    return false;
  }
  state.set_rho(r);
  return true;
}

void update_hypers(KernelState& state) {
  const auto& p = state.params();
  const auto& prior = state.config().prior;
  const double s2 = s2_full_conditional(p.alpha, prior).sample(state.rng());
  const int nu0 = nu0_full_conditional(p.sigma2, p.sigma02, prior).sample(state.rng());
  const double sigma02 = sigma02_full_conditional(p.sigma2, nu0, prior).sample(state.rng());
  state.set_hypers(s2, nu0, sigma02);
}

void adapt_proposals(KernelState& state) {
  for (Eigen::Index m = 0; m < state.alpha_sd.size(); ++m) {
    auto& c = state.alpha_stats[m];
    const double rate = c.window_rate();
    if (rate > 0.5) state.alpha_sd[m] *= 1.25;
    else if (rate < 0.3) state.alpha_sd[m] *= 0.8;
    c.window_attempts = 0;
    c.window_accepts = 0;
  }
}

std::vector<std::string> chain_columns(int m) {
  std::vector<std::string> cols;
  for (int k = 1; k <= m; ++k) cols.push_back("alpha_" + std::to_string(k));
  for (int k = 1; k <= m; ++k) cols.push_back("sigma2_" + std::to_string(k));
  for (int i = 1; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j) cols.push_back("rho_" + std::to_string(i) + "_" + std::to_string(j));
  cols.insert(cols.end(), {"s2", "nu0", "sigma02"});
  return cols;
}

Eigen::Index PosteriorChain::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return static_cast<Eigen::Index>(k);
  throw InputError("chain has no column '" + name + "'");
}

ModelParams PosteriorChain::draw(Eigen::Index i, double delta) const {
  const int m = elements;
  ModelParams p;
  p.delta = delta;
  const auto row = draws.row(i);
  p.alpha = row.segment(0, m).transpose();
  p.sigma2 = row.segment(m, m).transpose();
  p.rho = Eigen::MatrixXd::Identity(m, m);
  Eigen::Index c = 2 * m;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) p.rho(a, b) = p.rho(b, a) = row[c++];
  p.s2 = row[c++];
  p.nu0 = static_cast<int>(std::lround(row[c++]));
  p.sigma02 = row[c++];
  return p;
}

namespace {

void store_row(const ModelParams& p, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  const int m = p.elements();
  row.segment(0, m) = p.alpha.transpose();
  row.segment(m, m) = p.sigma2.transpose();
  Eigen::Index c = 2 * m;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) row[c++] = p.rho(a, b);
  row[c++] = p.s2;
  row[c++] = p.nu0;
  row[c++] = p.sigma02;
}

}  // namespace

PosteriorChain run_chain(const WhittleContext& ctx, const ModelParams& init, const SamplerConfig& cfg,
                         std::uint64_t stream) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const int m = init.elements();
  KernelState state(ctx, init, cfg, make_stream(cfg.seed, stream));

  PosteriorChain chain;
  chain.elements = m;
  chain.columns = chain_columns(m);
  chain.iters = cfg.iters;
  chain.burnin = cfg.burnin;
  chain.thin = cfg.thin;
  chain.seed = cfg.seed;
  chain.draws.resize(cfg.stored_draws(), static_cast<Eigen::Index>(chain.columns.size()));

  Eigen::Index stored = 0;
  for (int it = 1; it <= cfg.iters; ++it) {
    state.iteration = it;
    state.post_burnin = it > cfg.burnin;
    for (int k = 0; k < m; ++k) update_alpha(state, k);
    for (int k = 0; k < m; ++k) update_sigma2(state, k);
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) update_rho_entry(state, a, b);
    update_hypers(state);

    if (!std::isfinite(state.likelihood().loglik()))
      throw NumericalError("chain failed: non-finite log-likelihood at iteration " + std::to_string(it));
    if (it <= cfg.burnin && it % cfg.adapt_window == 0) adapt_proposals(state);
    if (it > cfg.burnin && (it - cfg.burnin) % cfg.thin == 0 && stored < chain.draws.rows())
      store_row(state.params(), chain.draws.row(stored++));
  }

  for (int k = 0; k < m; ++k) {
    chain.acceptance["alpha_" + std::to_string(k + 1)] = state.alpha_stats[k].post_rate();
    chain.acceptance["sigma2_" + std::to_string(k + 1)] = state.sigma2_stats[k].post_rate();
  }
  chain.final_alpha_sd = state.alpha_sd;
  chain.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return chain;
}

PosteriorChain run_chain(const TaperedLattice& data, const SamplerConfig& cfg, WhittleOptions options) {
  const auto ctx = WhittleContext::build(data, options);
  return run_chain(ctx, ModelParams::initial(data.data.elements(), data.data.delta), cfg);
}

std::vector<PosteriorChain> run_chains(const WhittleContext& ctx, const ModelParams& init, const SamplerConfig& cfg,
                                       int chains) {
  if (chains < 1) throw InputError("need at least one chain");
  std::vector<PosteriorChain> out(static_cast<std::size_t>(chains));
  if (chains == 1) {
    out[0] = run_chain(ctx, init, cfg, 0);
    return out;
  }
  std::vector<std::exception_ptr> errors(out.size());
  std::vector<std::thread> workers;
  for (int c = 0; c < chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        out[c] = run_chain(ctx, init, cfg, static_cast<std::uint64_t>(c));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

PosteriorChain pool_chains(const std::vector<PosteriorChain>& chains) {
  if (chains.empty()) throw InputError("no chains to pool");
  PosteriorChain pooled = chains.front();
  Eigen::Index rows = 0;
  for (const auto& c : chains) rows += c.size();
  pooled.draws.resize(rows, chains.front().draws.cols());
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    pooled.draws.middleRows(at, c.size()) = c.draws;
    at += c.size();
  }
  for (auto& [name, rate] : pooled.acceptance) {
    double sum = 0.0;
    for (const auto& c : chains) sum += c.acceptance.at(name);
    rate = sum / double(chains.size());
  }
  pooled.seconds = 0.0;
  for (const auto& c : chains) pooled.seconds = std::max(pooled.seconds, c.seconds);
  return pooled;
}

}  // namespace mvspec
