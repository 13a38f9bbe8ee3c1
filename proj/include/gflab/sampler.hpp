#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gflab/lattice.hpp"
#include "gflab/potential.hpp"
#include "gflab/rng.hpp"
#include "gflab/stats_util.hpp"

namespace gflab {

enum class ModelKind { XY, XYField, Gradient };

inline const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::XY: return "xy";
    case ModelKind::XYField: return "xyfield";
    case ModelKind::Gradient: return "gradient";
  }
  return "?";
}

struct ModelSpec {
  ModelKind kind = ModelKind::Gradient;
  double field_h = 0.0;  // external field strength, XYField only

  bool wraps() const { return kind != ModelKind::Gradient; }
  static ModelSpec xy() { return {ModelKind::XY, 0.0}; }
  static ModelSpec xy_field(double h) { return {ModelKind::XYField, h}; }
  static ModelSpec gradient() { return {ModelKind::Gradient, 0.0}; }
};

// Field configuration with Dirichlet (pinned-zero) boundary. XY-type models
// store wrapped angles in [-pi, pi); gradient models store unwrapped reals.
struct SpinConfig {
  const LatticeDomain* dom = nullptr;
  ModelSpec model;
  std::vector<double> theta;

  static SpinConfig zeros(const LatticeDomain& d, ModelSpec m) {
    SpinConfig c;
    c.dom = &d;
    c.model = m;
    c.theta.assign(d.num_vertices(), 0.0);
    return c;
  }

  double edge_difference(int e) const {
    const Edge& ed = dom->edge(e);
    return theta[ed.head] - theta[ed.tail];
  }
};

inline double observable_sum_cos_eta(const SpinConfig& cfg) {
  double s = 0.0;
  for (int e = 0; e < cfg.dom->num_edges(); ++e) s += std::cos(cfg.edge_difference(e));
  return s;
}

enum class UpdateKind { Auto, Heatbath, Metropolis, Langevin };

inline const char* update_name(UpdateKind u) {
  switch (u) {
    case UpdateKind::Auto: return "auto";
    case UpdateKind::Heatbath: return "heatbath";
    case UpdateKind::Metropolis: return "metropolis";
    case UpdateKind::Langevin: return "langevin";
  }
  return "?";
}

// One MCMC chain: configuration, potential, inverse temperature, and a
// counter-based RNG stream. Replaying from the same seed, stream, and
// configuration reproduces the trajectory bit for bit.
class SamplerState {
 public:
  SamplerState(const LatticeDomain& dom, ModelSpec model, Potential pot, double beta,
               std::uint64_t seed, std::uint64_t stream)
      : cfg_(SpinConfig::zeros(dom, model)),
        pot_(std::move(pot)),
        beta_(beta),
        rng_(seed, stream) {
    if (model.wraps() && pot_.family() != PotentialFamily::Cosine)
      throw std::invalid_argument("sampler: XY-type models use the cosine potential");
    if (!(beta >= 0.0)) throw std::invalid_argument("sampler: beta must be >= 0");
    // Proposal width of order the local conditional scale.
    metro_width_ = 2.4 / std::sqrt(std::max(1e-12, beta) * 2.0 * dom.dim());
    if (model.wraps()) metro_width_ = std::min(metro_width_, kPi);
  }

  const SpinConfig& config() const { return cfg_; }
  SpinConfig& config() { return cfg_; }
  const Potential& potential() const { return pot_; }
  double beta() const { return beta_; }
  CounterRng& rng() { return rng_; }
  long sweeps_done() const { return sweeps_done_; }
  double metro_width() const { return metro_width_; }
  void set_metro_width(double w) { metro_width_ = w; }

  double metro_acceptance_rate() const {
    return metro_proposed_ == 0 ? 0.0
                                : static_cast<double>(metro_accepted_) / metro_proposed_;
  }
  void reset_metro_stats() { metro_proposed_ = metro_accepted_ = 0; }

  // beta * sum_b V(eta(b)) - h * sum_i cos(theta(i)); each unordered bond
  // counted once.
  double total_energy() const {
    double h = 0.0;
    for (int e = 0; e < cfg_.dom->num_edges(); ++e)
      h += pot_.value(cfg_.edge_difference(e));
    h *= beta_;
    if (cfg_.model.kind == ModelKind::XYField) {
      double c = 0.0;
      for (double t : cfg_.theta) c += std::cos(t);
      h -= cfg_.model.field_h * c;
    }
    return h;
  }

  // Energy change if theta(v) were set to new_value; the local counterpart of
  // total_energy, written in cancellation-resistant deltas.
  double local_energy_delta(int v, double new_value) const {
    const double old_value = cfg_.theta[v];
    double dv_sum = 0.0;
    for (const auto& [e, sgn] : cfg_.dom->incident_edges(v)) {
      const Edge& ed = cfg_.dom->edge(e);
      if (sgn > 0) {
        const double other = cfg_.theta[ed.head];
        dv_sum += pot_.delta_value(other - new_value, other - old_value);
      } else {
        const double other = cfg_.theta[ed.tail];
        dv_sum += pot_.delta_value(new_value - other, old_value - other);
      }
    }
    double dh = beta_ * dv_sum;
    if (cfg_.model.kind == ModelKind::XYField) {
      // -h (cos(new) - cos(old)) without cancellation
      dh += cfg_.model.field_h * 2.0 * std::sin(0.5 * (old_value + new_value)) *
            std::sin(0.5 * (new_value - old_value));
    }
    return dh;
  }

  double metropolis_accept_probability(int v, double new_value) const {
    const double dh = local_energy_delta(v, new_value);
    return std::min(1.0, std::exp(-dh));
  }

  // One Metropolis proposal per interior vertex in lexicographic order.
  void metropolis_sweep(double width) {
    if (!(width > 0.0)) throw std::invalid_argument("metropolis: width must be > 0");
    for (int v : cfg_.dom->interior()) {
      const double prop = cfg_.theta[v] + rng_.uniform(-width, width);
      const double dh = local_energy_delta(v, prop);
      const double u = rng_.next_double();
      ++metro_proposed_;
      if (u < std::exp(-dh)) {
        cfg_.theta[v] = cfg_.model.wraps() ? wrap_angle(prop) : prop;
        ++metro_accepted_;
      }
    }
    ++sweeps_done_;
  }

  void metropolis_sweep() { metropolis_sweep(metro_width_); }

  // Exact conditional resampling for XY-type models: the full conditional of
  // theta(v) is von Mises with parameter vector
  //   (beta * sum_nbr cos(theta), beta * sum_nbr sin(theta)) + (h, 0).
  void heatbath_sweep_xy() {
    if (!cfg_.model.wraps())
      throw std::invalid_argument("heatbath: gradient models have no von Mises conditional");
    const int d = cfg_.dom->dim();
    for (int v : cfg_.dom->interior()) {
      double vx = cfg_.model.kind == ModelKind::XYField ? cfg_.model.field_h : 0.0;
      double vy = 0.0;
      for (int axis = 0; axis < d; ++axis) {
        for (int dir = 0; dir < 2; ++dir) {
          const int w = cfg_.dom->neighbor(v, axis, dir);
          vx += beta_ * std::cos(cfg_.theta[w]);
          vy += beta_ * std::sin(cfg_.theta[w]);
        }
      }
      const double kappa = std::sqrt(vx * vx + vy * vy);
      const double mu = kappa > 0.0 ? std::atan2(vy, vx) : 0.0;
      cfg_.theta[v] = sample_von_mises(rng_, mu, kappa);
    }
    ++sweeps_done_;
  }

  // Euler-Maruyama step for the gradient-model Langevin dynamics targeting
  // exp(-beta sum V(eta)): all interior vertices move simultaneously by
  //   theta <- theta - grad H * dt + sqrt(2 dt) * N(0,1).
  // The integrator bias is O(dt).
  void langevin_sweep(double dt) {
    if (cfg_.model.wraps())
      throw std::invalid_argument("langevin: only gradient models (unwrapped field)");
    if (!(dt > 0.0)) throw std::invalid_argument("langevin: dt must be > 0");
    const int ne = cfg_.dom->num_edges();
    vprime_.resize(ne);
    for (int e = 0; e < ne; ++e) vprime_[e] = pot_.dv(cfg_.edge_difference(e));
    const double noise = std::sqrt(2.0 * dt);
    for (int v : cfg_.dom->interior()) {
      double drift = 0.0;
      for (const auto& [e, sgn] : cfg_.dom->incident_edges(v)) drift += sgn * vprime_[e];
      cfg_.theta[v] += beta_ * drift * dt + noise * rng_.next_normal();
    }
    ++sweeps_done_;
  }

 private:
  SpinConfig cfg_;
  Potential pot_;
  double beta_;
  CounterRng rng_;
  long sweeps_done_ = 0;
  double metro_width_;
  long metro_proposed_ = 0;
  long metro_accepted_ = 0;
  std::vector<double> vprime_;
};

struct SampleParams {
  int n_chains = 4;
  long burnin = -1;  // sweeps; -1 = pilot-based (20x integrated autocorrelation time)
  long n_samples = 1000;  // recorded per chain
  long thin = 10;         // sweeps between records
  std::uint64_t seed = 1;
  UpdateKind update = UpdateKind::Auto;
  double metro_width = 0.0;  // 0 = auto-tune toward ~50% acceptance during burn-in
  double langevin_dt = 1e-3;
  int threads = 1;
};

// Per-chain sink for recorded configurations; instances are owned by one
// chain each, so no synchronization is needed.
struct ChainObserver {
  virtual ~ChainObserver() = default;
  virtual void on_sample(long sweep, const SpinConfig& cfg) = 0;
};

using ObserverFactory = std::function<std::unique_ptr<ChainObserver>(int chain)>;

struct ChainDiagnostics {
  double acceptance_rate = 0.0;
  double tau_int = 0.0;  // of sum_b cos(eta(b)), in units of recorded samples
  long sweeps = 0;
  double metro_width = 0.0;
};

struct EnsembleDiagnostics {
  std::vector<ChainDiagnostics> chains;
  std::vector<std::vector<double>> observable;  // sum cos eta per recorded sample
  double tau_int = 0.0;
  double interchain_rhat = 1.0;
  bool rhat_warning = false;
  long burnin_used = 0;
  UpdateKind update_used = UpdateKind::Auto;
};

inline UpdateKind resolve_update(UpdateKind u, ModelSpec model) {
  if (u != UpdateKind::Auto) return u;
  return model.wraps() ? UpdateKind::Heatbath : UpdateKind::Metropolis;
}

namespace detail {

inline void run_sweep(SamplerState& st, UpdateKind u, double dt) {
  switch (u) {
    case UpdateKind::Heatbath: st.heatbath_sweep_xy(); break;
    case UpdateKind::Metropolis: st.metropolis_sweep(); break;
    case UpdateKind::Langevin: st.langevin_sweep(dt); break;
    case UpdateKind::Auto: throw std::logic_error("update kind not resolved");
  }
}

}  // namespace detail

// Pilot-run equilibration policy: 20x the integrated autocorrelation time of
// sum_b cos(eta(b)), measured on a dedicated RNG stream.
inline long suggest_burnin(const LatticeDomain& dom, ModelSpec model, const Potential& pot,
                           double beta, const SampleParams& p) {
  SamplerState st(dom, model, pot, beta, p.seed, 0x706c6f74ULL);
  const UpdateKind u = resolve_update(p.update, model);
  const long pilot = 1500;
  std::vector<double> obs;
  obs.reserve(pilot);
  for (long s = 0; s < pilot; ++s) {
    detail::run_sweep(st, u, p.langevin_dt);
    if (u == UpdateKind::Metropolis && p.metro_width == 0.0 && s % 100 == 99) {
      const double acc = st.metro_acceptance_rate();
      st.set_metro_width(st.metro_width() * (acc > 0.55 ? 1.25 : (acc < 0.45 ? 0.8 : 1.0)));
      st.reset_metro_stats();
    }
    obs.push_back(observable_sum_cos_eta(st.config()));
  }
  // Skip the transient half before measuring.
  std::vector<double> tail(obs.begin() + pilot / 2, obs.end());
  const double tau = integrated_autocorr_time(tail);
  return std::clamp(static_cast<long>(std::ceil(20.0 * tau)), 100L, 50000L);
}

// Runs n_chains independent chains on independent RNG streams, discarding
// burn-in and recording every thin-th sweep into per-chain observers.
// Chains run in parallel with no shared mutable state; results are merged in
// chain order, so the output is independent of the thread schedule.
inline EnsembleDiagnostics sample_ensemble_observe(
    const LatticeDomain& dom, ModelSpec model, const Potential& pot, double beta,
    const SampleParams& params, const ObserverFactory& factory) {
  if (params.n_chains < 1) throw std::invalid_argument("ensemble: n_chains >= 1");
  if (params.thin < 1) throw std::invalid_argument("ensemble: thin >= 1");
  if (params.n_samples < 1) throw std::invalid_argument("ensemble: n_samples >= 1");
  const UpdateKind u = resolve_update(params.update, model);
  const long burnin =
      params.burnin >= 0 ? params.burnin : suggest_burnin(dom, model, pot, beta, params);

  EnsembleDiagnostics diag;
  diag.update_used = u;
  diag.burnin_used = burnin;
  diag.chains.resize(params.n_chains);
  diag.observable.resize(params.n_chains);

  std::vector<std::unique_ptr<ChainObserver>> observers(params.n_chains);
  for (int c = 0; c < params.n_chains; ++c) observers[c] = factory ? factory(c) : nullptr;

  auto run_chain = [&](int c) {
    SamplerState st(dom, model, pot, beta, params.seed, static_cast<std::uint64_t>(c));
    if (params.metro_width > 0.0) st.set_metro_width(params.metro_width);
    for (long s = 0; s < burnin; ++s) {
      detail::run_sweep(st, u, params.langevin_dt);
      if (u == UpdateKind::Metropolis && params.metro_width == 0.0 && s % 100 == 99) {
        const double acc = st.metro_acceptance_rate();
        st.set_metro_width(st.metro_width() *
                           (acc > 0.55 ? 1.25 : (acc < 0.45 ? 0.8 : 1.0)));
        st.reset_metro_stats();
      }
    }
    st.reset_metro_stats();
    auto& obs = diag.observable[c];
    obs.reserve(params.n_samples);
    for (long i = 0; i < params.n_samples; ++i) {
      for (long t = 0; t < params.thin; ++t) detail::run_sweep(st, u, params.langevin_dt);
      obs.push_back(observable_sum_cos_eta(st.config()));
      if (observers[c]) observers[c]->on_sample(st.sweeps_done(), st.config());
    }
    auto& cd = diag.chains[c];
    cd.acceptance_rate = st.metro_acceptance_rate();
    cd.tau_int = integrated_autocorr_time(obs);
    cd.sweeps = st.sweeps_done();
    cd.metro_width = st.metro_width();
  };

  const int nthreads = std::max(1, std::min<int>(params.threads, params.n_chains));
  if (nthreads == 1) {
    for (int c = 0; c < params.n_chains; ++c) run_chain(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const int c = next.fetch_add(1);
          if (c >= params.n_chains) return;
          run_chain(c);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  double tau = 0.0;
  for (const auto& cd : diag.chains) tau += cd.tau_int;
  diag.tau_int = tau / params.n_chains;
  diag.interchain_rhat = params.n_chains >= 2 ? split_rhat(diag.observable) : 1.0;
  diag.rhat_warning = diag.interchain_rhat > 1.1;
  return diag;
}

struct EnsembleResult {
  std::vector<std::vector<SpinConfig>> samples;  // by chain
  EnsembleDiagnostics diag;
};

inline EnsembleResult sample_ensemble(const LatticeDomain& dom, ModelSpec model,
                                      const Potential& pot, double beta,
                                      const SampleParams& params) {
  EnsembleResult out;
  out.samples.resize(params.n_chains);
  struct Collect : ChainObserver {
    std::vector<SpinConfig>* dst;
    void on_sample(long, const SpinConfig& cfg) override { dst->push_back(cfg); }
  };
  out.diag = sample_ensemble_observe(
      dom, model, pot, beta, params, [&](int c) {
        auto o = std::make_unique<Collect>();
        o->dst = &out.samples[c];
        return o;
      });
  return out;
}

}  // namespace gflab
