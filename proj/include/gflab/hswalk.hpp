#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gflab/lattice.hpp"
#include "gflab/potential.hpp"
#include "gflab/rng.hpp"
#include "gflab/sampler.hpp"
#include "gflab/stats_util.hpp"

namespace gflab {

// Langevin-driven dynamic random environment in the rescaled normalization:
// the field theta~ = sqrt(beta) theta evolves under
//   d theta~ = -sum_b V~'(eta~(b)) dt + sqrt(2) dB,   V~(x) = beta V(x/sqrt(beta)),
// which is reversible for the eta~ gradient Gibbs measure. Jump rates are
// V~''(eta~(b)) = V''(eta(b)), uniformly inside [c-, c+] for convex families.
class EnvironmentProcess {
 public:
  EnvironmentProcess(const LatticeDomain& dom, const Potential& pot, double beta, double dt,
                     std::uint64_t seed, std::uint64_t stream)
      : st_(dom, ModelSpec::gradient(), rescaled_potential(pot, beta), 1.0, seed, stream),
        dt_(dt),
        c_minus_(pot.c_minus()),
        c_plus_(pot.c_plus()) {
    if (!(dt > 0.0)) throw std::invalid_argument("environment: dt must be > 0");
    if (std::isfinite(c_plus_) && dt > 1e-2 / c_plus_ + 1e-15)
      throw std::invalid_argument("environment: dt exceeds the 1e-2/c_plus stability bound");
  }

  // Stationary start: an exact-equilibrium draw via Metropolis, which avoids
  // seeding the dynamics with the integrator's O(dt) stationary bias.
  void initialize_stationary(long sweeps = -1) {
    if (sweeps < 0) {
      SampleParams p;
      p.seed = 0;
      sweeps = suggest_burnin(*dom_ptr(), ModelSpec::gradient(), st_.potential(), 1.0, p);
    }
    for (long i = 0; i < sweeps; ++i) {
      st_.metropolis_sweep();
      if (i % 100 == 99) {
        const double acc = st_.metro_acceptance_rate();
        st_.set_metro_width(st_.metro_width() * (acc > 0.55 ? 1.25 : (acc < 0.45 ? 0.8 : 1.0)));
        st_.reset_metro_stats();
      }
    }
  }

  void advance_step() {
    st_.langevin_sweep(dt_);
    elapsed_ += dt_;
    if (++steps_ % 64 == 0) {
      for (double t : st_.config().theta)
        if (!(std::fabs(t) < 1e6))
          throw std::runtime_error("environment: field blow-up, reduce dt");
    }
  }

  double time() const { return elapsed_; }
  double dt() const { return dt_; }
  double c_minus() const { return c_minus_; }
  double c_plus() const { return c_plus_; }
  const LatticeDomain* dom_ptr() const { return st_.config().dom; }
  SamplerState& state() { return st_; }
  const SamplerState& state() const { return st_; }

  // eta~ on a canonical edge, and the walk rate V~''(eta~).
  double eta(int e) const { return st_.config().edge_difference(e); }
  double rate(int e) const { return st_.potential().d2v(eta(e)); }

 private:
  SamplerState st_;
  double dt_;
  double elapsed_ = 0.0;
  long steps_ = 0;
  double c_minus_, c_plus_;
};

inline void evolve_environment(EnvironmentProcess& env, double horizon) {
  while (env.time() < horizon - 1e-12) env.advance_step();
}

struct WalkResult {
  int start = -1;
  std::vector<double> jump_times;
  std::vector<int> path;        // vertex after each jump
  std::vector<double> jump_rates;
  double end_time = 0.0;
  bool absorbed = false;
  bool discarded = false;  // came within the margin of the box edge

  int vertex_at(double t) const {
    int v = start;
    for (std::size_t k = 0; k < jump_times.size(); ++k) {
      if (jump_times[k] > t) break;
      v = path[k];
    }
    return v;
  }
};

inline double displacement_at(const WalkResult& w, const LatticeDomain& dom, double t,
                              int axis) {
  return static_cast<double>(dom.coords(w.vertex_at(t))[axis] - dom.coords(w.start)[axis]);
}

// Exact occupation time of `vertex` over [0, min(t_hi, end_time)].
inline double occupation_time(const WalkResult& w, int vertex, double t_hi) {
  double acc = 0.0;
  int v = w.start;
  double t_prev = 0.0;
  const double t_end = std::min(t_hi, w.end_time);
  for (std::size_t k = 0; k < w.jump_times.size() && t_prev < t_end; ++k) {
    const double t = std::min(w.jump_times[k], t_end);
    if (v == vertex) acc += t - t_prev;
    t_prev = t;
    v = w.path[k];
  }
  if (v == vertex && t_prev < t_end) acc += t_end - t_prev;
  return acc;
}

struct WalkOptions {
  double lambda = 1.0;              // thinning cap, must dominate sup V''
  bool absorb_at_boundary = false;  // kill the walk on the pinned boundary
  double margin_fraction = 0.0;     // discard walks entering this edge margin
  bool check_ellipticity = true;    // convex families only
};

// Uniformization / thinning against a constant candidate rate 2 d lambda:
// candidates arrive as a Poisson stream, pick one of the 2d directed edges
// uniformly, accept with probability V''(eta_t(b)) / lambda evaluated from
// the most recent environment state. The environment advances in fixed dt
// steps, synchronously with all walks (piecewise-frozen rates, bias O(dt)).
inline std::vector<WalkResult> run_walks(EnvironmentProcess& env,
                                         const std::vector<int>& starts, double horizon,
                                         const WalkOptions& opt, std::uint64_t seed,
                                         std::uint64_t stream_base = 0x77616c6bULL) {
  const LatticeDomain& dom = *env.dom_ptr();
  const int d = dom.dim();
  const double cand_rate = 2.0 * d * opt.lambda;
  if (!(opt.lambda > 0.0)) throw std::invalid_argument("walk: lambda must be > 0");

  const int n = static_cast<int>(starts.size());
  std::vector<WalkResult> out(n);
  std::vector<CounterRng> rngs;
  std::vector<double> next_cand(n);
  std::vector<int> cur(n);
  std::vector<char> active(n, 1);
  std::vector<double> margin_lo(d), margin_hi(d);
  for (int j = 0; j < d; ++j) {
    const double extent = dom.box_hi()[j] - dom.box_lo()[j];
    margin_lo[j] = dom.box_lo()[j] + opt.margin_fraction * extent;
    margin_hi[j] = dom.box_hi()[j] - opt.margin_fraction * extent;
  }
  for (int i = 0; i < n; ++i) {
    out[i].start = starts[i];
    cur[i] = starts[i];
    rngs.emplace_back(seed, stream_base + static_cast<std::uint64_t>(i));
    next_cand[i] = -std::log(1.0 - rngs[i].next_double()) / cand_rate;
  }

  const double t0 = env.time();
  double t_cur = 0.0;
  while (t_cur < horizon - 1e-12) {
    const double t_next = std::min(horizon, t_cur + env.dt());
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      auto& rng = rngs[i];
      while (next_cand[i] <= t_next) {
        const double tev = next_cand[i];
        next_cand[i] += -std::log(1.0 - rng.next_double()) / cand_rate;
        const int dir_code = static_cast<int>(rng.next_double() * 2 * d);
        const int axis = dir_code / 2, dir = dir_code % 2;
        const double u_accept = rng.next_double();
        const int w = dom.neighbor(cur[i], axis, dir);
        if (w < 0) continue;  // no edge in this direction
        const int e = dir == 0 ? dom.edge_from(cur[i], axis) : dom.edge_from(w, axis);
        const double r = env.rate(e);
        if (opt.check_ellipticity && std::isfinite(env.c_plus())) {
          if (r < env.c_minus() - 1e-12 || r > env.c_plus() + 1e-12)
            throw std::logic_error("walk: realized rate outside [c-, c+]");
        }
        if (r > opt.lambda * (1.0 + 1e-12))
          throw std::logic_error("walk: thinning cap below realized rate");
        if (u_accept >= r / opt.lambda) continue;
        cur[i] = w;
        out[i].jump_times.push_back(tev);
        out[i].path.push_back(w);
        out[i].jump_rates.push_back(r);
        if (opt.absorb_at_boundary && dom.is_boundary(w)) {
          out[i].absorbed = true;
          out[i].end_time = tev;
          active[i] = 0;
          break;
        }
        if (opt.margin_fraction > 0.0) {
          bool inside = true;
          for (int j = 0; j < d; ++j) {
            const double x = dom.coord_real(w, j);
            if (x < margin_lo[j] || x > margin_hi[j]) inside = false;
          }
          if (!inside) {
            out[i].discarded = true;
            out[i].end_time = tev;
            active[i] = 0;
            break;
          }
        }
      }
    }
    if (t_next < horizon - 1e-12 || env.time() - t0 < horizon - 1e-12) env.advance_step();
    t_cur = t_next;
  }
  for (int i = 0; i < n; ++i)
    if (active[i]) out[i].end_time = horizon;
  return out;
}

// Frozen-environment walk: rates are a fixed per-canonical-edge vector and
// the environment does not evolve (the dt = infinity reading). Missing
// directions are simply never accepted, so the walk is confined to the
// domain graph.
inline WalkResult run_walk_frozen(const LatticeDomain& dom, const std::vector<double>& rates,
                                  int start, double horizon, double lambda, CounterRng& rng) {
  const int d = dom.dim();
  const double cand_rate = 2.0 * d * lambda;
  WalkResult out;
  out.start = start;
  int cur = start;
  double t = -std::log(1.0 - rng.next_double()) / cand_rate;
  while (t < horizon) {
    const int dir_code = static_cast<int>(rng.next_double() * 2 * d);
    const int axis = dir_code / 2, dir = dir_code % 2;
    const double u = rng.next_double();
    const int w = dom.neighbor(cur, axis, dir);
    if (w >= 0) {
      const int e = dir == 0 ? dom.edge_from(cur, axis) : dom.edge_from(w, axis);
      if (rates[e] > lambda * (1.0 + 1e-12))
        throw std::logic_error("walk: thinning cap below frozen rate");
      if (u < rates[e] / lambda) {
        cur = w;
        out.jump_times.push_back(t);
        out.path.push_back(w);
        out.jump_rates.push_back(rates[e]);
      }
    }
    t += -std::log(1.0 - rng.next_double()) / cand_rate;
  }
  out.end_time = horizon;
  return out;
}

struct ScalingRow {
  double t = 0.0;          // macroscopic time
  double walk_time = 0.0;  // t / eps^2
  Estimate var_ratio;      // per-coordinate variance / (2t), averaged over axes
  Estimate cross_cov;      // axis-0 x axis-1 covariance of eps X
  double charfn_max_dev = 0.0;
  double charfn_allowed = 0.0;
  bool pass_gaussian = true;
};

struct ScalingReport {
  double eps = 1.0;
  std::vector<ScalingRow> rows;
  long n_walks = 0;
  long n_discarded = 0;
};

// Diffusive-scaling summary of eps X(t eps^{-2}) against the Brownian limit:
// per-coordinate variance 2t, vanishing cross covariance, Gaussian time-t
// marginal. Standard errors are jackknifed over environment groups. Needs at
// least min_walks usable trajectories at this scale.
inline ScalingReport scaling_report(const std::vector<std::vector<WalkResult>>& by_env,
                                    const LatticeDomain& dom, double eps,
                                    const std::vector<double>& t_grid,
                                    long min_walks = 500) {
  long usable = 0;
  for (const auto& g : by_env)
    for (const auto& w : g)
      if (!w.discarded && !w.absorbed) ++usable;
  if (usable < min_walks)
    throw std::invalid_argument("scaling_report: " + std::to_string(usable) +
                                " trajectories, need at least " +
                                std::to_string(min_walks));
  ScalingReport rep;
  rep.eps = eps;
  const int d = dom.dim();
  // Jackknife over environment groups when there are at least two; a single
  // group falls back to the naive per-walk standard error.
  auto estimate = [](const std::vector<std::vector<double>>& groups) {
    if (groups.size() >= 2) return jackknife_mean(groups);
    Estimate e;
    const auto& v = groups[0];
    e.value = vec_mean(v);
    e.se = std::sqrt(vec_variance(v) / static_cast<double>(v.size()));
    return e;
  };
  for (double t : t_grid) {
    ScalingRow row;
    row.t = t;
    row.walk_time = t / (eps * eps);
    if (t == 0.0) {
      row.var_ratio = {0.0, 0.0};
      rep.rows.push_back(row);
      continue;
    }
    // Per-env vectors of eps-rescaled displacement functionals.
    std::vector<std::vector<double>> sq(by_env.size()), cross(by_env.size());
    std::vector<std::vector<double>> z_for_cf(by_env.size());
    for (std::size_t g = 0; g < by_env.size(); ++g) {
      for (const auto& w : by_env[g]) {
        if (w.discarded || w.absorbed) continue;
        double sq_sum = 0.0;
        std::vector<double> x(d);
        for (int j = 0; j < d; ++j) {
          x[j] = eps * displacement_at(w, dom, row.walk_time, j);
          sq_sum += x[j] * x[j];
        }
        sq[g].push_back(sq_sum / d);  // mean over axes of X_a^2
        cross[g].push_back(d >= 2 ? x[0] * x[1] : 0.0);
        z_for_cf[g].push_back(x[0]);
      }
    }
    const auto ms = estimate(sq);  // E[X_a^2] averaged over axes
    row.var_ratio = {ms.value / (2.0 * t), ms.se / (2.0 * t)};
    row.cross_cov = estimate(cross);

    // Char-fn Gaussianity of the standardized axis-0 marginal.
    double sd = 0.0;
    long n = 0;
    for (auto& v : z_for_cf)
      for (double z : v) {
        sd += z * z;
        ++n;
      }
    sd = std::sqrt(sd / std::max<long>(1, n));
    if (sd > 0) {
      for (double u : {0.5, 1.0, 1.5, 2.0}) {
        std::vector<std::vector<double>> cs(z_for_cf.size());
        for (std::size_t g = 0; g < z_for_cf.size(); ++g)
          for (double z : z_for_cf[g]) cs[g].push_back(std::cos(u * z / sd));
        const auto est = estimate(cs);
        const double ref = std::exp(-0.5 * u * u);
        const double dev = std::fabs(est.value - ref);
        const double allowed = std::max(3.0 * est.se, 0.01);
        row.charfn_max_dev = std::max(row.charfn_max_dev, dev);
        row.charfn_allowed = std::max(row.charfn_allowed, allowed);
        if (dev > allowed) row.pass_gaussian = false;
      }
    }
    rep.rows.push_back(row);
  }
  for (const auto& g : by_env)
    for (const auto& w : g) {
      ++rep.n_walks;
      if (w.discarded) ++rep.n_discarded;
    }
  return rep;
}

// Box for a walk of the given horizon: side at least 8x the diffusive range
// sqrt(2 d horizon), centered on the origin-translated start.
inline LatticeDomain walk_box(int d, double horizon, double factor = 8.0) {
  const int side =
      std::max(8, static_cast<int>(std::ceil(factor * std::sqrt(2.0 * d * horizon))));
  std::vector<double> lo(d, 0.0), hi(d, static_cast<double>(side));
  return build_rect_domain(d, 1.0, lo, hi);
}

inline int center_vertex(const LatticeDomain& dom) {
  std::vector<int> c(dom.dim());
  for (int j = 0; j < dom.dim(); ++j) {
    const double mid = 0.5 * (dom.box_lo()[j] + dom.box_hi()[j]) / dom.spacing();
    c[j] = static_cast<int>(std::lround(mid));
  }
  const int v = dom.vertex_at(c);
  if (v < 0) throw std::logic_error("walk: no center vertex");
  return v;
}

struct WalkEnsembleParams {
  int n_envs = 8;
  int walks_per_env = 100;
  double horizon = 10.0;
  double dt = 5e-3;
  double lambda = 1.0;
  double margin_fraction = 0.10;
  std::uint64_t seed = 1;
  int threads = 1;
  long env_equil_sweeps = -1;  // -1: pilot policy
};

// Independent (environment, walk-batch) pairs; fully parallel across pairs.
inline std::vector<std::vector<WalkResult>> run_walk_ensemble(
    const LatticeDomain& dom, const Potential& pot, double beta,
    const WalkEnsembleParams& p) {
  std::vector<std::vector<WalkResult>> by_env(p.n_envs);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int g = next.fetch_add(1);
      if (g >= p.n_envs) return;
      EnvironmentProcess env(dom, pot, beta, p.dt, p.seed,
                             0x656e76ULL + static_cast<std::uint64_t>(g));
      env.initialize_stationary(p.env_equil_sweeps);
      WalkOptions opt;
      opt.lambda = p.lambda;
      opt.margin_fraction = p.margin_fraction;
      opt.check_ellipticity = pot.strictly_convex() && std::isfinite(pot.c_plus());
      std::vector<int> starts(p.walks_per_env, center_vertex(dom));
      by_env[g] = run_walks(env, starts, p.horizon, opt, p.seed,
                            0x77616c6bULL + static_cast<std::uint64_t>(g) * 1000003ULL);
    }
  };
  const int nt = std::max(1, std::min(p.threads, p.n_envs));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return by_env;
}

struct CovRepParams {
  double T = 15.0;          // time truncation of the integral
  double dt = 5e-3;
  int lhs_chains = 8;
  long lhs_samples = 4000;  // per chain
  long lhs_thin = 5;
  int n_replicates = 1500;
  int walks_per_start = 2;
  long replicate_thin = 20;  // metropolis sweeps between replicate env draws
  std::uint64_t seed = 1;
  int threads = 1;
};

struct CovRepReport {
  Estimate lhs;            // Cov(F, G) by direct ensemble
  Estimate rhs;            // time-integrated walk representation
  double tail_fraction = 0.0;
  bool truncation_warning = false;
  bool agree = false;      // |lhs - rhs| <= 3 sqrt(se_l^2 + se_r^2)
};

// Covariance representation for coordinate functions F = eta~(bF),
// G = eta~(bG): the ensemble covariance against
//   int_0^T sum_x dF(x) E[ E_{x,eta}[ dG(X(t)) ] ] dt,
// with dF constant (+1 at the head, -1 at the tail, boundary sites dropped)
// and the walk killed on the boundary.
inline CovRepReport covariance_representation_check(const LatticeDomain& dom,
                                                    const Potential& pot, double beta,
                                                    int edge_f, int edge_g,
                                                    const CovRepParams& p) {
  CovRepReport rep;
  const Potential vt = rescaled_potential(pot, beta);

  // LHS: stationary ensemble covariance of eta~(bF), eta~(bG) via Metropolis.
  {
    SampleParams sp;
    sp.n_chains = p.lhs_chains;
    sp.burnin = -1;
    sp.n_samples = p.lhs_samples;
    sp.thin = p.lhs_thin;
    sp.seed = p.seed + 7;
    sp.threads = p.threads;
    std::vector<std::vector<double>> prod(sp.n_chains), fs(sp.n_chains), gs(sp.n_chains);
    struct Obs : ChainObserver {
      int ef, eg;
      std::vector<double>* prod;
      std::vector<double>* fs;
      std::vector<double>* gs;
      void on_sample(long, const SpinConfig& cfg) override {
        const double f = cfg.edge_difference(ef);
        const double g = cfg.edge_difference(eg);
        prod->push_back(f * g);
        fs->push_back(f);
        gs->push_back(g);
      }
    };
    sample_ensemble_observe(dom, ModelSpec::gradient(), vt, 1.0, sp, [&](int c) {
      auto o = std::make_unique<Obs>();
      o->ef = edge_f;
      o->eg = edge_g;
      o->prod = &prod[c];
      o->fs = &fs[c];
      o->gs = &gs[c];
      return o;
    });
    // Jackknife over chains of cov = E[fg] - E[f]E[g].
    std::vector<double> loo(sp.n_chains);
    auto cov_of = [&](int skip) {
      double sfg = 0, sf = 0, sg = 0;
      long n = 0;
      for (int c = 0; c < sp.n_chains; ++c) {
        if (c == skip) continue;
        for (std::size_t i = 0; i < prod[c].size(); ++i) {
          sfg += prod[c][i];
          sf += fs[c][i];
          sg += gs[c][i];
          ++n;
        }
      }
      return sfg / n - (sf / n) * (sg / n);
    };
    rep.lhs.value = cov_of(-1);
    for (int c = 0; c < sp.n_chains; ++c) loo[c] = cov_of(c);
    double lm = 0;
    for (double v : loo) lm += v;
    lm /= sp.n_chains;
    double s = 0;
    for (double v : loo) s += (v - lm) * (v - lm);
    rep.lhs.se = std::sqrt(s * (sp.n_chains - 1.0) / sp.n_chains);
  }

  // RHS: nested Monte Carlo over environments and killed walks.
  {
    const Edge ef = dom.edge(edge_f);
    const Edge eg = dom.edge(edge_g);
    struct Site {
      int v;
      double sign;
    };
    std::vector<Site> f_sites, g_sites;
    if (!dom.is_boundary(ef.head)) f_sites.push_back({ef.head, +1.0});
    if (!dom.is_boundary(ef.tail)) f_sites.push_back({ef.tail, -1.0});
    if (!dom.is_boundary(eg.head)) g_sites.push_back({eg.head, +1.0});
    if (!dom.is_boundary(eg.tail)) g_sites.push_back({eg.tail, -1.0});
    if (f_sites.empty() || g_sites.empty()) {
      // dF or dG vanishes identically (pinned edge): both sides are zero.
      rep.rhs = {0.0, 0.0};
      rep.agree = std::fabs(rep.lhs.value) <= 3.0 * rep.lhs.se;
      return rep;
    }

    // Stationary feeder chain for replicate initial environments.
    SamplerState feeder(dom, ModelSpec::gradient(), vt, 1.0, p.seed + 11, 9001);
    {
      SampleParams sp;
      sp.seed = p.seed + 11;
      const long burn = suggest_burnin(dom, ModelSpec::gradient(), vt, 1.0, sp);
      for (long i = 0; i < burn; ++i) {
        feeder.metropolis_sweep();
        if (i % 100 == 99) {
          const double acc = feeder.metro_acceptance_rate();
          feeder.set_metro_width(feeder.metro_width() *
                                 (acc > 0.55 ? 1.25 : (acc < 0.45 ? 0.8 : 1.0)));
          feeder.reset_metro_stats();
        }
      }
    }

    std::vector<double> vals(p.n_replicates), tails(p.n_replicates);
    for (int r = 0; r < p.n_replicates; ++r) {
      for (long i = 0; i < p.replicate_thin; ++i) feeder.metropolis_sweep();
      EnvironmentProcess env(dom, pot, beta, p.dt, p.seed,
                             0x636f76ULL + static_cast<std::uint64_t>(r));
      env.state().config().theta = feeder.config().theta;
      WalkOptions opt;
      opt.lambda = std::isfinite(pot.c_plus()) ? pot.c_plus() : 4.0;
      opt.absorb_at_boundary = true;
      opt.check_ellipticity = pot.strictly_convex() && std::isfinite(pot.c_plus());
      std::vector<int> starts;
      std::vector<double> fsigns;
      for (const auto& s : f_sites)
        for (int k = 0; k < p.walks_per_start; ++k) {
          starts.push_back(s.v);
          fsigns.push_back(s.sign);
        }
      auto walks = run_walks(env, starts, p.T, opt, p.seed,
                             0x72687377ULL + static_cast<std::uint64_t>(r) * 131071ULL);
      double val = 0.0, tail = 0.0;
      for (std::size_t i = 0; i < walks.size(); ++i) {
        double occ = 0.0, occ_tail = 0.0;
        for (const auto& gs : g_sites) {
          occ += gs.sign * occupation_time(walks[i], gs.v, p.T);
          occ_tail += gs.sign * (occupation_time(walks[i], gs.v, p.T) -
                                 occupation_time(walks[i], gs.v, 0.9 * p.T));
        }
        val += fsigns[i] * occ / p.walks_per_start;
        tail += std::fabs(occ_tail) / p.walks_per_start;
      }
      vals[r] = val;
      tails[r] = tail;
    }
    double m = 0;
    for (double v : vals) m += v;
    m /= p.n_replicates;
    double s2 = 0;
    for (double v : vals) s2 += (v - m) * (v - m);
    rep.rhs.value = m;
    rep.rhs.se = std::sqrt(s2 / (static_cast<double>(p.n_replicates) - 1.0) /
                           static_cast<double>(p.n_replicates));
    double mt = 0;
    for (double v : tails) mt += v;
    mt /= p.n_replicates;
    rep.tail_fraction = std::fabs(m) > 1e-12 ? mt / std::fabs(m) : 0.0;
    rep.truncation_warning = rep.tail_fraction > 0.10;
  }

  const double comb = std::sqrt(rep.lhs.se * rep.lhs.se + rep.rhs.se * rep.rhs.se);
  rep.agree = std::fabs(rep.lhs.value - rep.rhs.value) <= 3.0 * comb;
  return rep;
}

}  // namespace gflab
