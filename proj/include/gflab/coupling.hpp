#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gflab/gradient.hpp"
#include "gflab/potential.hpp"
#include "gflab/sampler.hpp"
#include "gflab/stats_util.hpp"

namespace gflab {

struct RejectionBudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoupledPair {
  GradientConfig eta_xy;
  GradientConfig eta_delta;
  bool agreed = false;
  std::vector<int> bad_edges;  // canonical edges with |eta_xy| > delta
};

struct CouplingParams {
  double delta = kPi / 4;  // valid anywhere in (0, pi/2)
  long thin = 10;          // sweeps between draws on either chain
  long burnin = -1;        // -1: pilot policy per chain
  long pilot_samples = 800;
  long rejection_budget = 500;
  std::uint64_t seed = 1;
};

// Estimated weights of the mixture decomposition mu = c rho + (1-c) nu,
// mu^delta = c' rho + (1-c') lambda, with rho the common no-bad-edge part.
struct MixtureEstimate {
  double c_hat = 0.0;       // mu(no delta-bad edge)
  double cprime_hat = 0.0;  // mu^delta(no delta-bad edge)
  double se_c = 0.0;
  double se_cprime = 0.0;
  double accept_good = 0.0;  // (c'-c)/c', clamped to [0,1]
};

// Coupling of the XY gradient field eta and the convexified field eta^delta:
// draw eta from mu; off the bad-edge event set eta^delta = eta, otherwise
// eta^delta = W with W distributed as the complementary mixture component
// lambda. W is realized by rejection from mu^delta: a proposal Y with a bad
// edge is always accepted, a proposal without one is accepted with
// probability (c'-c)/c', whose value is estimated from indicator pilots.
class XYGradientCoupler {
 public:
  XYGradientCoupler(const LatticeDomain& dom, double beta, const CouplingParams& params)
      : dom_(&dom),
        params_(params),
        xy_(dom, ModelSpec::xy(), Potential::cosine(), beta, params.seed, 0),
        grad_(dom, ModelSpec::gradient(), Potential::truncated_convex(params.delta), beta,
              params.seed, 1) {
    if (!(params.delta > 0.0 && params.delta < kPi / 2))
      throw std::invalid_argument("coupling: delta must lie in (0, pi/2)");
    SampleParams sp;
    sp.seed = params_.seed;
    sp.thin = params_.thin;
    long burn = params_.burnin;
    if (burn < 0)
      burn = std::max(
          suggest_burnin(dom, ModelSpec::xy(), Potential::cosine(), beta, sp),
          suggest_burnin(dom, ModelSpec::gradient(), Potential::truncated_convex(params.delta),
                         beta, sp));
    for (long i = 0; i < burn; ++i) {
      xy_.heatbath_sweep_xy();
      grad_.metropolis_sweep();
      if (i % 100 == 99) tune(grad_);
    }
    estimate_mixture();
  }

  const MixtureEstimate& mixture() const { return mix_; }
  long w_proposals() const { return w_proposals_; }

  // Exposed for tests of the rejection budget.
  void override_accept_good(double p) { mix_.accept_good = p; }

  CoupledPair draw() {
    CoupledPair out;
    advance(xy_);
    out.eta_xy = eta_from_theta(xy_.config());
    for (int e = 0; e < dom_->num_edges(); ++e)
      if (std::fabs(out.eta_xy.eta[e]) > params_.delta) out.bad_edges.push_back(e);

    if (out.bad_edges.empty()) {
      out.agreed = true;
      out.eta_delta = out.eta_xy;
      out.eta_delta.source = EtaSource::Coupled;
      // max |eta| <= delta < pi/2 forces every plaquette sum below 2 pi,
      // hence a vortex-free draw; checked on every coupled pair.
      const auto census = vortex_census(out.eta_xy);
      if (!census.vortex_free())
        throw std::logic_error("coupling: no-bad-edge draw has a vortex");
      return out;
    }

    for (long attempt = 0; attempt < params_.rejection_budget; ++attempt) {
      advance(grad_);
      ++w_proposals_;
      GradientConfig y = eta_from_theta(grad_.config());
      const bool y_bad = y.max_abs() > params_.delta;
      if (y_bad || xy_.rng().next_double() < mix_.accept_good) {
        out.eta_delta = std::move(y);
        out.eta_delta.source = EtaSource::Coupled;
        out.agreed = false;
        return out;
      }
    }
    throw RejectionBudgetExhausted(
        "coupling: W-draw rejection budget exhausted; the bad-edge event is not rare "
        "at these parameters - raise beta");
  }

 private:
  void advance(SamplerState& st) {
    for (long t = 0; t < params_.thin; ++t) {
      if (&st == &xy_)
        st.heatbath_sweep_xy();
      else
        st.metropolis_sweep();
    }
  }

  void tune(SamplerState& st) {
    const double acc = st.metro_acceptance_rate();
    st.set_metro_width(st.metro_width() * (acc > 0.55 ? 1.25 : (acc < 0.45 ? 0.8 : 1.0)));
    st.reset_metro_stats();
  }

  void estimate_mixture() {
    long good_xy = 0, good_grad = 0;
    for (long i = 0; i < params_.pilot_samples; ++i) {
      advance(xy_);
      advance(grad_);
      if (eta_from_theta(xy_.config()).max_abs() <= params_.delta) ++good_xy;
      if (eta_from_theta(grad_.config()).max_abs() <= params_.delta) ++good_grad;
    }
    const double n = static_cast<double>(params_.pilot_samples);
    mix_.c_hat = good_xy / n;
    mix_.cprime_hat = good_grad / n;
    mix_.se_c = std::sqrt(mix_.c_hat * (1.0 - mix_.c_hat) / n);
    mix_.se_cprime = std::sqrt(mix_.cprime_hat * (1.0 - mix_.cprime_hat) / n);
    mix_.accept_good =
        mix_.cprime_hat > 0.0
            ? std::clamp(1.0 - mix_.c_hat / mix_.cprime_hat, 0.0, 1.0)
            : 1.0;
  }

  const LatticeDomain* dom_;
  CouplingParams params_;
  SamplerState xy_;
  SamplerState grad_;
  MixtureEstimate mix_;
  long w_proposals_ = 0;
};

// Single coupled draw, as used by callers that only need one pair.
inline CoupledPair couple_xy_gradient(const LatticeDomain& dom, const Potential& vdelta,
                                      double beta, const CouplingParams& params_in,
                                      std::uint64_t seed) {
  if (vdelta.family() != PotentialFamily::TruncatedConvex)
    throw std::invalid_argument("coupling: potential must be truncated-convex");
  CouplingParams params = params_in;
  params.delta = vdelta.delta();
  params.seed = seed;
  XYGradientCoupler coupler(dom, beta, params);
  return coupler.draw();
}

struct CouplingDrawRow {
  bool agreed;
  int n_bad_edges;
  double max_abs_eta;
};

struct CouplingExperiment {
  std::vector<CouplingDrawRow> rows;
  long n_agreed = 0;
  MixtureEstimate mix;
  double agreement_rate = 0.0;
  // Pooled increments on a fixed bulk-edge subset, for distribution checks.
  std::vector<double> pool_coupled_xy;
  std::vector<double> pool_coupled_delta;
  std::vector<double> pool_direct_xy;
  std::vector<double> pool_direct_delta;
  double ks_p_xy = 0.0;     // coupled eta marginal vs direct XY sampling
  double ks_p_delta = 0.0;  // coupled eta^delta marginal vs direct mu^delta
  std::vector<int> subset_edges;
};

// Canonical bulk edges (both endpoints interior; on tiny domains, at least
// one interior endpoint), strided to at most max_edges. Contains no edge
// together with its reverse by construction.
inline std::vector<int> bulk_edge_subset(const LatticeDomain& dom, int max_edges) {
  std::vector<int> bulk;
  for (int e = 0; e < dom.num_edges(); ++e) {
    const Edge& ed = dom.edge(e);
    if (!dom.is_boundary(ed.tail) && !dom.is_boundary(ed.head)) bulk.push_back(e);
  }
  if (bulk.empty()) {
    for (int e = 0; e < dom.num_edges(); ++e) {
      const Edge& ed = dom.edge(e);
      if (!dom.is_boundary(ed.tail) || !dom.is_boundary(ed.head)) bulk.push_back(e);
    }
  }
  if (bulk.empty()) throw std::invalid_argument("no fluctuating edge in this domain");
  const int stride = std::max<int>(1, static_cast<int>(bulk.size()) / max_edges);
  std::vector<int> out;
  for (std::size_t i = 0; i < bulk.size(); i += stride) out.push_back(bulk[i]);
  return out;
}

inline CouplingExperiment run_coupling_experiment(const LatticeDomain& dom, double beta,
                                                  const CouplingParams& params, long n_draws) {
  CouplingExperiment ex;
  ex.subset_edges = bulk_edge_subset(dom, 48);
  XYGradientCoupler coupler(dom, beta, params);
  ex.mix = coupler.mixture();

  for (long i = 0; i < n_draws; ++i) {
    CoupledPair pair = coupler.draw();
    CouplingDrawRow row;
    row.agreed = pair.agreed;
    row.n_bad_edges = static_cast<int>(pair.bad_edges.size());
    row.max_abs_eta = pair.eta_xy.max_abs();
    ex.rows.push_back(row);
    if (pair.agreed) {
      ++ex.n_agreed;
      // Invariant: eta^delta equals eta edge for edge on agreement.
      if (pair.eta_delta.eta != pair.eta_xy.eta)
        throw std::logic_error("coupling: agreed pair differs");
    }
    for (int e : ex.subset_edges) {
      ex.pool_coupled_xy.push_back(pair.eta_xy.eta[e]);
      ex.pool_coupled_delta.push_back(pair.eta_delta.eta[e]);
    }
  }
  ex.agreement_rate = static_cast<double>(ex.n_agreed) / static_cast<double>(n_draws);

  // Independent direct chains for the marginal comparison.
  SampleParams sp;
  sp.n_chains = 2;
  sp.burnin = params.burnin;
  sp.thin = params.thin;
  sp.n_samples = std::max<long>(200, n_draws / 2);
  sp.seed = params.seed + 101;
  auto xy = sample_ensemble(dom, ModelSpec::xy(), Potential::cosine(), beta, sp);
  sp.seed = params.seed + 202;
  auto gd = sample_ensemble(dom, ModelSpec::gradient(),
                            Potential::truncated_convex(params.delta), beta, sp);
  for (const auto& chain : xy.samples)
    for (const auto& cfg : chain) {
      const auto g = eta_from_theta(cfg);
      for (int e : ex.subset_edges) ex.pool_direct_xy.push_back(g.eta[e]);
    }
  for (const auto& chain : gd.samples)
    for (const auto& cfg : chain) {
      const auto g = eta_from_theta(cfg);
      for (int e : ex.subset_edges) ex.pool_direct_delta.push_back(g.eta[e]);
    }
  ex.ks_p_xy = ks_two_sample_p(ex.pool_coupled_xy, ex.pool_direct_xy);
  ex.ks_p_delta = ks_two_sample_p(ex.pool_coupled_delta, ex.pool_direct_delta);
  return ex;
}

}  // namespace gflab
