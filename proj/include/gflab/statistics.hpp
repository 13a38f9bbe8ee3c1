#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gflab/gradient.hpp"
#include "gflab/lattice.hpp"
#include "gflab/stats_util.hpp"
#include "gflab/test_function.hpp"

namespace gflab {

// Precomputed pairing weights: <eta_tilde, phi> = sum_b w(b) eta(b) with
// w(b) = eps^{d/2-1} sqrt(beta) (phi(head) - phi(tail)) over canonical edges.
struct FluctWeights {
  std::vector<double> w;
  double q_discrete = 0.0;    // eps^{d-2} sum (grad phi)^2
  double q_continuum = 0.0;   // continuum Dirichlet energy
  bool support_warning = false;

  double apply(const GradientConfig& g) const {
    double s = 0.0;
    for (std::size_t e = 0; e < w.size(); ++e) s += w[e] * g.eta[e];
    return s;
  }
};

// phi nonzero within one lattice spacing of the pinned boundary: Eq-style
// pairing still evaluates, but boundary pinning contaminates the field there.
inline bool fluct_support_violation(const TestFunction& phi, const LatticeDomain& dom) {
  for (int v = 0; v < dom.num_vertices(); ++v) {
    bool near = dom.is_boundary(v);
    if (!near) {
      for (int axis = 0; axis < dom.dim() && !near; ++axis)
        for (int dir = 0; dir < 2 && !near; ++dir) {
          const int w = dom.neighbor(v, axis, dir);
          if (w >= 0 && dom.is_boundary(w)) near = true;
        }
    }
    if (near && phi.value_at_vertex(dom, v) != 0.0) return true;
  }
  return false;
}

inline FluctWeights make_fluct_weights(const TestFunction& phi, const LatticeDomain& dom,
                                       double beta) {
  FluctWeights fw;
  std::vector<double> vals(dom.num_vertices());
  for (int v = 0; v < dom.num_vertices(); ++v) vals[v] = phi.value_at_vertex(dom, v);
  const double scale =
      std::pow(dom.spacing(), 0.5 * dom.dim() - 1.0) * std::sqrt(beta);
  fw.w.resize(dom.num_edges());
  double q = 0.0;
  for (int e = 0; e < dom.num_edges(); ++e) {
    const auto& ed = dom.edge(e);
    const double g = vals[ed.head] - vals[ed.tail];
    fw.w[e] = scale * g;
    q += g * g;
  }
  fw.q_discrete = std::pow(dom.spacing(), dom.dim() - 2) * q;
  fw.q_continuum = dirichlet_energy_continuum(phi);
  fw.support_warning = fluct_support_violation(phi, dom);
  return fw;
}

// The rescaled pairing for one configuration.
inline double fluctuation_functional(const GradientConfig& g, const TestFunction& phi,
                                     double beta) {
  return make_fluct_weights(phi, *g.dom, beta).apply(g);
}

struct CharFnRow {
  double t;
  double re, im;
  double se_re, se_im;
  double ref_discrete;   // exp(-t^2 Q_eps / 2)
  double ref_continuum;  // exp(-t^2 <dphi,dphi> / 2)
};

struct CharFnEstimate {
  std::vector<CharFnRow> rows;
  double q_discrete = 0.0;
  double q_continuum = 0.0;
  long n = 0;
};

// Empirical characteristic function of fluctuation samples with jackknife
// standard errors over chains.
inline CharFnEstimate empirical_char_fn(const std::vector<std::vector<double>>& by_chain,
                                        const std::vector<double>& t_grid, double q_discrete,
                                        double q_continuum) {
  long n = 0;
  for (const auto& c : by_chain) n += static_cast<long>(c.size());
  if (n < 100) throw std::invalid_argument("char fn: need at least 100 samples");
  CharFnEstimate est;
  est.q_discrete = q_discrete;
  est.q_continuum = q_continuum;
  est.n = n;
  for (double t : t_grid) {
    std::vector<std::vector<double>> cosv(by_chain.size()), sinv(by_chain.size());
    for (std::size_t c = 0; c < by_chain.size(); ++c) {
      cosv[c].reserve(by_chain[c].size());
      sinv[c].reserve(by_chain[c].size());
      for (double v : by_chain[c]) {
        cosv[c].push_back(std::cos(t * v));
        sinv[c].push_back(std::sin(t * v));
      }
    }
    CharFnRow row;
    row.t = t;
    if (by_chain.size() >= 2) {
      const auto re = jackknife_mean(cosv);
      const auto im = jackknife_mean(sinv);
      row.re = re.value;
      row.im = im.value;
      row.se_re = re.se;
      row.se_im = im.se;
    } else {
      std::vector<const std::vector<double>*> all{&cosv[0]};
      row.re = pooled_mean(all);
      all[0] = &sinv[0];
      row.im = pooled_mean(all);
      row.se_re = std::sqrt(vec_variance(cosv[0]) / cosv[0].size());
      row.se_im = std::sqrt(vec_variance(sinv[0]) / sinv[0].size());
    }
    if (t == 0.0) {
      row.re = 1.0;
      row.im = 0.0;
      row.se_re = row.se_im = 0.0;
    }
    row.ref_discrete = std::exp(-0.5 * t * t * q_discrete);
    row.ref_continuum = std::exp(-0.5 * t * t * q_continuum);
    est.rows.push_back(row);
  }
  return est;
}

inline std::vector<double> default_t_grid(double q) {
  const double s = 1.0 / std::sqrt(q);
  return {0.25 * s, 0.5 * s, 1.0 * s, 1.5 * s, 2.0 * s};
}

struct GaussianLimitReport {
  CharFnEstimate cf;
  bool applicable = true;  // hypothesis check; report-only when false
  bool pass = false;
  double max_abs_dev = 0.0;   // worst |re - ref_discrete|
  double max_dev_allowed = 0.0;
  Estimate var_ratio;         // Var<eta~,phi> / Q_eps
  double skew = 0.0;
  double kurt = 0.0;
  bool support_warning = false;
  std::string note;
};

// Pass iff the empirical cosine transform matches exp(-t^2 Q_eps / 2) at
// every grid point within max(3 SE, 0.01). Q_eps is the discrete Dirichlet
// energy at the run's eps: the Gaussian limit is an eps->0 statement, so at
// fixed eps the discrete form is the correct finite-size target.
inline GaussianLimitReport gaussian_limit_report(
    const std::vector<std::vector<double>>& fluct_by_chain, const FluctWeights& fw,
    const std::vector<double>& t_grid_in, bool hypothesis_ok = true,
    const std::string& note = "") {
  long n = 0;
  for (const auto& c : fluct_by_chain) n += static_cast<long>(c.size());
  if (n < 1000)
    throw std::invalid_argument("gaussian_limit_report: need at least 1000 samples");
  GaussianLimitReport rep;
  rep.note = note;
  rep.applicable = hypothesis_ok;
  rep.support_warning = fw.support_warning;
  const std::vector<double> t_grid =
      t_grid_in.empty() ? default_t_grid(fw.q_discrete) : t_grid_in;
  rep.cf = empirical_char_fn(fluct_by_chain, t_grid, fw.q_discrete, fw.q_continuum);

  bool ok = true;
  for (const auto& row : rep.cf.rows) {
    const double dev = std::fabs(row.re - row.ref_discrete);
    const double allowed = std::max(3.0 * row.se_re, 0.01);
    rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
    rep.max_dev_allowed = std::max(rep.max_dev_allowed, allowed);
    if (dev > allowed) ok = false;
  }
  auto var = jackknife_variance(fluct_by_chain);
  rep.var_ratio = {var.value / fw.q_discrete, var.se / fw.q_discrete};
  std::vector<double> pooled;
  for (const auto& c : fluct_by_chain) pooled.insert(pooled.end(), c.begin(), c.end());
  rep.skew = skewness(pooled);
  rep.kurt = excess_kurtosis(pooled);
  rep.pass = ok;
  return rep;
}

struct ContourEstimate {
  long k = 0;
  long n = 0;
  WilsonInterval wilson{0, 0, 0};
  int n_edges = 0;
  double a = 0.0;
  double beta = 0.0;
  double bound_convex = 0.0;  // (exp(1 - beta a^2/pi^2))^{|C|}
  bool convex_case = false;
};

// Joint exceedance P(all edges in C have |eta| > a) with a Wilson interval.
// C must not contain an edge with its reverse (canonical edges never do);
// the XY case allows a in (0, pi], the convex case requires 0 < a < delta,
// delta <= pi/3.
inline ContourEstimate contour_probability(const std::vector<std::vector<GradientConfig>>& by_chain,
                                           const std::vector<int>& edge_set, double a,
                                           double beta, bool convex_case,
                                           std::optional<double> delta = std::nullopt) {
  if (edge_set.empty()) throw std::invalid_argument("contour: empty edge set");
  if (convex_case) {
    if (!delta || !(*delta <= kPi / 3 + 1e-12))
      throw std::invalid_argument("contour: convex case requires delta <= pi/3");
    if (!(a > 0.0 && a < *delta))
      throw std::invalid_argument("contour: convex case requires 0 < a < delta");
  } else {
    if (!(a > 0.0 && a <= kPi))
      throw std::invalid_argument("contour: XY case requires a in (0, pi]");
  }
  ContourEstimate est;
  est.a = a;
  est.beta = beta;
  est.convex_case = convex_case;
  est.n_edges = static_cast<int>(edge_set.size());
  for (const auto& chain : by_chain) {
    for (const auto& g : chain) {
      bool all = true;
      for (int e : edge_set)
        if (std::fabs(g.eta[e]) <= a) { all = false; break; }
      est.k += all ? 1 : 0;
      ++est.n;
    }
  }
  est.wilson = wilson_interval(est.k, est.n, 2.0);
  est.bound_convex =
      std::exp(static_cast<double>(est.n_edges) * (1.0 - beta * a * a / (kPi * kPi)));
  return est;
}

struct ContourCell {
  double beta;
  double a;
  long k;       // pooled exceedance count
  long n;       // pooled edge-draws
  double logp;  // log(k/n), only defined when k > 0
  double var_logp;
};

struct ContourRegression {
  LineFit fit;              // log P vs beta a^2
  double fitted_c = 0.0;    // exp(intercept), the XY bound's constant
  std::vector<ContourCell> used;
  std::vector<ContourCell> zero_cells;  // excluded: no exceedance observed
};

// Weighted regression of log P(|eta(b)| > a) on beta a^2. Cells with zero
// observed exceedances carry no log information and are reported separately
// (they are trivially consistent with any exponential bound).
inline ContourRegression contour_rate_regression(const std::vector<ContourCell>& cells) {
  ContourRegression out;
  std::vector<double> x, y, var;
  for (const auto& c : cells) {
    if (c.k == 0) {
      out.zero_cells.push_back(c);
      continue;
    }
    out.used.push_back(c);
    x.push_back(c.beta * c.a * c.a);
    y.push_back(c.logp);
    var.push_back(c.var_logp);
  }
  if (x.size() < 3) throw std::invalid_argument("contour regression: need >= 3 informative cells");
  out.fit = weighted_line_fit(x, y, var);
  out.fitted_c = std::exp(out.fit.intercept);
  return out;
}

struct BLEdgeRow {
  int edge;
  double var;
  double se;
};

struct BLReport {
  double bound_var = 0.0;  // 1 / inf V~''
  bool var_pass = true;
  BLEdgeRow worst{-1, 0, 0};
  struct MgfRow {
    double t;
    double mgf;
    double se;
    double bound;
    bool pass;
  };
  std::vector<MgfRow> mgf;
  bool mgf_pass = true;
};

// Brascamp-Lieb checks in the eta_tilde normalization: Var(eta~(e)) <= 1/inf V''
// edgewise, and E[exp(t <eta~, phi>)] <= exp(t^2 Q_eps / (2 inf V'')).
inline BLReport brascamp_lieb_check(
    const std::vector<std::vector<GradientConfig>>& by_chain, const Potential& pot,
    double beta, const FluctWeights& fw, const std::vector<double>& mgf_t) {
  if (!pot.strictly_convex())
    throw std::invalid_argument("brascamp_lieb: potential is not strictly convex");
  if (by_chain.size() < 2) throw std::invalid_argument("brascamp_lieb: need >= 2 chains");
  BLReport rep;
  const double cmin = pot.c_minus();
  rep.bound_var = 1.0 / cmin;
  const LatticeDomain& dom = *by_chain[0][0].dom;
  const double sb = std::sqrt(beta);

  for (int e = 0; e < dom.num_edges(); ++e) {
    std::vector<std::vector<double>> vals(by_chain.size());
    for (std::size_t c = 0; c < by_chain.size(); ++c)
      for (const auto& g : by_chain[c]) vals[c].push_back(sb * g.eta[e]);
    const auto est = jackknife_variance(vals);
    if (est.value - rep.bound_var > rep.worst.var - rep.bound_var || rep.worst.edge < 0)
      rep.worst = {e, est.value, est.se};
    if (est.value > rep.bound_var + 3.0 * est.se) rep.var_pass = false;
  }

  for (double t : mgf_t) {
    std::vector<std::vector<double>> expv(by_chain.size());
    for (std::size_t c = 0; c < by_chain.size(); ++c)
      for (const auto& g : by_chain[c]) expv[c].push_back(std::exp(t * fw.apply(g)));
    const auto est = jackknife_mean(expv);
    const double bound = std::exp(0.5 * t * t * fw.q_discrete / cmin);
    const bool pass = est.value <= bound + 3.0 * est.se;
    rep.mgf.push_back({t, est.value, est.se, bound, pass});
    if (!pass) rep.mgf_pass = false;
  }
  return rep;
}

}  // namespace gflab
