#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gflab/lattice.hpp"
#include "gflab/potential.hpp"
#include "gflab/rng.hpp"
#include "gflab/sampler.hpp"

namespace gflab {

enum class EtaSource { FromXY, FromGradientModel, Coupled };

// Increment field on canonical directed edges. Values on reversed edges are
// defined by antisymmetry, eta(j,i) = -eta(i,j), so antisymmetry holds by
// construction.
struct GradientConfig {
  const LatticeDomain* dom = nullptr;
  EtaSource source = EtaSource::FromGradientModel;
  std::vector<double> eta;  // per canonical edge

  double on(int edge, int sign) const { return sign > 0 ? eta[edge] : -eta[edge]; }
  double max_abs() const {
    double m = 0.0;
    for (double v : eta) m = std::max(m, std::fabs(v));
    return m;
  }
};

// eta(b) for b = (i,j): the smallest representative of theta(j) - theta(i)
// mod 2pi for XY-type configurations, the plain difference for gradient
// models.
inline GradientConfig eta_from_theta(const SpinConfig& cfg) {
  GradientConfig g;
  g.dom = cfg.dom;
  g.source = cfg.model.wraps() ? EtaSource::FromXY : EtaSource::FromGradientModel;
  const int ne = cfg.dom->num_edges();
  g.eta.resize(ne);
  for (int e = 0; e < ne; ++e) {
    double raw = cfg.edge_difference(e);
    if (cfg.model.wraps()) {
      if (raw < -kPi) raw += 2.0 * kPi;
      else if (raw >= kPi) raw -= 2.0 * kPi;
    }
    g.eta[e] = raw;
  }
  return g;
}

struct VortexCensus {
  std::vector<int> charge;            // per plaquette
  std::vector<int> charged_plaquettes;
  long n_plus = 0;
  long n_minus = 0;
  double max_residual = 0.0;

  bool vortex_free() const { return n_plus == 0 && n_minus == 0; }
};

// Per-plaquette winding charge k_P with 2 pi k_P equal to the oriented
// plaquette sum. A residual above tol means eta was not derived from any
// theta and the configuration is corrupted.
inline VortexCensus vortex_census(const GradientConfig& g, double tol = 1e-6) {
  VortexCensus census;
  const auto& plaqs = g.dom->plaquettes();
  census.charge.resize(plaqs.size());
  for (std::size_t i = 0; i < plaqs.size(); ++i) {
    const Plaquette& p = plaqs[i];
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += g.on(p.edge[k], p.sign[k]);
    const long k = std::lround(s / (2.0 * kPi));
    const double residual = std::fabs(s - 2.0 * kPi * static_cast<double>(k));
    census.max_residual = std::max(census.max_residual, residual);
    if (residual > tol)
      throw std::runtime_error("vortex_census: plaquette sum " + std::to_string(s) +
                               " is not a 2*pi multiple; corrupted configuration");
    if (k > 2 || k < -2)
      throw std::runtime_error("vortex_census: |k_P| > 2 is impossible for genuine angles");
    census.charge[i] = static_cast<int>(k);
    if (k > 0) ++census.n_plus;
    if (k < 0) ++census.n_minus;
    if (k != 0) census.charged_plaquettes.push_back(static_cast<int>(i));
  }
  return census;
}

// Oriented loop sum of eta; an integer multiple of 2 pi for XY-derived
// fields, zero for exact gradients.
inline double winding_sum(const GradientConfig& g, const std::vector<DirectedEdge>& loop) {
  if (loop.empty()) throw std::invalid_argument("winding_sum: empty loop");
  for (std::size_t k = 0; k < loop.size(); ++k) {
    if (loop[k].head != loop[(k + 1) % loop.size()].tail)
      throw std::invalid_argument("winding_sum: loop does not close");
  }
  double s = 0.0;
  for (const auto& de : loop) s += g.on(de.edge, de.sign);
  return s;
}

struct PhiResult {
  bool ok = false;
  std::string why;
  std::vector<double> phi;
  VortexCensus census;
};

namespace detail {

// Path sum from `from` to `to` along the canonical lexicographic staircase
// (match coordinate 0 first, then 1, ...). Returns nothing if the staircase
// leaves the domain, which cannot happen on rectangles.
inline std::optional<double> staircase_sum(const GradientConfig& g, int from, int to) {
  const LatticeDomain& dom = *g.dom;
  const int d = dom.dim();
  double acc = 0.0;
  int v = from;
  std::vector<int> cur(dom.coords(from), dom.coords(from) + d);
  for (int axis = 0; axis < d; ++axis) {
    const int target = dom.coords(to)[axis];
    while (cur[axis] != target) {
      const int dir = cur[axis] < target ? 0 : 1;
      const int w = dom.neighbor(v, axis, dir);
      if (w < 0) return std::nullopt;
      const int e = dir == 0 ? dom.edge_from(v, axis) : dom.edge_from(w, axis);
      acc += g.on(e, dir == 0 ? +1 : -1);
      cur[axis] += dir == 0 ? 1 : -1;
      v = w;
    }
  }
  return acc;
}

}  // namespace detail

// Potential reconstruction Phi with Phi(anchor) = 0 and eta = grad Phi,
// defined by staircase path sums. Fails if the census is nonzero. Verifies
// path-independence on 100 random alternative lattice paths, and for
// XY-derived fields that theta = Phi mod 2pi.
inline PhiResult reconstruct_phi(const GradientConfig& g, int anchor,
                                 const SpinConfig* theta_check = nullptr) {
  PhiResult out;
  out.census = vortex_census(g);
  if (!out.census.vortex_free()) {
    out.why = "configuration has " + std::to_string(out.census.n_plus) + " positive and " +
              std::to_string(out.census.n_minus) + " negative vortices";
    return out;
  }
  const LatticeDomain& dom = *g.dom;
  const int nv = dom.num_vertices();
  out.phi.assign(nv, 0.0);
  std::vector<std::uint8_t> have(nv, 0);
  have[anchor] = 1;
  bool staircase_ok = true;
  for (int v = 0; v < nv && staircase_ok; ++v) {
    if (v == anchor) continue;
    if (auto s = detail::staircase_sum(g, anchor, v)) {
      out.phi[v] = *s;
      have[v] = 1;
    } else {
      staircase_ok = false;
    }
  }
  if (!staircase_ok) {
    // Non-rectangular domain: fill by BFS over the edge graph instead.
    std::fill(have.begin(), have.end(), 0);
    have[anchor] = 1;
    std::vector<int> queue{anchor};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int v = queue[qi];
      for (const auto& [e, sgn] : dom.incident_edges(v)) {
        const Edge& ed = dom.edge(e);
        const int w = sgn > 0 ? ed.head : ed.tail;
        if (have[w]) continue;
        out.phi[w] = out.phi[v] + g.on(e, sgn);
        have[w] = 1;
        queue.push_back(w);
      }
    }
    for (int v = 0; v < nv; ++v)
      if (!have[v]) {
        out.why = "domain is not edge-connected";
        return out;
      }
  }

  // Path independence on random alternative staircases (fixed seed).
  CounterRng rng(0x70686921ULL, 0);
  const int d = dom.dim();
  for (int trial = 0; trial < 100; ++trial) {
    const int target = static_cast<int>(rng.next_double() * nv);
    // Random interleaving of the coordinate moves of the staircase.
    std::vector<int> moves;  // encoded axis*2 + dir
    for (int axis = 0; axis < d; ++axis) {
      const int diff = dom.coords(target)[axis] - dom.coords(anchor)[axis];
      for (int k = 0; k < std::abs(diff); ++k) moves.push_back(axis * 2 + (diff > 0 ? 0 : 1));
    }
    for (std::size_t i = moves.size(); i > 1; --i)
      std::swap(moves[i - 1], moves[static_cast<std::size_t>(rng.next_double() * i)]);
    double acc = 0.0;
    int v = anchor;
    bool valid = true;
    for (int mv : moves) {
      const int axis = mv / 2, dir = mv % 2;
      const int w = dom.neighbor(v, axis, dir);
      if (w < 0) { valid = false; break; }
      const int e = dir == 0 ? dom.edge_from(v, axis) : dom.edge_from(w, axis);
      acc += g.on(e, dir == 0 ? +1 : -1);
      v = w;
    }
    if (!valid) continue;
    if (std::fabs(acc - out.phi[target]) > 1e-8) {
      out.why = "path-independence check failed at vertex " + std::to_string(target);
      return out;
    }
  }

  if (theta_check != nullptr && g.source == EtaSource::FromXY) {
    for (int v = 0; v < nv; ++v) {
      const double diff = wrap_angle(out.phi[v] - theta_check->theta[v]);
      if (std::fabs(diff) > 1e-8 && std::fabs(std::fabs(diff) - 2.0 * kPi) > 1e-8) {
        out.why = "theta != Phi mod 2pi at vertex " + std::to_string(v);
        return out;
      }
    }
  }
  out.ok = true;
  return out;
}

}  // namespace gflab
