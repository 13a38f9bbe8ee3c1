#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gflab {

// Canonical (positively oriented) nearest-neighbor edge: head = tail + eps*e_axis.
// The reversed edge is represented implicitly by sign -1.
struct Edge {
  int tail;
  int head;
  int axis;
};

// A directed edge as used in loops: canonical edge index plus traversal sign.
struct DirectedEdge {
  int tail;
  int head;
  int edge;  // canonical edge index
  int sign;  // +1 if traversed tail->head, -1 otherwise
};

// Oriented unit square in the (axis_a, axis_b) coordinate plane, anchored at
// its lexicographically minimal corner and traversed counterclockwise:
// c0 -> c0+ea -> c0+ea+eb -> c0+eb -> c0.
struct Plaquette {
  std::array<int, 4> corner;
  std::array<int, 4> edge;
  std::array<int, 4> sign;
  int axis_a;
  int axis_b;
};

// Discretization D^eps = D cap eps*Z^d of a bounded domain, with its directed
// edge set, Dirichlet boundary, and plaquette structure. Immutable after
// construction; safe to share read-only across threads.
//
// Vertices are indexed in row-major lexicographic order of their integer
// coordinates (first coordinate most significant), which fixes all
// downstream tie-breaking and file layouts.
class LatticeDomain {
 public:
  int dim() const { return dim_; }
  double spacing() const { return eps_; }
  const std::vector<double>& box_lo() const { return box_lo_; }
  const std::vector<double>& box_hi() const { return box_hi_; }

  int num_vertices() const { return static_cast<int>(coords_.size()) / dim_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_plaquettes() const { return static_cast<int>(plaquettes_.size()); }
  int num_interior() const { return static_cast<int>(interior_.size()); }
  int num_boundary() const { return num_vertices() - num_interior(); }

  const int* coords(int v) const { return coords_.data() + static_cast<std::size_t>(v) * dim_; }
  double coord_real(int v, int axis) const { return eps_ * coords(v)[axis]; }
  bool is_boundary(int v) const { return boundary_[v] != 0; }
  const std::vector<int>& interior() const { return interior_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Plaquette>& plaquettes() const { return plaquettes_; }

  // Incident canonical edges of a vertex as (edge index, +1 if v is the tail).
  const std::vector<std::pair<int, int>>& incident_edges(int v) const {
    return incident_[v];
  }

  // Neighbor vertex along +axis (dir=0) or -axis (dir=1); -1 if absent.
  int neighbor(int v, int axis, int dir) const {
    return nbr_[static_cast<std::size_t>(v) * 2 * dim_ + 2 * axis + dir];
  }

  // Canonical edge from v along +axis; -1 if absent.
  int edge_from(int v, int axis) const {
    return edge_from_[static_cast<std::size_t>(v) * dim_ + axis];
  }

  int vertex_at(const std::vector<int>& c) const {
    std::size_t cell = 0;
    for (int j = 0; j < dim_; ++j) {
      if (c[j] < n_min_[j] || c[j] > n_max_[j]) return -1;
      cell = cell * extent_[j] + static_cast<std::size_t>(c[j] - n_min_[j]);
    }
    return cell_to_vertex_[cell];
  }

  friend LatticeDomain build_predicate_domain(
      int d, double eps, const std::vector<double>& lo, const std::vector<double>& hi,
      const std::function<bool(const std::vector<double>&)>& inside);

 private:
  int dim_ = 0;
  double eps_ = 0.0;
  std::vector<double> box_lo_, box_hi_;
  std::vector<int> n_min_, n_max_;
  std::vector<std::size_t> extent_;
  std::vector<int> coords_;             // nv * dim integer coordinates
  std::vector<std::uint8_t> boundary_;  // 1 if Dirichlet-pinned
  std::vector<int> interior_;
  std::vector<Edge> edges_;
  std::vector<int> edge_from_;  // nv * dim, -1 if absent
  std::vector<int> nbr_;        // nv * 2*dim
  std::vector<std::vector<std::pair<int, int>>> incident_;
  std::vector<Plaquette> plaquettes_;
  std::vector<int> cell_to_vertex_;  // bounding-box cell -> vertex index
};

// Lattice points of eps*Z^d inside the closed box [lo,hi] that also satisfy
// the membership predicate. Rectangular boxes use the always-true predicate
// and are discretely simply connected by construction; for general
// predicates simple connectivity must be checked, not assumed.
inline LatticeDomain build_predicate_domain(
    int d, double eps, const std::vector<double>& lo, const std::vector<double>& hi,
    const std::function<bool(const std::vector<double>&)>& inside) {
  if (d < 2) throw std::invalid_argument("lattice: dimension must be >= 2");
  if (!(eps > 0.0)) throw std::invalid_argument("lattice: eps must be positive");
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
    throw std::invalid_argument("lattice: corner dimension mismatch");
  for (int j = 0; j < d; ++j)
    if (!(lo[j] < hi[j])) throw std::invalid_argument("lattice: box is empty");

  LatticeDomain dom;
  dom.dim_ = d;
  dom.eps_ = eps;
  dom.box_lo_ = lo;
  dom.box_hi_ = hi;
  dom.n_min_.resize(d);
  dom.n_max_.resize(d);
  dom.extent_.resize(d);
  const double tol = 1e-9;
  std::size_t ncells = 1;
  for (int j = 0; j < d; ++j) {
    dom.n_min_[j] = static_cast<int>(std::ceil(lo[j] / eps - tol));
    dom.n_max_[j] = static_cast<int>(std::floor(hi[j] / eps + tol));
    if (dom.n_min_[j] > dom.n_max_[j])
      throw std::invalid_argument("lattice: no lattice point inside the box");
    dom.extent_[j] = static_cast<std::size_t>(dom.n_max_[j] - dom.n_min_[j] + 1);
    ncells *= dom.extent_[j];
  }

  // Enumerate cells in row-major lexicographic order of integer coordinates.
  dom.cell_to_vertex_.assign(ncells, -1);
  std::vector<int> c(d);
  std::vector<double> x(d);
  for (std::size_t cell = 0; cell < ncells; ++cell) {
    std::size_t rem = cell;
    for (int j = d - 1; j >= 0; --j) {
      c[j] = dom.n_min_[j] + static_cast<int>(rem % dom.extent_[j]);
      rem /= dom.extent_[j];
    }
    for (int j = 0; j < d; ++j) x[j] = eps * c[j];
    if (!inside(x)) continue;
    dom.cell_to_vertex_[cell] = static_cast<int>(dom.coords_.size()) / d;
    dom.coords_.insert(dom.coords_.end(), c.begin(), c.end());
  }
  const int nv = dom.num_vertices();
  if (nv == 0) throw std::invalid_argument("lattice: domain contains no vertex");

  // Neighbor table and boundary set: a vertex is pinned iff some nearest
  // neighbor in eps*Z^d falls outside the vertex set.
  dom.nbr_.assign(static_cast<std::size_t>(nv) * 2 * d, -1);
  dom.boundary_.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    for (int j = 0; j < d; ++j) {
      for (int dir = 0; dir < 2; ++dir) {
        std::vector<int> cc(dom.coords(v), dom.coords(v) + d);
        cc[j] += (dir == 0 ? 1 : -1);
        const int w = dom.vertex_at(cc);
        dom.nbr_[static_cast<std::size_t>(v) * 2 * d + 2 * j + dir] = w;
        if (w < 0) dom.boundary_[v] = 1;
      }
    }
  }
  for (int v = 0; v < nv; ++v)
    if (!dom.boundary_[v]) dom.interior_.push_back(v);

  // Canonical edges (v, v + eps*e_axis), enumerated by tail then axis.
  dom.edge_from_.assign(static_cast<std::size_t>(nv) * d, -1);
  dom.incident_.assign(nv, {});
  for (int v = 0; v < nv; ++v) {
    for (int j = 0; j < d; ++j) {
      const int w = dom.neighbor(v, j, 0);
      if (w < 0) continue;
      const int e = static_cast<int>(dom.edges_.size());
      dom.edges_.push_back({v, w, j});
      dom.edge_from_[static_cast<std::size_t>(v) * d + j] = e;
      dom.incident_[v].push_back({e, +1});
      dom.incident_[w].push_back({e, -1});
    }
  }

  // Plaquettes per ordered coordinate pair, anchored at the minimal corner,
  // counterclockwise in the (a,b) plane.
  for (int v = 0; v < nv; ++v) {
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        const int c1 = dom.neighbor(v, a, 0);
        const int c3 = dom.neighbor(v, b, 0);
        if (c1 < 0 || c3 < 0) continue;
        const int c2 = dom.neighbor(c1, b, 0);
        if (c2 < 0 || c2 != dom.neighbor(c3, a, 0)) continue;
        Plaquette p;
        p.corner = {v, c1, c2, c3};
        p.axis_a = a;
        p.axis_b = b;
        p.edge = {dom.edge_from(v, a), dom.edge_from(c1, b), dom.edge_from(c3, a),
                  dom.edge_from(v, b)};
        p.sign = {+1, +1, -1, -1};
        dom.plaquettes_.push_back(p);
      }
    }
  }
  return dom;
}

// Axis-aligned rectangular parallelepiped [a_1,b_1] x ... x [a_d,b_d].
inline LatticeDomain build_rect_domain(int d, double eps, const std::vector<double>& lo,
                                       const std::vector<double>& hi) {
  return build_predicate_domain(d, eps, lo, hi,
                                [](const std::vector<double>&) { return true; });
}

// Directed edge sequence tracing a closed nearest-neighbor vertex cycle.
// The cycle may be given with or without the repeated final vertex.
inline std::vector<DirectedEdge> loop_edges(const LatticeDomain& dom,
                                            std::vector<int> cycle) {
  if (cycle.size() >= 2 && cycle.front() == cycle.back()) cycle.pop_back();
  if (cycle.size() < 2) throw std::invalid_argument("loop_edges: cycle too short");
  std::vector<DirectedEdge> out;
  const int n = static_cast<int>(cycle.size());
  for (int k = 0; k < n; ++k) {
    const int u = cycle[k];
    const int v = cycle[(k + 1) % n];
    int found = -1, sign = 0;
    for (const auto& [e, s] : dom.incident_edges(u)) {
      if (s > 0 && dom.edge(e).head == v) { found = e; sign = +1; break; }
      if (s < 0 && dom.edge(e).tail == v) { found = e; sign = -1; break; }
    }
    if (found < 0)
      throw std::invalid_argument("loop_edges: consecutive vertices " + std::to_string(u) +
                                  "," + std::to_string(v) + " are not nearest neighbors");
    out.push_back({u, v, found, sign});
  }
  return out;
}

namespace detail {

// Rank over GF(p), p = 2^61 - 1. Entries here are +-1 with four nonzeros per
// row, so the modular rank coincides with the rank over the rationals.
class Mod61Matrix {
 public:
  static constexpr std::uint64_t kP = (1ULL << 61) - 1;

  explicit Mod61Matrix(int ncols) : ncols_(ncols) {}

  void add_row(const std::vector<std::pair<int, std::int64_t>>& entries) {
    std::vector<std::uint64_t> row(ncols_, 0);
    for (const auto& [c, val] : entries) {
      const std::uint64_t v = val >= 0 ? static_cast<std::uint64_t>(val % static_cast<std::int64_t>(kP))
                                       : kP - static_cast<std::uint64_t>((-val) % static_cast<std::int64_t>(kP));
      row[c] = add(row[c], v % kP);
    }
    rows_.push_back(std::move(row));
  }

  int rank() const {
    std::vector<std::vector<std::uint64_t>> m = rows_;
    int r = 0;
    for (int col = 0; col < ncols_ && r < static_cast<int>(m.size()); ++col) {
      int pivot = -1;
      for (int i = r; i < static_cast<int>(m.size()); ++i)
        if (m[i][col] != 0) { pivot = i; break; }
      if (pivot < 0) continue;
      std::swap(m[r], m[pivot]);
      const std::uint64_t inv = inverse(m[r][col]);
      for (int i = r + 1; i < static_cast<int>(m.size()); ++i) {
        if (m[i][col] == 0) continue;
        const std::uint64_t f = mul(m[i][col], inv);
        for (int j = col; j < ncols_; ++j)
          m[i][j] = sub(m[i][j], mul(f, m[r][j]));
      }
      ++r;
    }
    return r;
  }

 private:
  static std::uint64_t add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    if (s >= kP) s -= kP;
    return s;
  }
  static std::uint64_t sub(std::uint64_t a, std::uint64_t b) { return add(a, kP - b); }
  static std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
    const unsigned __int128 z = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(z & kP);
    std::uint64_t hi = static_cast<std::uint64_t>(z >> 61);
    return add(lo, hi);
  }
  static std::uint64_t inverse(std::uint64_t a) {
    // Fermat: a^(p-2) mod p.
    std::uint64_t result = 1, base = a, e = kP - 2;
    while (e) {
      if (e & 1) result = mul(result, base);
      base = mul(base, base);
      e >>= 1;
    }
    return result;
  }

  int ncols_;
  std::vector<std::vector<std::uint64_t>> rows_;
};

}  // namespace detail

// True iff the plaquette cycles span the whole cycle space of the domain
// graph: rank of the plaquette-boundary incidence equals
// |edges| - |vertices| + |connected components|.
inline bool check_simply_connected(const LatticeDomain& dom) {
  const int nv = dom.num_vertices();
  const int ne = dom.num_edges();

  // Connected components by union-find over canonical edges.
  std::vector<int> parent(nv);
  for (int v = 0; v < nv; ++v) parent[v] = v;
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) { parent[v] = parent[parent[v]]; v = parent[v]; }
    return v;
  };
  for (const Edge& e : dom.edges()) {
    const int a = find(e.tail), b = find(e.head);
    if (a != b) parent[a] = b;
  }
  int ncomp = 0;
  for (int v = 0; v < nv; ++v)
    if (find(v) == v) ++ncomp;

  const int cycle_rank = ne - nv + ncomp;
  if (cycle_rank == 0) return true;

  detail::Mod61Matrix m(ne);
  for (const Plaquette& p : dom.plaquettes()) {
    std::vector<std::pair<int, std::int64_t>> row;
    for (int k = 0; k < 4; ++k) row.push_back({p.edge[k], p.sign[k]});
    m.add_row(row);
  }
  return m.rank() == cycle_rank;
}

}  // namespace gflab
