#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gflab/lattice.hpp"

namespace gflab {

enum class TestFnKind { Bump, SineMode, PolyBump };

// Smooth test function phi with exact closed-form evaluation and exact
// partial derivatives, product-structured over coordinates:
//
//   bump       prod_a exp(-1/(1-u_a^2)) on |u_a| < 1, u = (x-center)/halfwidth
//   sine-mode  prod_a sin(k_a pi (x_a-lo_a)/L_a) on the box
//   poly-bump  prod_a (1-u_a^2)^p on |u_a| < 1
//
// The bump families vanish outside a compact subset of the open domain; the
// sine mode vanishes on the box faces only, so estimators that require a
// strictly interior support flag it (boundary pinning contaminates within
// one lattice spacing).
class TestFunction {
 public:
  static TestFunction bump(std::vector<double> center, std::vector<double> halfwidth) {
    TestFunction f;
    f.kind_ = TestFnKind::Bump;
    f.center_ = std::move(center);
    f.halfwidth_ = std::move(halfwidth);
    f.name_ = "bump";
    f.finish_bump_support();
    return f;
  }

  // Bump scaled to the middle half of the box.
  static TestFunction bump_for_box(const std::vector<double>& lo,
                                   const std::vector<double>& hi) {
    std::vector<double> c(lo.size()), h(lo.size());
    for (std::size_t j = 0; j < lo.size(); ++j) {
      c[j] = 0.5 * (lo[j] + hi[j]);
      h[j] = 0.25 * (hi[j] - lo[j]);
    }
    return bump(std::move(c), std::move(h));
  }

  static TestFunction sine_mode(std::vector<double> lo, std::vector<double> hi,
                                std::vector<int> k) {
    TestFunction f;
    f.kind_ = TestFnKind::SineMode;
    f.lo_ = std::move(lo);
    f.hi_ = std::move(hi);
    f.kmode_ = std::move(k);
    f.name_ = "sine";
    f.support_lo_ = f.lo_;
    f.support_hi_ = f.hi_;
    return f;
  }

  static TestFunction first_sine_mode(const std::vector<double>& lo,
                                      const std::vector<double>& hi) {
    return sine_mode(lo, hi, std::vector<int>(lo.size(), 1));
  }

  static TestFunction poly_bump(std::vector<double> center, std::vector<double> halfwidth,
                                int power = 3) {
    if (power < 2) throw std::invalid_argument("poly_bump: power >= 2");
    TestFunction f;
    f.kind_ = TestFnKind::PolyBump;
    f.center_ = std::move(center);
    f.halfwidth_ = std::move(halfwidth);
    f.power_ = power;
    f.name_ = "polybump";
    f.finish_bump_support();
    return f;
  }

  TestFnKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& support_lo() const { return support_lo_; }
  const std::vector<double>& support_hi() const { return support_hi_; }
  int dim() const { return static_cast<int>(support_lo_.size()); }

  double value(const std::vector<double>& x) const {
    double v = 1.0;
    for (int j = 0; j < dim(); ++j) {
      v *= factor(j, x[j]);
      if (v == 0.0) return 0.0;
    }
    return v;
  }

  double partial(const std::vector<double>& x, int axis) const {
    double v = 1.0;
    for (int j = 0; j < dim(); ++j)
      v *= (j == axis) ? dfactor(j, x[j]) : factor(j, x[j]);
    return v;
  }

  double grad_square(const std::vector<double>& x) const {
    double s = 0.0;
    for (int j = 0; j < dim(); ++j) {
      const double p = partial(x, j);
      s += p * p;
    }
    return s;
  }

  double value_at_vertex(const LatticeDomain& dom, int v) const {
    std::vector<double> x(dom.dim());
    for (int j = 0; j < dom.dim(); ++j) x[j] = dom.coord_real(v, j);
    return value(x);
  }

 private:
  void finish_bump_support() {
    support_lo_.resize(center_.size());
    support_hi_.resize(center_.size());
    for (std::size_t j = 0; j < center_.size(); ++j) {
      if (!(halfwidth_[j] > 0.0)) throw std::invalid_argument("bump: halfwidth > 0");
      support_lo_[j] = center_[j] - halfwidth_[j];
      support_hi_[j] = center_[j] + halfwidth_[j];
    }
  }

  double factor(int j, double xj) const {
    switch (kind_) {
      case TestFnKind::Bump: {
        const double u = (xj - center_[j]) / halfwidth_[j];
        if (std::fabs(u) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - u * u));
      }
      case TestFnKind::SineMode: {
        if (xj < lo_[j] || xj > hi_[j]) return 0.0;
        const double L = hi_[j] - lo_[j];
        return std::sin(kmode_[j] * kPi * (xj - lo_[j]) / L);
      }
      case TestFnKind::PolyBump: {
        const double u = (xj - center_[j]) / halfwidth_[j];
        if (std::fabs(u) >= 1.0) return 0.0;
        return std::pow(1.0 - u * u, power_);
      }
    }
    return 0.0;
  }

  double dfactor(int j, double xj) const {
    switch (kind_) {
      case TestFnKind::Bump: {
        const double u = (xj - center_[j]) / halfwidth_[j];
        if (std::fabs(u) >= 1.0) return 0.0;
        const double w = 1.0 - u * u;
        return std::exp(-1.0 / w) * (-2.0 * u / (w * w)) / halfwidth_[j];
      }
      case TestFnKind::SineMode: {
        if (xj < lo_[j] || xj > hi_[j]) return 0.0;
        const double L = hi_[j] - lo_[j];
        const double f = kmode_[j] * kPi / L;
        return f * std::cos(kmode_[j] * kPi * (xj - lo_[j]) / L);
      }
      case TestFnKind::PolyBump: {
        const double u = (xj - center_[j]) / halfwidth_[j];
        if (std::fabs(u) >= 1.0) return 0.0;
        return power_ * std::pow(1.0 - u * u, power_ - 1) * (-2.0 * u) / halfwidth_[j];
      }
    }
    return 0.0;
  }

  TestFnKind kind_ = TestFnKind::Bump;
  std::string name_;
  std::vector<double> center_, halfwidth_;  // bump families
  std::vector<double> lo_, hi_;             // sine mode
  std::vector<int> kmode_;
  int power_ = 3;
  std::vector<double> support_lo_, support_hi_;
};

namespace detail {

// Composite Gauss-Legendre tensor quadrature of f over [lo,hi] with m panels
// per axis and 8 nodes per panel.
inline double gl_tensor(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& lo, const std::vector<double>& hi, int m) {
  static const double node[8] = {-0.9602898564975363, -0.7966664774136267,
                                 -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
  static const double wt[8] = {0.1012285362903763, 0.2223810344533745,
                               0.3137066458778873, 0.3626837833783620,
                               0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};
  const int d = static_cast<int>(lo.size());
  std::vector<double> panel(d);
  for (int j = 0; j < d; ++j) panel[j] = (hi[j] - lo[j]) / m;
  const long npts = 8L * m;
  std::vector<std::vector<double>> axis_pts(d), axis_wts(d);
  for (int j = 0; j < d; ++j) {
    axis_pts[j].resize(npts);
    axis_wts[j].resize(npts);
    for (int p = 0; p < m; ++p) {
      const double a = lo[j] + p * panel[j];
      for (int q = 0; q < 8; ++q) {
        axis_pts[j][8 * p + q] = a + 0.5 * panel[j] * (1.0 + node[q]);
        axis_wts[j][8 * p + q] = 0.5 * panel[j] * wt[q];
      }
    }
  }
  std::vector<long> idx(d, 0);
  std::vector<double> x(d);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      x[j] = axis_pts[j][idx[j]];
      w *= axis_wts[j][idx[j]];
    }
    total += w * f(x);
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < npts) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
  return total;
}

}  // namespace detail

// Continuum Dirichlet energy int_D sum_a (d phi / d x_a)^2 dx by panel-refined
// Gauss-Legendre quadrature, relative accuracy 1e-6.
inline double dirichlet_energy_continuum(const TestFunction& phi) {
  auto f = [&](const std::vector<double>& x) { return phi.grad_square(x); };
  double prev = detail::gl_tensor(f, phi.support_lo(), phi.support_hi(), 2);
  for (int m = 4; m <= 64; m *= 2) {
    const double cur = detail::gl_tensor(f, phi.support_lo(), phi.support_hi(), m);
    if (std::fabs(cur - prev) <= 3e-7 * std::max(std::fabs(cur), 1e-300)) return cur;
    prev = cur;
  }
  return prev;
}

// Discrete surrogate eps^{d-2} sum_b (grad phi(b))^2 over canonical edges:
// the finite-eps quadratic form the fluctuation estimator converges to.
inline double dirichlet_energy_discrete(const TestFunction& phi, const LatticeDomain& dom) {
  std::vector<double> vals(dom.num_vertices());
  for (int v = 0; v < dom.num_vertices(); ++v) vals[v] = phi.value_at_vertex(dom, v);
  double q = 0.0;
  for (const auto& e : dom.edges()) {
    const double g = vals[e.head] - vals[e.tail];
    q += g * g;
  }
  return std::pow(dom.spacing(), dom.dim() - 2) * q;
}

}  // namespace gflab
