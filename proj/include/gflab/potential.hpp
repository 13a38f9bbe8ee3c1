#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gflab {

constexpr double kPi = 3.14159265358979323846264338327950288;

enum class PotentialFamily { Cosine, TruncatedConvex, Quadratic, Anharmonic };

inline const char* family_name(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::Cosine: return "cosine";
    case PotentialFamily::TruncatedConvex: return "truncated-convex";
    case PotentialFamily::Quadratic: return "quadratic";
    case PotentialFamily::Anharmonic: return "anharmonic";
  }
  return "?";
}

struct PotentialTriple {
  double v;
  double dv;
  double d2v;
};

// Symmetric pair potential V with evaluators for V, V', V''.
//
// Families:
//   cosine            V(x) = -cos x
//   truncated-convex  -cos x for |x| <= delta, quadratic continuation outside,
//                     matched to first order at +-delta; inf V'' = cos(delta)
//   quadratic         V(x) = x^2/2
//   anharmonic        V(x) = x^2/2 + lambda x^4
//
// `scale` carries the beta-rescaling Vtilde(x) = s V(x/sqrt(s)); it composes
// multiplicatively and leaves the quadratic family fixed. All evaluators are
// computed from |x| so that V(-x) == V(x) holds bitwise.
class Potential {
 public:
  Potential() = default;

  static Potential cosine() { return Potential(PotentialFamily::Cosine, 0.0, 0.0); }
  static Potential quadratic() { return Potential(PotentialFamily::Quadratic, 0.0, 0.0); }
  static Potential truncated_convex(double delta) {
    if (!(delta > 0.0 && delta < kPi / 2))
      throw std::invalid_argument("potential: delta must lie in (0, pi/2)");
    return Potential(PotentialFamily::TruncatedConvex, delta, 0.0);
  }
  static Potential anharmonic(double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("potential: lambda must be >= 0");
    return Potential(PotentialFamily::Anharmonic, 0.0, lambda);
  }

  PotentialFamily family() const { return family_; }
  double delta() const { return delta_; }
  double lambda() const { return lambda_; }
  double scale() const { return scale_; }

  PotentialTriple eval(double x) const {
    if (scale_ == 1.0) return eval_base(x);
    const double root = std::sqrt(scale_);
    const PotentialTriple t = eval_base(x / root);
    return {scale_ * t.v, root * t.dv, t.d2v};
  }

  double value(double x) const { return eval(x).v; }
  double dv(double x) const { return eval(x).dv; }
  double d2v(double x) const { return eval(x).d2v; }

  // V(b) - V(a) in a cancellation-resistant form; the sampler sums many of
  // these against a global energy at relative tolerance 1e-9.
  double delta_value(double b, double a) const {
    const double rb = scale_ == 1.0 ? b : b / std::sqrt(scale_);
    const double ra = scale_ == 1.0 ? a : a / std::sqrt(scale_);
    return scale_ * delta_base(rb, ra);
  }

  // inf V'' over the line.
  double c_minus() const {
    switch (family_) {
      case PotentialFamily::Cosine: return -1.0;
      case PotentialFamily::TruncatedConvex: return std::cos(delta_);
      case PotentialFamily::Quadratic: return 1.0;
      case PotentialFamily::Anharmonic: return 1.0;
    }
    return 0.0;
  }

  // sup V'' over the line (infinite for the anharmonic family).
  double c_plus() const {
    switch (family_) {
      case PotentialFamily::Cosine: return 1.0;
      case PotentialFamily::TruncatedConvex: return 1.0;
      case PotentialFamily::Quadratic: return 1.0;
      case PotentialFamily::Anharmonic:
        return lambda_ > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    return 0.0;
  }

  bool strictly_convex() const { return c_minus() > 0.0; }

 private:
  Potential(PotentialFamily f, double delta, double lambda)
      : family_(f), delta_(delta), lambda_(lambda) {}

  PotentialTriple eval_base(double x) const {
    const double y = std::fabs(x);
    const double s = x < 0.0 ? -1.0 : 1.0;
    switch (family_) {
      case PotentialFamily::Cosine:
        return {-std::cos(y), s * std::sin(y), std::cos(y)};
      case PotentialFamily::TruncatedConvex: {
        if (y <= delta_) return {-std::cos(y), s * std::sin(y), std::cos(y)};
        const double cd = std::cos(delta_), sd = std::sin(delta_);
        const double u = y - delta_;
        return {-cd + sd * u + 0.5 * cd * u * u, s * (sd + cd * u), cd};
      }
      case PotentialFamily::Quadratic:
        return {0.5 * y * y, s * y, 1.0};
      case PotentialFamily::Anharmonic: {
        const double y2 = y * y;
        return {0.5 * y2 + lambda_ * y2 * y2, s * (y + 4.0 * lambda_ * y2 * y),
                1.0 + 12.0 * lambda_ * y2};
      }
    }
    return {0.0, 0.0, 0.0};
  }

  double delta_base(double b, double a) const {
    switch (family_) {
      case PotentialFamily::Cosine:
        // -cos b + cos a = 2 sin((a+b)/2) sin((b-a)/2)
        return 2.0 * std::sin(0.5 * (a + b)) * std::sin(0.5 * (b - a));
      case PotentialFamily::TruncatedConvex: {
        if (std::fabs(a) <= delta_ && std::fabs(b) <= delta_)
          return 2.0 * std::sin(0.5 * (a + b)) * std::sin(0.5 * (b - a));
        return eval_base(b).v - eval_base(a).v;
      }
      case PotentialFamily::Quadratic:
        return 0.5 * (b - a) * (b + a);
      case PotentialFamily::Anharmonic: {
        const double p = b - a, q = b + a;
        return p * q * (0.5 + lambda_ * (b * b + a * a));
      }
    }
    return 0.0;
  }

  PotentialFamily family_ = PotentialFamily::Quadratic;
  double delta_ = 0.0;
  double lambda_ = 0.0;
  double scale_ = 1.0;

  friend Potential rescaled_potential(const Potential& p, double beta);
};

inline PotentialTriple eval_potential(const Potential& p, double x) { return p.eval(x); }

// Vtilde(x) = beta V(x / sqrt(beta)); preserves V''(0) and the convexity
// window [c_minus, c_plus].
inline Potential rescaled_potential(const Potential& p, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("rescaled_potential: beta must be > 0");
  Potential q = p;
  q.scale_ = p.scale_ * beta;
  return q;
}

enum class BetaForm { Constant, LogSchedule };

struct BetaValue {
  double beta;
  double margin;  // beta - 9 d |log eps|
};

// Inverse-temperature schedule. The log form beta(eps) = A + C |log eps|
// suppresses vortices asymptotically iff C > 9d, so that
// beta(eps) + 9d log eps diverges.
struct BetaSchedule {
  BetaForm form = BetaForm::Constant;
  double beta0 = 1.0;  // constant form
  double A = 0.0;      // log form offset
  double C = 0.0;      // log form slope

  static BetaSchedule constant(double b0) {
    BetaSchedule s;
    s.form = BetaForm::Constant;
    s.beta0 = b0;
    return s;
  }
  static BetaSchedule log_schedule(double a, double c) {
    BetaSchedule s;
    s.form = BetaForm::LogSchedule;
    s.A = a;
    s.C = c;
    return s;
  }
  // Minimal-slope compliant family used as the default experiment schedule.
  static BetaSchedule default_schedule(int d) {
    return log_schedule(10.0, 9.0 * d + 1.0);
  }

  // True when the schedule outruns the 9d|log eps| vortex threshold.
  bool suppresses_vortices(int d) const {
    return form == BetaForm::LogSchedule && C > 9.0 * d;
  }
};

inline BetaValue beta_at(const BetaSchedule& s, double eps, int d) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("beta_at: eps must lie in (0,1)");
  const double alog = std::fabs(std::log(eps));
  const double beta = s.form == BetaForm::Constant ? s.beta0 : s.A + s.C * alog;
  if (!(beta > 0.0)) throw std::invalid_argument("beta_at: schedule gives non-positive beta");
  return {beta, beta - 9.0 * d * alog};
}

}  // namespace gflab
