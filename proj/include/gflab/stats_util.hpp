#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace gflab {

inline double vec_mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty vector");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double vec_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = vec_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Leave-one-chain-out jackknife of an arbitrary statistic of a chain family.
// Standard errors computed this way respect within-chain autocorrelation,
// which is why estimators in this project jackknife over chains rather than
// over samples.
inline Estimate jackknife_chains(
    const std::vector<std::vector<double>>& chains,
    const std::function<double(const std::vector<const std::vector<double>*>&)>& stat) {
  const std::size_t c = chains.size();
  if (c < 2) throw std::invalid_argument("jackknife needs >= 2 chains");
  std::vector<const std::vector<double>*> all;
  for (const auto& ch : chains) all.push_back(&ch);
  Estimate e;
  e.value = stat(all);
  std::vector<double> loo(c);
  for (std::size_t i = 0; i < c; ++i) {
    std::vector<const std::vector<double>*> rest;
    for (std::size_t j = 0; j < c; ++j)
      if (j != i) rest.push_back(&chains[j]);
    loo[i] = stat(rest);
  }
  double lm = 0.0;
  for (double v : loo) lm += v;
  lm /= static_cast<double>(c);
  double s = 0.0;
  for (double v : loo) s += (v - lm) * (v - lm);
  e.se = std::sqrt(s * static_cast<double>(c - 1) / static_cast<double>(c));
  return e;
}

inline double pooled_mean(const std::vector<const std::vector<double>*>& chains) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto* ch : chains) {
    for (double x : *ch) s += x;
    n += ch->size();
  }
  return s / static_cast<double>(n);
}

inline double pooled_variance(const std::vector<const std::vector<double>*>& chains) {
  const double m = pooled_mean(chains);
  double s = 0.0;
  std::size_t n = 0;
  for (const auto* ch : chains) {
    for (double x : *ch) s += (x - m) * (x - m);
    n += ch->size();
  }
  return s / static_cast<double>(n - 1);
}

inline Estimate jackknife_mean(const std::vector<std::vector<double>>& chains) {
  return jackknife_chains(chains, pooled_mean);
}

inline Estimate jackknife_variance(const std::vector<std::vector<double>>& chains) {
  return jackknife_chains(chains, pooled_variance);
}

// Integrated autocorrelation time with Sokal's adaptive window
// (smallest W with W >= c * tau(W), c = 6). Returned in units of the
// series spacing; never below 0.5.
inline double integrated_autocorr_time(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 8) return 0.5;
  const double m = vec_mean(xs);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = xs[i] - m;
  double c0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) c0 += d[i] * d[i];
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 0.5;
  double tau = 0.5;
  const std::size_t kmax = n / 2;
  for (std::size_t k = 1; k <= kmax; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) ck += d[i] * d[i + k];
    ck /= static_cast<double>(n - k);
    tau += ck / c0;
    if (static_cast<double>(k) >= 6.0 * tau) break;
  }
  return std::max(0.5, tau);
}

// Split-Rhat of Gelman et al. on one observable; the ensemble sampler warns
// when this exceeds 1.1.
inline double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& ch : chains) {
    const std::size_t h = ch.size() / 2;
    if (h < 2) continue;
    halves.emplace_back(ch.begin(), ch.begin() + h);
    halves.emplace_back(ch.begin() + h, ch.begin() + 2 * h);
  }
  if (halves.size() < 2) return 1.0;
  const std::size_t m = halves.size();
  const std::size_t n = halves[0].size();
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = vec_mean(halves[j]);
    vars[j] = vec_variance(halves[j]);
  }
  const double w = vec_mean(vars);
  const double b = static_cast<double>(n) * vec_variance(means);
  if (w <= 0.0) return 1.0;
  const double vhat = (static_cast<double>(n - 1) / n) * w + b / static_cast<double>(n);
  return std::sqrt(vhat / w);
}

struct WilsonInterval {
  double p_hat;
  double lo;
  double hi;
};

inline WilsonInterval wilson_interval(long k, long n, double z = 2.0) {
  if (n <= 0) throw std::invalid_argument("wilson: empty sample");
  const double p = static_cast<double>(k) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct LineFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  double intercept_se = 0.0;
  int n_used = 0;
};

// Weighted least squares y = a + b x with known per-point variances.
inline LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& var) {
  if (x.size() != y.size() || x.size() != var.size() || x.size() < 2)
    throw std::invalid_argument("line fit: need >= 2 points");
  for (double v : var)
    if (!(v > 0.0)) throw std::invalid_argument("line fit: variances must be positive");
  double sw = 0, swx = 0, swy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / std::max(var[i], 1e-300);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / std::max(var[i], 1e-300);
    sxx += w * (x[i] - xbar) * (x[i] - xbar);
    sxy += w * (x[i] - xbar) * (y[i] - ybar);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.slope_se = std::sqrt(1.0 / sxx);
  f.intercept = ybar - f.slope * xbar;
  f.intercept_se = std::sqrt(1.0 / sw + xbar * xbar / sxx);
  f.n_used = static_cast<int>(x.size());
  return f;
}

// Asymptotic Kolmogorov tail.
inline double kolmogorov_tail(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term =
        2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

inline double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n && j < m) {
    const double x = std::min(a[i], b[j]);
    while (i < n && a[i] <= x) ++i;
    while (j < m && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = std::sqrt(static_cast<double>(n) * m / static_cast<double>(n + m));
  return kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d);
}

inline double skewness(const std::vector<double>& xs) {
  const double m = vec_mean(xs);
  double s2 = 0, s3 = 0;
  for (double x : xs) {
    const double d = x - m;
    s2 += d * d;
    s3 += d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  const double sd = std::sqrt(s2 / n);
  return (s3 / n) / (sd * sd * sd);
}

inline double excess_kurtosis(const std::vector<double>& xs) {
  const double m = vec_mean(xs);
  double s2 = 0, s4 = 0;
  for (double x : xs) {
    const double d = x - m;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  const double v = s2 / n;
  return (s4 / n) / (v * v) - 3.0;
}

}  // namespace gflab
