#include <catch2/catch.hpp>

#include <cmath>

#include "gflab/coupling.hpp"
#include "gflab/lattice.hpp"

using namespace gflab;

TEST_CASE("high beta: coupling agrees identically", "[coupling]") {
  auto dom = build_rect_domain(2, 1.0, {0, 0}, {5, 5});
  CouplingParams p;
  p.delta = kPi / 4;
  p.thin = 5;
  p.burnin = 300;
  p.pilot_samples = 100;
  p.seed = 11;
  XYGradientCoupler coupler(dom, 40.0, p);
  for (int i = 0; i < 50; ++i) {
    const auto pair = coupler.draw();
    REQUIRE(pair.agreed);
    REQUIRE(pair.bad_edges.empty());
    REQUIRE(pair.eta_delta.eta == pair.eta_xy.eta);
    // no-bad-edge draws are vortex free (checked again here explicitly)
    REQUIRE(vortex_census(pair.eta_xy).vortex_free());
  }
}

TEST_CASE("low beta: disagreement path produces exact mu^delta marginal", "[coupling]") {
  // At beta = 3 on a 6x6 box bad edges are common, so the W-branch is
  // exercised heavily; the coupled eta^delta marginal must still match
  // direct sampling of mu^delta (distributional oracle).
  auto dom = build_rect_domain(2, 1.0, {0, 0}, {5, 5});
  CouplingParams p;
  p.delta = kPi / 4;
  p.thin = 8;
  p.burnin = 500;
  p.pilot_samples = 1500;
  p.rejection_budget = 2000;
  p.seed = 19;
  const auto ex = run_coupling_experiment(dom, 3.0, p, 1200);

  INFO("agreement=" << ex.agreement_rate << " c=" << ex.mix.c_hat
                    << " c'=" << ex.mix.cprime_hat << " ks_xy=" << ex.ks_p_xy
                    << " ks_delta=" << ex.ks_p_delta);
  REQUIRE(ex.agreement_rate < 1.0);
  REQUIRE(ex.mix.c_hat <= ex.mix.cprime_hat + 3.0 * (ex.mix.se_c + ex.mix.se_cprime));
  REQUIRE(ex.ks_p_xy > 0.01);
  REQUIRE(ex.ks_p_delta > 0.01);
  // agreement frequency is at least the no-bad-edge mass, up to noise
  REQUIRE(ex.agreement_rate >= ex.mix.c_hat - 5.0 * ex.mix.se_c - 0.05);
}

TEST_CASE("agreement probability grows with beta", "[coupling]") {
  auto dom = build_rect_domain(2, 1.0, {0, 0}, {4, 4});
  double prev = -1.0;
  for (double beta : {5.0, 10.0, 20.0, 40.0}) {
    CouplingParams p;
    p.delta = kPi / 4;
    p.thin = 4;
    p.burnin = 300;
    p.pilot_samples = 400;
    p.rejection_budget = 5000;
    p.seed = 23;
    XYGradientCoupler coupler(dom, beta, p);
    long agreed = 0;
    const int n = 400;
    for (int i = 0; i < n; ++i) agreed += coupler.draw().agreed ? 1 : 0;
    const double rate = static_cast<double>(agreed) / n;
    const double se = std::sqrt(std::max(rate * (1 - rate), 1e-4) / n);
    INFO("beta=" << beta << " rate=" << rate);
    REQUIRE(rate >= prev - 2.0 * se);
    prev = rate;
  }
}

TEST_CASE("bad-edge probability bound shape", "[coupling]") {
  // mu(B) <= 2 eps^-d c exp(-beta delta^2 / pi^2): verify the empirical
  // bad-edge frequency decays at least at the exponential rate in beta.
  auto dom = build_rect_domain(2, 1.0, {0, 0}, {4, 4});
  const double delta = kPi / 4;
  double p_lo = 0, p_hi = 0;
  const double b_lo = 4.0, b_hi = 8.0;
  for (double beta : {b_lo, b_hi}) {
    CouplingParams p;
    p.delta = delta;
    p.thin = 4;
    p.burnin = 300;
    p.pilot_samples = 3000;
    p.seed = 31;
    XYGradientCoupler coupler(dom, beta, p);
    const double bad = 1.0 - coupler.mixture().c_hat;
    if (beta == b_lo) p_lo = bad;
    else p_hi = bad;
  }
  REQUIRE(p_lo > p_hi);
  // decay rate at least delta^2/pi^2 per unit beta, with generous slack for
  // the union-bound constant
  REQUIRE(std::log(std::max(p_hi, 1e-4) / p_lo) <
          -(b_hi - b_lo) * delta * delta / (kPi * kPi) + 1.5);
}

TEST_CASE("rejection budget exhaustion is reported", "[coupling]") {
  auto dom = build_rect_domain(2, 1.0, {0, 0}, {4, 4});
  CouplingParams p;
  p.delta = kPi / 4;
  p.thin = 2;
  p.burnin = 100;
  p.pilot_samples = 50;
  p.rejection_budget = 3;
  p.seed = 37;
  // Moderate beta: some draws hit the W branch, where an artificially zeroed
  // acceptance and a tiny budget must trip the error.
  XYGradientCoupler coupler(dom, 6.0, p);
  coupler.override_accept_good(0.0);
  bool threw = false;
  try {
    for (int i = 0; i < 500; ++i) coupler.draw();
  } catch (const RejectionBudgetExhausted&) {
    threw = true;
  }
  REQUIRE(threw);
}

TEST_CASE("single-draw convenience wrapper", "[coupling]") {
  auto dom = build_rect_domain(2, 1.0, {0, 0}, {3, 3});
  CouplingParams p;
  p.thin = 3;
  p.burnin = 100;
  p.pilot_samples = 50;
  const auto pair =
      couple_xy_gradient(dom, Potential::truncated_convex(kPi / 4), 30.0, p, 5);
  REQUIRE(pair.eta_xy.eta.size() == static_cast<std::size_t>(dom.num_edges()));
  REQUIRE(pair.eta_delta.eta.size() == pair.eta_xy.eta.size());
  REQUIRE_THROWS_AS(couple_xy_gradient(dom, Potential::quadratic(), 30.0, p, 5),
                    std::invalid_argument);
}
