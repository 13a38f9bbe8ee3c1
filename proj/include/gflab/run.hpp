#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gflab/config.hpp"
#include "gflab/coupling.hpp"
#include "gflab/gradient.hpp"
#include "gflab/hswalk.hpp"
#include "gflab/io.hpp"
#include "gflab/statistics.hpp"

namespace gflab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Stage implementations. Every stage is a pure file transformation so the
// same code backs both the CLI subcommands and config-driven pipelines.
// ---------------------------------------------------------------------------

struct SampleStageResult {
  EnsembleDiagnostics diag;
  RunMeta meta;
};

inline SampleStageResult stage_sample(const ModelSetup& ms, const SampleParams& sp,
                                      const std::string& csv_path) {
  SampleCsvWriter writer(csv_path);
  struct Buffer : ChainObserver {
    int chain;
    std::vector<std::pair<long, SpinConfig>>* rows;
    void on_sample(long sweep, const SpinConfig& cfg) override {
      rows->push_back({sweep, cfg});
    }
  };
  std::vector<std::vector<std::pair<long, SpinConfig>>> buffered(sp.n_chains);
  auto diag = sample_ensemble_observe(ms.dom, ms.model, ms.pot, ms.beta, sp, [&](int c) {
    auto o = std::make_unique<Buffer>();
    o->chain = c;
    o->rows = &buffered[c];
    return o;
  });
  for (int c = 0; c < sp.n_chains; ++c)
    for (const auto& [sweep, cfg] : buffered[c]) writer.add(c, sweep, cfg);
  writer.close();

  SampleStageResult out;
  out.diag = diag;
  RunMeta& m = out.meta;
  m.d = ms.dom.dim();
  m.eps = ms.dom.spacing();
  m.box_lo = ms.dom.box_lo();
  m.box_hi = ms.dom.box_hi();
  m.model_kind = ms.model_kind;
  m.h = ms.model.field_h;
  m.family = family_name(ms.pot.family());
  m.delta = ms.pot.delta();
  m.lambda = ms.pot.lambda();
  m.beta = ms.beta;
  m.beta_form = ms.schedule.form == BetaForm::Constant ? "constant" : "log";
  m.chains = sp.n_chains;
  m.burnin = diag.burnin_used;
  m.samples = sp.n_samples;
  m.thin = sp.thin;
  m.seed = sp.seed;
  m.update = update_name(diag.update_used);
  double acc = 0.0;
  for (const auto& cd : diag.chains) acc += cd.acceptance_rate;
  m.acceptance_rate = acc / sp.n_chains;
  m.tau_int = diag.tau_int;
  m.interchain_rhat = diag.interchain_rhat;
  if (diag.rhat_warning)
    m.warnings.push_back("inter-chain variance ratio exceeds 1.1; chains may be unmixed");
  write_json(sidecar_path(csv_path), meta_to_json(m));
  return out;
}

struct LoadedSamples {
  RunMeta meta;
  LatticeDomain dom;
  std::vector<std::vector<GradientConfig>> eta_by_chain;
  std::vector<std::vector<SampleRecord>> raw_by_chain;
};

inline LoadedSamples load_samples(const std::string& csv_path) {
  LoadedSamples ls;
  ls.meta = meta_from_json(read_json(sidecar_path(csv_path)));
  ls.dom = domain_from_meta(ls.meta);
  auto file = read_samples_csv(csv_path, ls.dom.num_vertices());
  ls.raw_by_chain = std::move(file.by_chain);
  const ModelSpec model = model_from_meta(ls.meta);
  ls.eta_by_chain.resize(ls.raw_by_chain.size());
  for (std::size_t c = 0; c < ls.raw_by_chain.size(); ++c) {
    for (const auto& rec : ls.raw_by_chain[c]) {
      SpinConfig cfg;
      cfg.dom = &ls.dom;
      cfg.model = model;
      cfg.theta = rec.theta;
      ls.eta_by_chain[c].push_back(eta_from_theta(cfg));
    }
  }
  return ls;
}

inline json stage_vortices(const std::string& csv_path, const std::string& out_prefix,
                           long max_records = 2000) {
  const auto ls = load_samples(csv_path);
  std::ofstream csv(out_prefix + ".csv");
  csv << "chain,sample_index,n_plus,n_minus,n_charged\n";
  json per_sample = json::array();
  long with_vortex = 0, total = 0;
  for (std::size_t c = 0; c < ls.eta_by_chain.size(); ++c) {
    for (std::size_t i = 0; i < ls.eta_by_chain[c].size(); ++i) {
      const auto census = vortex_census(ls.eta_by_chain[c][i]);
      csv << c << "," << i << "," << census.n_plus << "," << census.n_minus << ","
          << census.charged_plaquettes.size() << "\n";
      if (total < max_records) {
        json rec;
        rec["chain"] = c;
        rec["sample_index"] = i;
        rec["n_plus"] = census.n_plus;
        rec["n_minus"] = census.n_minus;
        rec["charged_plaquettes"] = census.charged_plaquettes;
        per_sample.push_back(rec);
      }
      with_vortex += census.vortex_free() ? 0 : 1;
      ++total;
    }
  }
  const auto wilson = wilson_interval(with_vortex, total, 2.0);
  json j;
  j["per_sample"] = per_sample;
  j["n_samples"] = total;
  j["n_with_vortex"] = with_vortex;
  j["p_any_vortex"] = {{"estimate", wilson.p_hat}, {"lo", wilson.lo}, {"hi", wilson.hi}};
  write_json(out_prefix + ".json", j);
  return j;
}

inline TestFunction test_function_from_name(const std::string& name,
                                            const std::vector<double>& lo,
                                            const std::vector<double>& hi) {
  if (name == "bump") return TestFunction::bump_for_box(lo, hi);
  if (name == "sine") return TestFunction::first_sine_mode(lo, hi);
  if (name == "polybump") {
    std::vector<double> c(lo.size()), h(lo.size());
    for (std::size_t j = 0; j < lo.size(); ++j) {
      c[j] = 0.5 * (lo[j] + hi[j]);
      h[j] = 0.25 * (hi[j] - lo[j]);
    }
    return TestFunction::poly_bump(c, h);
  }
  throw ConfigError("unknown test function '" + name + "' (bump|sine|polybump)");
}

// Whether the Gaussian-limit verdict applies at the run's parameters: the
// XY field needs the beta(eps) margin over 9d|log eps| to be positive and no
// external field; convex gradient families only need beta large, so any
// fixed-beta run is in scope as a finite-size check.
inline bool gaussian_hypothesis_ok(const RunMeta& m) {
  if (m.model_kind == "xy" || m.model_kind == "xyfield") {
    if (m.h != 0.0) return false;
    const double margin = m.beta - 9.0 * m.d * std::fabs(std::log(m.eps));
    return margin > 0.0;
  }
  return true;
}

inline json charfn_to_json(const CharFnEstimate& cf) {
  json rows = json::array();
  for (const auto& r : cf.rows) {
    rows.push_back({{"t", r.t},
                    {"re", r.re},
                    {"im", r.im},
                    {"se_re", r.se_re},
                    {"se_im", r.se_im},
                    {"ref_discrete", r.ref_discrete},
                    {"ref_continuum", r.ref_continuum}});
  }
  return {{"rows", rows},
          {"q_discrete", cf.q_discrete},
          {"q_continuum", cf.q_continuum},
          {"n", cf.n}};
}

inline json stage_fluct(const std::string& csv_path, const std::string& phi_name,
                        const std::vector<double>& tgrid, const std::string& out_prefix) {
  const auto ls = load_samples(csv_path);
  const auto phi = test_function_from_name(phi_name, ls.meta.box_lo, ls.meta.box_hi);
  const auto fw = make_fluct_weights(phi, ls.dom, ls.meta.beta);
  std::vector<std::vector<double>> fl(ls.eta_by_chain.size());
  for (std::size_t c = 0; c < ls.eta_by_chain.size(); ++c)
    for (const auto& g : ls.eta_by_chain[c]) fl[c].push_back(fw.apply(g));

  const auto rep = gaussian_limit_report(fl, fw, tgrid, gaussian_hypothesis_ok(ls.meta));

  std::ofstream csv(out_prefix + ".csv");
  csv << "t,re,im,se_re,se_im,ref\n";
  char buf[256];
  for (const auto& r : rep.cf.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.re, r.im,
                  r.se_re, r.se_im, r.ref_discrete);
    csv << buf;
  }
  json j;
  j["phi"] = phi_name;
  j["char_fn"] = charfn_to_json(rep.cf);
  j["applicable"] = rep.applicable;
  j["verdict"] = rep.applicable ? (rep.pass ? "pass" : "fail") : "report-only";
  j["max_abs_dev"] = rep.max_abs_dev;
  j["max_dev_allowed"] = rep.max_dev_allowed;
  j["var_ratio"] = {{"value", rep.var_ratio.value}, {"se", rep.var_ratio.se}};
  j["skewness"] = rep.skew;
  j["excess_kurtosis"] = rep.kurt;
  j["support_warning"] = rep.support_warning;
  write_json(out_prefix + ".json", j);
  return j;
}

// Pooled per-edge exceedance cell over a bulk-edge subset, with a
// chain-jackknifed variance for log p.
inline ContourCell pooled_contour_cell(const LoadedSamples& ls,
                                       const std::vector<int>& subset, double a) {
  ContourCell cell;
  cell.beta = ls.meta.beta;
  cell.a = a;
  const std::size_t nchain = ls.eta_by_chain.size();
  std::vector<double> chain_k(nchain, 0.0), chain_n(nchain, 0.0);
  for (std::size_t c = 0; c < nchain; ++c) {
    for (const auto& g : ls.eta_by_chain[c]) {
      for (int e : subset)
        if (std::fabs(g.eta[e]) > a) chain_k[c] += 1.0;
      chain_n[c] += static_cast<double>(subset.size());
    }
  }
  double k = 0, n = 0;
  for (std::size_t c = 0; c < nchain; ++c) {
    k += chain_k[c];
    n += chain_n[c];
  }
  cell.k = static_cast<long>(k);
  cell.n = static_cast<long>(n);
  if (cell.k > 0) {
    cell.logp = std::log(k / n);
    if (nchain >= 2) {
      // leave-one-chain-out jackknife for var(log p)
      std::vector<double> loo;
      for (std::size_t c = 0; c < nchain; ++c) {
        const double kk = k - chain_k[c], nn = n - chain_n[c];
        loo.push_back(kk > 0 ? std::log(kk / nn) : cell.logp);
      }
      double m = 0;
      for (double v : loo) m += v;
      m /= nchain;
      double s = 0;
      for (double v : loo) s += (v - m) * (v - m);
      cell.var_logp = s * (nchain - 1.0) / nchain;
    }
    if (!(cell.var_logp > 0.0)) cell.var_logp = (1.0 - k / n) / k;
  }
  return cell;
}

inline json stage_contour(const std::vector<std::string>& csv_paths, int n_edges,
                          const std::vector<double>& a_list, const std::string& out_prefix) {
  json j;
  json cells_json = json::array();
  std::vector<ContourCell> cells;
  std::ofstream csv(out_prefix + ".csv");
  csv << "beta,a,n_edges,k_joint,n_joint,p_joint,wilson_lo,wilson_hi,bound_convex,"
         "pooled_k,pooled_n,pooled_p\n";
  bool convex_ok = true;
  bool any_convex = false;
  for (const auto& path : csv_paths) {
    const auto ls = load_samples(path);
    const bool convex_case =
        ls.meta.model_kind == "graddelta" && ls.meta.delta <= kPi / 3 + 1e-12;
    const auto subset = bulk_edge_subset(ls.dom, 64);
    // Spread the joint edge set across the subset.
    std::vector<int> edge_set;
    const int stride = std::max<int>(1, static_cast<int>(subset.size()) / std::max(1, n_edges));
    for (int i = 0; i < n_edges && i * stride < static_cast<int>(subset.size()); ++i)
      edge_set.push_back(subset[i * stride]);

    for (double a : a_list) {
      const auto est = contour_probability(
          ls.eta_by_chain, edge_set, a, ls.meta.beta, convex_case,
          convex_case ? std::optional<double>(ls.meta.delta) : std::nullopt);
      const auto cell = pooled_contour_cell(ls, subset, a);
      cells.push_back(cell);
      char buf[512];
      std::snprintf(buf, sizeof buf,
                    "%.17g,%.17g,%d,%ld,%ld,%.17g,%.17g,%.17g,%.17g,%ld,%ld,%.17g\n",
                    ls.meta.beta, a, est.n_edges, est.k, est.n, est.wilson.p_hat,
                    est.wilson.lo, est.wilson.hi, est.bound_convex, cell.k, cell.n,
                    cell.n > 0 ? static_cast<double>(cell.k) / cell.n : 0.0);
      csv << buf;
      json cj;
      cj["beta"] = ls.meta.beta;
      cj["a"] = a;
      cj["joint"] = {{"n_edges", est.n_edges}, {"k", est.k},          {"n", est.n},
                     {"p", est.wilson.p_hat},  {"lo", est.wilson.lo}, {"hi", est.wilson.hi}};
      cj["bound_convex"] = est.bound_convex;
      cj["convex_case"] = convex_case;
      cj["pooled"] = {{"k", cell.k}, {"n", cell.n}};
      cells_json.push_back(cj);
      if (convex_case) {
        any_convex = true;
        // single-edge convex bound with 2 SE headroom on the pooled estimate
        const double pooled_p = cell.n > 0 ? static_cast<double>(cell.k) / cell.n : 0.0;
        const double se = std::sqrt(std::max(pooled_p * (1 - pooled_p), 1e-12) /
                                    std::max<long>(cell.n, 1));
        const double bound1 = std::exp(1.0 - ls.meta.beta * a * a / (kPi * kPi));
        if (pooled_p > bound1 + 2.0 * se) convex_ok = false;
      }
    }
  }
  j["cells"] = cells_json;
  int informative = 0;
  for (const auto& c : cells)
    if (c.k > 0) ++informative;
  if (informative >= 3) {
    const auto reg = contour_rate_regression(cells);
    j["regression"] = {{"slope", reg.fit.slope},
                       {"slope_se", reg.fit.slope_se},
                       {"intercept", reg.fit.intercept},
                       {"fitted_c", reg.fitted_c},
                       {"n_used", static_cast<int>(reg.used.size())},
                       {"n_zero_cells", static_cast<int>(reg.zero_cells.size())},
                       {"rate_ok", reg.fit.slope + 2.0 * reg.fit.slope_se < -1.0 / (kPi * kPi)}};
  } else {
    j["regression"] = nullptr;
  }
  if (any_convex) j["convex_bound_ok"] = convex_ok;
  write_json(out_prefix + ".json", j);
  return j;
}

inline json stage_couple(const LatticeDomain& dom, double beta, const CouplingParams& params,
                         long draws, const std::string& out_prefix) {
  const auto ex = run_coupling_experiment(dom, beta, params, draws);
  std::ofstream csv(out_prefix + ".csv");
  csv << "draw,agreed,n_bad_edges,max_abs_eta\n";
  char buf[128];
  for (std::size_t i = 0; i < ex.rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.17g\n", i, ex.rows[i].agreed ? 1 : 0,
                  ex.rows[i].n_bad_edges, ex.rows[i].max_abs_eta);
    csv << buf;
  }
  json j;
  j["n_draws"] = draws;
  j["agreement_rate"] = ex.agreement_rate;
  j["mixture"] = {{"c", ex.mix.c_hat},
                  {"c_prime", ex.mix.cprime_hat},
                  {"se_c", ex.mix.se_c},
                  {"se_c_prime", ex.mix.se_cprime},
                  {"accept_good", ex.mix.accept_good}};
  j["ks_p_xy_marginal"] = ex.ks_p_xy;
  j["ks_p_delta_marginal"] = ex.ks_p_delta;
  j["marginals_ok"] = ex.ks_p_xy > 0.01 && ex.ks_p_delta > 0.01;
  write_json(out_prefix + ".json", j);
  return j;
}

struct WalkStageParams {
  Potential pot = Potential::quadratic();
  double beta = 1.0;
  double horizon = 10.0;
  int envs = 4;
  int pairs = 200;  // walks per environment
  double dt = 5e-3;
  double lambda_cap = 0.0;  // 0: use c_plus
  std::vector<double> tgrid = {2.0, 5.0, 10.0};
  std::uint64_t seed = 1;
  int threads = 1;
};

inline json stage_walk(const WalkStageParams& p, const std::string& out_prefix) {
  double lambda = p.lambda_cap;
  if (lambda <= 0.0) {
    if (!std::isfinite(p.pot.c_plus()))
      throw ConfigError("walk: potential has unbounded curvature; set lambda_cap");
    lambda = p.pot.c_plus();
  }
  auto dom = walk_box(2, p.horizon);
  WalkEnsembleParams wp;
  wp.n_envs = p.envs;
  wp.walks_per_env = p.pairs;
  wp.horizon = p.horizon;
  wp.dt = p.dt;
  wp.lambda = lambda;
  wp.seed = p.seed;
  wp.threads = p.threads;
  auto groups = run_walk_ensemble(dom, p.pot, p.beta, wp);

  std::ofstream csv(out_prefix + ".csv");
  csv << "pair_id,t,x_1,x_2\n";
  char buf[160];
  long pair_id = 0;
  for (const auto& g : groups)
    for (const auto& w : g) {
      for (double t : p.tgrid) {
        if (w.discarded && t > w.end_time) continue;
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g\n", pair_id, t,
                      displacement_at(w, dom, t, 0), displacement_at(w, dom, t, 1));
        csv << buf;
      }
      ++pair_id;
    }

  // Walk-clock report (eps = 1); the diffusive normalization is var/(2t).
  const auto rep = scaling_report(groups, dom, 1.0, p.tgrid);
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"t", r.t},
                    {"var_ratio", r.var_ratio.value},
                    {"var_ratio_se", r.var_ratio.se},
                    {"cross_cov", r.cross_cov.value},
                    {"cross_cov_se", r.cross_cov.se},
                    {"charfn_max_dev", r.charfn_max_dev},
                    {"charfn_allowed", r.charfn_allowed},
                    {"gaussian_ok", r.pass_gaussian}});
  }
  json j;
  j["rows"] = rows;
  j["n_walks"] = rep.n_walks;
  j["n_discarded"] = rep.n_discarded;
  j["beta"] = p.beta;
  j["potential"] = family_name(p.pot.family());
  j["lambda_cap"] = lambda;
  write_json(out_prefix + ".json", j);
  return j;
}

// ---------------------------------------------------------------------------
// Config-driven pipeline.
// ---------------------------------------------------------------------------

struct RunRecord {
  std::string id;
  std::string dir;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::map<std::string, std::string> outputs;
  json verdicts;
  bool failed = false;
  double wall_seconds = 0.0;
  long sweeps = 0;  // total MCMC sweeps across chains, when the run sampled
};

inline RunRecord run_experiment(const std::string& config_path, const std::string& out_base,
                                std::optional<std::uint64_t> seed_override = std::nullopt,
                                int threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config " + config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  Config cfg = Config::parse(ss.str());
  cfg.validate();

  RunRecord rec;
  rec.id = cfg.get_or("run", "id", "run");
  rec.seed = seed_override ? *seed_override
                           : static_cast<std::uint64_t>(cfg.get_int_or("run", "seed", 1));
  if (threads <= 0) threads = static_cast<int>(cfg.get_int_or("run", "threads", 1));
  rec.dir = (fs::path(out_base) / rec.id).string();
  fs::create_directories(rec.dir);

  std::vector<std::string> stages =
      cfg.has("run", "pipeline") ? cfg.get_tokens("run", "pipeline")
                                 : std::vector<std::string>{"sample"};
  const std::set<std::string> known{"sample", "vortices", "fluct", "contour", "couple",
                                    "walk"};
  bool has_sample = false;
  for (const auto& s : stages) {
    if (!known.count(s)) throw ConfigError("config: unknown pipeline stage '" + s + "'");
    if (s == "sample") has_sample = true;
  }
  for (const auto& s : stages)
    if ((s == "vortices" || s == "fluct" || s == "contour") && !has_sample)
      throw ConfigError("config: stage '" + s + "' requires the sample stage");

  json verdicts;
  const std::string samples_csv = (fs::path(rec.dir) / "samples.csv").string();

  for (const auto& stage : stages) {
    if (stage == "sample") {
      const auto ms = model_setup_from_config(cfg);
      const auto sp = sample_params_from_config(cfg, rec.seed, threads);
      const auto res = stage_sample(ms, sp, samples_csv);
      for (const auto& cd : res.diag.chains) rec.sweeps += cd.sweeps;
      rec.outputs["samples_csv"] = samples_csv;
      rec.outputs["samples_meta"] = sidecar_path(samples_csv);
      verdicts["sample"] = res.diag.rhat_warning ? "warning" : "ok";
    } else if (stage == "vortices") {
      const std::string prefix = (fs::path(rec.dir) / "vortices").string();
      stage_vortices(samples_csv, prefix, cfg.get_int_or("vortices", "max_records", 2000));
      rec.outputs["vortices_json"] = prefix + ".json";
      rec.outputs["vortices_csv"] = prefix + ".csv";
      verdicts["vortices"] = "ok";
    } else if (stage == "fluct") {
      const std::string prefix = (fs::path(rec.dir) / "fluct").string();
      std::vector<double> tgrid;
      if (cfg.has("fluct", "tgrid") && cfg.get("fluct", "tgrid") != "auto")
        tgrid = cfg.get_reals("fluct", "tgrid");
      const auto j = stage_fluct(samples_csv, cfg.get_or("fluct", "phi", "bump"), tgrid,
                                 prefix);
      rec.outputs["fluct_json"] = prefix + ".json";
      rec.outputs["fluct_csv"] = prefix + ".csv";
      verdicts["fluct"] = j.at("verdict");
      if (j.at("verdict") == "fail") rec.failed = true;
    } else if (stage == "contour") {
      const std::string prefix = (fs::path(rec.dir) / "contour").string();
      const auto j = stage_contour(
          {samples_csv}, static_cast<int>(cfg.get_int_or("contour", "edges", 1)),
          cfg.has("contour", "a") ? cfg.get_reals("contour", "a")
                                  : std::vector<double>{0.3, 0.5, 0.8},
          prefix);
      rec.outputs["contour_json"] = prefix + ".json";
      rec.outputs["contour_csv"] = prefix + ".csv";
      if (j.contains("convex_bound_ok")) {
        verdicts["contour"] = j.at("convex_bound_ok").get<bool>() ? "pass" : "fail";
        if (!j.at("convex_bound_ok").get<bool>()) rec.failed = true;
      } else {
        verdicts["contour"] = "report";
      }
    } else if (stage == "couple") {
      const auto ms = model_setup_from_config(cfg);
      CouplingParams cp;
      cp.delta = cfg.get_real_or("couple", "delta", kPi / 4);
      cp.thin = cfg.get_int_or("couple", "thin", 10);
      cp.pilot_samples = cfg.get_int_or("couple", "pilot", 800);
      cp.rejection_budget = cfg.get_int_or("couple", "budget", 500);
      cp.seed = rec.seed;
      const std::string prefix = (fs::path(rec.dir) / "couple").string();
      const auto j = stage_couple(ms.dom, ms.beta, cp, cfg.get_int_or("couple", "draws", 300),
                                  prefix);
      rec.outputs["couple_json"] = prefix + ".json";
      rec.outputs["couple_csv"] = prefix + ".csv";
      verdicts["couple"] = j.at("marginals_ok").get<bool>() ? "pass" : "fail";
      if (!j.at("marginals_ok").get<bool>()) rec.failed = true;
    } else if (stage == "walk") {
      WalkStageParams wp;
      const std::string fam = cfg.get_or("walk", "potential", "quadratic");
      wp.pot = potential_from_strings(fam == "graddelta" ? "truncated-convex" : fam,
                                      cfg.get_real_or("walk", "delta", kPi / 4),
                                      cfg.get_real_or("walk", "lambda", 0.0));
      const auto ms = model_setup_from_config(cfg);
      wp.beta = ms.beta;
      wp.horizon = cfg.get_real_or("walk", "horizon", 10.0);
      wp.envs = static_cast<int>(cfg.get_int_or("walk", "envs", 4));
      wp.pairs = static_cast<int>(cfg.get_int_or("walk", "pairs", 200));
      wp.dt = cfg.get_real_or("walk", "dt", 5e-3);
      wp.lambda_cap = cfg.get_real_or("walk", "lambda_cap", 0.0);
      if (cfg.has("walk", "tgrid")) wp.tgrid = cfg.get_reals("walk", "tgrid");
      wp.seed = rec.seed;
      wp.threads = threads;
      const std::string prefix = (fs::path(rec.dir) / "walk").string();
      stage_walk(wp, prefix);
      rec.outputs["walk_json"] = prefix + ".json";
      rec.outputs["walk_csv"] = prefix + ".csv";
      verdicts["walk"] = "report";
    }
  }

  rec.verdicts = verdicts;
  json run_json;
  run_json["id"] = rec.id;
  run_json["seed"] = rec.seed;
  run_json["version"] = rec.version;
  run_json["config"] = cfg.serialize();
  json outs;
  for (const auto& [k, v] : rec.outputs) outs[k] = fs::path(v).filename().string();
  run_json["outputs"] = outs;
  run_json["verdicts"] = verdicts;
  run_json["overall"] = rec.failed ? "fail" : "pass";
  write_json((fs::path(rec.dir) / "run.json").string(), run_json);

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Timing is observational and excluded from the determinism contract.
  std::ofstream timing((fs::path(rec.dir) / "timing.log").string());
  timing << "wall_seconds " << rec.wall_seconds << "\n";
  if (rec.sweeps > 0) {
    timing << "sweeps " << rec.sweeps << "\n";
    timing << "sweeps_per_second " << rec.sweeps / std::max(rec.wall_seconds, 1e-9) << "\n";
  }
  return rec;
}

// Single merged document: every stage JSON under its stage key plus an index
// of the plot-ready CSV tables. An empty run directory yields an empty but
// valid document.
inline json emit_report(const std::string& run_dir) {
  json report = json::object();
  if (!fs::exists(run_dir)) return report;
  static const std::vector<std::string> stages = {"run",     "samples", "vortices",
                                                  "fluct",   "contour", "couple",
                                                  "walk"};
  for (const auto& s : stages) {
    const auto p = fs::path(run_dir) / (s + ".json");
    if (fs::exists(p)) report[s] = read_json(p.string());
  }
  json tables = json::array();
  for (const auto& entry : fs::directory_iterator(run_dir))
    if (entry.path().extension() == ".csv") tables.push_back(entry.path().filename().string());
  std::sort(tables.begin(), tables.end());
  report["tables"] = tables;
  write_json((fs::path(run_dir) / "report.json").string(), report);
  return report;
}

}  // namespace gflab
