// gflab: lattice gradient-field laboratory.
//
// Subcommands: sample, vortices, couple, fluct, contour, walk, run, report.
// Exit codes: 0 pass, 1 fail verdict, 2 usage/config error, 3 runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gflab/run.hpp"

using namespace gflab;

namespace {

std::vector<double> parse_reals(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

std::string join_reals(const std::vector<double>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << " ";
    out << v[i];
  }
  return out.str();
}

struct CommonModelFlags {
  std::string model = "grad";
  double eps = 0.25;
  std::string box = "0,0,1,1";
  double beta = 0.0;
  std::string schedule;  // "A,C" for the log form
  double delta = kPi / 4;
  double lambda = 0.0;
  double h = 0.0;

  void add_to(CLI::App* cmd, bool with_model) {
    cmd->set_help_flag("--help", "print help");  // frees --h for the field strength
    if (with_model)
      cmd->add_option("--model", model, "xy | grad | graddelta | xyfield");
    cmd->add_option("--eps", eps, "lattice spacing");
    cmd->add_option("--box", box, "comma list: d lower corners then d upper corners");
    cmd->add_option("--beta", beta, "constant inverse temperature");
    cmd->add_option("--schedule", schedule, "log schedule 'A,C': beta = A + C |log eps|");
    cmd->add_option("--delta", delta, "truncation parameter of the convex potential");
    cmd->add_option("--lambda", lambda, "anharmonic coefficient");
    cmd->add_option("--h", h, "external field (xyfield)");
  }

  void fill_config(Config& cfg) const {
    const auto corners = parse_reals(box);
    if (corners.size() < 4 || corners.size() % 2 != 0)
      throw ConfigError("--box needs an even number (>= 4) of comma-separated reals");
    const int d = static_cast<int>(corners.size()) / 2;
    cfg.set("domain", "d", std::to_string(d));
    cfg.set("domain", "eps", std::to_string(eps));
    cfg.set("domain", "box_lo", join_reals({corners.begin(), corners.begin() + d}));
    cfg.set("domain", "box_hi", join_reals({corners.begin() + d, corners.end()}));
    cfg.set("model", "kind", model);
    if (h != 0.0) cfg.set("model", "h", std::to_string(h));
    if (model == "graddelta") cfg.set("potential", "delta", std::to_string(delta));
    if (model == "grad") {
      cfg.set("potential", "family", lambda > 0.0 ? "anharmonic" : "quadratic");
      if (lambda > 0.0) cfg.set("potential", "lambda", std::to_string(lambda));
    }
    if (!schedule.empty()) {
      const auto ac = parse_reals(schedule);
      if (ac.size() != 2) throw ConfigError("--schedule needs 'A,C'");
      cfg.set("beta", "form", "log");
      cfg.set("beta", "a", std::to_string(ac[0]));
      cfg.set("beta", "c", std::to_string(ac[1]));
    } else {
      cfg.set("beta", "form", "constant");
      cfg.set("beta", "beta0", std::to_string(beta > 0.0 ? beta : 1.0));
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gflab - lattice gradient-field laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (chains / environments)")
      ->capture_default_str();
  app.add_option("--out-dir", out_dir, "output directory for 'run'")->capture_default_str();

  // sample ------------------------------------------------------------------
  auto* c_sample = app.add_subcommand("sample", "draw configurations from a Gibbs measure");
  CommonModelFlags sflags;
  sflags.add_to(c_sample, true);
  int s_chains = 4;
  std::string s_burnin = "auto";
  long s_samples = 1000, s_thin = 10;
  std::string s_out = "samples.csv";
  c_sample->add_option("--chains", s_chains);
  c_sample->add_option("--burnin", s_burnin, "sweeps, or 'auto' (20x pilot tau_int)");
  c_sample->add_option("--samples", s_samples, "recorded samples per chain");
  c_sample->add_option("--thin", s_thin, "sweeps between records");
  c_sample->add_option("--out", s_out, "output CSV path");

  // vortices ----------------------------------------------------------------
  auto* c_vort = app.add_subcommand("vortices", "per-sample vortex census of a sample CSV");
  std::string v_in, v_out = "vortices";
  c_vort->add_option("--in", v_in, "sample CSV")->required();
  c_vort->add_option("--out", v_out, "output prefix");

  // couple ------------------------------------------------------------------
  auto* c_couple = app.add_subcommand("couple", "XY / convex-gradient coupling draws");
  CommonModelFlags cflags;
  cflags.model = "xy";
  cflags.add_to(c_couple, false);
  long k_draws = 300, k_pilot = 800, k_budget = 500, k_thin = 10;
  std::string k_out = "couple";
  c_couple->add_option("--draws", k_draws);
  c_couple->add_option("--pilot", k_pilot, "pilot samples for the mixture weights");
  c_couple->add_option("--budget", k_budget, "rejection budget per W draw");
  c_couple->add_option("--thin", k_thin);
  c_couple->add_option("--out", k_out, "output prefix");

  // fluct -------------------------------------------------------------------
  auto* c_fluct = app.add_subcommand("fluct", "fluctuation field against the Gaussian limit");
  std::string f_in, f_phi = "bump", f_tgrid = "auto", f_out = "fluct";
  c_fluct->add_option("--in", f_in, "sample CSV")->required();
  c_fluct->add_option("--phi", f_phi, "bump | sine | polybump");
  c_fluct->add_option("--tgrid", f_tgrid, "comma list of t values, or 'auto'");
  c_fluct->add_option("--out", f_out, "output prefix");

  // contour -----------------------------------------------------------------
  auto* c_contour = app.add_subcommand("contour", "exceedance probabilities and rate fit");
  std::vector<std::string> t_in;
  int t_edges = 1;
  std::string t_a = "0.3,0.5,0.8", t_out = "contour";
  c_contour->add_option("--in", t_in, "sample CSV (repeatable)")->required();
  c_contour->add_option("--edges", t_edges, "size of the joint edge set");
  c_contour->add_option("--a", t_a, "comma list of thresholds");
  c_contour->add_option("--out", t_out, "output prefix");

  // walk --------------------------------------------------------------------
  auto* c_walk = app.add_subcommand("walk", "random walk in the dynamic environment");
  std::string w_pot = "quadratic", w_tgrid = "2,5,10", w_out = "walk";
  double w_eps = 0.25, w_beta = 0.0, w_delta = kPi / 4, w_lambda = 0.0, w_horizon = 10.0,
         w_dt = 5e-3, w_cap = 0.0;
  std::string w_schedule;
  int w_pairs = 200, w_envs = 4;
  c_walk->add_option("--eps", w_eps, "lattice spacing for the beta schedule");
  c_walk->add_option("--beta", w_beta, "constant inverse temperature");
  c_walk->add_option("--schedule", w_schedule, "log schedule 'A,C'");
  c_walk->add_option("--potential", w_pot, "quadratic | graddelta | anharmonic");
  c_walk->add_option("--delta", w_delta);
  c_walk->add_option("--lambda", w_lambda);
  c_walk->add_option("--horizon", w_horizon);
  c_walk->add_option("--pairs", w_pairs, "walks per environment");
  c_walk->add_option("--envs", w_envs, "independent environments");
  c_walk->add_option("--dt", w_dt, "Langevin step");
  c_walk->add_option("--lambda-cap", w_cap, "thinning cap (0: sup V'')");
  c_walk->add_option("--tgrid", w_tgrid, "comma list of report times");
  c_walk->add_option("--out", w_out, "output prefix");

  // run / report --------------------------------------------------------------
  auto* c_run = app.add_subcommand("run", "execute a config-driven pipeline");
  std::string r_config;
  c_run->add_option("config", r_config, "config file")->required();

  auto* c_report = app.add_subcommand("report", "merge a run directory into report.json");
  std::string rp_dir;
  c_report->add_option("--run-dir", rp_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const bool seed_given = app.count("--seed") > 0;

  try {
    if (*c_sample) {
      Config cfg;
      sflags.fill_config(cfg);
      cfg.set("sampler", "chains", std::to_string(s_chains));
      cfg.set("sampler", "burnin", s_burnin);
      cfg.set("sampler", "samples", std::to_string(s_samples));
      cfg.set("sampler", "thin", std::to_string(s_thin));
      cfg.validate();
      const auto ms = model_setup_from_config(cfg);
      const auto sp = sample_params_from_config(cfg, seed, threads);
      const auto res = stage_sample(ms, sp, s_out);
      std::cout << "wrote " << s_out << " (" << sp.n_chains << " chains x " << sp.n_samples
                << " samples, beta = " << ms.beta
                << ", rhat = " << res.diag.interchain_rhat << ")\n";
      return 0;
    }
    if (*c_vort) {
      const auto j = stage_vortices(v_in, v_out);
      std::cout << "wrote " << v_out << ".json: P(any vortex) = "
                << j.at("p_any_vortex").at("estimate") << "\n";
      return 0;
    }
    if (*c_couple) {
      Config cfg;
      CommonModelFlags mf = cflags;
      mf.model = "xy";
      mf.fill_config(cfg);
      cfg.validate();
      const auto ms = model_setup_from_config(cfg);
      CouplingParams cp;
      cp.delta = cflags.delta;
      cp.thin = k_thin;
      cp.pilot_samples = k_pilot;
      cp.rejection_budget = k_budget;
      cp.seed = seed;
      const auto j = stage_couple(ms.dom, ms.beta, cp, k_draws, k_out);
      std::cout << "wrote " << k_out << ".json: agreement = " << j.at("agreement_rate")
                << ", KS p (delta marginal) = " << j.at("ks_p_delta_marginal") << "\n";
      return j.at("marginals_ok").get<bool>() ? 0 : 1;
    }
    if (*c_fluct) {
      std::vector<double> tg;
      if (f_tgrid != "auto") tg = parse_reals(f_tgrid);
      const auto j = stage_fluct(f_in, f_phi, tg, f_out);
      std::cout << "wrote " << f_out << ".json: verdict = " << j.at("verdict")
                << ", var ratio = " << j.at("var_ratio").at("value") << "\n";
      return j.at("verdict") == "fail" ? 1 : 0;
    }
    if (*c_contour) {
      const auto j = stage_contour(t_in, t_edges, parse_reals(t_a), t_out);
      std::cout << "wrote " << t_out << ".json";
      if (!j.at("regression").is_null())
        std::cout << ": slope = " << j.at("regression").at("slope");
      std::cout << "\n";
      if (j.contains("convex_bound_ok") && !j.at("convex_bound_ok").get<bool>()) return 1;
      return 0;
    }
    if (*c_walk) {
      WalkStageParams wp;
      wp.pot = potential_from_strings(w_pot == "graddelta" ? "truncated-convex" : w_pot,
                                      w_delta, w_lambda);
      if (!w_schedule.empty()) {
        const auto ac = parse_reals(w_schedule);
        if (ac.size() != 2) throw ConfigError("--schedule needs 'A,C'");
        wp.beta = beta_at(BetaSchedule::log_schedule(ac[0], ac[1]), w_eps, 2).beta;
      } else {
        wp.beta = w_beta > 0.0 ? w_beta : 1.0;
      }
      wp.horizon = w_horizon;
      wp.envs = w_envs;
      wp.pairs = w_pairs;
      wp.dt = w_dt;
      wp.lambda_cap = w_cap;
      wp.tgrid = parse_reals(w_tgrid);
      wp.seed = seed;
      wp.threads = threads;
      stage_walk(wp, w_out);
      std::cout << "wrote " << w_out << ".json\n";
      return 0;
    }
    if (*c_run) {
      const auto rec = run_experiment(
          r_config, out_dir, seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt,
          threads);
      std::cout << "run " << rec.id << " -> " << rec.dir << " ("
                << (rec.failed ? "FAIL" : "PASS") << ")\n";
      return rec.failed ? 1 : 0;
    }
    if (*c_report) {
      emit_report(rp_dir);
      std::cout << "wrote " << rp_dir << "/report.json\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
