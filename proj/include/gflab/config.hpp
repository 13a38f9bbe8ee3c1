#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gflab/potential.hpp"
#include "gflab/sampler.hpp"

namespace gflab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Plain-text sectioned key-value configuration:
//
//   [section]
//   key = value tokens
//
// '#' starts a comment. Unknown sections and keys are rejected against the
// schema below; parse -> serialize -> parse is the identity.
class Config {
 public:
  using Section = std::vector<std::pair<std::string, std::string>>;

  static Config parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty())
          throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
        cfg.section_order_.push_back(section);
        cfg.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      for (const auto& [k, v] : cfg.sections_[section])
        if (k == key)
          throw ConfigError("config: duplicate key '" + key + "' in [" + section + "]");
      cfg.sections_[section].push_back({key, value});
    }
    return cfg;
  }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& name : section_order_) {
      out << "[" << name << "]\n";
      for (const auto& [k, v] : sections_.at(name)) out << k << " = " << v << "\n";
      out << "\n";
    }
    return out.str();
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }
  bool has(const std::string& s, const std::string& k) const {
    if (!has_section(s)) return false;
    for (const auto& [key, v] : sections_.at(s))
      if (key == k) return true;
    return false;
  }

  std::string get(const std::string& s, const std::string& k) const {
    if (!has_section(s)) throw ConfigError("config: missing section [" + s + "]");
    for (const auto& [key, v] : sections_.at(s))
      if (key == k) return v;
    throw ConfigError("config: missing key '" + k + "' in [" + s + "]");
  }

  std::string get_or(const std::string& s, const std::string& k,
                     const std::string& dflt) const {
    return has(s, k) ? get(s, k) : dflt;
  }

  double get_real(const std::string& s, const std::string& k) const {
    return to_real(get(s, k), s, k);
  }
  double get_real_or(const std::string& s, const std::string& k, double dflt) const {
    return has(s, k) ? get_real(s, k) : dflt;
  }
  long get_int(const std::string& s, const std::string& k) const {
    const std::string v = get(s, k);
    try {
      std::size_t pos = 0;
      const long r = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return r;
    } catch (...) {
      throw ConfigError("config: [" + s + "] " + k + " = '" + v + "' is not an integer");
    }
  }
  long get_int_or(const std::string& s, const std::string& k, long dflt) const {
    return has(s, k) ? get_int(s, k) : dflt;
  }
  std::vector<double> get_reals(const std::string& s, const std::string& k) const {
    std::istringstream in(get(s, k));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(to_real(tok, s, k));
    if (out.empty()) throw ConfigError("config: [" + s + "] " + k + " is empty");
    return out;
  }
  std::vector<std::string> get_tokens(const std::string& s, const std::string& k) const {
    std::istringstream in(get(s, k));
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }

  void set(const std::string& s, const std::string& k, const std::string& v) {
    if (!has_section(s)) {
      section_order_.push_back(s);
      sections_[s];
    }
    for (auto& [key, val] : sections_[s])
      if (key == k) {
        val = v;
        return;
      }
    sections_[s].push_back({k, v});
  }

  // Rejects unknown sections/keys and checks value-level constraints that do
  // not need the full model context.
  void validate() const {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"run", {"id", "seed", "threads", "pipeline"}},
        {"domain", {"d", "eps", "box_lo", "box_hi"}},
        {"model", {"kind", "h"}},
        {"potential", {"family", "delta", "lambda"}},
        {"beta", {"form", "beta0", "a", "c"}},
        {"sampler", {"chains", "burnin", "samples", "thin", "update", "width", "dt"}},
        {"fluct", {"phi", "tgrid"}},
        {"vortices", {"max_records"}},
        {"contour", {"edges", "a"}},
        {"couple", {"delta", "draws", "pilot", "budget", "thin"}},
        {"walk", {"potential", "delta", "lambda", "horizon", "pairs", "envs", "dt",
                  "lambda_cap", "tgrid"}},
    };
    for (const auto& [name, kv] : sections_) {
      const auto it = schema.find(name);
      if (it == schema.end()) throw ConfigError("config: unknown section [" + name + "]");
      for (const auto& [k, v] : kv)
        if (!it->second.count(k))
          throw ConfigError("config: unknown key '" + k + "' in [" + name + "]");
    }
    if (has("potential", "delta")) check_delta(get_real("potential", "delta"));
    if (has("couple", "delta")) check_delta(get_real("couple", "delta"));
    if (has("walk", "delta")) check_delta(get_real("walk", "delta"));
    if (has("domain", "d")) {
      const long d = get_int("domain", "d");
      if (d < 2) throw ConfigError("config: [domain] d must be >= 2");
      if (has("domain", "box_lo") &&
          (get_reals("domain", "box_lo").size() != static_cast<std::size_t>(d) ||
           get_reals("domain", "box_hi").size() != static_cast<std::size_t>(d)))
        throw ConfigError("config: [domain] box corners must have d components");
    }
    if (has("domain", "eps") && !(get_real("domain", "eps") > 0.0))
      throw ConfigError("config: [domain] eps must be positive");
    if (has("model", "kind")) {
      const std::string kind = get("model", "kind");
      if (kind != "xy" && kind != "grad" && kind != "graddelta" && kind != "xyfield")
        throw ConfigError("config: [model] kind must be xy|grad|graddelta|xyfield");
    }
  }

  bool operator==(const Config& other) const {
    return sections_ == other.sections_ && section_order_ == other.section_order_;
  }

 private:
  static void check_delta(double delta) {
    if (!(delta > 0.0 && delta < kPi / 2))
      throw ConfigError("config: delta must lie in (0, pi/2)");
  }
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }
  static double to_real(const std::string& v, const std::string& s, const std::string& k) {
    try {
      std::size_t pos = 0;
      const double r = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return r;
    } catch (...) {
      throw ConfigError("config: [" + s + "] " + k + " = '" + v + "' is not a number");
    }
  }

  std::map<std::string, Section> sections_;
  std::vector<std::string> section_order_;
};

// Resolved model pieces shared by the CLI and the pipeline runner.
struct ModelSetup {
  LatticeDomain dom;
  ModelSpec model;
  Potential pot;
  double beta = 1.0;
  BetaSchedule schedule;
  std::string model_kind;  // xy | grad | graddelta | xyfield
};

inline Potential potential_from_strings(const std::string& family, double delta,
                                        double lambda) {
  if (family == "cosine") return Potential::cosine();
  if (family == "quadratic") return Potential::quadratic();
  if (family == "truncated-convex") return Potential::truncated_convex(delta);
  if (family == "anharmonic") return Potential::anharmonic(lambda);
  throw ConfigError("unknown potential family '" + family + "'");
}

inline ModelSetup model_setup_from_config(const Config& cfg) {
  ModelSetup ms;
  const int d = static_cast<int>(cfg.get_int("domain", "d"));
  const double eps = cfg.get_real("domain", "eps");
  ms.dom = build_rect_domain(d, eps, cfg.get_reals("domain", "box_lo"),
                             cfg.get_reals("domain", "box_hi"));
  ms.model_kind = cfg.get_or("model", "kind", "grad");
  if (ms.model_kind == "xy") {
    ms.model = ModelSpec::xy();
    ms.pot = Potential::cosine();
  } else if (ms.model_kind == "xyfield") {
    ms.model = ModelSpec::xy_field(cfg.get_real_or("model", "h", 0.0));
    ms.pot = Potential::cosine();
  } else if (ms.model_kind == "graddelta") {
    ms.model = ModelSpec::gradient();
    ms.pot = Potential::truncated_convex(cfg.get_real_or("potential", "delta", kPi / 4));
  } else if (ms.model_kind == "grad") {
    ms.model = ModelSpec::gradient();
    ms.pot = potential_from_strings(cfg.get_or("potential", "family", "quadratic"),
                                    cfg.get_real_or("potential", "delta", kPi / 4),
                                    cfg.get_real_or("potential", "lambda", 0.0));
    if (ms.pot.family() == PotentialFamily::Cosine)
      throw ConfigError("config: gradient models need a symmetric potential family "
                        "other than cosine (use kind = xy)");
  } else {
    throw ConfigError("config: bad model kind");
  }

  const std::string form = cfg.get_or("beta", "form", "constant");
  if (form == "constant") {
    ms.schedule = BetaSchedule::constant(cfg.get_real_or("beta", "beta0", 1.0));
    ms.beta = ms.schedule.beta0;
  } else if (form == "log") {
    ms.schedule = BetaSchedule::log_schedule(cfg.get_real_or("beta", "a", 10.0),
                                             cfg.get_real_or("beta", "c", 9.0 * d + 1.0));
    ms.beta = beta_at(ms.schedule, eps, d).beta;
  } else {
    throw ConfigError("config: [beta] form must be constant|log");
  }
  if (!(ms.beta > 0.0)) throw ConfigError("config: beta must be positive");
  return ms;
}

inline SampleParams sample_params_from_config(const Config& cfg, std::uint64_t seed,
                                              int threads) {
  SampleParams p;
  p.n_chains = static_cast<int>(cfg.get_int_or("sampler", "chains", 4));
  const std::string burn = cfg.get_or("sampler", "burnin", "auto");
  p.burnin = burn == "auto" ? -1 : std::stol(burn);
  p.n_samples = cfg.get_int_or("sampler", "samples", 1000);
  p.thin = cfg.get_int_or("sampler", "thin", 10);
  p.seed = seed;
  p.threads = threads;
  const std::string upd = cfg.get_or("sampler", "update", "auto");
  if (upd == "auto") p.update = UpdateKind::Auto;
  else if (upd == "heatbath") p.update = UpdateKind::Heatbath;
  else if (upd == "metropolis") p.update = UpdateKind::Metropolis;
  else if (upd == "langevin") p.update = UpdateKind::Langevin;
  else throw ConfigError("config: [sampler] update must be auto|heatbath|metropolis|langevin");
  p.metro_width = cfg.get_real_or("sampler", "width", 0.0);
  p.langevin_dt = cfg.get_real_or("sampler", "dt", 1e-3);
  return p;
}

}  // namespace gflab
