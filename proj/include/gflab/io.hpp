#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gflab/config.hpp"
#include "gflab/lattice.hpp"
#include "gflab/sampler.hpp"

namespace gflab {

inline constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

// Sample CSV: one row per (chain, sweep, vertex); theta printed with %.17g so
// replaying a seeded run reproduces the file byte for byte.
class SampleCsvWriter {
 public:
  explicit SampleCsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    out_ << "chain,sweep,vertex_index,theta\n";
  }

  void add(int chain, long sweep, const SpinConfig& cfg) {
    char buf[64];
    for (std::size_t v = 0; v < cfg.theta.size(); ++v) {
      std::snprintf(buf, sizeof buf, "%d,%ld,%zu,%.17g\n", chain, sweep, v, cfg.theta[v]);
      out_ << buf;
    }
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

struct SampleRecord {
  int chain;
  long sweep;
  std::vector<double> theta;
};

struct SampleFile {
  std::vector<std::vector<SampleRecord>> by_chain;

  long total() const {
    long n = 0;
    for (const auto& c : by_chain) n += static_cast<long>(c.size());
    return n;
  }
};

inline SampleFile read_samples_csv(const std::string& path, int num_vertices) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "chain,sweep,vertex_index,theta")
    throw std::runtime_error(path + ": not a sample CSV");
  SampleFile file;
  SampleRecord cur;
  cur.chain = -1;
  int expect_vertex = 0;
  auto flush = [&]() {
    if (cur.chain < 0) return;
    if (expect_vertex != num_vertices)
      throw std::runtime_error(path + ": truncated sample record");
    if (cur.chain >= static_cast<int>(file.by_chain.size()))
      file.by_chain.resize(cur.chain + 1);
    file.by_chain[cur.chain].push_back(std::move(cur));
    cur = SampleRecord{};
    cur.chain = -1;
    expect_vertex = 0;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int chain, vertex;
    long sweep;
    double theta;
    if (std::sscanf(line.c_str(), "%d,%ld,%d,%lf", &chain, &sweep, &vertex, &theta) != 4)
      throw std::runtime_error(path + ": bad row '" + line + "'");
    if (vertex == 0) {
      flush();
      cur.chain = chain;
      cur.sweep = sweep;
      cur.theta.reserve(num_vertices);
    }
    if (vertex != expect_vertex || chain != cur.chain)
      throw std::runtime_error(path + ": rows out of order");
    cur.theta.push_back(theta);
    ++expect_vertex;
  }
  flush();
  return file;
}

// JSON sidecar carrying everything needed to reinterpret a sample CSV.
struct RunMeta {
  int d = 2;
  double eps = 1.0;
  std::vector<double> box_lo, box_hi;
  std::string model_kind;  // xy | grad | graddelta | xyfield
  double h = 0.0;
  std::string family;
  double delta = 0.0;
  double lambda = 0.0;
  double beta = 1.0;
  std::string beta_form = "constant";
  int chains = 0;
  long burnin = 0;
  long samples = 0;
  long thin = 0;
  std::uint64_t seed = 0;
  std::string update;
  double acceptance_rate = 0.0;
  double tau_int = 0.0;
  double interchain_rhat = 1.0;
  std::vector<std::string> warnings;
};

inline json meta_to_json(const RunMeta& m) {
  json j;
  j["domain"] = {{"d", m.d}, {"eps", m.eps}, {"box_lo", m.box_lo}, {"box_hi", m.box_hi}};
  j["model"] = {{"kind", m.model_kind}, {"h", m.h}};
  j["potential"] = {{"family", m.family}, {"delta", m.delta}, {"lambda", m.lambda}};
  j["beta"] = {{"value", m.beta}, {"form", m.beta_form}};
  j["sampler"] = {{"chains", m.chains}, {"burnin", m.burnin},   {"samples", m.samples},
                  {"thin", m.thin},     {"seed", m.seed},       {"update", m.update},
                  {"acceptance_rate", m.acceptance_rate},
                  {"tau_int", m.tau_int}, {"interchain_rhat", m.interchain_rhat}};
  j["warnings"] = m.warnings;
  j["version"] = kVersion;
  return j;
}

inline RunMeta meta_from_json(const json& j) {
  RunMeta m;
  m.d = j.at("domain").at("d").get<int>();
  m.eps = j.at("domain").at("eps").get<double>();
  m.box_lo = j.at("domain").at("box_lo").get<std::vector<double>>();
  m.box_hi = j.at("domain").at("box_hi").get<std::vector<double>>();
  m.model_kind = j.at("model").at("kind").get<std::string>();
  m.h = j.at("model").at("h").get<double>();
  m.family = j.at("potential").at("family").get<std::string>();
  m.delta = j.at("potential").at("delta").get<double>();
  m.lambda = j.at("potential").at("lambda").get<double>();
  m.beta = j.at("beta").at("value").get<double>();
  m.beta_form = j.at("beta").at("form").get<std::string>();
  m.chains = j.at("sampler").at("chains").get<int>();
  m.burnin = j.at("sampler").at("burnin").get<long>();
  m.samples = j.at("sampler").at("samples").get<long>();
  m.thin = j.at("sampler").at("thin").get<long>();
  m.seed = j.at("sampler").at("seed").get<std::uint64_t>();
  m.update = j.at("sampler").at("update").get<std::string>();
  m.acceptance_rate = j.at("sampler").at("acceptance_rate").get<double>();
  m.tau_int = j.at("sampler").at("tau_int").get<double>();
  m.interchain_rhat = j.at("sampler").at("interchain_rhat").get<double>();
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline std::string sidecar_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind(".csv");
  return (dot == std::string::npos ? csv_path : csv_path.substr(0, dot)) + ".json";
}

inline LatticeDomain domain_from_meta(const RunMeta& m) {
  return build_rect_domain(m.d, m.eps, m.box_lo, m.box_hi);
}

inline ModelSpec model_from_meta(const RunMeta& m) {
  if (m.model_kind == "xy") return ModelSpec::xy();
  if (m.model_kind == "xyfield") return ModelSpec::xy_field(m.h);
  return ModelSpec::gradient();
}

inline Potential potential_from_meta(const RunMeta& m) {
  return potential_from_strings(m.family, m.delta, m.lambda);
}

}  // namespace gflab
