#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cidr/config.hpp"
#include "cidr/error.hpp"
#include "cidr/metrics.hpp"
#include "cidr/refinement.hpp"

namespace cidr {

/// One line of `explain` output. Field names match the JSON keys.
struct ExplanationReport {
  struct Pair {
    std::size_t i = 0;
    std::size_t j = 0;
    double cig = 0.0;
    double ig_i = 0.0;
    double ig_j = 0.0;
    double loo_i = 0.0;  // IG of i with j padded
    double loo_j = 0.0;  // IG of j with i padded
    bool operator==(const Pair&) const = default;
  };
  struct MfsPair {
    std::size_t i = 0;
    std::size_t j = 0;
    double frequency = 0.0;
    std::vector<std::size_t> iterations;
    bool operator==(const MfsPair&) const = default;
  };
  struct Bounds {
    double u1 = 0.0;
    double u2 = 0.0;
    std::vector<double> u2_perturbed;  // per iteration
    std::vector<double> capacity;      // per iteration, after clamping at 0
    std::vector<double> excluded_cig;  // per iteration
    bool operator==(const Bounds&) const = default;
  };
  struct Metrics {
    double comp = 0.0;
    double lo = 0.0;
    double fms = 0.0;
    std::size_t k = 0;
    bool operator==(const Metrics&) const = default;
  };

  std::string id;
  std::vector<std::string> tokens;
  std::size_t oov = 0;
  bool degenerate = false;
  std::size_t predicted_class = 0;
  double probability = 0.0;
  std::vector<double> ig;
  std::vector<Pair> cig;  // positive pairs only
  std::vector<MfsPair> mfs;
  Bounds bounds;
  nlohmann::json config;
  std::uint64_t seed = 0;
  Metrics metrics;

  bool operator==(const ExplanationReport&) const = default;
};

inline nlohmann::json report_to_json(const ExplanationReport& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["tokens"] = r.tokens;
  j["oov"] = r.oov;
  j["degenerate"] = r.degenerate;
  j["predicted_class"] = r.predicted_class;
  j["probability"] = r.probability;
  j["ig"] = r.ig;
  j["cig"] = nlohmann::json::array();
  for (const auto& p : r.cig) {
    j["cig"].push_back({{"i", p.i}, {"j", p.j}, {"cig", p.cig}, {"ig_i", p.ig_i}, {"ig_j", p.ig_j},
                        {"loo_i", p.loo_i}, {"loo_j", p.loo_j}});
  }
  j["mfs"] = nlohmann::json::array();
  for (const auto& p : r.mfs) {
    j["mfs"].push_back({{"i", p.i}, {"j", p.j}, {"frequency", p.frequency}, {"iterations", p.iterations}});
  }
  j["bounds"] = {{"u1", r.bounds.u1},
                 {"u2", r.bounds.u2},
                 {"u2_perturbed", r.bounds.u2_perturbed},
                 {"capacity", r.bounds.capacity},
                 {"excluded_cig", r.bounds.excluded_cig}};
  j["config"] = r.config;
  j["seed"] = r.seed;
  j["metrics"] = {{"comp", r.metrics.comp}, {"lo", r.metrics.lo}, {"fms", r.metrics.fms}, {"k", r.metrics.k}};
  return j;
}

inline ExplanationReport report_from_json(const nlohmann::json& j) {
  ExplanationReport r;
  try {
    r.id = j.at("id").get<std::string>();
    r.tokens = j.at("tokens").get<std::vector<std::string>>();
    r.oov = j.at("oov").get<std::size_t>();
    r.degenerate = j.at("degenerate").get<bool>();
    r.predicted_class = j.at("predicted_class").get<std::size_t>();
    r.probability = j.at("probability").get<double>();
    r.ig = j.at("ig").get<std::vector<double>>();
    for (const auto& p : j.at("cig")) {
      r.cig.push_back({p.at("i").get<std::size_t>(), p.at("j").get<std::size_t>(), p.at("cig").get<double>(),
                       p.at("ig_i").get<double>(), p.at("ig_j").get<double>(), p.at("loo_i").get<double>(),
                       p.at("loo_j").get<double>()});
    }
    for (const auto& p : j.at("mfs")) {
      r.mfs.push_back({p.at("i").get<std::size_t>(), p.at("j").get<std::size_t>(), p.at("frequency").get<double>(),
                       p.at("iterations").get<std::vector<std::size_t>>()});
    }
    const auto& b = j.at("bounds");
    r.bounds.u1 = b.at("u1").get<double>();
    r.bounds.u2 = b.at("u2").get<double>();
    r.bounds.u2_perturbed = b.at("u2_perturbed").get<std::vector<double>>();
    r.bounds.capacity = b.at("capacity").get<std::vector<double>>();
    r.bounds.excluded_cig = b.at("excluded_cig").get<std::vector<double>>();
    r.config = j.at("config");
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& m = j.at("metrics");
    r.metrics = {m.at("comp").get<double>(), m.at("lo").get<double>(), m.at("fms").get<double>(),
                 m.at("k").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("report: ") + e.what());
  }
  const std::size_t n = r.tokens.size();
  auto check = [n](std::size_t i, std::size_t jj) {
    if (i >= n || jj >= n || i >= jj) throw InputError("report: pair index out of range");
  };
  for (const auto& p : r.cig) check(p.i, p.j);
  for (const auto& p : r.mfs) check(p.i, p.j);
  return r;
}

inline nlohmann::json metrics_row_to_json(const metrics::MetricsRow& row) {
  return {{"method", row.method}, {"lo", row.lo}, {"comp", row.comp}, {"fms", row.fms}, {"n", row.n},
          {"seed", row.seed}};
}

inline metrics::MetricsRow metrics_row_from_json(const nlohmann::json& j) {
  try {
    return {j.at("method").get<std::string>(), j.at("lo").get<double>(), j.at("comp").get<double>(),
            j.at("fms").get<double>(), j.at("n").get<std::size_t>(), j.at("seed").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("metrics row: ") + e.what());
  }
}

}  // namespace cidr
