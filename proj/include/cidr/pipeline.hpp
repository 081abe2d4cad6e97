#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cidr/attribution.hpp"
#include "cidr/checkpoint.hpp"
#include "cidr/config.hpp"
#include "cidr/corpus.hpp"
#include "cidr/error.hpp"
#include "cidr/metrics.hpp"
#include "cidr/parallel.hpp"
#include "cidr/refinement.hpp"
#include "cidr/report.hpp"
#include "cidr/toy_model.hpp"

namespace cidr {

inline constexpr std::array<std::string_view, 6> kMethods = {"cidr",     "cidr-no-r",       "cidr-no-cig",
                                                             "ig-top2k", "gradinput-top2k", "random"};

inline void validate_methods(std::span<const std::string> methods) {
  for (const auto& m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      std::string valid;
      for (auto v : kMethods) valid += (valid.empty() ? "" : ", ") + std::string(v);
      throw ConfigError("unknown method '" + m + "'; valid methods are: " + valid);
    }
  }
}

struct InstanceScore {
  double comp = 0.0;
  double lo = 0.0;
  double fms = 0.0;
  std::size_t k = 0;  // elements removed for Comp/LO (pairs or words)
};

/// Comp/LO on the top-K pairs of `set` by CIG and FMS on the whole set.
template <Classifier M>
InstanceScore score_pair_set(const M& model, const Instance& inst, const PairScoreMap& ranking,
                             const std::vector<TokenPair>& set, double t) {
  const auto protocol = metrics::RemovalProtocol::for_set(inst.size(), set.size(), metrics::RemovalMode::pairs);
  const auto top = metrics::top_k_pairs(ranking, set, protocol.k);
  if (top.size() > std::min(metrics::RemovalProtocol::base_k(inst.size()), set.size())) {
    throw InternalError("removal protocol: evaluated pair set exceeds K");
  }
  const auto removed = metrics::positions_of(top);
  return {metrics::instance_comprehensiveness(model, inst, removed), metrics::instance_log_odds(model, inst, removed),
          metrics::instance_fms_pairs(model, inst, set, t), top.size()};
}

/// Top-2K words of an attribution vector, where K = min(max(1, floor(0.1 n)), |S|)
/// and |S| is the size of the CIDR feature set for the same instance.
template <Classifier M>
InstanceScore score_top_words(const M& model, const Instance& inst, const std::vector<double>& scores,
                              std::size_t reference_size, double t) {
  const auto protocol = metrics::RemovalProtocol::for_set(inst.size(), reference_size, metrics::RemovalMode::words);
  const auto words = metrics::top_k_baseline(scores, 2 * protocol.k);
  if (words.size() > 2 * protocol.k) throw InternalError("removal protocol: evaluated word set exceeds 2K");
  return {metrics::instance_comprehensiveness(model, inst, words), metrics::instance_log_odds(model, inst, words),
          metrics::instance_fms_words(model, inst, words, t), words.size()};
}

/// Uniformly random pairs, `count` of them, in random rank order.
inline std::vector<TokenPair> random_pairs(std::size_t tokens, std::size_t count, std::uint64_t seed,
                                           std::size_t instance_index) {
  std::vector<TokenPair> all;
  for (std::size_t i = 0; i < tokens; ++i)
    for (std::size_t j = i + 1; j < tokens; ++j) all.push_back({i, j});
  std::mt19937_64 rng(detail::splitmix(seed ^ detail::splitmix(0x72616e646f6dULL + instance_index)));
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(count, all.size()));
  return all;
}

namespace detail {

// Ranking for a random set: rank order equals draw order.
inline PairScoreMap rank_by_position(std::size_t tokens, const std::vector<TokenPair>& order) {
  PairScoreMap map;
  map.tokens = tokens;
  for (std::size_t i = 0; i < tokens; ++i)
    for (std::size_t j = i + 1; j < tokens; ++j) map.scores.push_back({{i, j}});
  for (std::size_t r = 0; r < order.size(); ++r) {
    map.scores[pair_index(order[r], tokens)].cig = static_cast<double>(order.size() - r);
  }
  return map;
}

}  // namespace detail

/// Score one instance under every requested method.
template <DifferentiableClassifier M>
std::vector<InstanceScore> evaluate_instance(const M& model, const Instance& inst, std::size_t index,
                                             const CidrConfig& config, std::span<const std::string> methods) {
  std::optional<Explanation> cidr_ex;
  auto full = [&]() -> const Explanation& {
    if (!cidr_ex) cidr_ex = refine(model, inst, config);
    return *cidr_ex;
  };
  const std::size_t target = argmax(model.forward(inst.embedding()));

  std::vector<InstanceScore> out;
  for (const auto& method : methods) {
    if (method == "cidr") {
      const Explanation& ex = full();
      out.push_back(score_pair_set(model, inst, ex.pairs, ex.mfs.pair_ids(), config.t));
    } else if (method == "cidr-no-r") {
      const Explanation ex = cidr_without_refinement(model, inst, config);
      out.push_back(score_pair_set(model, inst, ex.pairs, ex.mfs.pair_ids(), config.t));
    } else if (method == "cidr-no-cig") {
      CidrConfig plain = config;
      plain.beta = 0.0;
      const Explanation ex = refine(model, inst, plain);
      out.push_back(score_pair_set(model, inst, ex.pairs, ex.mfs.pair_ids(), config.t));
    } else if (method == "ig-top2k") {
      const auto ig = integrated_gradients(model, inst, target, config.m).scores;
      out.push_back(score_top_words(model, inst, ig, full().mfs.pairs.size(), config.t));
    } else if (method == "gradinput-top2k") {
      out.push_back(
          score_top_words(model, inst, gradient_times_input(model, inst, target), full().mfs.pairs.size(), config.t));
    } else if (method == "random") {
      const auto set = random_pairs(inst.size(), full().mfs.pairs.size(), config.seed, index);
      out.push_back(score_pair_set(model, inst, detail::rank_by_position(inst.size(), set), set, config.t));
    } else {
      validate_methods(std::span<const std::string>(&method, 1));
    }
  }
  return out;
}

/// One MetricsRow per method, averaged over all instances.
template <DifferentiableClassifier M>
std::vector<metrics::MetricsRow> evaluate_methods(const M& model, std::span<const Instance> instances,
                                                  const CidrConfig& config, std::span<const std::string> methods,
                                                  std::size_t workers = 0) {
  validate_methods(methods);
  config.validate();
  if (instances.empty()) throw InputError("evaluate: empty corpus");
  const auto per_instance = parallel_map(
      instances.size(), [&](std::size_t k) { return evaluate_instance(model, instances[k], k, config, methods); },
      workers);

  std::vector<metrics::MetricsRow> rows;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    metrics::MetricsRow row;
    row.method = methods[m];
    row.n = instances.size();
    row.seed = config.seed;
    for (const auto& scores : per_instance) {
      row.comp += scores[m].comp;
      row.lo += scores[m].lo;
      row.fms += scores[m].fms;
    }
    row.comp /= static_cast<double>(row.n);
    row.lo /= static_cast<double>(row.n);
    row.fms /= static_cast<double>(row.n);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Reports.

template <DifferentiableClassifier M>
ExplanationReport explain_instance(const M& model, const Instance& inst, const RunConfig& cfg) {
  const Explanation ex = refine(model, inst, cfg.cidr);
  ExplanationReport r;
  r.oov = static_cast<std::size_t>(std::count(inst.pad_mask.begin(), inst.pad_mask.end(), true));
  r.degenerate = ex.mfs.degenerate;
  r.predicted_class = ex.target;
  r.probability = ex.probability;
  r.ig = ex.ig.scores;
  for (const TokenPair& p : ex.pairs.positive) {
    const PairScore& s = ex.pairs.at(p);
    r.cig.push_back({p.first, p.second, s.cig, s.ig_first, s.ig_second, s.loo_first, s.loo_second});
  }
  for (const auto& kept : ex.mfs.pairs) r.mfs.push_back({kept.pair.first, kept.pair.second, kept.frequency, kept.iterations});
  r.bounds.u1 = ex.bounds.u1;
  r.bounds.u2 = ex.bounds.u2;
  for (const auto& it : ex.iterations) {
    r.bounds.u2_perturbed.push_back(it.u2_perturbed);
    r.bounds.capacity.push_back(it.capacity);
    r.bounds.excluded_cig.push_back(it.excluded_cig);
  }
  r.config = config_to_json(cfg);
  r.seed = cfg.cidr.seed;
  const InstanceScore score = score_pair_set(model, inst, ex.pairs, ex.mfs.pair_ids(), cfg.cidr.t);
  r.metrics = {score.comp, score.lo, score.fms, score.k};
  return r;
}

inline ExplanationReport explain_record(const ToyModel& model, const CorpusRecord& rec, const RunConfig& cfg) {
  std::size_t oov = 0;
  const Instance inst = model.instance(rec.tokens, rec.label, &oov);
  ExplanationReport r = explain_instance(model, inst, cfg);
  r.id = rec.id;
  r.tokens = rec.tokens;
  r.oov = oov;
  return r;
}

/// Write one report line per record, in corpus order.
inline void write_explanations(const ToyModel& model, const std::vector<CorpusRecord>& corpus, const RunConfig& cfg,
                               std::ostream& out, std::size_t workers = 0) {
  cfg.cidr.validate();
  const auto reports =
      parallel_map(corpus.size(), [&](std::size_t k) { return explain_record(model, corpus[k], cfg); }, workers);
  for (const auto& r : reports) out << report_to_json(r).dump() << '\n';
}

inline std::vector<ExplanationReport> read_reports(std::istream& in) {
  std::vector<ExplanationReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(report_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("report: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// File-level entry points used by the CLI.

inline void run_train(const RunConfig& cfg, const std::filesystem::path& corpus_path,
                      const std::filesystem::path& model_path) {
  const auto corpus = load_corpus(corpus_path);
  const auto texts = labeled_texts(corpus);
  save_checkpoint(train_toy(texts, cfg.train), model_path);
}

inline void run_explain(const RunConfig& cfg, const std::filesystem::path& corpus_path,
                        const std::filesystem::path& model_path, const std::filesystem::path& out_path,
                        std::size_t workers = 0) {
  const auto corpus = load_corpus(corpus_path);
  const auto model = load_checkpoint(model_path);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot write report " + out_path.string());
  write_explanations(model, corpus, cfg, out, workers);
}

inline std::vector<metrics::MetricsRow> run_evaluate(const RunConfig& cfg, const std::filesystem::path& corpus_path,
                                                     const std::filesystem::path& model_path,
                                                     const std::vector<std::string>& methods,
                                                     const std::filesystem::path& out_path, std::size_t workers = 0) {
  validate_methods(methods);
  const auto corpus = load_corpus(corpus_path);
  const auto model = load_checkpoint(model_path);
  std::vector<Instance> instances;
  instances.reserve(corpus.size());
  for (const auto& rec : corpus) instances.push_back(model.instance(rec.tokens, rec.label));
  const auto rows = evaluate_methods(model, instances, cfg.cidr, methods, workers);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot write metrics table " + out_path.string());
  for (const auto& row : rows) out << metrics_row_to_json(row).dump() << '\n';
  return rows;
}

}  // namespace cidr
