// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "support/models.hpp"

namespace {

using namespace cidr;
using namespace cidr::testing;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Analytic input gradient against central differences.
Outcome gradient_correctness() {
  std::mt19937_64 rng(101);
  const double h = 1e-5;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const ToyModel m = random_toy_model(rng, 15, 6, 5, 2 + draw % 2);
    const Matrix x = random_instance(m, rng, 1 + draw % 10).embedding();
    const std::size_t c = static_cast<std::size_t>(draw) % m.num_classes();
    const Matrix g = m.input_gradient(x, c);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        Matrix up = x, down = x;
        up(r, k) += h;
        down(r, k) -= h;
        const double fd = (m.forward(up)[c] - m.forward(down)[c]) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(g(r, k)), 1e-6});
        worst = std::max(worst, std::abs(fd - g(r, k)) / denom);
      }
    }
  }
  return {worst <= 1e-4, fmt("max relative error %.3e over 100 draws", worst)};
}

// 2. Completeness at m = 200 and shrinking residual as m doubles.
Outcome ig_completeness() {
  std::mt19937_64 rng(202);
  std::vector<std::pair<ToyModel, Instance>> draws;
  for (int d = 0; d < 50; ++d) {
    ToyModel m = random_toy_model(rng, 20, 6, 5, 2);
    Instance inst = random_instance(m, rng, 2 + d % 11);
    draws.emplace_back(std::move(m), std::move(inst));
  }
  auto residual = [](const ToyModel& m, const Instance& inst, std::size_t steps) {
    const std::size_t c = argmax(m.forward(inst.embedding()));
    const auto ig = integrated_gradients(m, inst, c, steps);
    const double total = std::accumulate(ig.scores.begin(), ig.scores.end(), 0.0);
    return std::abs(total - (m.forward(inst.embedding())[c] - m.forward(inst.baseline())[c]));
  };
  double worst200 = 0.0;
  for (const auto& [m, inst] : draws) worst200 = std::max(worst200, residual(m, inst, 200));
  bool shrinking = true;
  std::string means;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t steps = 25; steps <= 400; steps *= 2) {
    double mean = 0.0;
    for (const auto& [m, inst] : draws) mean += residual(m, inst, steps);
    mean /= static_cast<double>(draws.size());
    shrinking = shrinking && mean < previous;
    previous = mean;
    means += fmt(" %.1e", mean);
  }
  return {worst200 <= 1e-3 && shrinking, fmt("max residual at m=200 %.3e; mean residual m=25..400:", worst200) + means};
}

// 3. Closed forms on a model whose class probability is affine in the input.
Outcome linear_exactness() {
  std::mt19937_64 rng(303);
  const ToyModel host = random_toy_model(rng, 30, 6);
  const LinearProbabilityModel lin{random_vector(rng, 6, 0.05), 0.5};
  const Instance inst = random_instance(host, rng, 10);
  const double beta = 0.5;
  double worst = 0.0;
  const auto ig = integrated_gradients(lin, inst, 1, 50);
  for (std::size_t i = 0; i < 10; ++i) {
    worst = std::max(worst, std::abs(ig.scores[i] - lin.closed_form_ig(inst, i)));
    for (std::size_t j = 0; j < 10; ++j) {
      if (i == j) continue;
      worst = std::max(worst, std::abs(loo_integrated_gradients(lin, inst, i, j, 1, 50) - lin.closed_form_ig(inst, i)));
    }
  }
  const auto map = cooperative_integrated_gradients(lin, inst, ig, beta);
  for (const auto& s : map.scores) {
    const double want = (1.0 + beta) * (lin.closed_form_ig(inst, s.pair.first) + lin.closed_form_ig(inst, s.pair.second));
    worst = std::max(worst, std::abs(s.cig - want));
  }
  return {worst <= 1e-10 && map.scores.size() == 45, fmt("max deviation %.3e over 10 tokens, 45 pairs", worst)};
}

// 4. DP against exhaustive search.
Outcome knapsack_optimality() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::size_t> count(0, 15);
  std::uniform_int_distribution<std::int64_t> weight(1, 50);
  std::uniform_int_distribution<int> value(1, 50);
  int value_mismatch = 0, selection_mismatch = 0;
  for (int k = 0; k < 200; ++k) {
    knapsack::IntegerInstance<int> inst;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
      inst.items.push_back(static_cast<int>(i));
      inst.weights.push_back(weight(rng));
      inst.values.push_back(value(rng));
    }
    inst.capacity = std::accumulate(inst.weights.begin(), inst.weights.end(), std::int64_t{0}) / 2;
    const auto dp = knapsack::solve_dp(inst);
    const auto bf = knapsack::solve_bruteforce(inst);
    value_mismatch += dp.value != bf.value;
    selection_mismatch += dp.selected != bf.selected;
  }
  return {value_mismatch == 0 && selection_mismatch == 0,
          fmt("200 instances: %d value mismatches, %d selection mismatches", value_mismatch, selection_mismatch)};
}

// 5. Bounds recomputed from raw attribution values. Even-numbered fixtures
// have non-negative leave-one-out terms so the U2' <= U2 ordering is exercised.
Outcome bound_arithmetic() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<std::size_t> size(2, 12);
  std::normal_distribution<double> score(0.05, 0.2);
  std::uniform_real_distribution<double> share(0.0, 1.0);
  double worst = 0.0;
  int ordering_checked = 0, ordering_failed = 0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = size(rng);
    std::vector<double> ig(n);
    for (auto& v : ig) v = score(rng);
    std::vector<std::vector<double>> loo(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        if (i != j) loo[j][i] = (k % 2 == 0 ? std::abs(ig[i]) : ig[i]) * share(rng);
    const auto set = make_attribution_set(ig, 1, 0);
    const auto map = combine_pair_scores(ig, loo, 0.5);
    const auto v = sample_perturbations(map.positive, 7, static_cast<std::size_t>(k));

    double pos_sum = 0.0, pos_count = 0.0;
    for (double x : ig) {
      if (x > 0.0) {
        pos_sum += x;
        pos_count += 1.0;
      }
    }
    const double u1 = pos_count <= 1.0 ? 0.0 : 2.0 * (pos_count - 1.0) * pos_sum;
    double u2 = 0.0, u2p = 0.0;
    bool nonnegative = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double terms = loo[j][i] + loo[i][j];
        if (ig[i] + ig[j] + 0.5 * terms <= 0.0) continue;
        u2 += terms;
        u2p += v.at({i, j}) * terms;
        nonnegative = nonnegative && loo[j][i] >= 0.0 && loo[i][j] >= 0.0;
      }
    }
    u2 *= 0.5;
    u2p *= 0.5;
    worst = std::max({worst, std::abs(upper_bound_u1(set) - u1), std::abs(upper_bound_u2(map) - u2),
                      std::abs(perturbed_upper_bound(map, v) - u2p)});
    if (nonnegative) {
      ++ordering_checked;
      ordering_failed += perturbed_upper_bound(map, v) > upper_bound_u2(map);
    }
  }
  return {worst <= 1e-12 && ordering_failed == 0,
          fmt("max deviation %.3e on 50 fixtures; U2' <= U2 held on %d/%d", worst, ordering_checked - ordering_failed,
              ordering_checked)};
}

// 6. Feasibility audit of every refine call on the bundled corpus.
Outcome refinement_audit() {
  const ToyModel& m = trained_model(42);
  const auto instances = bundled_instances(m);
  const CidrConfig cfg;
  struct Counts {
    std::size_t iterations = 0, infeasible = 0, nonpositive = 0, low_frequency = 0, retained = 0;
  };
  const auto per = parallel_map(instances.size(), [&](std::size_t k) {
    const Explanation ex = refine(m, instances[k], cfg);
    Counts c;
    // A negative U1 + U2' is clamped to an empty exclusion.
    for (const auto& rec : ex.iterations) {
      ++c.iterations;
      c.infeasible += rec.excluded_cig > std::max(0.0, ex.bounds.u1 + rec.u2_perturbed);
    }
    for (const auto& kept : ex.mfs.pairs) {
      ++c.retained;
      c.nonpositive += !(ex.pairs.at(kept.pair).cig > 0.0);
      c.low_frequency += kept.frequency < cfg.epsilon;
    }
    return c;
  });
  Counts total;
  for (const auto& c : per) {
    total.iterations += c.iterations;
    total.infeasible += c.infeasible;
    total.nonpositive += c.nonpositive;
    total.low_frequency += c.low_frequency;
    total.retained += c.retained;
  }
  return {total.infeasible == 0 && total.nonpositive == 0 && total.low_frequency == 0,
          fmt("%zu sentences, %zu knapsack solves, %zu infeasible; %zu retained pairs, %zu with CIG <= 0, %zu below epsilon",
              instances.size(), total.iterations, total.infeasible, total.retained, total.nonpositive,
              total.low_frequency)};
}

// 7. Pair sums over an all-positive vector. Dyadic values keep every sum exact.
Outcome combination_identity() {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> numer(1, 64);
  int failures = 0;
  for (std::size_t n = 2; n <= 12; ++n) {
    std::vector<double> ig(n);
    for (auto& v : ig) v = numer(rng) / 64.0;
    const auto map = combine_pair_scores(ig, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)), 0.5);
    double lhs = 0.0;
    for (const auto& p : map.positive) lhs += map.at(p).ig_first + map.at(p).ig_second;
    const double rhs = static_cast<double>(n - 1) * std::accumulate(ig.begin(), ig.end(), 0.0);
    failures += lhs != rhs || map.positive.size() != n * (n - 1) / 2;
  }
  return {failures == 0, fmt("sizes 2..12, %d mismatches", failures)};
}

// 8. Directional comparison over five seeds on the bundled corpus.
Outcome directional() {
  const std::vector<std::string> methods = {"cidr", "cidr-no-r", "ig-top2k", "random"};
  std::vector<double> fms(methods.size(), 0.0), comp(methods.size(), 0.0);
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  for (std::uint64_t seed : seeds) {
    RunConfig cfg;
    cfg.set_seed(seed);
    const ToyModel m = train_toy(labeled_texts(bundled_corpus()), cfg.train);
    const auto instances = bundled_instances(m);
    const auto rows = evaluate_methods(m, std::span<const Instance>(instances), cfg.cidr, methods);
    for (std::size_t k = 0; k < methods.size(); ++k) {
      fms[k] += rows[k].fms / static_cast<double>(seeds.size());
      comp[k] += rows[k].comp / static_cast<double>(seeds.size());
    }
  }
  const bool fms_vs_ig = fms[0] >= fms[2];
  const bool comp_vs_random = comp[0] >= comp[3];
  const bool fms_vs_ablation = fms[0] >= fms[1];
  return {fms_vs_ig && comp_vs_random && fms_vs_ablation,
          fmt("FMS cidr %.4f vs ig-top2k %.4f [%s]; Comp cidr %.4f vs random %.4f [%s]; FMS cidr %.4f vs cidr-no-r "
              "%.4f [%s]",
              fms[0], fms[2], fms_vs_ig ? "ok" : "fails", comp[0], comp[3], comp_vs_random ? "ok" : "fails", fms[0],
              fms[1], fms_vs_ablation ? "ok" : "fails")};
}

// 9. explain twice with the same configuration.
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "cidr_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  RunConfig cfg;
  save_checkpoint(trained_model(42), dir / "model.json");
  write_corpus(bundled_corpus(), dir / "corpus.jsonl");
  run_explain(cfg, dir / "corpus.jsonl", dir / "model.json", dir / "a.jsonl");
  run_explain(cfg, dir / "corpus.jsonl", dir / "model.json", dir / "b.jsonl");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(dir / "a.jsonl");
  const std::string b = slurp(dir / "b.jsonl");
  fs::remove_all(dir);
  return {!a.empty() && a == b, fmt("%zu bytes per run, %s", a.size(), a == b ? "identical" : "different")};
}

// 10. Hand-traced metric values on the scripted model.
Outcome metric_fixtures() {
  using Positions = std::vector<std::size_t>;
  const ScriptedModel drop{{{{}, 0.9}, {{0}, 0.6}}, 0.9};
  const Positions removed = {0};
  const double comp = metrics::instance_comprehensiveness(drop, scripted_instance(3), removed);
  const double lo = metrics::instance_log_odds(drop, scripted_instance(3), removed);
  const ScriptedModel trace{{{{}, 0.9}, {{0, 1, 2, 3}, 0.4}, {{2, 3}, 0.7}, {{0, 1}, 0.45}}, 0.9};
  const std::vector<TokenPair> set = {{0, 1}, {2, 3}};
  const double fms = metrics::instance_fms_pairs(trace, scripted_instance(4), set, 0.5);
  const bool ok = std::abs(comp - 0.3) <= 1e-12 && std::abs(lo + 0.405465) <= 1e-6 && fms == 0.0;
  return {ok, fmt("Comp %.6f, LO %.6f, FMS trace %.0f", comp, lo, fms)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"IG completeness", ig_completeness},
      {"linear-model exactness", linear_exactness},
      {"knapsack optimality", knapsack_optimality},
      {"bound arithmetic", bound_arithmetic},
      {"refinement feasibility audit", refinement_audit},
      {"combination identity", combination_identity},
      {"directional end-to-end", directional},
      {"explain determinism", determinism},
      {"metric fixtures", metric_fixtures},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !out.pass;
    std::printf("criterion %2zu %s: %s (%s; %.2fs)\n", k + 1, out.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
