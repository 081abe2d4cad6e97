// Command-line entry point: train, explain, evaluate.

#include <cstdint>
#include <exception>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cidr/cidr.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string corpus;
  std::string model;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
};

cidr::RunConfig resolve_config(const CommonOptions& opts) {
  cidr::RunConfig cfg = opts.config.empty() ? cidr::RunConfig{} : cidr::load_config(opts.config);
  cidr::apply_env_overrides(cfg);
  if (opts.seed) cfg.set_seed(*opts.seed);
  return cfg;
}

std::vector<std::string> split_methods(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_table(const std::vector<cidr::metrics::MetricsRow>& rows) {
  std::cout << std::left << std::setw(18) << "method" << std::right << std::setw(10) << "LO" << std::setw(10)
            << "Comp" << std::setw(10) << "FMS" << std::setw(6) << "N" << '\n';
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    std::cout << std::left << std::setw(18) << r.method << std::right << std::setw(10) << r.lo << std::setw(10)
              << r.comp << std::setw(10) << r.fms << std::setw(6) << r.n << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal feature sets for text classifiers via cooperative integrated gradients"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string methods = "cidr,cidr-no-r,cidr-no-cig,ig-top2k,gradinput-top2k,random";

  auto add_common = [&](CLI::App* cmd, bool needs_model) {
    cmd->add_option("--config", opts.config, "flat key = value config file");
    cmd->add_option("--corpus", opts.corpus, "JSON-lines corpus")->required();
    if (needs_model) cmd->add_option("--model", opts.model, "model checkpoint")->required();
    cmd->add_option("--out", opts.out, "output path")->required();
    cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->add_option("--workers", opts.workers, "worker threads (0 = hardware concurrency)");
  };

  auto* train = app.add_subcommand("train", "train the toy classifier and write a checkpoint");
  add_common(train, false);
  auto* explain = app.add_subcommand("explain", "write one explanation report per corpus record");
  add_common(explain, true);
  auto* evaluate = app.add_subcommand("evaluate", "compute LO / Comp / FMS per method");
  add_common(evaluate, true);
  evaluate->add_option("--methods", methods, "comma-separated method list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const cidr::RunConfig cfg = resolve_config(opts);
    if (train->parsed()) {
      cidr::run_train(cfg, opts.corpus, opts.out);
    } else if (explain->parsed()) {
      cidr::run_explain(cfg, opts.corpus, opts.model, opts.out, opts.workers);
    } else if (evaluate->parsed()) {
      const auto rows = cidr::run_evaluate(cfg, opts.corpus, opts.model, split_methods(methods), opts.out, opts.workers);
      print_table(rows);
    }
  } catch (const cidr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 70;
  }
  return 0;
}
