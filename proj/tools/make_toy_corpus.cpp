// Regenerates data/toy_corpus.jsonl.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cidr/corpus.hpp"
#include "cidr/toy_corpus.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic sentiment corpus"};
  std::string out = "toy_corpus.jsonl";
  std::size_t count = 200;
  std::uint64_t seed = 7;
  app.add_option("--out", out);
  app.add_option("--count", count);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);
  try {
    cidr::write_corpus(cidr::make_sentiment_corpus(count, seed), out);
  } catch (const cidr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  }
  return 0;
}
