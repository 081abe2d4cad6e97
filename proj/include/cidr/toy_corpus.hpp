#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cidr {

struct CorpusRecord {
  std::string id;
  std::string text;
  std::size_t label = 0;
  std::vector<std::string> tokens;
};

/// Synthetic two-class sentiment corpus. Every sentence mixes neutral filler
/// with one to three keywords of a single polarity, so a bag-of-words model
/// can separate it exactly. Label 1 is positive.
inline std::vector<CorpusRecord> make_sentiment_corpus(std::size_t count, std::uint64_t seed) {
  static constexpr std::array<std::string_view, 10> kPositive = {
      "good", "great", "excellent", "wonderful", "superb", "delightful", "brilliant", "enjoyable", "charming", "moving"};
  static constexpr std::array<std::string_view, 10> kNegative = {
      "bad", "awful", "terrible", "boring", "dull", "poor", "horrible", "weak", "tedious", "bland"};
  static constexpr std::array<std::string_view, 24> kFiller = {
      "the",  "movie", "film",  "was",  "is",     "a",    "story",     "plot",       "acting", "really",  "quite", "this",
      "it",   "and",   "with",  "cast", "script", "very", "direction", "characters", "ending", "overall", "i",     "found"};

  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t bound) {
    return static_cast<std::size_t>(std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng));
  };

  std::vector<CorpusRecord> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t label = k % 2;
    const std::size_t length = 4 + pick(9);  // 4..12 tokens
    const std::size_t keywords = 1 + pick(std::min<std::size_t>(3, length / 3));
    std::vector<std::string> words(length);
    for (auto& w : words) w = std::string(kFiller[pick(kFiller.size())]);
    for (std::size_t placed = 0; placed < keywords; ++placed) {
      const auto& bank = label == 1 ? kPositive : kNegative;
      words[pick(length)] = std::string(bank[pick(bank.size())]);
    }
    CorpusRecord rec;
    rec.id = "toy-" + std::to_string(k);
    rec.label = label;
    for (std::size_t i = 0; i < words.size(); ++i) rec.text += (i ? " " : "") + words[i];
    rec.tokens = std::move(words);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace cidr
