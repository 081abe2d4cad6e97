#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cidr/error.hpp"
#include "cidr/toy_corpus.hpp"
#include "cidr/toy_model.hpp"

namespace cidr {

/// Parse a JSON-lines corpus: one {"id", "text", "label"} object per line.
/// CRLF endings and blank lines are tolerated.
inline std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& source = "corpus") {
  std::vector<CorpusRecord> out;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fail = [&](const std::string& what) {
      return InputError(source + ":" + std::to_string(lineno) + ": " + what);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) throw fail("record must be a JSON object");
    CorpusRecord rec;
    try {
      rec.id = j.at("id").get<std::string>();
      rec.text = j.at("text").get<std::string>();
      const auto label = j.at("label").get<long long>();
      if (label < 0) throw fail("label must be a non-negative integer");
      rec.label = static_cast<std::size_t>(label);
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("malformed record: ") + e.what());
    }
    rec.tokens = tokenize(rec.text);
    if (rec.tokens.empty()) throw fail("text is empty");
    if (auto [it, fresh] = first_line.emplace(rec.id, lineno); !fresh) {
      throw InputError(source + ": duplicate id '" + rec.id + "' on lines " + std::to_string(it->second) + " and " +
                       std::to_string(lineno));
    }
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw InputError(source + ": corpus is empty");
  return out;
}

inline std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus " + path.string());
  return parse_corpus(in, path.string());
}

inline void write_corpus(const std::vector<CorpusRecord>& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write corpus " + path.string());
  for (const auto& rec : corpus) {
    nlohmann::json j;
    j["id"] = rec.id;
    j["text"] = rec.text;
    j["label"] = rec.label;
    out << j.dump() << '\n';
  }
}

inline std::vector<LabeledText> labeled_texts(const std::vector<CorpusRecord>& corpus) {
  std::vector<LabeledText> out;
  out.reserve(corpus.size());
  for (const auto& rec : corpus) out.push_back({rec.tokens, rec.label});
  return out;
}

}  // namespace cidr
