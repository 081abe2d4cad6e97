#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cidr/error.hpp"
#include "cidr/toy_model.hpp"

namespace cidr {

inline constexpr const char* kCheckpointFormat = "cidr-toy-model";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                               const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw InputError(std::string("checkpoint: field '") + name + "' has the wrong number of rows");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError(std::string("checkpoint: field '") + name + "' has a ragged row");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline Vector vector_from_json(const nlohmann::json& j, Eigen::Index size, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw InputError(std::string("checkpoint: field '") + name + "' has the wrong length");
  }
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace detail

inline nlohmann::json checkpoint_to_json(const ToyModel& model) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["vocabulary"] = model.vocab.tokens();
  j["embedding_dim"] = model.dim();
  j["hidden_dim"] = model.hidden();
  j["num_classes"] = model.num_classes();
  j["embedding"] = detail::matrix_to_json(model.embedding);
  j["w1"] = detail::matrix_to_json(model.w1);
  j["b1"] = std::vector<double>(model.b1.data(), model.b1.data() + model.b1.size());
  j["w2"] = detail::matrix_to_json(model.w2);
  j["b2"] = std::vector<double>(model.b2.data(), model.b2.data() + model.b2.size());
  return j;
}

inline ToyModel checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != kCheckpointFormat) throw InputError("checkpoint: unrecognized format");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw InputError("checkpoint: unsupported version " + std::to_string(version));
    }
    ToyModel model;
    const auto tokens = j.at("vocabulary").get<std::vector<std::string>>();
    if (tokens.empty() || tokens.front() != Vocabulary::kPadToken) {
      throw InputError("checkpoint: vocabulary must start with the PAD token");
    }
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      if (model.vocab.add(tokens[i]) != i) throw InputError("checkpoint: duplicate vocabulary entry '" + tokens[i] + "'");
    }
    const auto V = static_cast<Eigen::Index>(tokens.size());
    const auto d = j.at("embedding_dim").get<Eigen::Index>();
    const auto H = j.at("hidden_dim").get<Eigen::Index>();
    const auto C = j.at("num_classes").get<Eigen::Index>();
    if (d <= 0 || H <= 0 || C < 2) throw InputError("checkpoint: invalid dimensions");
    model.embedding = detail::matrix_from_json(j.at("embedding"), V, d, "embedding");
    model.w1 = detail::matrix_from_json(j.at("w1"), H, d, "w1");
    model.b1 = detail::vector_from_json(j.at("b1"), H, "b1");
    model.w2 = detail::matrix_from_json(j.at("w2"), C, H, "w2");
    model.b2 = detail::vector_from_json(j.at("b2"), C, "b2");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const ToyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(model).dump() << '\n';
}

inline ToyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace cidr
