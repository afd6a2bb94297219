#include "wysiwim/report.hpp"

#include <array>
#include <fstream>
#include <iterator>

#include <openssl/evp.h>

#include "wysiwim/error.hpp"

namespace wysiwim::cli {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

nlohmann::json to_json(const tasks::Metrics& m) {
  return {
      {"true_positives", m.true_positives},
      {"false_positives", m.false_positives},
      {"true_negatives", m.true_negatives},
      {"false_negatives", m.false_negatives},
      {"precision", m.precision},
      {"recall", m.recall},
      {"f1", m.f1},
      {"accuracy", m.accuracy},
  };
}

nlohmann::json to_json(const tasks::ClassificationReport& report) {
  nlohmann::json per_label = nlohmann::json::object();
  for (const auto& [label, metrics] : report.per_label) {
    per_label[label] = to_json(metrics);
  }
  return {
      {"total", report.total},
      {"correct", report.correct},
      {"accuracy", report.accuracy},
      {"per_label", per_label},
  };
}

void RunReport::add_input(const std::string& name, const std::filesystem::path& path) {
  inputs[name] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json failure_list = nlohmann::json::array();
  for (const auto& f : failures) {
    failure_list.push_back({{"id", f.id}, {"message", f.message}});
  }
  return {
      {"command", command},
      {"inputs", inputs},
      {"parameters", parameters},
      {"outputs", outputs},
      {"metrics", metrics},
      {"failures", failure_list},
      {"wall_time_seconds", wall_time_seconds},
  };
}

std::string RunReport::serialize() const { return to_json().dump(2) + "\n"; }

}  // namespace wysiwim::cli
