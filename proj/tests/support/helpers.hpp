#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "placeorigin/encoder.hpp"
#include "placeorigin/rng.hpp"

namespace testsupport {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(PLACEORIGIN_FIXTURE_DIR) / name;
}

inline std::filesystem::path data_dir() { return std::filesystem::path(PLACEORIGIN_DATA_DIR); }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("placeorigin-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    if (!std::getenv("PLACEORIGIN_KEEP_TMP")) std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

/// Every regular file below `root`, keyed by relative path, with contents.
inline std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

/// Random matrix with unit rows.
inline placeorigin::enc::TokenMatrix random_matrix(placeorigin::Rng& rng, std::size_t rows, std::size_t dim) {
  placeorigin::enc::TokenMatrix m{rows, dim, std::vector<float>(rows * dim)};
  for (auto& v : m.data) v = static_cast<float>(rng.normal());
  placeorigin::enc::normalize_rows(m);
  return m;
}

/// Sentence of `words` tokens drawn from a small vocabulary, so documents
/// share tokens and scores tie now and then.
inline std::string random_sentence(placeorigin::Rng& rng, std::size_t words) {
  static const std::vector<std::string> vocab = {
      "batman", "melbourne", "street", "named", "after", "john", "founder", "river",
      "victoria", "australia", "city", "grazier", "explorer", "settler", "lane", "hill",
      "turkey", "soldier", "comic", "hero", "flinders", "swanston", "elizabeth", "queen"};
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += vocab[rng.below(vocab.size())];
  }
  return s;
}

}  // namespace testsupport
