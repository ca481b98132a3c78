#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "placeorigin/gen_bridge.hpp"
#include "placeorigin/metrics.hpp"
#include "placeorigin/toponym.hpp"

namespace placeorigin::pipeline {

enum class IndexMode { per_name, joint };

struct PipelineConfig {
  std::string sparql_url = "https://dbpedia.org/sparql";
  std::string encoder = "test";  ///< "test" or "http"
  std::string encoder_url;
  std::size_t encoder_dim = 128;
  std::string generator_url = "http://127.0.0.1:8080/generate";
  std::string token_counter = "heuristic";  ///< "heuristic", "whitespace" or "http"
  std::string tokenizer_url;
  std::string relations_file;  ///< empty: built-in mapping

  int k_searcher = 10000;
  int max_subjects = 1000;
  std::size_t k_ranker = 10;
  std::size_t k_generator = 1;
  std::size_t doc_token_cap = 256;
  std::size_t prompt_token_budget = 4096;
  gen::Ordering ordering = gen::Ordering::tail_best;
  std::int64_t n_hab = 50000;
  double d_city_km = 50.0;

  IndexMode index_mode = IndexMode::per_name;
  std::optional<std::size_t> n_clusters;      ///< empty: ceil(sqrt(#docs))
  std::optional<std::size_t> probe_clusters;  ///< empty: size-based default
  std::uint64_t index_seed = 0;
  std::uint64_t generation_seed = 0;
  int max_new_tokens = 256;
  double temperature = 0.0;

  std::string cache_dir = "cache";
  int workers = 1;
  int retry_attempts = 3;
  int retry_base_delay_ms = 500;
  int rate_limit_ms = 200;
  int timeout_ms = 60000;

  bool operator==(const PipelineConfig&) const = default;
};

/// Throws Error(ConfigError) describing the first invalid field.
void validate(const PipelineConfig& cfg);

std::string to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
PipelineConfig config_from_json(std::string_view json_text);
/// Reads the file (when given) and applies PLACEORIGIN_SPARQL_URL,
/// PLACEORIGIN_ENCODER_URL and PLACEORIGIN_GENERATOR_URL on top.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file);
/// SHA-256 over the fields that influence results (not paths, worker count
/// or pacing).
std::string config_hash(const PipelineConfig& cfg);

enum class EntryStatus { ok, no_kg, search_error, encode_error, generate_error };
std::string_view to_string(EntryStatus s) noexcept;

struct EntryResult {
  std::string query_id;  ///< "name, city, country"
  std::string raw_name;
  std::string root_name;
  std::string question;
  EntryStatus status = EntryStatus::ok;
  std::string error;
  std::map<std::string, std::string> artifacts;  ///< stage -> path relative to the cache dir
  std::vector<std::string> ranked_subjects;
  std::vector<std::size_t> dropped_ranks;
  std::optional<std::string> choice;
  std::optional<std::string> answer;
  bool refusal = false;
  bool off_list = false;
  std::string started_at;
  std::string finished_at;
};

struct RunManifest {
  std::string config_hash;
  std::string created_at;
  std::vector<EntryResult> entries;  ///< sorted by query_id
};

/// Requests issued to each backend during one run.
struct BackendCalls {
  std::size_t sparql = 0;
  std::size_t encoder = 0;
  std::size_t generator = 0;
};

/// Runs search, chunking and indexing, ranking, prompting and generation for
/// every entry independently. Stage outputs are stored under
/// <cache>/<stage>/<content key>, so reruns and interrupted runs pick up
/// what is already there. The manifest, rankings.ndjson and
/// generations.ndjson are written to <cache>/runs/<config hash>/.
RunManifest run_pipeline(const std::vector<GazetteerEntry>& entries, const PipelineConfig& cfg,
                         BackendCalls* calls = nullptr);

std::filesystem::path run_dir(const PipelineConfig& cfg);
void write_manifest(std::ostream& out, const RunManifest& m);
RunManifest read_manifest(std::istream& in);

struct ReportFiles {
  std::filesystem::path ranker_json;
  std::filesystem::path ranker_tsv;
  std::filesystem::path ranker_plot;
  std::filesystem::path generator_json;
};

/// Scores the manifest's rankings at `k` and its generated answers at 1.
/// Generated answers are looked up in the judgments under item id
/// "answer:<text>". Throws Error(IoError) naming a missing input file.
ReportFiles emit_report(const RunManifest& manifest, const std::filesystem::path& judgments_file,
                        const std::filesystem::path& meta_file, std::size_t k,
                        const std::filesystem::path& out_dir);

}  // namespace placeorigin::pipeline
