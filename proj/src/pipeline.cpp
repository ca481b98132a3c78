#include "placeorigin/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "placeorigin/clock.hpp"
#include "placeorigin/doc_index.hpp"
#include "placeorigin/encoder.hpp"
#include "placeorigin/error.hpp"
#include "placeorigin/hashing.hpp"
#include "placeorigin/kg_search.hpp"
#include "placeorigin/ranker.hpp"
#include "placeorigin/text.hpp"

namespace placeorigin::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& why) { throw Error(ErrorCode::ConfigError, why); }

json config_json(const PipelineConfig& c) {
  json j = {
      {"sparql_url", c.sparql_url},
      {"encoder", c.encoder},
      {"encoder_url", c.encoder_url},
      {"encoder_dim", c.encoder_dim},
      {"generator_url", c.generator_url},
      {"token_counter", c.token_counter},
      {"tokenizer_url", c.tokenizer_url},
      {"relations_file", c.relations_file},
      {"k_searcher", c.k_searcher},
      {"max_subjects", c.max_subjects},
      {"k_ranker", c.k_ranker},
      {"k_generator", c.k_generator},
      {"doc_token_cap", c.doc_token_cap},
      {"prompt_token_budget", c.prompt_token_budget},
      {"ordering", gen::to_string(c.ordering)},
      {"n_hab", c.n_hab},
      {"d_city_km", c.d_city_km},
      {"index_mode", c.index_mode == IndexMode::joint ? "joint" : "per_name"},
      {"n_clusters", c.n_clusters ? json(*c.n_clusters) : json(nullptr)},
      {"probe_clusters", c.probe_clusters ? json(*c.probe_clusters) : json(nullptr)},
      {"index_seed", c.index_seed},
      {"generation_seed", c.generation_seed},
      {"max_new_tokens", c.max_new_tokens},
      {"temperature", c.temperature},
      {"cache_dir", c.cache_dir},
      {"workers", c.workers},
      {"retry_attempts", c.retry_attempts},
      {"retry_base_delay_ms", c.retry_base_delay_ms},
      {"rate_limit_ms", c.rate_limit_ms},
      {"timeout_ms", c.timeout_ms},
  };
  return j;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, std::string_view data) {
  fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (c.k_searcher < 1 || c.max_subjects < 1) config_error("k_searcher and max_subjects must be >= 1");
  if (c.k_ranker < 1 || c.k_generator < 1) config_error("k_ranker and k_generator must be >= 1");
  if (c.k_generator != 1) config_error("only k_generator = 1 is supported");
  if (c.doc_token_cap == 0 || c.prompt_token_budget == 0) config_error("token caps must be positive");
  if (c.n_hab < 0 || !(c.d_city_km > 0.0)) config_error("n_hab must be >= 0 and d_city_km > 0");
  if (c.encoder != "test" && c.encoder != "http") config_error("encoder must be 'test' or 'http'");
  if (c.encoder == "http" && c.encoder_url.empty()) config_error("encoder 'http' needs encoder_url");
  if (c.encoder_dim < 2) config_error("encoder_dim must be >= 2");
  if (c.token_counter != "heuristic" && c.token_counter != "whitespace" && c.token_counter != "http") {
    config_error("token_counter must be heuristic, whitespace or http");
  }
  if (c.token_counter == "http" && c.tokenizer_url.empty()) {
    config_error("token_counter 'http' needs tokenizer_url");
  }
  if (c.n_clusters && *c.n_clusters == 0) config_error("n_clusters must be >= 1");
  if (c.probe_clusters && *c.probe_clusters == 0) config_error("probe_clusters must be >= 1");
  if (c.max_new_tokens < 1 || c.temperature < 0.0) config_error("invalid decoding parameters");
  if (c.workers < 1 || c.retry_attempts < 1) config_error("workers and retry_attempts must be >= 1");
  if (c.rate_limit_ms < 0 || c.retry_base_delay_ms < 0 || c.timeout_ms < 1) {
    config_error("pacing values must be non-negative");
  }
  if (c.cache_dir.empty()) config_error("cache_dir is empty");
}

std::string to_json(const PipelineConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

PipelineConfig config_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  PipelineConfig c;
  const auto known = config_json(c);
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) config_error("unknown config key '" + key + "'");
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    auto get_opt = [&](const char* key, std::optional<std::size_t>& field) {
      if (!j.contains(key)) return;
      if (j.at(key).is_null() || j.at(key) == "auto") {
        field.reset();
      } else {
        field = j.at(key).get<std::size_t>();
      }
    };
    get("sparql_url", c.sparql_url);
    get("encoder", c.encoder);
    get("encoder_url", c.encoder_url);
    get("encoder_dim", c.encoder_dim);
    get("generator_url", c.generator_url);
    get("token_counter", c.token_counter);
    get("tokenizer_url", c.tokenizer_url);
    get("relations_file", c.relations_file);
    get("k_searcher", c.k_searcher);
    get("max_subjects", c.max_subjects);
    get("k_ranker", c.k_ranker);
    get("k_generator", c.k_generator);
    get("doc_token_cap", c.doc_token_cap);
    get("prompt_token_budget", c.prompt_token_budget);
    if (j.contains("ordering")) {
      const auto o = gen::parse_ordering(j.at("ordering").get<std::string>());
      if (!o) config_error("ordering must be tail_best or head_best");
      c.ordering = *o;
    }
    get("n_hab", c.n_hab);
    get("d_city_km", c.d_city_km);
    if (j.contains("index_mode")) {
      const auto m = j.at("index_mode").get<std::string>();
      if (m == "joint") {
        c.index_mode = IndexMode::joint;
      } else if (m == "per_name") {
        c.index_mode = IndexMode::per_name;
      } else {
        config_error("index_mode must be per_name or joint");
      }
    }
    get_opt("n_clusters", c.n_clusters);
    get_opt("probe_clusters", c.probe_clusters);
    get("index_seed", c.index_seed);
    get("generation_seed", c.generation_seed);
    get("max_new_tokens", c.max_new_tokens);
    get("temperature", c.temperature);
    get("cache_dir", c.cache_dir);
    get("workers", c.workers);
    get("retry_attempts", c.retry_attempts);
    get("retry_base_delay_ms", c.retry_base_delay_ms);
    get("rate_limit_ms", c.rate_limit_ms);
    get("timeout_ms", c.timeout_ms);
  } catch (const json::exception& e) {
    config_error(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::optional<fs::path>& file) {
  PipelineConfig c;
  if (file) {
    std::string body;
    try {
      body = read_text(*file);
    } catch (const Error&) {
      config_error("cannot read config file " + file->string());
    }
    c = config_from_json(body);
  }
  if (const char* v = std::getenv("PLACEORIGIN_SPARQL_URL"); v && *v) c.sparql_url = v;
  if (const char* v = std::getenv("PLACEORIGIN_ENCODER_URL"); v && *v) {
    c.encoder_url = v;
    c.encoder = "http";
  }
  if (const char* v = std::getenv("PLACEORIGIN_GENERATOR_URL"); v && *v) c.generator_url = v;
  return c;
}

std::string config_hash(const PipelineConfig& cfg) {
  auto j = config_json(cfg);
  for (const char* k : {"cache_dir", "workers", "retry_attempts", "retry_base_delay_ms",
                        "rate_limit_ms", "timeout_ms"}) {
    j.erase(k);
  }
  return sha256_hex(j.dump());
}

std::string_view to_string(EntryStatus s) noexcept {
  switch (s) {
    case EntryStatus::ok: return "ok";
    case EntryStatus::no_kg: return "no_kg";
    case EntryStatus::search_error: return "search_error";
    case EntryStatus::encode_error: return "encode_error";
    case EntryStatus::generate_error: return "generate_error";
  }
  return "?";
}

namespace {

std::optional<EntryStatus> parse_status(std::string_view s) {
  for (auto st : {EntryStatus::ok, EntryStatus::no_kg, EntryStatus::search_error,
                  EntryStatus::encode_error, EntryStatus::generate_error}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

/// One mutex per content key so two workers never compute the same stage.
class KeyedLocks {
 public:
  std::mutex& get(const std::string& key) {
    std::lock_guard lock(mu_);
    auto& slot = locks_[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

template <typename F>
void parallel_for(std::size_t n, int workers, F&& f) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) f(i);
  };
  const auto extra = static_cast<std::size_t>(std::max(1, workers)) - 1;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(extra, n); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

struct Context {
  const PipelineConfig& cfg;
  fs::path cache;
  kg::RelationFilter filter;
  std::unique_ptr<sparql::Client> sparql;
  std::unique_ptr<enc::Encoder> encoder;
  std::unique_ptr<http::Client> generator;
  std::unique_ptr<gen::TokenCounter> counter;
  KeyedLocks locks;
  std::atomic<std::size_t> sparql_calls{0}, encoder_calls{0}, generator_calls{0};

  explicit Context(const PipelineConfig& c) : cfg(c), cache(c.cache_dir) {
    filter = c.relations_file.empty() ? kg::RelationFilter::defaults()
                                      : kg::RelationFilter::load(c.relations_file);
    http::RetryPolicy policy;
    policy.max_attempts = c.retry_attempts;
    policy.base_delay = std::chrono::milliseconds(c.retry_base_delay_ms);
    policy.timeout = std::chrono::milliseconds(c.timeout_ms);
    auto limiter = [&] {
      return std::make_shared<http::RateLimiter>(std::chrono::milliseconds(c.rate_limit_ms));
    };
    sparql = std::make_unique<sparql::Client>(c.sparql_url, policy, limiter());
    if (c.encoder == "http") {
      encoder = std::make_unique<enc::HttpEncoder>(c.encoder_url, c.encoder_dim, c.doc_token_cap,
                                                   policy, limiter());
    } else {
      encoder = std::make_unique<enc::TestEncoder>(c.encoder_dim, c.doc_token_cap);
    }
    generator = std::make_unique<http::Client>(c.generator_url, policy, limiter());
    if (c.token_counter == "whitespace") {
      counter = std::make_unique<gen::WhitespaceTokenCounter>();
    } else if (c.token_counter == "http") {
      counter = std::make_unique<gen::HttpTokenCounter>(c.tokenizer_url, policy, limiter());
    } else {
      counter = std::make_unique<gen::HeuristicTokenCounter>();
    }
  }
};

std::string short_key(const std::string& material) { return sha256_hex(material).substr(0, 32); }

std::string search_key(const Context& ctx, const std::string& root) {
  std::string m = "search\n" + ctx.cfg.sparql_url + "\n" + root + "\n" +
                  std::to_string(ctx.cfg.k_searcher) + "\n" + std::to_string(ctx.cfg.max_subjects);
  for (const auto& p : ctx.filter.predicates()) m += "\n" + p;
  return short_key(m);
}

// Searches (or loads) the snapshot for one root name.
kg::KGSnapshot stage_search(Context& ctx, const std::string& root, std::string& rel_path) {
  const auto key = search_key(ctx, root);
  const auto dir = ctx.cache / "snapshots" / key;
  rel_path = fs::relative(kg::snapshot_rdf_path(dir, root), ctx.cache).generic_string();
  std::lock_guard lock(ctx.locks.get("search/" + key));
  if (auto s = kg::load_snapshot(root, dir)) return std::move(*s);
  ++ctx.sparql_calls;
  const kg::SearchLimits limits{ctx.cfg.k_searcher, ctx.cfg.max_subjects};
  auto s = kg::fetch_snapshot(*ctx.sparql, root, ctx.filter, limits);
  kg::cache_snapshot(s, dir);
  return s;
}

std::string snapshot_digest(const Context& ctx, const std::string& rel_path) {
  return sha256_hex(read_text(ctx.cache / rel_path));
}

std::string index_key(const Context& ctx, const std::vector<std::string>& snapshot_digests) {
  std::string m = "index\n" + ctx.encoder->fingerprint() + "\n" +
                  std::to_string(ctx.cfg.doc_token_cap) + "\n" +
                  (ctx.cfg.n_clusters ? std::to_string(*ctx.cfg.n_clusters) : "auto") + "\n" +
                  std::to_string(ctx.cfg.index_seed);
  for (const auto& d : snapshot_digests) m += "\n" + d;
  return short_key(m);
}

index::ClusteredIndex stage_index(Context& ctx, const std::vector<const kg::KGSnapshot*>& snapshots,
                                  const std::string& key, std::string& rel_path) {
  const auto dir = ctx.cache / "index" / key;
  rel_path = fs::relative(dir, ctx.cache).generic_string();
  std::lock_guard lock(ctx.locks.get("index/" + key));
  if (fs::exists(dir / "manifest.json")) return index::load_index(dir);
  std::vector<index::TripleDocument> docs;
  for (const auto* s : snapshots) {
    auto part = index::chunk_by_subject(*s, *ctx.encoder, ctx.cfg.doc_token_cap);
    docs.insert(docs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  ++ctx.encoder_calls;
  auto idx = index::build_index(std::move(docs), *ctx.encoder, ctx.cfg.n_clusters, ctx.cfg.index_seed);
  const auto tmp = ctx.cache / "index" / (key + ".tmp");
  fs::remove_all(tmp);
  index::save_index(idx, tmp);
  fs::remove_all(dir);
  fs::rename(tmp, dir);
  return idx;
}

struct SearchOutcome {
  std::optional<kg::KGSnapshot> snapshot;
  std::string rel_path;
  std::string digest;
  std::string error;
};

std::string ranked_to_ndjson(const std::vector<rank::RankedCandidate>& ranked) {
  std::string out;
  for (const auto& c : ranked) {
    out += json{{"subject", c.subject}, {"score", c.score}, {"rank", c.rank}}.dump() + "\n";
  }
  return out;
}

void finish_entry(Context& ctx, EntryResult& r, const index::ClusteredIndex& idx,
                  const std::string& idx_key) {
  const auto& cfg = ctx.cfg;
  AnchorQuestion q{r.question, r.query_id};

  // Ranking.
  const auto rank_key = short_key("rank\n" + idx_key + "\n" + q.text + "\n" +
                                  std::to_string(cfg.k_ranker) + "\n" +
                                  (cfg.probe_clusters ? std::to_string(*cfg.probe_clusters) : "auto"));
  const auto rank_path = ctx.cache / "ranked" / (rank_key + ".ndjson");
  std::vector<rank::RankedCandidate> ranked;
  try {
    std::lock_guard lock(ctx.locks.get("rank/" + rank_key));
    if (fs::exists(rank_path)) {
      std::istringstream in(read_text(rank_path));
      std::string line;
      while (std::getline(in, line)) {
        const auto j = json::parse(line);
        rank::RankedCandidate c;
        c.subject = j.at("subject").get<std::string>();
        c.score = j.at("score").get<double>();
        c.rank = j.at("rank").get<std::size_t>();
        ranked.push_back(std::move(c));
      }
    } else {
      ++ctx.encoder_calls;
      ranked = rank::rank_top_k(q, idx, *ctx.encoder, cfg.k_ranker, cfg.probe_clusters);
      write_text(rank_path, ranked_to_ndjson(ranked));
    }
  } catch (const Error& e) {
    r.status = EntryStatus::encode_error;
    r.error = e.what();
    return;
  }
  r.artifacts["ranked"] = fs::relative(rank_path, ctx.cache).generic_string();
  for (const auto& c : ranked) r.ranked_subjects.push_back(c.subject);

  // Prompt.
  std::map<std::string, const index::TripleDocument*> by_subject;
  for (const auto& d : idx.documents) by_subject.emplace(d.subject, &d);
  gen::PromptSpec spec;
  spec.anchor = q;
  spec.ordering = cfg.ordering;
  spec.token_budget = cfg.prompt_token_budget;
  for (const auto& c : ranked) spec.candidates.push_back({c.subject, c.rank, by_subject.at(c.subject)->text});
  gen::AssembledPrompt prompt;
  try {
    prompt = gen::assemble_prompt(spec, *ctx.counter);
  } catch (const Error& e) {
    r.status = EntryStatus::generate_error;
    r.error = e.what();
    return;
  }
  r.dropped_ranks = prompt.dropped_ranks;
  const auto prompt_key = sha256_hex(prompt.text).substr(0, 32);
  const auto prompt_path = ctx.cache / "prompts" / (prompt_key + ".txt");
  if (!fs::exists(prompt_path)) write_text(prompt_path, prompt.text);
  r.artifacts["prompt"] = fs::relative(prompt_path, ctx.cache).generic_string();

  // Generation.
  const gen::GenParams params{cfg.max_new_tokens, cfg.temperature, cfg.generation_seed};
  const auto gen_key = short_key("generate\n" + cfg.generator_url + "\n" + prompt_key + "\n" +
                                 std::to_string(params.max_new_tokens) + "\n" +
                                 json(params.temperature).dump() + "\n" + std::to_string(params.seed));
  const auto gen_path = ctx.cache / "generations" / (gen_key + ".json");
  std::string text;
  try {
    std::lock_guard lock(ctx.locks.get("generate/" + gen_key));
    if (fs::exists(gen_path)) {
      text = json::parse(read_text(gen_path)).at("text").get<std::string>();
    } else {
      ++ctx.generator_calls;
      const auto rec = gen::call_generator(*ctx.generator, prompt.text, params);
      text = rec.text;
      write_text(gen_path, json{{"text", rec.text},
                                {"prompt_sha256", sha256_hex(prompt.text)},
                                {"request_sha256", rec.request_sha256},
                                {"response_sha256", rec.response_sha256}}
                                   .dump(2) +
                               "\n");
    }
  } catch (const Error& e) {
    r.status = EntryStatus::generate_error;
    r.error = e.what();
    return;
  }
  r.artifacts["generation"] = fs::relative(gen_path, ctx.cache).generic_string();
  const auto outcome = gen::parse_generation(text, r.ranked_subjects);
  r.choice = outcome.choice_subject;
  r.answer = outcome.answer_text;
  r.refusal = outcome.refusal;
  r.off_list = outcome.off_list;
  r.status = EntryStatus::ok;
}

json entry_json(const EntryResult& r) {
  json j = {{"query_id", r.query_id},
            {"raw_name", r.raw_name},
            {"root_name", r.root_name},
            {"question", r.question},
            {"status", to_string(r.status)},
            {"artifacts", r.artifacts},
            {"ranked_subjects", r.ranked_subjects},
            {"dropped_ranks", r.dropped_ranks},
            {"choice", r.choice ? json(*r.choice) : json(nullptr)},
            {"answer", r.answer ? json(*r.answer) : json(nullptr)},
            {"refusal", r.refusal},
            {"off_list", r.off_list},
            {"started_at", r.started_at},
            {"finished_at", r.finished_at}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

}  // namespace

fs::path run_dir(const PipelineConfig& cfg) {
  return fs::path(cfg.cache_dir) / "runs" / config_hash(cfg).substr(0, 32);
}

void write_manifest(std::ostream& out, const RunManifest& m) {
  json j = {{"config_hash", m.config_hash}, {"created_at", m.created_at}, {"entries", json::array()}};
  for (const auto& e : m.entries) j["entries"].push_back(entry_json(e));
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(std::istream& in) {
  RunManifest m;
  try {
    const auto j = json::parse(in);
    m.config_hash = j.at("config_hash").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    for (const auto& e : j.at("entries")) {
      EntryResult r;
      r.query_id = e.at("query_id").get<std::string>();
      r.raw_name = e.at("raw_name").get<std::string>();
      r.root_name = e.at("root_name").get<std::string>();
      r.question = e.at("question").get<std::string>();
      const auto st = parse_status(e.at("status").get<std::string>());
      if (!st) throw Error(ErrorCode::ParseError, "unknown entry status");
      r.status = *st;
      r.error = e.value("error", "");
      r.artifacts = e.at("artifacts").get<std::map<std::string, std::string>>();
      r.ranked_subjects = e.at("ranked_subjects").get<std::vector<std::string>>();
      r.dropped_ranks = e.at("dropped_ranks").get<std::vector<std::size_t>>();
      if (!e.at("choice").is_null()) r.choice = e.at("choice").get<std::string>();
      if (!e.at("answer").is_null()) r.answer = e.at("answer").get<std::string>();
      r.refusal = e.at("refusal").get<bool>();
      r.off_list = e.at("off_list").get<bool>();
      r.started_at = e.at("started_at").get<std::string>();
      r.finished_at = e.at("finished_at").get<std::string>();
      m.entries.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  return m;
}

RunManifest run_pipeline(const std::vector<GazetteerEntry>& entries, const PipelineConfig& cfg,
                         BackendCalls* calls) {
  validate(cfg);
  Context ctx(cfg);
  fs::create_directories(ctx.cache);

  // One result per distinct query id; identical homonym rows collapse.
  std::map<std::string, EntryResult> unique;
  for (const auto& e : entries) {
    EntryResult r;
    r.raw_name = e.toponym.raw_name;
    r.root_name = e.toponym.root_name;
    try {
      const auto q = build_anchor_question(e.toponym);
      r.query_id = q.toponym_ref;
      r.question = q.text;
    } catch (const Error& err) {
      r.query_id = e.toponym.raw_name + ", " + e.toponym.city + ", " + e.toponym.country;
      r.status = EntryStatus::search_error;
      r.error = err.what();
    }
    unique.try_emplace(r.query_id, std::move(r));
  }
  std::vector<EntryResult> results;
  for (auto& [_, r] : unique) results.push_back(std::move(r));

  // Search, once per root name.
  std::set<std::string> roots;
  for (const auto& r : results) {
    if (r.error.empty()) roots.insert(r.root_name);
  }
  const std::vector<std::string> root_list(roots.begin(), roots.end());
  std::vector<SearchOutcome> searched(root_list.size());
  parallel_for(root_list.size(), cfg.workers, [&](std::size_t i) {
    auto& out = searched[i];
    try {
      out.snapshot = stage_search(ctx, root_list[i], out.rel_path);
      out.digest = snapshot_digest(ctx, out.rel_path);
    } catch (const Error& e) {
      out.error = e.what();
    }
  });
  std::map<std::string, const SearchOutcome*> by_root;
  for (std::size_t i = 0; i < root_list.size(); ++i) by_root[root_list[i]] = &searched[i];

  // Indexes: one per root name, or a single joint one.
  struct IndexSlot {
    std::optional<index::ClusteredIndex> index;
    std::string key;
    std::string rel_path;
    std::string error;
  };
  std::map<std::string, IndexSlot> indexes;  // root (or "" for joint) -> index
  std::vector<std::string> index_roots;
  for (const auto& [root, s] : by_root) {
    if (s->error.empty() && !s->snapshot->triples.empty()) index_roots.push_back(root);
  }
  if (cfg.index_mode == IndexMode::joint) {
    if (!index_roots.empty()) {
      std::vector<const kg::KGSnapshot*> snaps;
      std::vector<std::string> digests;
      for (const auto& root : index_roots) {
        snaps.push_back(&*by_root[root]->snapshot);
        digests.push_back(by_root[root]->digest);
      }
      auto& slot = indexes[""];
      slot.key = index_key(ctx, digests);
      try {
        slot.index = stage_index(ctx, snaps, slot.key, slot.rel_path);
      } catch (const Error& e) {
        slot.error = e.what();
      }
    }
  } else {
    for (const auto& root : index_roots) indexes[root];
    parallel_for(index_roots.size(), cfg.workers, [&](std::size_t i) {
      const auto& root = index_roots[i];
      auto& slot = indexes.at(root);
      slot.key = index_key(ctx, {by_root.at(root)->digest});
      try {
        slot.index = stage_index(ctx, {&*by_root.at(root)->snapshot}, slot.key, slot.rel_path);
      } catch (const Error& e) {
        slot.error = e.what();
      }
    });
  }

  // Rank, prompt and generate per entry.
  parallel_for(results.size(), cfg.workers, [&](std::size_t i) {
    auto& r = results[i];
    r.started_at = utc_timestamp();
    if (!r.error.empty()) {
      r.finished_at = utc_timestamp();
      return;
    }
    const auto& s = *by_root.at(r.root_name);
    if (!s.error.empty()) {
      r.status = EntryStatus::search_error;
      r.error = s.error;
    } else {
      r.artifacts["snapshot"] = s.rel_path;
      if (s.snapshot->triples.empty()) {
        r.status = EntryStatus::no_kg;
      } else {
        const auto& slot = indexes.at(cfg.index_mode == IndexMode::joint ? "" : r.root_name);
        if (!slot.error.empty()) {
          r.status = EntryStatus::encode_error;
          r.error = slot.error;
        } else {
          r.artifacts["index"] = slot.rel_path;
          finish_entry(ctx, r, *slot.index, slot.key);
        }
      }
    }
    r.finished_at = utc_timestamp();
  });

  RunManifest m;
  m.config_hash = config_hash(cfg);
  m.created_at = utc_timestamp();
  m.entries = std::move(results);

  const auto dir = run_dir(cfg);
  fs::create_directories(dir);
  {
    std::ostringstream out;
    write_manifest(out, m);
    write_text(dir / "manifest.json", out.str());
  }
  std::string rankings, generations;
  for (const auto& e : m.entries) {
    if (!e.ranked_subjects.empty()) {
      rankings += json{{"query_id", e.query_id}, {"items", e.ranked_subjects}}.dump() + "\n";
    }
    if (e.status == EntryStatus::ok) {
      json items = json::array();
      if (e.answer) items.push_back("answer:" + *e.answer);
      generations += json{{"query_id", e.query_id}, {"items", items}}.dump() + "\n";
    }
  }
  write_text(dir / "rankings.ndjson", rankings);
  write_text(dir / "generations.ndjson", generations);
  write_text(dir / "config.json", to_json(cfg));

  if (calls) {
    calls->sparql = ctx.sparql_calls;
    calls->encoder = ctx.encoder_calls;
    calls->generator = ctx.generator_calls;
  }
  return m;
}

ReportFiles emit_report(const RunManifest& manifest, const fs::path& judgments_file,
                        const fs::path& meta_file, std::size_t k, const fs::path& out_dir) {
  for (const auto& p : {judgments_file, meta_file}) {
    if (!fs::exists(p)) throw Error(ErrorCode::IoError, "missing input file " + p.string());
  }
  std::ifstream jin(judgments_file), min(meta_file);
  const auto judgments = eval::read_judgments(jin);
  const auto meta = eval::read_meta(min);

  std::vector<eval::Ranking> rankings, answers;
  for (const auto& e : manifest.entries) {
    if (!e.ranked_subjects.empty()) rankings.push_back({e.query_id, e.ranked_subjects});
    if (e.status == EntryStatus::ok && e.answer) answers.push_back({e.query_id, {"answer:" + *e.answer}});
  }
  fs::create_directories(out_dir);
  ReportFiles files{out_dir / "ranker_report.json", out_dir / "ranker_report.tsv",
                    out_dir / "ranker_plot.tsv", out_dir / "generator_report.json"};

  const auto ranker = eval::aggregate(judgments, rankings, meta, k);
  const auto generator = eval::aggregate(judgments, answers, meta, 1);
  std::ofstream(files.ranker_json) << [&] {
    std::ostringstream s;
    eval::write_report_json(s, ranker);
    return s.str();
  }();
  std::ofstream tsv(files.ranker_tsv);
  eval::write_report_tsv(tsv, ranker);
  std::ofstream plot(files.ranker_plot);
  eval::write_plot_data(plot, judgments, rankings, meta, k);
  std::ofstream gj(files.generator_json);
  eval::write_report_json(gj, generator);
  return files;
}

}  // namespace placeorigin::pipeline
