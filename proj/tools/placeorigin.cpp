// Command-line front end: one subcommand per stage plus run-all.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "placeorigin/doc_index.hpp"
#include "placeorigin/encoder.hpp"
#include "placeorigin/error.hpp"
#include "placeorigin/gen_bridge.hpp"
#include "placeorigin/geo.hpp"
#include "placeorigin/kg_search.hpp"
#include "placeorigin/metrics.hpp"
#include "placeorigin/pairs.hpp"
#include "placeorigin/pipeline.hpp"
#include "placeorigin/qald.hpp"
#include "placeorigin/ranker.hpp"
#include "placeorigin/toponym.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace placeorigin;

namespace {

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  return out;
}

std::vector<GazetteerEntry> read_gazetteer(const fs::path& p, bool tsv) {
  auto in = open_in(p);
  const bool tab = tsv || p.extension() == ".tsv";
  return load_gazetteer(in, tab ? Delimiter::tab : Delimiter::comma);
}

std::unique_ptr<enc::Encoder> make_encoder(const std::string& url, std::size_t dim, std::size_t cap) {
  if (url.empty()) return std::make_unique<enc::TestEncoder>(dim, cap);
  return std::make_unique<enc::HttpEncoder>(url, dim, cap);
}

std::optional<std::size_t> parse_auto(const std::string& v, const char* what) {
  if (v == "auto") return std::nullopt;
  try {
    const auto n = std::stoul(v);
    if (n == 0) throw std::invalid_argument(what);
    return n;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be a positive integer or 'auto'");
  }
}

// gazetteer ---------------------------------------------------------------

void add_gazetteer(CLI::App& app) {
  auto* cmd = app.add_subcommand("gazetteer", "Gazetteer tables");
  cmd->require_subcommand(1);
  auto* load = cmd->add_subcommand("load", "Parse a gazetteer and print its entries as ndjson");
  static fs::path in, out;
  static bool tsv = false;
  static std::string format;
  load->add_option("--input,--in", in, "CSV or TSV gazetteer")->required();
  load->add_option("--format", format, "csv | tsv (default: csv, or tsv with --tsv)")
      ->check(CLI::IsMember({"csv", "tsv"}));
  load->add_flag("--tsv", tsv, "Tab-separated input");
  load->add_option("--out", out, "Output file (default: stdout)");
  load->callback([] {
    const auto entries = read_gazetteer(in, tsv || format == "tsv");
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.empty()) {
      file = open_out(out);
      os = &file;
    }
    std::map<std::string, std::size_t> kinds;
    for (const auto& e : entries) {
      json j = {{"raw_name", e.toponym.raw_name},
                {"root_name", e.toponym.root_name},
                {"type", e.toponym.feature_type},
                {"city", e.toponym.city},
                {"country", e.toponym.country},
                {"origin_kind", to_string(e.origin_kind)},
                {"origin_text", e.origin_text ? json(*e.origin_text) : json(nullptr)}};
      try {
        j["question"] = build_anchor_question(e.toponym).text;
      } catch (const Error& err) {
        j["question_error"] = err.what();
      }
      *os << j.dump() << '\n';
      ++kinds[std::string(to_string(e.origin_kind))];
    }
    std::cerr << entries.size() << " entries";
    for (const auto& [k, n] : kinds) std::cerr << ", " << k << "=" << n;
    std::cerr << '\n';
  });
}

// geo ----------------------------------------------------------------------

void add_geo(CLI::App& app) {
  auto* cmd = app.add_subcommand("geo", "GeoNames graphs");
  cmd->require_subcommand(1);
  auto* build = cmd->add_subcommand("build-graphs", "Build the country and city graphs");
  static fs::path countries, cities, out = "graphs";
  static std::int64_t n_hab = 50000;
  static double d_city = 50.0;
  build->add_option("--countries", countries, "countryInfo.txt")->required();
  build->add_option("--cities", cities, "GeoNames city table (e.g. cities15000.txt)")->required();
  build->add_option("--n-hab", n_hab, "Minimum city population")->capture_default_str();
  build->add_option("--d-city-km,--d-city", d_city, "Neighbourhood radius in km")->capture_default_str();
  build->add_option("--out", out, "Output directory")->capture_default_str();
  build->callback([] {
    auto cin = open_in(countries);
    const auto cnodes = geo::parse_country_table(cin);
    const auto cg = geo::build_country_graph(cnodes);
    auto tin = open_in(cities);
    const auto tnodes = geo::parse_city_table(tin, n_hab);
    const auto tg = geo::build_city_graph(tnodes, d_city);

    std::vector<std::string> ccodes;
    for (const auto& c : cnodes) ccodes.push_back(c.code);
    std::vector<std::int64_t> tids;
    for (const auto& c : tnodes) tids.push_back(c.geoname_id);
    auto o1 = open_out(out / "country_nodes.ndjson");
    geo::write_country_nodes(o1, cnodes);
    auto o2 = open_out(out / "country_edges.ndjson");
    geo::write_edges(o2, cg, ccodes);
    auto o3 = open_out(out / "city_nodes.ndjson");
    geo::write_city_nodes(o3, tnodes);
    auto o4 = open_out(out / "city_edges.ndjson");
    geo::write_edges(o4, tg, tids);
    std::cout << "countries " << cnodes.size() << ", borders " << cg.edges.size()
              << " (unknown neighbour codes " << cg.unknown_neighbors << ")\n"
              << "cities " << tnodes.size() << ", pairs within " << d_city << " km "
              << tg.edges.size() << '\n';
  });
}

// pairs --------------------------------------------------------------------

void add_pairs(CLI::App& app) {
  auto* cmd = app.add_subcommand("pairs", "Training pair datasets");
  cmd->require_subcommand(1);
  auto* g = cmd->add_subcommand("gen", "Generate a dataset as ndjson");
  static std::string dataset;
  static std::uint64_t seed = 0;
  static double neg_ratio = -1;
  static fs::path graphs = "graphs", out, qald_file;
  static std::string endpoint = "https://dbpedia.org/sparql";
  static bool undirected = false;
  static std::size_t max_neg = 0;
  static std::string qald_mode = "joint";
  g->add_option("--dataset", dataset, "country | city | qald9")
      ->required()
      ->check(CLI::IsMember({"country", "city", "qald9"}));
  g->add_option("--seed", seed, "Master seed")->capture_default_str();
  g->add_option("--neg-ratio", neg_ratio,
                "Negatives per question (country, default 100) or max ratio to positives (city, "
                "default 5)");
  g->add_option("--graphs", graphs, "Directory written by geo build-graphs")->capture_default_str();
  g->add_option("--qald", qald_file, "QALD JSON file (qald9)");
  g->add_option("--endpoint", endpoint, "SPARQL endpoint (qald9)")->capture_default_str();
  g->add_flag("--undirected", undirected, "One city positive per edge instead of both directions");
  g->add_option("--max-neg", max_neg, "Absolute cap on negatives per question (0: none)");
  g->add_option("--qald-mode", qald_mode, "joint | per-node")
      ->check(CLI::IsMember({"joint", "per-node"}));
  g->add_option("--out", out, "Output ndjson file (default by dataset)");
  g->callback([] {
    std::vector<pairs::QAPair> result;
    fs::path target = out;
    if (dataset == "country") {
      auto nin = open_in(graphs / "country_nodes.ndjson");
      const auto nodes = geo::read_country_nodes(nin);
      auto ein = open_in(graphs / "country_edges.ndjson");
      const auto graph = geo::read_country_edges(ein, nodes);
      const auto n = neg_ratio < 0 ? std::size_t{100} : static_cast<std::size_t>(neg_ratio);
      result = pairs::gen_country_pairs(nodes, graph, n, seed);
      if (target.empty()) target = "ds_geonames_country.ndjson";
    } else if (dataset == "city") {
      auto cin = open_in(graphs / "country_nodes.ndjson");
      std::map<std::string, std::string> names;
      for (const auto& c : geo::read_country_nodes(cin)) names[c.code] = c.name;
      auto nin = open_in(graphs / "city_nodes.ndjson");
      const auto nodes = geo::read_city_nodes(nin);
      auto ein = open_in(graphs / "city_edges.ndjson");
      const auto graph = geo::read_city_edges(ein, nodes);
      pairs::CityPairOptions opt;
      if (neg_ratio >= 0) opt.max_neg_ratio = neg_ratio;
      opt.directed = !undirected;
      if (max_neg > 0) opt.max_neg_per_question = max_neg;
      result = pairs::gen_city_pairs(nodes, graph, names, opt, seed);
      if (target.empty()) target = "ds_geonames.ndjson";
    } else {
      if (qald_file.empty()) throw Error(ErrorCode::InvalidArgument, "--qald is required for qald9");
      auto qin = open_in(qald_file);
      const auto entries = pairs::read_qald(qin);
      sparql::Client client(endpoint, {}, std::make_shared<http::RateLimiter>(std::chrono::milliseconds(200)));
      pairs::QaldOptions opt;
      opt.mode = qald_mode == "joint" ? pairs::PositiveMode::joint : pairs::PositiveMode::per_node;
      if (max_neg > 0) opt.max_negatives = max_neg;
      pairs::QaldStats st;
      const auto records = pairs::build_qald9_dataset(entries, client, kg::RelationFilter::defaults(),
                                                      opt, seed, &st);
      if (target.empty()) target = "ds_qald9_rdf.ndjson";
      auto o = open_out(target);
      pairs::write_ndjson(o, records);
      std::cout << "questions " << st.questions << ", positives " << st.positives << ", negatives "
                << st.negatives << ", empty results skipped " << st.skipped_empty
                << ", endpoint errors " << st.endpoint_errors << '\n';
      return;
    }
    auto o = open_out(target);
    pairs::write_ndjson(o, result);
    const auto st = pairs::summarize(result);
    std::cout << "questions " << st.questions << ", positives " << st.positives << ", negatives "
              << st.negatives << ", questions short of negatives " << st.shortfall_questions << '\n';
  });
}

// search -------------------------------------------------------------------

void add_search(CLI::App& app) {
  auto* cmd = app.add_subcommand("search", "Knowledge-graph extraction");
  cmd->require_subcommand(1);
  static fs::path names, cache = "cache/snapshots", relations;
  static std::string endpoint = "https://dbpedia.org/sparql", name;
  static int k_searcher = 10000, max_subjects = 1000, rate_ms = 200;
  static bool tsv = false;

  auto* run = cmd->add_subcommand("run", "Fetch and cache one snapshot per root name");
  run->add_option("--names", names, "Gazetteer file")->required();
  run->add_flag("--tsv", tsv, "Tab-separated gazetteer");
  run->add_option("--endpoint", endpoint)->capture_default_str();
  run->add_option("--k-searcher", k_searcher)->capture_default_str();
  run->add_option("--max-subjects", max_subjects)->capture_default_str();
  run->add_option("--cache", cache)->capture_default_str();
  run->add_option("--relations", relations, "Relation mapping JSON");
  run->add_option("--rate-limit-ms", rate_ms)->capture_default_str();
  run->callback([] {
    const auto filter = relations.empty() ? kg::RelationFilter::defaults() : kg::RelationFilter::load(relations);
    const kg::SearchLimits limits{k_searcher, max_subjects};
    sparql::Client client(endpoint, {}, std::make_shared<http::RateLimiter>(std::chrono::milliseconds(rate_ms)));
    std::set<std::string> roots;
    for (const auto& e : read_gazetteer(names, tsv)) roots.insert(e.toponym.root_name);
    std::size_t extracted = 0, cached = 0, failed = 0;
    for (const auto& root : roots) {
      try {
        auto s = kg::load_snapshot(root, cache);
        if (s) {
          ++cached;
        } else {
          s = kg::fetch_snapshot(client, root, filter, limits);
          kg::cache_snapshot(*s, cache);
        }
        if (!s->triples.empty()) ++extracted;
        std::cout << root << '\t' << s->subject_count << " subjects\t" << s->triples.size()
                  << " triples" << (s->truncated ? "\ttruncated" : "") << '\n';
      } catch (const Error& e) {
        ++failed;
        std::cerr << root << ": " << e.what() << '\n';
      }
    }
    std::cout << roots.size() << " root names, " << extracted << " with a graph, " << cached
              << " from cache, " << failed << " failed\n";
  });

  auto* query = cmd->add_subcommand("query", "Print the SPARQL query for a root name");
  query->add_option("--name", name)->required();
  query->add_option("--k-searcher", k_searcher)->capture_default_str();
  query->add_option("--max-subjects", max_subjects)->capture_default_str();
  query->add_option("--relations", relations, "Relation mapping JSON");
  query->callback([] {
    const auto filter = relations.empty() ? kg::RelationFilter::defaults() : kg::RelationFilter::load(relations);
    std::cout << kg::build_sparql(name, filter, {k_searcher, max_subjects});
  });
}

// index / rank / generate --------------------------------------------------

void add_index(CLI::App& app) {
  auto* cmd = app.add_subcommand("index", "Document index");
  cmd->require_subcommand(1);
  auto* build = cmd->add_subcommand("build", "Index every cached snapshot (one index per name)");
  static fs::path snapshots, out = "indexes";
  static std::string encoder_url, clusters = "auto";
  static std::size_t dim = 128;
  static std::uint64_t seed = 0;
  build->add_option("--snapshots", snapshots, "Directory of <name>.rdf / <name>.meta")->required();
  build->add_option("--encoder-url", encoder_url, "Encoder backend (default: built-in test encoder)");
  build->add_option("--dim", dim, "Embedding width")->capture_default_str();
  build->add_option("--clusters", clusters, "Cluster count or 'auto'")->capture_default_str();
  build->add_option("--seed", seed)->capture_default_str();
  build->add_option("--out", out)->capture_default_str();
  build->callback([] {
    const auto encoder = make_encoder(encoder_url, dim, index::kDocumentTokenCap);
    const auto n = parse_auto(clusters, "--clusters");
    for (const auto& f : fs::directory_iterator(snapshots)) {
      if (f.path().extension() != ".meta") continue;
      const auto meta = json::parse(open_in(f.path()));
      const auto root = meta.at("root_name").get<std::string>();
      const auto snap = kg::load_snapshot(root, snapshots);
      if (!snap || snap->triples.empty()) continue;
      auto docs = index::chunk_by_subject(*snap, *encoder);
      const auto idx = index::build_index(std::move(docs), *encoder, n, seed);
      const auto dir = out / f.path().stem();
      index::save_index(idx, dir);
      std::cout << root << '\t' << idx.size() << " documents\t" << idx.centroids.size()
                << " clusters\t" << dir.string() << '\n';
    }
  });
}

void add_rank(CLI::App& app) {
  auto* cmd = app.add_subcommand("rank", "MaxSim ranking");
  cmd->require_subcommand(1);
  auto* run = cmd->add_subcommand("run", "Rank an index against a question");
  static std::string question, encoder_url;
  static fs::path index_dir, out;
  static std::size_t k = 10, dim = 128;
  static std::string probe = "auto";
  run->add_option("--question", question)->required();
  run->add_option("--index", index_dir)->required();
  run->add_option("--k", k)->capture_default_str();
  run->add_option("--probe", probe, "Clusters to probe or 'auto'")->capture_default_str();
  run->add_option("--encoder-url", encoder_url);
  run->add_option("--dim", dim)->capture_default_str();
  run->add_option("--out", out, "Output ndjson (default: stdout)");
  run->callback([] {
    const auto idx = index::load_index(index_dir);
    const auto encoder = make_encoder(encoder_url, idx.dim, index::kDocumentTokenCap);
    if (encoder->fingerprint() != idx.encoder_fingerprint) {
      std::cerr << "warning: index was built with " << idx.encoder_fingerprint << '\n';
    }
    const auto ranked = rank::rank_top_k({question, ""}, idx, *encoder, k, parse_auto(probe, "--probe"));
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.empty()) {
      file = open_out(out);
      os = &file;
    }
    for (const auto& c : ranked) {
      *os << json{{"subject", c.subject}, {"score", c.score}, {"rank", c.rank}}.dump() << '\n';
    }
  });
}

void add_generate(CLI::App& app) {
  auto* cmd = app.add_subcommand("generate", "Prompting and generation");
  cmd->require_subcommand(1);
  auto* run = cmd->add_subcommand("run", "Build the prompt from ranked documents and query the backend");
  static fs::path ranked, index_dir, log;
  static std::string question, ordering = "tail-best", backend_url, counter = "heuristic", tokenizer_url;
  static std::size_t budget = 4096;
  static int max_new_tokens = 256;
  static double temperature = 0.0;
  static std::uint64_t seed = 0;
  static bool dry_run = false;
  run->add_option("--ranked", ranked, "ndjson from rank run")->required();
  run->add_option("--index", index_dir, "Index holding the document texts")->required();
  run->add_option("--question", question)->required();
  run->add_option("--ordering", ordering, "tail-best | head-best")->capture_default_str();
  run->add_option("--backend-url", backend_url);
  run->add_option("--budget", budget)->capture_default_str();
  run->add_option("--token-counter", counter, "heuristic | whitespace | http")->capture_default_str();
  run->add_option("--tokenizer-url", tokenizer_url);
  run->add_option("--max-new-tokens", max_new_tokens)->capture_default_str();
  run->add_option("--temperature", temperature)->capture_default_str();
  run->add_option("--seed", seed)->capture_default_str();
  run->add_option("--log", log, "Append a request/response record here");
  run->add_flag("--dry-run", dry_run, "Print the prompt without calling the backend");
  run->callback([] {
    const auto order = gen::parse_ordering(ordering);
    if (!order) throw Error(ErrorCode::InvalidArgument, "unknown ordering " + ordering);
    const auto idx = index::load_index(index_dir);
    std::map<std::string, std::string> texts;
    for (const auto& d : idx.documents) texts.emplace(d.subject, d.text);
    gen::PromptSpec spec;
    spec.anchor = {question, ""};
    spec.ordering = *order;
    spec.token_budget = budget;
    auto in = open_in(ranked);
    std::string line;
    std::vector<std::string> subjects;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      const auto s = j.at("subject").get<std::string>();
      const auto it = texts.find(s);
      if (it == texts.end()) throw Error(ErrorCode::InvalidArgument, s + " is not in the index");
      spec.candidates.push_back({s, j.at("rank").get<std::size_t>(), it->second});
      subjects.push_back(s);
    }
    std::unique_ptr<gen::TokenCounter> tc;
    if (counter == "whitespace") {
      tc = std::make_unique<gen::WhitespaceTokenCounter>();
    } else if (counter == "http") {
      tc = std::make_unique<gen::HttpTokenCounter>(tokenizer_url);
    } else {
      tc = std::make_unique<gen::HeuristicTokenCounter>();
    }
    const auto prompt = gen::assemble_prompt(spec, *tc);
    if (dry_run || backend_url.empty()) {
      std::cout << prompt.text;
      return;
    }
    const auto rec = gen::call_generator(http::Client(backend_url), prompt.text,
                                         {max_new_tokens, temperature, seed});
    const auto outcome = gen::parse_generation(rec.text, subjects);
    const json result = {{"choice", outcome.choice_subject ? json(*outcome.choice_subject) : json(nullptr)},
                         {"answer", outcome.answer_text ? json(*outcome.answer_text) : json(nullptr)},
                         {"refusal", outcome.refusal},
                         {"off_list", outcome.off_list},
                         {"dropped_ranks", prompt.dropped_ranks},
                         {"raw", rec.text}};
    std::cout << result.dump(2) << '\n';
    if (!log.empty()) {
      std::ofstream lf(log, std::ios::app);
      lf << json{{"request_sha256", rec.request_sha256},
                 {"response_sha256", rec.response_sha256},
                 {"text", rec.text}}
                .dump()
         << '\n';
    }
  });
}

// eval ---------------------------------------------------------------------

void add_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "Metrics");
  cmd->require_subcommand(1);
  auto* run = cmd->add_subcommand("run", "Score rankings against judgments");
  static fs::path rankings, judgments, meta, out = "report";
  static std::size_t k = 10;
  run->add_option("--rankings", rankings, "rankings.ndjson, or a run directory containing it")->required();
  run->add_option("--judgments", judgments)->required();
  run->add_option("--meta", meta)->required();
  run->add_option("--k", k)->capture_default_str();
  run->add_option("--out", out)->capture_default_str();
  run->callback([] {
    const auto file = fs::is_directory(rankings) ? rankings / "rankings.ndjson" : rankings;
    for (const auto& p : {file, judgments, meta}) {
      if (!fs::exists(p)) throw Error(ErrorCode::IoError, "missing input file " + p.string());
    }
    auto rin = open_in(file);
    auto jin = open_in(judgments);
    auto min = open_in(meta);
    const auto r = eval::read_rankings(rin);
    const auto j = eval::read_judgments(jin);
    const auto m = eval::read_meta(min);
    const auto rep = eval::aggregate(j, r, m, k);
    auto oj = open_out(out / "report.json");
    eval::write_report_json(oj, rep);
    auto ot = open_out(out / "report.tsv");
    eval::write_report_tsv(ot, rep);
    auto op = open_out(out / "plot.tsv");
    eval::write_plot_data(op, j, r, m, k);
    eval::write_report_tsv(std::cout, rep);
    std::cout << "N=" << rep.n << " N*=" << rep.n_star << " extracted=" << rep.n_extracted
              << " extraction_rate=" << rep.extraction_rate()
              << " searcher_hit_ratio=" << rep.searcher_hit_ratio() << '\n';
  });
}

// run-all ------------------------------------------------------------------

void add_run_all(CLI::App& app) {
  auto* cmd = app.add_subcommand("run-all", "Full pipeline over a gazetteer");
  static fs::path gazetteer, config, judgments, meta, report;
  static bool tsv = false, print_config = false;
  static std::string cache_dir;
  static int workers = 0;
  cmd->add_option("--gazetteer", gazetteer)->required();
  cmd->add_flag("--tsv", tsv, "Tab-separated gazetteer");
  cmd->add_option("--config", config, "Pipeline config (JSON)");
  cmd->add_option("--cache", cache_dir, "Override cache_dir");
  cmd->add_option("--workers", workers, "Override workers");
  cmd->add_option("--judgments", judgments, "Emit a report with these judgments");
  cmd->add_option("--meta", meta, "Query meta file for the report");
  cmd->add_option("--report", report, "Report directory (default: <run dir>/report)");
  cmd->add_flag("--print-config", print_config, "Print the effective config and exit");
  cmd->callback([] {
    auto cfg = pipeline::load_config(config.empty() ? std::nullopt : std::optional<fs::path>(config));
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    if (workers > 0) cfg.workers = workers;
    pipeline::validate(cfg);
    if (print_config) {
      std::cout << pipeline::to_json(cfg);
      return;
    }
    const auto entries = read_gazetteer(gazetteer, tsv);
    pipeline::BackendCalls calls;
    const auto m = pipeline::run_pipeline(entries, cfg, &calls);
    std::map<std::string, std::size_t> statuses;
    for (const auto& e : m.entries) ++statuses[std::string(pipeline::to_string(e.status))];
    std::cout << "run " << pipeline::run_dir(cfg).string() << '\n' << m.entries.size() << " entries";
    for (const auto& [s, n] : statuses) std::cout << ", " << s << "=" << n;
    std::cout << "\nbackend calls: sparql=" << calls.sparql << " encoder=" << calls.encoder
              << " generator=" << calls.generator << '\n';
    if (!judgments.empty() || !meta.empty()) {
      const auto dir = report.empty() ? pipeline::run_dir(cfg) / "report" : report;
      const auto files = pipeline::emit_report(m, judgments, meta, cfg.k_ranker, dir);
      std::cout << "report " << files.ranker_json.string() << '\n';
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Place-name origin retrieval: gazetteer, graphs, datasets, search, ranking, generation"};
  app.require_subcommand(1);
  add_gazetteer(app);
  add_geo(app);
  add_pairs(app);
  add_search(app);
  add_index(app);
  add_rank(app);
  add_generate(app);
  add_eval(app);
  add_run_all(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
