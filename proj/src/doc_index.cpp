#include "placeorigin/doc_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "placeorigin/error.hpp"
#include "placeorigin/kernels/kernels.hpp"
#include "placeorigin/rng.hpp"

namespace placeorigin::index {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "index files are written in host order and assume little-endian");

std::vector<TripleDocument> chunk_by_subject(const kg::KGSnapshot& snapshot,
                                             const enc::Encoder& encoder, std::size_t max_tokens,
                                             const rdf::PrefixMap& pm) {
  std::vector<TripleDocument> out;
  for (auto& frag : rdf::subject_fragments(snapshot.triples, pm)) {
    auto cut = enc::truncate_tokens(encoder, frag.text, max_tokens);
    TripleDocument d;
    d.subject = std::move(frag.subject);
    d.text = std::move(cut.text);
    d.token_count = cut.token_count;
    d.truncated = cut.truncated;
    d.triples = std::move(frag.triples);
    out.push_back(std::move(d));
  }
  return out;
}

std::size_t default_cluster_count(std::size_t n_docs) {
  auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_docs))));
  while (k * k < n_docs) ++k;
  while (k > 1 && (k - 1) * (k - 1) >= n_docs) --k;
  return std::max<std::size_t>(1, k);
}

namespace {

std::size_t nearest(const std::vector<float>& p, const std::vector<std::vector<float>>& centroids) {
  const auto& k = kernels::active();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = k.squared_distance(p.data(), centroids[c].data(), p.size());
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<std::vector<float>> means(const std::vector<std::vector<float>>& points,
                                      const std::vector<std::size_t>& assignment,
                                      std::vector<std::vector<float>> previous) {
  const std::size_t dim = points.front().size();
  std::vector<std::vector<double>> acc(previous.size(), std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(previous.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[assignment[i]];
    for (std::size_t d = 0; d < dim; ++d) acc[assignment[i]][d] += points[i][d];
  }
  for (std::size_t c = 0; c < previous.size(); ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      previous[c][d] = static_cast<float>(acc[c][d] / static_cast<double>(counts[c]));
    }
  }
  return previous;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<float>>& points, std::size_t k,
                    std::uint64_t seed, int max_iterations) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "k-means over no points");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k-means needs k >= 1");
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(ErrorCode::DimensionMismatch, "k-means points differ in width");
  }
  const auto& kern = kernels::active();

  KMeansResult r;
  if (n <= k) {
    r.centroids = points;
    r.assignment.resize(n);
    std::iota(r.assignment.begin(), r.assignment.end(), 0);
    return r;
  }

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<char> chosen(n, 0);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  chosen[first] = 1;
  r.centroids.push_back(points[first]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = kern.squared_distance(points[i].data(), points[first].data(), dim);
  }
  while (r.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        pick = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) rest.push_back(i);
      }
      pick = rest[static_cast<std::size_t>(rng.below(rest.size()))];
    }
    chosen[pick] = 1;
    r.centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], kern.squared_distance(points[i].data(), points[pick].data(), dim));
    }
  }

  r.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) r.assignment[i] = nearest(points[i], r.centroids);
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    r.centroids = means(points, r.assignment, std::move(r.centroids));
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = nearest(points[i], r.centroids);
      if (c != r.assignment[i]) {
        r.assignment[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Drop empty clusters and renumber by first member.
  std::map<std::size_t, std::size_t> relabel;
  for (std::size_t i = 0; i < n; ++i) relabel.try_emplace(r.assignment[i], relabel.size());
  for (auto& a : r.assignment) a = relabel.at(a);
  std::vector<std::vector<float>> fresh(relabel.size(), std::vector<float>(dim, 0.0f));
  r.centroids = means(points, r.assignment, std::move(fresh));
  return r;
}

std::vector<std::vector<std::size_t>> ClusteredIndex::members() const {
  std::vector<std::vector<std::size_t>> out(centroids.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

ClusteredIndex build_index(std::vector<TripleDocument> docs, const enc::Encoder& encoder,
                           std::optional<std::size_t> n_clusters, std::uint64_t seed) {
  if (docs.empty()) throw Error(ErrorCode::InvalidArgument, "cannot index an empty document list");
  if (n_clusters && *n_clusters == 0) {
    throw Error(ErrorCode::InvalidArgument, "n_clusters must be at least 1");
  }
  std::stable_sort(docs.begin(), docs.end(), [](const TripleDocument& a, const TripleDocument& b) {
    return std::tie(a.subject, a.text) < std::tie(b.subject, b.text);
  });

  ClusteredIndex idx;
  idx.dim = encoder.dim();
  idx.encoder_fingerprint = encoder.fingerprint();
  idx.seed = seed;
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  try {
    idx.embeddings = encoder.encode_batch(texts);
  } catch (const Error& e) {
    // Re-encode one at a time to name the failing document.
    for (const auto& d : docs) {
      try {
        (void)encoder.encode(d.text);
      } catch (const Error& inner) {
        throw Error(ErrorCode::EncoderFailure, "document " + d.subject + ": " + inner.what());
      }
    }
    throw Error(ErrorCode::EncoderFailure, e.what());
  }
  if (idx.embeddings.size() != docs.size()) {
    throw Error(ErrorCode::EncoderFailure, "encoder returned the wrong number of matrices");
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (idx.embeddings[i].dim != idx.dim) {
      throw Error(ErrorCode::DimensionMismatch, "document " + docs[i].subject + " has wrong width");
    }
    idx.pooled.push_back(enc::mean_pool(idx.embeddings[i]));
  }
  auto km = kmeans(idx.pooled, n_clusters.value_or(default_cluster_count(docs.size())), seed);
  idx.centroids = std::move(km.centroids);
  idx.assignment = std::move(km.assignment);
  idx.documents = std::move(docs);
  return idx;
}

namespace {

void write_floats(const fs::path& p, const std::vector<float>& v) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
}

std::vector<float> read_floats(const fs::path& p, std::size_t expected) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::vector<float> v(expected);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(expected * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != expected * sizeof(float) || in.peek() != EOF) {
    throw Error(ErrorCode::IoError, p.string() + " has the wrong size");
  }
  return v;
}

json triple_to_json(const rdf::Triple& t) {
  json j = {{"s", t.subject}, {"p", t.predicate}, {"o", t.object},
            {"kind", t.object_kind == rdf::TermKind::iri       ? "iri"
                     : t.object_kind == rdf::TermKind::literal ? "literal"
                                                               : "blank"}};
  if (t.object_lang) j["lang"] = *t.object_lang;
  if (t.object_datatype) j["datatype"] = *t.object_datatype;
  return j;
}

rdf::Triple triple_from_json(const json& j) {
  rdf::Triple t;
  t.subject = j.at("s").get<std::string>();
  t.predicate = j.at("p").get<std::string>();
  t.object = j.at("o").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  t.object_kind = kind == "iri"       ? rdf::TermKind::iri
                  : kind == "literal" ? rdf::TermKind::literal
                                      : rdf::TermKind::blank;
  if (j.contains("lang")) t.object_lang = j.at("lang").get<std::string>();
  if (j.contains("datatype")) t.object_datatype = j.at("datatype").get<std::string>();
  return t;
}

}  // namespace

void save_index(const ClusteredIndex& index, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "embeddings", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  json manifest = {{"dim", index.dim},
                   {"encoder", index.encoder_fingerprint},
                   {"seed", index.seed},
                   {"clusters", index.centroids.size()},
                   {"documents", json::array()}};
  std::ofstream docs(dir / "documents.ndjson", std::ios::trunc);
  for (std::size_t i = 0; i < index.documents.size(); ++i) {
    const auto& d = index.documents[i];
    const auto file = "embeddings/" + std::to_string(i) + ".f32";
    manifest["documents"].push_back({{"subject", d.subject},
                                     {"cluster", index.assignment[i]},
                                     {"rows", index.embeddings[i].rows},
                                     {"file", file}});
    json rec = {{"subject", d.subject},
                {"text", d.text},
                {"token_count", d.token_count},
                {"truncated", d.truncated},
                {"triples", json::array()}};
    for (const auto& t : d.triples) rec["triples"].push_back(triple_to_json(t));
    docs << rec.dump() << '\n';
    write_floats(dir / file, index.embeddings[i].data);
  }
  if (!docs) throw Error(ErrorCode::IoError, "cannot write documents.ndjson");
  std::vector<float> flat;
  for (const auto& c : index.centroids) flat.insert(flat.end(), c.begin(), c.end());
  write_floats(dir / "centroids.f32", flat);
  std::ofstream(dir / "manifest.json", std::ios::trunc) << manifest.dump(2) << '\n';
}

ClusteredIndex load_index(const fs::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw Error(ErrorCode::IoError, "no index manifest in " + dir.string());
  ClusteredIndex idx;
  try {
    const auto manifest = json::parse(mf);
    idx.dim = manifest.at("dim").get<std::size_t>();
    idx.encoder_fingerprint = manifest.at("encoder").get<std::string>();
    idx.seed = manifest.at("seed").get<std::uint64_t>();
    const auto n_clusters = manifest.at("clusters").get<std::size_t>();

    std::ifstream docs(dir / "documents.ndjson");
    std::string line;
    while (std::getline(docs, line)) {
      if (line.empty()) continue;
      const auto rec = json::parse(line);
      TripleDocument d;
      d.subject = rec.at("subject").get<std::string>();
      d.text = rec.at("text").get<std::string>();
      d.token_count = rec.at("token_count").get<std::size_t>();
      d.truncated = rec.at("truncated").get<bool>();
      for (const auto& t : rec.at("triples")) d.triples.push_back(triple_from_json(t));
      idx.documents.push_back(std::move(d));
    }
    const auto& entries = manifest.at("documents");
    if (entries.size() != idx.documents.size()) {
      throw Error(ErrorCode::IoError, "index manifest and documents.ndjson disagree");
    }
    for (const auto& e : entries) {
      enc::TokenMatrix m;
      m.dim = idx.dim;
      m.rows = e.at("rows").get<std::size_t>();
      m.data = read_floats(dir / e.at("file").get<std::string>(), m.rows * m.dim);
      idx.pooled.push_back(enc::mean_pool(m));
      idx.embeddings.push_back(std::move(m));
      idx.assignment.push_back(e.at("cluster").get<std::size_t>());
      if (idx.assignment.back() >= n_clusters) {
        throw Error(ErrorCode::IoError, "cluster id out of range in index manifest");
      }
    }
    const auto flat = read_floats(dir / "centroids.f32", n_clusters * idx.dim);
    for (std::size_t c = 0; c < n_clusters; ++c) {
      idx.centroids.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(c * idx.dim),
                                 flat.begin() + static_cast<std::ptrdiff_t>((c + 1) * idx.dim));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, "malformed index in " + dir.string() + ": " + e.what());
  }
  return idx;
}

}  // namespace placeorigin::index
