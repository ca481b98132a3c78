#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "placeorigin/encoder.hpp"
#include "placeorigin/kg_search.hpp"
#include "placeorigin/rdf.hpp"

namespace placeorigin::index {

inline constexpr std::size_t kDocumentTokenCap = 256;

/// All triples of one subject, serialized as that subject's rdf:Description
/// block and capped to the encoder's token units.
struct TripleDocument {
  std::string subject;
  std::string text;
  std::size_t token_count = 0;
  bool truncated = false;
  std::vector<rdf::Triple> triples;

  bool operator==(const TripleDocument&) const = default;
};

/// One document per distinct subject, in canonical subject order.
std::vector<TripleDocument> chunk_by_subject(const kg::KGSnapshot& snapshot,
                                             const enc::Encoder& encoder,
                                             std::size_t max_tokens = kDocumentTokenCap,
                                             const rdf::PrefixMap& pm = rdf::PrefixMap::defaults());

struct KMeansResult {
  std::vector<std::vector<float>> centroids;
  std::vector<std::size_t> assignment;
  int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations. Clusters that end up empty
/// are dropped, and labels are numbered by first member so the result does
/// not depend on anything but the point order and the seed.
KMeansResult kmeans(const std::vector<std::vector<float>>& points, std::size_t k,
                    std::uint64_t seed, int max_iterations = 100);

/// ceil(sqrt(n)), at least 1.
std::size_t default_cluster_count(std::size_t n_docs);

struct ClusteredIndex {
  std::size_t dim = 0;
  std::string encoder_fingerprint;
  std::uint64_t seed = 0;
  std::vector<TripleDocument> documents;
  std::vector<enc::TokenMatrix> embeddings;  ///< one per document
  std::vector<std::vector<float>> pooled;    ///< unit mean-pooled embeddings
  std::vector<std::vector<float>> centroids;
  std::vector<std::size_t> assignment;       ///< document -> cluster

  std::size_t size() const { return documents.size(); }
  std::vector<std::vector<std::size_t>> members() const;
};

/// Encodes every document and clusters the pooled embeddings. `n_clusters`
/// defaults to default_cluster_count(). Documents are clustered in a
/// canonical order (subject, then text) so permuting the input does not
/// change the partition. Throws Error(InvalidArgument) on an empty list and
/// Error(EncoderFailure) naming the document that failed.
ClusteredIndex build_index(std::vector<TripleDocument> docs, const enc::Encoder& encoder,
                           std::optional<std::size_t> n_clusters, std::uint64_t seed);

/// Directory layout: manifest.json, documents.ndjson, centroids.f32 and
/// embeddings/<n>.f32 (little-endian float32, row-major).
void save_index(const ClusteredIndex& index, const std::filesystem::path& dir);
ClusteredIndex load_index(const std::filesystem::path& dir);

}  // namespace placeorigin::index
