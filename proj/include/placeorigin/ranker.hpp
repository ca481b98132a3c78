#pragma once

#include <optional>
#include <string>
#include <vector>

#include "placeorigin/doc_index.hpp"
#include "placeorigin/encoder.hpp"
#include "placeorigin/toponym.hpp"

namespace placeorigin::rank {

struct RankedCandidate {
  std::string subject;
  double score = 0.0;
  std::size_t rank = 0;      ///< 1-based
  std::size_t document = 0;  ///< position in the index

  bool operator==(const RankedCandidate&) const = default;
};

/// Late-interaction score: for each query row, the best dot product against
/// any document row, summed. Rows are expected to be unit length so the dot
/// products are cosines. Throws Error(EmptyEmbedding) or
/// Error(DimensionMismatch).
double score_maxsim(const enc::TokenMatrix& query, const enc::TokenMatrix& doc);

/// All clusters for up to 1000 documents, ceil(sqrt(#clusters)) beyond.
std::size_t default_probe_clusters(std::size_t n_docs, std::size_t n_clusters);

/// Cluster ids ordered by cosine between `pooled_query` and each centroid,
/// best first (ties by id), truncated to `probe`.
std::vector<std::size_t> nearest_clusters(const index::ClusteredIndex& index,
                                          const std::vector<float>& pooled_query,
                                          std::size_t probe);

/// Scores the listed documents and returns the best `k` in rank order.
/// Equal scores are ordered by subject. Documents without rows score 0.
std::vector<RankedCandidate> rank_documents(const enc::TokenMatrix& query,
                                            const index::ClusteredIndex& index,
                                            const std::vector<std::size_t>& documents,
                                            std::size_t k);

/// Encodes the question text verbatim, probes the nearest clusters and ranks
/// their members exactly. `probe_clusters` defaults to
/// default_probe_clusters(); passing the cluster count makes the search
/// exhaustive.
std::vector<RankedCandidate> rank_top_k(const AnchorQuestion& question,
                                        const index::ClusteredIndex& index,
                                        const enc::Encoder& encoder, std::size_t k_ranker,
                                        std::optional<std::size_t> probe_clusters = std::nullopt);

}  // namespace placeorigin::rank
