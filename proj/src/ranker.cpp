#include "placeorigin/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "placeorigin/error.hpp"
#include "placeorigin/kernels/kernels.hpp"

namespace placeorigin::rank {

double score_maxsim(const enc::TokenMatrix& query, const enc::TokenMatrix& doc) {
  if (query.rows == 0 || doc.rows == 0) {
    throw Error(ErrorCode::EmptyEmbedding, "MaxSim needs at least one row on each side");
  }
  if (query.dim != doc.dim) {
    throw Error(ErrorCode::DimensionMismatch, "query width " + std::to_string(query.dim) +
                                                  " vs document width " + std::to_string(doc.dim));
  }
  return kernels::active().maxsim(query.data.data(), query.rows, doc.data.data(), doc.rows,
                                  query.dim);
}

std::size_t default_probe_clusters(std::size_t n_docs, std::size_t n_clusters) {
  if (n_docs <= 1000) return n_clusters;
  return std::min(n_clusters, static_cast<std::size_t>(
                                  std::ceil(std::sqrt(static_cast<double>(n_clusters)))));
}

std::vector<std::size_t> nearest_clusters(const index::ClusteredIndex& index,
                                          const std::vector<float>& pooled_query,
                                          std::size_t probe) {
  const auto& k = kernels::active();
  std::vector<double> sim(index.centroids.size(), 0.0);
  for (std::size_t c = 0; c < index.centroids.size(); ++c) {
    const auto& cen = index.centroids[c];
    const double norm = std::sqrt(k.dot(cen.data(), cen.data(), cen.size()));
    if (norm > 0.0) sim[c] = k.dot(pooled_query.data(), cen.data(), cen.size()) / norm;
  }
  std::vector<std::size_t> order(sim.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
  order.resize(std::min(order.size(), probe));
  return order;
}

std::vector<RankedCandidate> rank_documents(const enc::TokenMatrix& query,
                                            const index::ClusteredIndex& index,
                                            const std::vector<std::size_t>& documents,
                                            std::size_t k) {
  std::vector<RankedCandidate> scored;
  scored.reserve(documents.size());
  for (const auto d : documents) {
    const auto& emb = index.embeddings.at(d);
    const double s = emb.rows == 0 ? 0.0 : score_maxsim(query, emb);
    scored.push_back({index.documents[d].subject, s, 0, d});
  }
  const auto better = [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.subject != b.subject) return a.subject < b.subject;
    return a.document < b.document;
  };
  const auto keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  scored.resize(keep);
  for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = i + 1;
  return scored;
}

std::vector<RankedCandidate> rank_top_k(const AnchorQuestion& question,
                                        const index::ClusteredIndex& index,
                                        const enc::Encoder& encoder, std::size_t k_ranker,
                                        std::optional<std::size_t> probe_clusters) {
  if (index.size() == 0) throw Error(ErrorCode::InvalidArgument, "cannot rank over an empty index");
  if (k_ranker == 0) throw Error(ErrorCode::InvalidArgument, "k_ranker must be at least 1");
  enc::TokenMatrix query;
  try {
    query = encoder.encode(question.text);
  } catch (const Error& e) {
    throw Error(ErrorCode::EncoderFailure, std::string("question: ") + e.what());
  }
  if (query.dim != index.dim) {
    throw Error(ErrorCode::DimensionMismatch, "encoder and index widths differ");
  }
  const auto probe = std::max<std::size_t>(
      1, probe_clusters.value_or(default_probe_clusters(index.size(), index.centroids.size())));

  std::vector<std::size_t> docs;
  if (probe >= index.centroids.size()) {
    docs.resize(index.size());
    std::iota(docs.begin(), docs.end(), 0);
  } else {
    const auto members = index.members();
    for (const auto c : nearest_clusters(index, enc::mean_pool(query), probe)) {
      docs.insert(docs.end(), members[c].begin(), members[c].end());
    }
  }
  return rank_documents(query, index, docs, k_ranker);
}

}  // namespace placeorigin::rank
