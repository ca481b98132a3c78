#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace placeorigin::eval {

/// Binary relevance flags in rank order.
using Rels = std::span<const int>;

double hr_at_k(Rels rels, std::size_t k);
double mrr_at_k(Rels rels, std::size_t k);
/// Binary-gain nDCG. The ideal list holds min(total_relevant, k) hits;
/// total_relevant defaults to the hits present in `rels`.
double ndcg_at_k(Rels rels, std::size_t k, std::optional<std::size_t> total_relevant = std::nullopt);
double precision_at_k(Rels rels, std::size_t k);
/// Mean of precision_at_k over queries. This is the "MAP" of the reported
/// tables, not classical average precision.
double map_at_k(const std::vector<std::vector<int>>& lists, std::size_t k);
/// Classical average precision at k: mean of P@i over the relevant ranks i,
/// divided by min(total_relevant, k).
double average_precision_at_k(Rels rels, std::size_t k,
                              std::optional<std::size_t> total_relevant = std::nullopt);

enum class Channel { sem, geo_aus, geo_vic };
inline constexpr std::array<Channel, 3> kChannels{Channel::sem, Channel::geo_aus, Channel::geo_vic};
std::string_view to_string(Channel c) noexcept;

struct RelevanceJudgment {
  std::string query_id;
  std::string item_id;
  int sem = 0;
  int geo_aus = 0;
  int geo_vic = 0;

  int get(Channel c) const;
};

struct QueryMeta {
  std::string query_id;
  bool kg_extracted = false;
  bool origin_mentioned = false;
};

struct Ranking {
  std::string query_id;
  std::vector<std::string> items;  ///< rank order
};

class Judgments {
 public:
  /// Throws Error(InvalidJudgment) on non-binary values, geo_vic without
  /// geo_aus, or a conflicting duplicate.
  void add(RelevanceJudgment j);
  const RelevanceJudgment* find(std::string_view query_id, std::string_view item_id) const;
  std::size_t relevant_count(std::string_view query_id, Channel c) const;
  std::size_t size() const { return by_key_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, RelevanceJudgment, std::less<>> by_key_;
};

/// Newline-delimited JSON, one judgment per line; blank lines are skipped.
Judgments read_judgments(std::istream& in);
/// Newline-delimited JSON {query_id, kg_extracted, origin_mentioned}. Throws
/// Error(InvalidJudgment) when origin_mentioned holds without kg_extracted or
/// a query id repeats.
std::vector<QueryMeta> read_meta(std::istream& in);
/// {"query_id": ..., "items": [...]} per line.
std::vector<Ranking> read_rankings(std::istream& in);

struct MetricValues {
  double hr = 0.0;
  double mrr = 0.0;
  double ndcg = 0.0;
  double precision = 0.0;
  double map = 0.0;  ///< mean P@k
  double classical_map = 0.0;
};

struct MetricsReport {
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t n_star = 0;
  std::size_t n_extracted = 0;
  std::map<Channel, MetricValues> all;
  std::map<Channel, MetricValues> starred;

  /// n_extracted / n.
  double extraction_rate() const;
  /// n_star / n: share of queries whose snapshot mentions the origin, i.e.
  /// the hit ratio of the search stage over its whole result.
  double searcher_hit_ratio() const;
};

/// Means over every query in `meta` (queries without a ranking count as
/// misses) and starred means over those with origin_mentioned. Throws
/// Error(MissingJudgment) naming the query and item when a ranked item within
/// the cutoff is unjudged, and Error(InvalidArgument) for rankings of unknown
/// queries or k == 0.
MetricsReport aggregate(const Judgments& judgments, const std::vector<Ranking>& rankings,
                        const std::vector<QueryMeta>& meta, std::size_t k);

/// Signed relative change (current - previous) / previous; std::nullopt when
/// previous is zero (undefined base).
std::optional<double> delta_hr(double hr_current, double hr_previous);

void write_report_json(std::ostream& out, const MetricsReport& r);
/// Tab-separated table: subset, channel, metric columns.
void write_report_tsv(std::ostream& out, const MetricsReport& r);
/// Per-rank relevance grid: one line per (query, channel) with k cells,
/// 1/0 for judged items and "." past the end of the ranking.
void write_plot_data(std::ostream& out, const Judgments& judgments,
                     const std::vector<Ranking>& rankings, const std::vector<QueryMeta>& meta,
                     std::size_t k);

}  // namespace placeorigin::eval
