#include "placeorigin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>

#include <json.hpp>

#include "placeorigin/error.hpp"

namespace placeorigin::eval {

using nlohmann::json;

namespace {

std::size_t cutoff(Rels rels, std::size_t k) { return std::min(k, rels.size()); }

std::size_t hits(Rels rels) {
  return static_cast<std::size_t>(std::count_if(rels.begin(), rels.end(), [](int r) { return r != 0; }));
}

}  // namespace

double hr_at_k(Rels rels, std::size_t k) {
  for (std::size_t i = 0; i < cutoff(rels, k); ++i) {
    if (rels[i]) return 1.0;
  }
  return 0.0;
}

double mrr_at_k(Rels rels, std::size_t k) {
  for (std::size_t i = 0; i < cutoff(rels, k); ++i) {
    if (rels[i]) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double ndcg_at_k(Rels rels, std::size_t k, std::optional<std::size_t> total_relevant) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < cutoff(rels, k); ++i) {
    if (rels[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  const auto ideal_hits = std::min(k, std::max(total_relevant.value_or(0), hits(rels)));
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal_hits; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

double precision_at_k(Rels rels, std::size_t k) {
  if (k == 0) return 0.0;
  return static_cast<double>(hits(rels.first(cutoff(rels, k)))) / static_cast<double>(k);
}

double map_at_k(const std::vector<std::vector<int>>& lists, std::size_t k) {
  if (lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& l : lists) sum += precision_at_k(l, k);
  return sum / static_cast<double>(lists.size());
}

double average_precision_at_k(Rels rels, std::size_t k, std::optional<std::size_t> total_relevant) {
  double sum = 0.0;
  std::size_t found = 0;
  for (std::size_t i = 0; i < cutoff(rels, k); ++i) {
    if (!rels[i]) continue;
    ++found;
    sum += static_cast<double>(found) / static_cast<double>(i + 1);
  }
  const auto denom = std::min(k, std::max(total_relevant.value_or(0), hits(rels)));
  return denom == 0 ? 0.0 : sum / static_cast<double>(denom);
}

std::string_view to_string(Channel c) noexcept {
  switch (c) {
    case Channel::sem: return "sem";
    case Channel::geo_aus: return "geo_aus";
    case Channel::geo_vic: return "geo_vic";
  }
  return "?";
}

int RelevanceJudgment::get(Channel c) const {
  switch (c) {
    case Channel::sem: return sem;
    case Channel::geo_aus: return geo_aus;
    case Channel::geo_vic: return geo_vic;
  }
  return 0;
}

void Judgments::add(RelevanceJudgment j) {
  const auto where = "judgment (" + j.query_id + ", " + j.item_id + ")";
  for (int v : {j.sem, j.geo_aus, j.geo_vic}) {
    if (v != 0 && v != 1) throw Error(ErrorCode::InvalidJudgment, where + " has a non-binary value");
  }
  if (j.geo_vic && !j.geo_aus) {
    throw Error(ErrorCode::InvalidJudgment, where + " has geo_vic without geo_aus");
  }
  auto key = std::make_pair(j.query_id, j.item_id);
  const auto [it, inserted] = by_key_.try_emplace(std::move(key), j);
  if (!inserted && (it->second.sem != j.sem || it->second.geo_aus != j.geo_aus ||
                    it->second.geo_vic != j.geo_vic)) {
    throw Error(ErrorCode::InvalidJudgment, where + " is given twice with different values");
  }
}

const RelevanceJudgment* Judgments::find(std::string_view query_id, std::string_view item_id) const {
  const auto it = by_key_.find(std::make_pair(std::string(query_id), std::string(item_id)));
  return it == by_key_.end() ? nullptr : &it->second;
}

std::size_t Judgments::relevant_count(std::string_view query_id, Channel c) const {
  std::size_t n = 0;
  for (auto it = by_key_.lower_bound(std::make_pair(std::string(query_id), std::string()));
       it != by_key_.end() && it->first.first == query_id; ++it) {
    n += it->second.get(c) ? 1 : 0;
  }
  return n;
}

namespace {

int binary(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
  if (v.is_number_integer()) return v.get<int>();
  throw Error(ErrorCode::InvalidJudgment, where + ": relevance must be 0/1 or a boolean");
}

template <typename F>
void for_each_record(std::istream& in, F&& f) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(json::parse(line), n);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": " + e.what());
    }
  }
}

}  // namespace

Judgments read_judgments(std::istream& in) {
  Judgments out;
  for_each_record(in, [&](const json& j, std::size_t line) {
    const auto where = "line " + std::to_string(line);
    RelevanceJudgment r;
    r.query_id = j.at("query_id").get<std::string>();
    r.item_id = j.at("item_id").get<std::string>();
    r.sem = binary(j.at("sem"), where);
    r.geo_aus = binary(j.at("geo_aus"), where);
    r.geo_vic = binary(j.at("geo_vic"), where);
    out.add(std::move(r));
  });
  return out;
}

std::vector<QueryMeta> read_meta(std::istream& in) {
  std::vector<QueryMeta> out;
  std::set<std::string> seen;
  for_each_record(in, [&](const json& j, std::size_t line) {
    QueryMeta m;
    m.query_id = j.at("query_id").get<std::string>();
    m.kg_extracted = j.at("kg_extracted").get<bool>();
    m.origin_mentioned = j.at("origin_mentioned").get<bool>();
    const auto where = "line " + std::to_string(line) + " (" + m.query_id + ")";
    if (m.origin_mentioned && !m.kg_extracted) {
      throw Error(ErrorCode::InvalidJudgment, where + ": origin mentioned without an extracted graph");
    }
    if (!seen.insert(m.query_id).second) {
      throw Error(ErrorCode::InvalidJudgment, where + ": duplicate query id");
    }
    out.push_back(std::move(m));
  });
  return out;
}

std::vector<Ranking> read_rankings(std::istream& in) {
  std::vector<Ranking> out;
  for_each_record(in, [&](const json& j, std::size_t) {
    Ranking r;
    r.query_id = j.at("query_id").get<std::string>();
    r.items = j.at("items").get<std::vector<std::string>>();
    out.push_back(std::move(r));
  });
  return out;
}

double MetricsReport::extraction_rate() const {
  return n == 0 ? 0.0 : static_cast<double>(n_extracted) / static_cast<double>(n);
}

double MetricsReport::searcher_hit_ratio() const {
  return n == 0 ? 0.0 : static_cast<double>(n_star) / static_cast<double>(n);
}

MetricsReport aggregate(const Judgments& judgments, const std::vector<Ranking>& rankings,
                        const std::vector<QueryMeta>& meta, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  std::map<std::string, const Ranking*, std::less<>> by_query;
  for (const auto& r : rankings) {
    if (!by_query.emplace(r.query_id, &r).second) {
      throw Error(ErrorCode::InvalidArgument, "two rankings for query " + r.query_id);
    }
  }
  std::set<std::string, std::less<>> known;
  for (const auto& m : meta) known.insert(m.query_id);
  for (const auto& r : rankings) {
    if (!known.contains(r.query_id)) {
      throw Error(ErrorCode::InvalidArgument, "ranking for query " + r.query_id + " has no meta entry");
    }
  }

  MetricsReport rep;
  rep.k = k;
  rep.n = meta.size();
  for (const auto c : kChannels) {
    rep.all[c];
    rep.starred[c];
  }
  for (const auto& m : meta) {
    rep.n_extracted += m.kg_extracted ? 1 : 0;
    rep.n_star += m.origin_mentioned ? 1 : 0;
    const auto it = by_query.find(m.query_id);
    if (it == by_query.end()) continue;
    const auto& items = it->second->items;
    std::vector<const RelevanceJudgment*> judged;
    for (std::size_t i = 0; i < std::min(k, items.size()); ++i) {
      const auto* j = judgments.find(m.query_id, items[i]);
      if (!j) {
        throw Error(ErrorCode::MissingJudgment,
                    "no judgment for query " + m.query_id + ", item " + items[i]);
      }
      judged.push_back(j);
    }
    for (const auto c : kChannels) {
      std::vector<int> rels;
      for (const auto* j : judged) rels.push_back(j->get(c));
      const auto total = judgments.relevant_count(m.query_id, c);
      MetricValues v{hr_at_k(rels, k),        mrr_at_k(rels, k),
                     ndcg_at_k(rels, k, total), precision_at_k(rels, k),
                     precision_at_k(rels, k), average_precision_at_k(rels, k, total)};
      auto add = [&](MetricValues& acc) {
        acc.hr += v.hr;
        acc.mrr += v.mrr;
        acc.ndcg += v.ndcg;
        acc.precision += v.precision;
        acc.map += v.map;
        acc.classical_map += v.classical_map;
      };
      add(rep.all[c]);
      if (m.origin_mentioned) add(rep.starred[c]);
    }
  }
  auto finish = [](std::map<Channel, MetricValues>& table, std::size_t n) {
    if (n == 0) return;
    const auto d = static_cast<double>(n);
    for (auto& [_, v] : table) {
      v.hr /= d;
      v.mrr /= d;
      v.ndcg /= d;
      v.precision /= d;
      v.map /= d;
      v.classical_map /= d;
    }
  };
  finish(rep.all, rep.n);
  finish(rep.starred, rep.n_star);
  return rep;
}

std::optional<double> delta_hr(double hr_current, double hr_previous) {
  if (hr_previous == 0.0) return std::nullopt;
  return (hr_current - hr_previous) / hr_previous;
}

namespace {

json values_json(const MetricValues& v) {
  return {{"hr", v.hr},   {"mrr", v.mrr}, {"ndcg", v.ndcg}, {"precision", v.precision},
          {"map", v.map}, {"classical_map", v.classical_map}};
}

}  // namespace

void write_report_json(std::ostream& out, const MetricsReport& r) {
  json j = {{"k", r.k},
            {"n", r.n},
            {"n_star", r.n_star},
            {"n_extracted", r.n_extracted},
            {"extraction_rate", r.extraction_rate()},
            {"searcher_hit_ratio", r.searcher_hit_ratio()},
            {"all", json::object()},
            {"starred", json::object()}};
  for (const auto& [c, v] : r.all) j["all"][std::string(to_string(c))] = values_json(v);
  for (const auto& [c, v] : r.starred) j["starred"][std::string(to_string(c))] = values_json(v);
  out << j.dump(2) << '\n';
}

void write_report_tsv(std::ostream& out, const MetricsReport& r) {
  out << "subset\tchannel\tk\tcount\thr\tmrr\tndcg\tprecision\tmap\tclassical_map\n";
  auto rows = [&](std::string_view subset, const std::map<Channel, MetricValues>& t, std::size_t n) {
    for (const auto& [c, v] : t) {
      out << subset << '\t' << to_string(c) << '\t' << r.k << '\t' << n << std::fixed
          << std::setprecision(6) << '\t' << v.hr << '\t' << v.mrr << '\t' << v.ndcg << '\t'
          << v.precision << '\t' << v.map << '\t' << v.classical_map << '\n';
      out.unsetf(std::ios::floatfield);
    }
  };
  rows("all", r.all, r.n);
  rows("starred", r.starred, r.n_star);
}

void write_plot_data(std::ostream& out, const Judgments& judgments,
                     const std::vector<Ranking>& rankings, const std::vector<QueryMeta>& meta,
                     std::size_t k) {
  std::map<std::string, const Ranking*, std::less<>> by_query;
  for (const auto& r : rankings) by_query.emplace(r.query_id, &r);
  out << "query_id\tstarred\tchannel";
  for (std::size_t i = 1; i <= k; ++i) out << "\tr" << i;
  out << '\n';
  for (const auto& m : meta) {
    const auto it = by_query.find(m.query_id);
    for (const auto c : kChannels) {
      out << m.query_id << '\t' << (m.origin_mentioned ? 1 : 0) << '\t' << to_string(c);
      for (std::size_t i = 0; i < k; ++i) {
        out << '\t';
        if (it == by_query.end() || i >= it->second->items.size()) {
          out << '.';
          continue;
        }
        const auto* j = judgments.find(m.query_id, it->second->items[i]);
        if (!j) {
          throw Error(ErrorCode::MissingJudgment,
                      "no judgment for query " + m.query_id + ", item " + it->second->items[i]);
        }
        out << j->get(c);
      }
      out << '\n';
    }
  }
}

}  // namespace placeorigin::eval
