#include "placeorigin/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_set>

#include <json.hpp>

#include "placeorigin/error.hpp"
#include "placeorigin/rng.hpp"

namespace placeorigin::pairs {

using nlohmann::json;

std::string_view to_string(Label l) noexcept {
  return l == Label::positive ? "positive" : "negative";
}

std::string_view to_string(Dataset d) noexcept {
  switch (d) {
    case Dataset::country: return "country";
    case Dataset::city: return "city";
    case Dataset::qald9_rdf: return "qald9_rdf";
  }
  return "country";
}

PairStats summarize(const std::vector<QAPair>& pairs) {
  PairStats s;
  std::unordered_set<std::string> questions;
  std::unordered_set<std::string> short_questions;
  for (const auto& p : pairs) {
    questions.insert(p.question);
    if (p.label == Label::positive) {
      ++s.positives;
    } else {
      ++s.negatives;
    }
    if (p.ratio_shortfall) short_questions.insert(p.question);
  }
  s.questions = questions.size();
  s.shortfall_questions = short_questions.size();
  return s;
}

std::string render(std::string_view pattern, const std::vector<std::string>& slots) {
  std::string out;
  std::size_t slot = 0;
  std::size_t pos = 0;
  for (;;) {
    const auto hole = pattern.find("{}", pos);
    if (hole == std::string_view::npos) break;
    out.append(pattern.substr(pos, hole - pos));
    out.append(slots.at(slot++));
    pos = hole + 2;
  }
  out.append(pattern.substr(pos));
  if (slot != slots.size()) {
    throw Error(ErrorCode::InvalidArgument, "template slot count mismatch");
  }
  return out;
}

std::optional<std::vector<std::string>> match_template(std::string_view pattern,
                                                       std::string_view s) {
  std::vector<std::string_view> literals;
  std::size_t pos = 0;
  for (;;) {
    const auto hole = pattern.find("{}", pos);
    if (hole == std::string_view::npos) {
      literals.push_back(pattern.substr(pos));
      break;
    }
    literals.push_back(pattern.substr(pos, hole - pos));
    pos = hole + 2;
  }
  const std::size_t n_slots = literals.size() - 1;
  if (!s.starts_with(literals.front())) return std::nullopt;

  std::vector<std::string> slots(n_slots);
  // Backtracking over the placement of each literal that follows a slot.
  std::function<bool(std::size_t, std::size_t)> place = [&](std::size_t k,
                                                            std::size_t at) -> bool {
    if (k == n_slots) return at == s.size();
    const auto lit = literals[k + 1];
    const bool last = k + 1 == n_slots;
    std::size_t search = at + 1;  // slots are non-empty
    while (search <= s.size()) {
      std::size_t found;
      if (last) {
        if (s.size() < lit.size() || s.size() - lit.size() < search) return false;
        found = s.size() - lit.size();
        if (s.substr(found) != lit) return false;
      } else {
        found = s.find(lit, search);
        if (found == std::string_view::npos) return false;
      }
      slots[k] = std::string(s.substr(at, found - at));
      if (place(k + 1, found + lit.size())) return true;
      if (last) return false;
      search = found + 1;
    }
    return false;
  };
  if (!place(0, literals.front().size())) return std::nullopt;
  return slots;
}

namespace {

/// Uniform draw of `count` distinct indices in [0, n) outside `excluded`
/// (sorted). Falls back to an explicit pool when exclusions are dense.
std::vector<std::size_t> sample_excluding(std::size_t n,
                                          const std::vector<std::size_t>& excluded,
                                          std::size_t count, Rng& rng) {
  const std::size_t pool_size = n - excluded.size();
  count = std::min(count, pool_size);
  std::vector<std::size_t> out;
  if (count == 0) return out;
  if (count * 4 > pool_size) {
    std::vector<std::size_t> pool;
    pool.reserve(pool_size);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::binary_search(excluded.begin(), excluded.end(), i)) pool.push_back(i);
    }
    return sample_without_replacement<std::size_t>(pool, count, rng);
  }
  std::unordered_set<std::size_t> taken;
  out.reserve(count);
  while (out.size() < count) {
    const auto c = static_cast<std::size_t>(rng.below(n));
    if (std::binary_search(excluded.begin(), excluded.end(), c)) continue;
    if (!taken.insert(c).second) continue;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::vector<QAPair> gen_country_pairs(const std::vector<geo::CountryNode>& nodes,
                                      const geo::SpatialGraph& g,
                                      std::size_t neg_per_question,
                                      std::uint64_t seed) {
  if (g.node_count != nodes.size()) {
    throw Error(ErrorCode::InvalidArgument, "graph does not match node list");
  }
  const auto adj = g.adjacency();
  std::vector<QAPair> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (adj[i].empty()) continue;
    const auto question = render(kCountryQuestion, {nodes[i].name});
    for (std::size_t j : adj[i]) {
      out.push_back(QAPair{question,
                           render(kCountryAnswer, {nodes[j].name, nodes[i].name}),
                           Label::positive, Dataset::country, seed, std::nullopt});
    }
    auto excluded = adj[i];
    excluded.insert(std::lower_bound(excluded.begin(), excluded.end(), i), i);
    Rng rng = Rng::split(seed, i);
    const auto picks = sample_excluding(nodes.size(), excluded, neg_per_question, rng);
    const bool shortfall = picks.size() < neg_per_question;
    for (std::size_t d = 0; d < picks.size(); ++d) {
      out.push_back(QAPair{question,
                           render(kCountryAnswer, {nodes[picks[d]].name, nodes[i].name}),
                           Label::negative, Dataset::country, seed, d, shortfall});
    }
  }
  return out;
}

std::vector<QAPair> gen_city_pairs(const std::vector<geo::CityNode>& nodes,
                                   const geo::SpatialGraph& g,
                                   const std::map<std::string, std::string>& country_names,
                                   const CityPairOptions& options,
                                   std::uint64_t seed) {
  if (g.node_count != nodes.size()) {
    throw Error(ErrorCode::InvalidArgument, "graph does not match node list");
  }
  if (!(options.max_neg_ratio >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "negative ratio must be >= 0");
  }
  auto country = [&](const geo::CityNode& c) -> const std::string& {
    const auto it = country_names.find(c.country_code);
    return it == country_names.end() ? c.country_code : it->second;
  };

  const auto adj = g.adjacency();
  std::vector<QAPair> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::vector<std::size_t> answers;
    for (std::size_t j : adj[i]) {
      if (options.directed || j > i) answers.push_back(j);
    }
    if (answers.empty()) continue;
    const auto& ci = nodes[i];
    const auto question = render(kCityQuestion, {ci.name, country(ci)});
    for (std::size_t j : answers) {
      const auto& cj = nodes[j];
      out.push_back(QAPair{question,
                           render(kCityAnswer, {cj.name, country(cj), ci.name, country(ci)}),
                           Label::positive, Dataset::city, seed, std::nullopt});
    }

    auto wanted = static_cast<std::size_t>(
        std::floor(options.max_neg_ratio * static_cast<double>(answers.size())));
    if (options.max_neg_per_question) {
      wanted = std::min(wanted, *options.max_neg_per_question);
    }
    auto excluded = adj[i];
    excluded.insert(std::lower_bound(excluded.begin(), excluded.end(), i), i);
    Rng rng = Rng::split(seed, i);
    const auto picks = sample_excluding(nodes.size(), excluded, wanted, rng);
    const bool shortfall = picks.size() < wanted;
    for (std::size_t d = 0; d < picks.size(); ++d) {
      const auto& ck = nodes[picks[d]];
      out.push_back(QAPair{question,
                           render(kCityAnswer, {ck.name, country(ck), ci.name, country(ci)}),
                           Label::negative, Dataset::city, seed, d, shortfall});
    }
  }
  return out;
}

void write_ndjson(std::ostream& out, const std::vector<QAPair>& pairs) {
  for (const auto& p : pairs) {
    json rec{{"dataset", to_string(p.dataset)},
             {"question", p.question},
             {"answer", p.answer},
             {"label", to_string(p.label)},
             {"seed", p.seed}};
    rec["draw"] = p.draw ? json(*p.draw) : json(nullptr);
    if (p.ratio_shortfall) rec["ratio_shortfall"] = true;
    out << rec.dump() << '\n';
  }
}

}  // namespace placeorigin::pairs
