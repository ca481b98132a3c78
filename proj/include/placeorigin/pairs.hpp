#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "placeorigin/geo.hpp"

namespace placeorigin::pairs {

enum class Label { positive, negative };
enum class Dataset { country, city, qald9_rdf };

std::string_view to_string(Label l) noexcept;
std::string_view to_string(Dataset d) noexcept;

struct QAPair {
  std::string question;
  std::string answer;
  Label label = Label::positive;
  Dataset dataset = Dataset::country;
  std::uint64_t seed = 0;
  /// Position of a negative in its question's draw sequence; absent for
  /// positives.
  std::optional<std::uint64_t> draw;
  /// Set on negatives of a question whose pool was smaller than requested.
  bool ratio_shortfall = false;
};

struct PairStats {
  std::size_t questions = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t shortfall_questions = 0;
};

PairStats summarize(const std::vector<QAPair>& pairs);

// Templates. `{}` marks a slot.
inline constexpr std::string_view kCountryQuestion =
    "Give a country that shares a border with {}.";
inline constexpr std::string_view kCountryAnswer = "{} shares a border with {}.";
inline constexpr std::string_view kCityQuestion = "Give a city near {} in {}.";
inline constexpr std::string_view kCityAnswer =
    "{} in {} is a neighbor of {} in {}.";

std::string render(std::string_view pattern, const std::vector<std::string>& slots);

/// Recovers slot values from a rendered template. Returns nullopt when `s`
/// cannot be produced by `pattern`. Ambiguous splits resolve to the first
/// (shortest-leading-slot) match.
std::optional<std::vector<std::string>> match_template(std::string_view pattern,
                                                       std::string_view s);

/// One positive per directed border edge; per question (a country with at
/// least one border) `neg_per_question` negatives drawn without replacement
/// from the non-neighbours. A short pool yields every available negative,
/// flagged with ratio_shortfall.
std::vector<QAPair> gen_country_pairs(const std::vector<geo::CountryNode>& nodes,
                                      const geo::SpatialGraph& g,
                                      std::size_t neg_per_question,
                                      std::uint64_t seed);

struct CityPairOptions {
  /// Negatives per question are at most max_neg_ratio x that question's
  /// positives.
  double max_neg_ratio = 5.0;
  /// true: a positive for both (i, j) and (j, i); false: one per edge, asked
  /// from the lower-index city.
  bool directed = true;
  /// Optional absolute cap on negatives per question.
  std::optional<std::size_t> max_neg_per_question;
};

/// `country_names` maps ISO codes to display names; unknown codes fall back
/// to the code itself.
std::vector<QAPair> gen_city_pairs(const std::vector<geo::CityNode>& nodes,
                                   const geo::SpatialGraph& g,
                                   const std::map<std::string, std::string>& country_names,
                                   const CityPairOptions& options,
                                   std::uint64_t seed);

void write_ndjson(std::ostream& out, const std::vector<QAPair>& pairs);

}  // namespace placeorigin::pairs
