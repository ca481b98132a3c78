#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace placeorigin::geo {

/// IUGG mean Earth radius.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct LatLon {
  double lat = 0.0;  ///< degrees, [-90, 90]
  double lon = 0.0;  ///< degrees, [-180, 180]
};

/// Great-circle distance on the sphere of radius kEarthRadiusKm. Uses the
/// haversine form with the complementary term computed directly, so it stays
/// accurate near antipodes. Throws Error(BadCoordinate).
double haversine_km(LatLon a, LatLon b);

bool valid(LatLon p) noexcept;

struct CountryNode {
  std::string code;
  std::string name;
  std::vector<std::string> neighbor_codes;
};

struct CityNode {
  std::int64_t geoname_id = 0;
  std::string name;
  std::string country_code;
  double lat = 0.0;
  double lon = 0.0;
  std::int64_t population = 0;
};

/// Undirected edge between node indices, stored with i < j.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  std::optional<double> distance_km;

  friend bool operator==(const Edge& a, const Edge& b) {
    return a.i == b.i && a.j == b.j;
  }
};

/// Nodes live with the caller (CountryNode or CityNode vectors); the graph
/// refers to them by index. Edges are sorted by (i, j) with no duplicates or
/// self-loops.
struct SpatialGraph {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  /// Neighbour declarations dropped because the code was not in the node set.
  std::size_t unknown_neighbors = 0;

  std::vector<std::vector<std::size_t>> adjacency() const;
};

/// GeoNames countryInfo layout: 19 tab-separated columns, '#' comment lines.
std::vector<CountryNode> parse_country_table(std::istream& in);

/// GeoNames geoname table layout (19 columns). Keeps rows whose population
/// is >= n_hab.
std::vector<CityNode> parse_city_table(std::istream& in, std::int64_t n_hab);

SpatialGraph build_country_graph(const std::vector<CountryNode>& nodes);

/// All unordered pairs within d_city_km. Candidates come from a 3-D grid over
/// unit vectors with cell side equal to the chord of d_city_km, so only
/// neighbouring cells are compared.
SpatialGraph build_city_graph(const std::vector<CityNode>& nodes,
                              double d_city_km);

/// Reference all-pairs construction, O(n^2).
SpatialGraph build_city_graph_brute_force(const std::vector<CityNode>& nodes,
                                          double d_city_km);

/// Newline-delimited edge records {"i":..,"j":..,"distance_km":..} using the
/// node identifiers given in `ids`.
template <typename Id>
void write_edges(std::ostream& out, const SpatialGraph& g,
                 const std::vector<Id>& ids);

void write_country_nodes(std::ostream& out, const std::vector<CountryNode>& nodes);
void write_city_nodes(std::ostream& out, const std::vector<CityNode>& nodes);
std::vector<CountryNode> read_country_nodes(std::istream& in);
std::vector<CityNode> read_city_nodes(std::istream& in);

/// Reads edge records written by write_edges, resolving identifiers against
/// `ids`. Edges are renormalised to i < j and sorted.
SpatialGraph read_country_edges(std::istream& in,
                                const std::vector<CountryNode>& nodes);
SpatialGraph read_city_edges(std::istream& in, const std::vector<CityNode>& nodes);

}  // namespace placeorigin::geo
