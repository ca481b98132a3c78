#include "placeorigin/geo.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include <json.hpp>

#include "placeorigin/error.hpp"
#include "placeorigin/text.hpp"

namespace placeorigin::geo {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double sq(double x) { return x * x; }

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = text::trim(s);
  if (s.empty()) return std::nullopt;
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::array<double, 3> unit_vector(double lat, double lon) {
  const double phi = lat * kDeg;
  const double lambda = lon * kDeg;
  return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda),
          std::sin(phi)};
}

void normalise(SpatialGraph& g) {
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
}

}  // namespace

bool valid(LatLon p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

double haversine_km(LatLon a, LatLon b) {
  if (!valid(a) || !valid(b)) {
    throw Error(ErrorCode::BadCoordinate, "coordinate out of range");
  }
  const double phi1 = a.lat * kDeg;
  const double phi2 = b.lat * kDeg;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.lon - a.lon) * kDeg;
  const double cc = std::cos(phi1) * std::cos(phi2);
  // hav(theta) and hav(pi - theta), both as sums of non-negative terms.
  const double h = sq(std::sin(dphi / 2.0)) + cc * sq(std::sin(dlambda / 2.0));
  const double hc = sq(std::sin((phi1 + phi2) / 2.0)) + cc * sq(std::cos(dlambda / 2.0));
  return 2.0 * std::atan2(std::sqrt(h), std::sqrt(hc)) * kEarthRadiusKm;
}

std::vector<std::vector<std::size_t>> SpatialGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(node_count);
  for (const auto& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

std::vector<CountryNode> parse_country_table(std::istream& in) {
  std::vector<CountryNode> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 19) {
      throw RowError(line_no, "expected 19 columns, got " + std::to_string(cols.size()));
    }
    CountryNode node;
    node.code = std::string(text::trim(cols[0]));
    node.name = std::string(text::trim(cols[4]));
    if (node.code.empty()) throw RowError(line_no, "empty ISO code");
    for (auto n : text::split(cols[17], ',')) {
      const auto code = text::trim(n);
      if (!code.empty()) node.neighbor_codes.emplace_back(code);
    }
    out.push_back(std::move(node));
  }
  return out;
}

std::vector<CityNode> parse_city_table(std::istream& in, std::int64_t n_hab) {
  std::vector<CityNode> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 19) {
      throw RowError(line_no, "expected 19 columns, got " + std::to_string(cols.size()));
    }
    const auto id = parse_number<std::int64_t>(cols[0]);
    const auto lat = parse_number<double>(cols[4]);
    const auto lon = parse_number<double>(cols[5]);
    const auto pop = cols[14].empty() ? std::optional<std::int64_t>(0)
                                      : parse_number<std::int64_t>(cols[14]);
    if (!id || !lat || !lon || !pop || *pop < 0) {
      throw RowError(line_no, "non-numeric id, coordinate or population");
    }
    if (!valid({*lat, *lon})) {
      throw Error(ErrorCode::BadCoordinate,
                  "row " + std::to_string(line_no) + ": coordinate out of range");
    }
    if (*pop < n_hab) continue;
    out.push_back(CityNode{*id, std::string(cols[1]), std::string(cols[8]), *lat,
                           *lon, *pop});
  }
  return out;
}

SpatialGraph build_country_graph(const std::vector<CountryNode>& nodes) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].code, i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate country code " + nodes[i].code);
    }
  }
  SpatialGraph g;
  g.node_count = nodes.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& code : nodes[i].neighbor_codes) {
      const auto it = index.find(code);
      if (it == index.end()) {
        ++g.unknown_neighbors;
        continue;
      }
      const std::size_t j = it->second;
      if (j == i) continue;
      g.edges.push_back(Edge{std::min(i, j), std::max(i, j), std::nullopt});
    }
  }
  normalise(g);
  return g;
}

SpatialGraph build_city_graph_brute_force(const std::vector<CityNode>& nodes,
                                          double d_city_km) {
  if (!(d_city_km > 0.0)) throw Error(ErrorCode::InvalidArgument, "d_city must be > 0");
  SpatialGraph g;
  g.node_count = nodes.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const double d = haversine_km({nodes[i].lat, nodes[i].lon},
                                    {nodes[j].lat, nodes[j].lon});
      if (d <= d_city_km) g.edges.push_back(Edge{i, j, d});
    }
  }
  return g;
}

SpatialGraph build_city_graph(const std::vector<CityNode>& nodes,
                              double d_city_km) {
  if (!(d_city_km > 0.0)) throw Error(ErrorCode::InvalidArgument, "d_city must be > 0");
  SpatialGraph g;
  g.node_count = nodes.size();
  if (nodes.empty()) return g;

  const double angle = d_city_km / kEarthRadiusKm;
  if (angle >= std::numbers::pi) return build_city_graph_brute_force(nodes, d_city_km);
  // Cell side a hair above the chord so boundary pairs never fall two cells apart.
  const double cell = 2.0 * std::sin(angle / 2.0) * (1.0 + 1e-9) + 1e-12;

  using Key = std::uint64_t;
  auto pack = [](std::int64_t x, std::int64_t y, std::int64_t z) -> Key {
    constexpr std::int64_t bias = 1 << 20;
    return (static_cast<Key>(x + bias) << 42) | (static_cast<Key>(y + bias) << 21) |
           static_cast<Key>(z + bias);
  };

  std::vector<std::array<std::int64_t, 3>> cell_of(nodes.size());
  std::unordered_map<Key, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!valid({nodes[i].lat, nodes[i].lon})) {
      throw Error(ErrorCode::BadCoordinate, "city " + nodes[i].name);
    }
    const auto v = unit_vector(nodes[i].lat, nodes[i].lon);
    cell_of[i] = {static_cast<std::int64_t>(std::floor(v[0] / cell)),
                  static_cast<std::int64_t>(std::floor(v[1] / cell)),
                  static_cast<std::int64_t>(std::floor(v[2] / cell))};
    grid[pack(cell_of[i][0], cell_of[i][1], cell_of[i][2])].push_back(i);
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& c = cell_of[i];
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(pack(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == grid.end()) continue;
          for (std::size_t j : it->second) {
            if (j <= i) continue;
            const double d = haversine_km({nodes[i].lat, nodes[i].lon},
                                          {nodes[j].lat, nodes[j].lon});
            if (d <= d_city_km) g.edges.push_back(Edge{i, j, d});
          }
        }
      }
    }
  }
  normalise(g);
  return g;
}

namespace {

json id_json(const std::string& s) { return s; }
json id_json(std::int64_t v) { return v; }

}  // namespace

template <typename Id>
void write_edges(std::ostream& out, const SpatialGraph& g,
                 const std::vector<Id>& ids) {
  for (const auto& e : g.edges) {
    json rec{{"i", id_json(ids.at(e.i))}, {"j", id_json(ids.at(e.j))}};
    if (e.distance_km) rec["distance_km"] = *e.distance_km;
    out << rec.dump() << '\n';
  }
}

template void write_edges<std::string>(std::ostream&, const SpatialGraph&,
                                       const std::vector<std::string>&);
template void write_edges<std::int64_t>(std::ostream&, const SpatialGraph&,
                                        const std::vector<std::int64_t>&);

void write_country_nodes(std::ostream& out, const std::vector<CountryNode>& nodes) {
  for (const auto& n : nodes) {
    out << json{{"code", n.code}, {"name", n.name}, {"neighbours", n.neighbor_codes}}.dump()
        << '\n';
  }
}

void write_city_nodes(std::ostream& out, const std::vector<CityNode>& nodes) {
  for (const auto& n : nodes) {
    out << json{{"geoname_id", n.geoname_id}, {"name", n.name},
                {"country_code", n.country_code}, {"lat", n.lat},
                {"lon", n.lon}, {"population", n.population}}
               .dump()
        << '\n';
  }
}

namespace {

template <typename F>
void for_each_record(std::istream& in, F&& f) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw RowError(line_no, e.what());
    }
  }
}

}  // namespace

std::vector<CountryNode> read_country_nodes(std::istream& in) {
  std::vector<CountryNode> out;
  for_each_record(in, [&](const json& j) {
    out.push_back(CountryNode{j.at("code").get<std::string>(),
                              j.at("name").get<std::string>(),
                              j.at("neighbours").get<std::vector<std::string>>()});
  });
  return out;
}

std::vector<CityNode> read_city_nodes(std::istream& in) {
  std::vector<CityNode> out;
  for_each_record(in, [&](const json& j) {
    out.push_back(CityNode{j.at("geoname_id").get<std::int64_t>(),
                           j.at("name").get<std::string>(),
                           j.at("country_code").get<std::string>(),
                           j.at("lat").get<double>(), j.at("lon").get<double>(),
                           j.at("population").get<std::int64_t>()});
  });
  return out;
}

SpatialGraph read_country_edges(std::istream& in,
                                const std::vector<CountryNode>& nodes) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].code, i);
  SpatialGraph g;
  g.node_count = nodes.size();
  for_each_record(in, [&](const json& j) {
    const auto a = index.at(j.at("i").get<std::string>());
    const auto b = index.at(j.at("j").get<std::string>());
    g.edges.push_back(Edge{std::min(a, b), std::max(a, b), std::nullopt});
  });
  normalise(g);
  return g;
}

SpatialGraph read_city_edges(std::istream& in, const std::vector<CityNode>& nodes) {
  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].geoname_id, i);
  SpatialGraph g;
  g.node_count = nodes.size();
  for_each_record(in, [&](const json& j) {
    const auto a = index.at(j.at("i").get<std::int64_t>());
    const auto b = index.at(j.at("j").get<std::int64_t>());
    std::optional<double> d;
    if (j.contains("distance_km")) d = j.at("distance_km").get<double>();
    g.edges.push_back(Edge{std::min(a, b), std::max(a, b), d});
  });
  normalise(g);
  return g;
}

}  // namespace placeorigin::geo
