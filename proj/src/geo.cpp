#include "cattle/geo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "cattle/csv.hpp"
#include "cattle/types.hpp"

namespace cattle::geo {

namespace {

constexpr std::array<std::string_view, kDistanceBins> kBinTokens = {"d0",   "d100",  "d200",
                                                                    "d500", "d1000", "too_far"};
constexpr std::array<double, kDistanceBins - 1> kUpperEdges = {10.0, 100.0, 200.0, 500.0, 1000.0};

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

std::string_view token(DistanceBin b) { return kBinTokens[idx(b)]; }

DistanceBin parse_distance_bin(std::string_view s) {
  for (int i = 0; i < kDistanceBins; ++i) {
    if (kBinTokens[i] == s) return static_cast<DistanceBin>(i);
  }
  throw ParseError("unknown distance bin '" + std::string(s) + "'");
}

double distance_miles(const CountyCentroid& a, const CountyCentroid& b) {
  const double lat1 = radians(a.latitude);
  const double lat2 = radians(b.latitude);
  const double dlat = lat2 - lat1;
  const double dlon = radians(b.longitude - a.longitude);
  const double s1 = std::sin(dlat / 2);
  const double s2 = std::sin(dlon / 2);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

DistanceBin bin_of_distance(double miles) {
  for (int i = 0; i < kDistanceBins - 1; ++i) {
    if (miles < kUpperEdges[i]) return static_cast<DistanceBin>(i);
  }
  return DistanceBin::too_far;
}

DistanceBin classify(const CountyCentroid& a, const CountyCentroid& b) {
  if (&a == &b || (!a.county_fips.empty() && a.county_fips == b.county_fips)) return DistanceBin::d0;
  return bin_of_distance(distance_miles(a, b));
}

DistanceClassifier::DistanceClassifier(std::vector<CountyCentroid> centroids)
    : centroids_(std::move(centroids)) {
  const auto n = static_cast<std::size_t>(centroids_.size());
  bins_.resize(n * n);
  counts_.assign(n * kDistanceBins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto b = i == j ? DistanceBin::d0 : classify(centroids_[i], centroids_[j]);
      bins_[i * n + j] = b;
      ++counts_[i * kDistanceBins + idx(b)];
    }
  }
}

long long DistanceClassifier::pairs_in_bin(DistanceBin b) const {
  long long total = 0;
  for (int c = 0; c < size(); ++c) total += counties_in_bin(c, b);
  return total;
}

DistanceClassifier DistanceClassifier::subset(std::span<const std::string> fips) const {
  std::unordered_map<std::string, const CountyCentroid*> by_fips;
  for (const auto& c : centroids_) by_fips.emplace(c.county_fips, &c);
  std::vector<CountyCentroid> picked;
  picked.reserve(fips.size());
  for (const auto& f : fips) {
    auto it = by_fips.find(f);
    if (it == by_fips.end()) throw std::runtime_error("no centroid for county " + f);
    picked.push_back(*it->second);
  }
  return DistanceClassifier(std::move(picked));
}

std::vector<CountyCentroid> load_centroids(const std::filesystem::path& path) {
  csv::Reader r(path);
  const int c_fips = r.column("county_fips");
  const int c_lat = r.column("lat");
  const int c_lon = r.column("lon");
  std::vector<CountyCentroid> out;
  while (r.next()) {
    CountyCentroid c{std::string(r.field(c_fips)), r.double_field(c_lat), r.double_field(c_lon)};
    if (std::abs(c.latitude) > 90.0 || std::abs(c.longitude) > 180.0) {
      r.fail("coordinates out of range");
    }
    out.push_back(std::move(c));
  }
  return out;
}

void write_centroids(const std::filesystem::path& path, std::span<const CountyCentroid> centroids) {
  std::ostringstream os;
  os << "county_fips,lat,lon\n";
  for (const auto& c : centroids) {
    os << c.county_fips << ',' << csv::format_fixed(c.latitude, 6) << ','
       << csv::format_fixed(c.longitude, 6) << '\n';
  }
  csv::write_file(path, os.str());
}

}  // namespace cattle::geo
