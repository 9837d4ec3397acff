#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cattle::geo {

inline constexpr double kEarthRadiusMiles = 3958.7613;

struct CountyCentroid {
  std::string county_fips;
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees
};

/// Discrete county-to-county distance ranges. Edges in miles, half-open:
/// d0 [0,10), d100 [10,100), d200 [100,200), d500 [200,500),
/// d1000 [500,1000), too_far [1000,inf).
enum class DistanceBin : int { d0, d100, d200, d500, d1000, too_far };

inline constexpr int kReachableBins = 5;
inline constexpr int kDistanceBins = 6;

inline constexpr std::array<DistanceBin, kReachableBins> kReachable = {
    DistanceBin::d0, DistanceBin::d100, DistanceBin::d200, DistanceBin::d500, DistanceBin::d1000};

constexpr int idx(DistanceBin b) { return static_cast<int>(b); }

std::string_view token(DistanceBin b);
DistanceBin parse_distance_bin(std::string_view s);

/// Great-circle distance on a sphere of radius kEarthRadiusMiles.
double distance_miles(const CountyCentroid& a, const CountyCentroid& b);

DistanceBin bin_of_distance(double miles);

/// Bin of a county pair; a county paired with itself is always d0.
DistanceBin classify(const CountyCentroid& a, const CountyCentroid& b);

/// Pairwise bins for a fixed county list, with per-county bin populations.
class DistanceClassifier {
 public:
  DistanceClassifier() = default;
  explicit DistanceClassifier(std::vector<CountyCentroid> centroids);

  int size() const { return static_cast<int>(centroids_.size()); }
  DistanceBin bin(int from, int to) const { return bins_[static_cast<std::size_t>(from) * size() + to]; }

  /// Number of counties c2 with bin(c, c2) == b (c itself counts toward d0).
  int counties_in_bin(int c, DistanceBin b) const {
    return counts_[static_cast<std::size_t>(c) * kDistanceBins + idx(b)];
  }

  /// Ordered pairs (c1, c2) with bin(c1, c2) == b.
  long long pairs_in_bin(DistanceBin b) const;

  const std::vector<CountyCentroid>& centroids() const { return centroids_; }

  /// Restricts to `fips` in that order; throws std::runtime_error for unknown codes.
  DistanceClassifier subset(std::span<const std::string> fips) const;

 private:
  std::vector<CountyCentroid> centroids_;
  std::vector<DistanceBin> bins_;
  std::vector<int> counts_;
};

/// Reads `centroids.csv` (county_fips,lat,lon) and checks coordinate ranges.
std::vector<CountyCentroid> load_centroids(const std::filesystem::path& path);
void write_centroids(const std::filesystem::path& path, std::span<const CountyCentroid> centroids);

}  // namespace cattle::geo
