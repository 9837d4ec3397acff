#pragma once

// Synthetic census datasets with known ground truth.
//
// Operations with random herd sizes are drawn per county and type, giving
// exactly consistent population cells and totals. True weekly rates come from
// a maximum-entropy program that keeps every subpopulation stationary with no
// discrepancy terms; shipment tables are the expected yearly flows under those
// rates, rounded to whole head. Cells with 1..threshold operations are then
// withheld.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cattle/census.hpp"
#include "cattle/geo.hpp"
#include "cattle/impute.hpp"
#include "cattle/movement.hpp"

namespace cattle::synth {

class SynthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SynthSolveError : public SynthError, public maxent::SolverFailure {
 public:
  SynthSolveError(const std::string& what, maxent::SolveStatus s)
      : SynthError(what), maxent::SolverFailure(s) {}
};

struct SynthConfig {
  int states = 3;
  int counties_per_state = 10;
  std::uint64_t seed = 42;
  /// Cells with between 1 and this many operations are withheld; 0 disables.
  int suppression_threshold = 2;
  /// Adds a remote county with no cattle whose reported shipments make the
  /// minimum discrepancy this fraction of all cattle.
  std::optional<double> perturbation;
  double county_spacing_miles = 60.0;
  double state_spacing_miles = 400.0;
  /// Cap on each movement probability of the truth program, as a share of
  /// the outward mass spread over the reachable destinations.
  double outward_target = 0.15;
};

void check_config(const SynthConfig& c);

struct GroundTruth {
  std::vector<StateCensus> census;  // fully disclosed
  std::vector<geo::CountyCentroid> centroids;
  impute::SubpopulationSet subpops;
  impute::ShipmentTotals shipments;
  movement::MovementParameterSet rates;
  /// Perturbation county and its reported yearly shipments, when present.
  std::string remote_county;
  std::int64_t remote_shipments = 0;
  long long suppressed_cells = 0;
};

struct SynthDataset {
  std::vector<StateCensus> census;  // with withheld cells
  GroundTruth truth;
  SynthConfig config;
};

SynthDataset generate(const SynthConfig& config);

/// Writes the census files, centroids.csv and ground_truth.json.
void write_dataset(const std::filesystem::path& dir, const SynthDataset& d);

/// Reads ground_truth.json (rates, true cells, mask and totals).
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// Feasible head interval of a cell from its operation count:
/// [ops·lower, ops·upper] with the open 500+ range capped by `cap`.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval cell_interval(const CensusCell& cell, SizeA s, std::int64_t cap);

}  // namespace cattle::synth
