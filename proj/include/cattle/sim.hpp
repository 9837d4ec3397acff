#pragma once

// Stochastic weekly herd simulation driven by estimated movement parameters.
//
// Head counts are integers. Each week every subpopulation is split by one
// multinomial draw over {stay, each reachable destination subpopulation,
// slaughter, expiration}; births are a binomial draw on the starting count.
// The count sent from one subpopulation to one destination in one week is a
// single shipment event, and so is the week's slaughter draw.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cattle/geo.hpp"
#include "cattle/impute.hpp"
#include "cattle/movement.hpp"

namespace cattle::sim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How fractional imputed head counts become integer starting populations.
enum class Integerization { Round, Stochastic };

struct SimulationConfig {
  int years = 30;
  int weeks_per_year = 52;
  int replicates = 10;
  std::uint64_t seed = 1;
  Integerization integerization = Integerization::Round;
  /// Record weekly network snapshots of replicate 0.
  bool network = true;
  /// Allowed deviation of an outgoing distribution from 1.
  double row_sum_tolerance = 1e-6;
  /// Worker threads for replicates; 0 picks the hardware concurrency.
  int threads = 0;
};

void check_config(const SimulationConfig& c);

enum class Metric { AllMovements, Slaughter };
inline constexpr int kMetrics = 2;
std::string_view token(Metric m);

/// Mean of the per-sample yearly totals with a normal 99% interval.
struct BinStatistic {
  double mean = 0.0;
  double sd = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int samples = 0;
};

inline constexpr double kZ99 = 2.576;

/// mean ± kZ99·sd/√n over `samples` (sd is the n-1 sample deviation, 0 for n=1).
BinStatistic summarize(std::span<const double> samples);

struct ShipmentEvent {
  int replicate = 0;
  int week = 0;    // counted from 0 over the whole run
  int origin = 0;  // subpopulation index
  int dest = 0;    // subpopulation index, kSlaughter for slaughter
  std::int64_t head = 0;
};
inline constexpr int kSlaughter = -1;

using EventSink = std::function<void(const ShipmentEvent&)>;

/// Yearly totals per county, metric and Size_B, indexed (c·kMetrics + m)·kSizeB + j.
struct YearlyBins {
  int counties = 0;
  std::vector<double> head;

  explicit YearlyBins(int n = 0) : counties(n), head(static_cast<std::size_t>(n) * kMetrics * kSizeB, 0.0) {}
  double& at(int c, Metric m, SizeB j) { return head[(c * kMetrics + static_cast<int>(m)) * kSizeB + idx(j)]; }
  double at(int c, Metric m, SizeB j) const {
    return head[(c * kMetrics + static_cast<int>(m)) * kSizeB + idx(j)];
  }
  /// Adds one event: the head count goes to the Size_B bin of the event size.
  /// Slaughter events count toward both metrics, live events toward AllMovements.
  void add(const ShipmentEvent& e);
};

/// Bins an event stream (origin county = origin / kSubpopsPerCounty).
YearlyBins yearly_bins(int counties, std::span<const ShipmentEvent> events);

struct Edge {
  int from = 0;
  int to = 0;
};

/// Degrees of one directed snapshot. Self-loops are ignored and parallel
/// edges must already be merged. `ts_destination` marks nodes whose incoming
/// edges count toward the restricted out-degree k_out_ts.
struct DegreeStats {
  std::vector<int> k_in, k_out, k_out_ts;
  double k_in_mean = 0.0;
  double k_out_mean = 0.0;
  double kin_kout_mean = 0.0;
  double k_out_ts_mean = 0.0;
  double kin_kout_ts_mean = 0.0;
  long long edges = 0;
};

DegreeStats degree_statistics(int nodes, std::span<const Edge> edges,
                              std::span<const char> ts_destination = {});

/// One weekly snapshot of replicate 0.
struct WeeklyNetwork {
  int week = 0;
  double k_in_mean = 0.0;
  double k_out_mean = 0.0;
  double kin_kout_mean = 0.0;
  double k_out_ts_mean = 0.0;
  double kin_kout_ts_mean = 0.0;
  long long edges = 0;
  /// Live head shipped by Beef and Dairy subpopulations over their starting head.
  double outward_fraction = 0.0;
};

struct SimulationSummary {
  std::vector<std::string> counties;
  int replicates = 0;
  int years = 0;
  std::vector<BinStatistic> bins;  // county x metric x SizeB
  std::vector<WeeklyNetwork> network;
  /// Time-averaged per-node degrees of replicate 0.
  std::vector<double> node_k_in, node_k_out;
  double initial_head = 0.0;     // after integerization, replicate 0
  double final_head_mean = 0.0;  // over replicates
  /// Subpopulation-weeks where the weekly accounting identities failed.
  long long conservation_violations = 0;

  const BinStatistic& stat(int c, Metric m, SizeB j) const {
    return bins[(c * kMetrics + static_cast<int>(m)) * kSizeB + idx(j)];
  }
};

/// Throws SimulationError when an outgoing distribution does not sum to 1
/// or the parameter and population county lists differ.
void check_parameters(const movement::MovementParameterSet& params,
                      const impute::SubpopulationSet& subpops, const geo::DistanceClassifier& geo,
                      double tolerance);

/// Runs all replicates. With a sink every event is reported in replicate and
/// week order and the replicates run on one thread.
SimulationSummary simulate(const movement::MovementParameterSet& params,
                           const impute::SubpopulationSet& subpops,
                           const geo::DistanceClassifier& geo, const SimulationConfig& config,
                           const EventSink& sink = {});

/// sim_summary.csv: county,bin,metric,mean,ci_lo,ci_hi
void write_summary(const std::filesystem::path& path, const SimulationSummary& s);
/// network_stats.csv: week,k_in_mean,k_out_mean,kin_kout_mean followed by the
/// restricted moments, edge count and outward fraction.
void write_network(const std::filesystem::path& path, std::span<const WeeklyNetwork> weeks);
std::vector<WeeklyNetwork> load_network(const std::filesystem::path& path);

/// Reads sim_summary.csv back (sd and samples are not stored).
SimulationSummary load_summary(const std::filesystem::path& path);

}  // namespace cattle::sim
