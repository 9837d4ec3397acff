#pragma once

// Global invasion thresholds for movement-coupled subpopulations.
//
// Default branching form on a directed network without degree correlations:
//   R*(p) = [(R0-1)^2 / R0^2] * [N p / (mu + delta)] * [<k_in k_out>/<k_out> - 1]
// and p_c solves R*(p_c) = 1. The restricted threshold p_c^TS replaces k_out
// in the numerator moment by the out-degree into Preslaughter subpopulations.

#include <filesystem>
#include <span>
#include <string>

#include "cattle/geo.hpp"
#include "cattle/impute.hpp"
#include "cattle/movement.hpp"
#include "cattle/sim.hpp"

namespace cattle::epi {

class EpiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpidemicParams {
  double r0 = 1.2;
  double mu = 1.0;      // recovery rate, per week
  double delta = 0.0;   // average death rate, per week
  double n_bar = 0.0;   // average subpopulation size, head

  double beta() const { return mu * r0; }
};

/// Throws EpiError unless R0 > 1, mu, delta >= 0 and n_bar > 0.
void check_params(const EpidemicParams& e);

/// <k_in k_out>/<k_out>; throws EpiError when <k_out> is 0.
double moment_ratio(double kin_kout_mean, double k_out_mean);

/// R*(p) for a moment ratio.
double reproductive_number(const EpidemicParams& e, double p, double ratio);

/// Closed-form root of R*(p) = 1. Throws EpiError when the moment ratio is
/// at most 1 (no finite threshold).
double critical_rate(const EpidemicParams& e, double ratio);

/// Threshold of one weekly snapshot; `restricted` uses the Preslaughter-bound moments.
double critical_rate(const EpidemicParams& e, const sim::WeeklyNetwork& w, bool restricted);

/// delta as the population-weighted mean of dt + sl and n_bar as the mean
/// head of the occupied subpopulations, both over Beef and Dairy.
struct PopulationAverages {
  double delta = 0.0;
  double n_bar = 0.0;
};
PopulationAverages population_averages(const movement::MovementParameterSet& params,
                                       const impute::SubpopulationSet& subpops);

/// Population-weighted mean over Beef and Dairy subpopulations of the weekly
/// probability of leaving by live shipment.
double average_movement_rate(const movement::MovementParameterSet& params,
                             const impute::SubpopulationSet& subpops,
                             const geo::DistanceClassifier& geo);

struct Row {
  double average = 0.0;
  double min = 0.0;
  double max = 0.0;
  int weeks = 0;  // snapshots contributing to min/max
};

struct ThresholdReport {
  Row p_mean;
  Row p_c;
  Row p_c_ts;
  EpidemicParams params;
  int undefined_weeks = 0;     // snapshots without a finite p_c
  int undefined_ts_weeks = 0;  // snapshots without a finite p_c^TS

  double ratio() const { return p_mean.average / p_c.average; }
};

/// p_c and p_c^TS per weekly snapshot, averaged with their extremes. The <p>
/// average is `mean_p`; its min and max are the realized weekly outward
/// fractions. Throws EpiError when no snapshot yields a finite p_c.
ThresholdReport thresholds(const EpidemicParams& e, double mean_p,
                           std::span<const sim::WeeklyNetwork> weeks);

/// thresholds.csv: quantity,average,min,max with rows <p>, p_c, p_c_TS.
void write_thresholds(const std::filesystem::path& path, const ThresholdReport& r);

/// Reads the three rows of thresholds.csv back ("nan" for undefined values);
/// parameters and snapshot counts are not stored there.
ThresholdReport load_thresholds(const std::filesystem::path& path);
/// key=value echo of the parameters, the ratio and undefined snapshot counts.
void write_threshold_meta(const std::filesystem::path& path, const ThresholdReport& r);

}  // namespace cattle::epi
