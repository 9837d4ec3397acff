#pragma once

// Publication-style tables rendered as CSV from stage outputs.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "cattle/epi.hpp"
#include "cattle/impute.hpp"
#include "cattle/movement.hpp"
#include "cattle/sim.hpp"

namespace cattle::report {

/// Header lines of the rendered tables.
inline constexpr std::string_view kCoverageHeader = "State,Count,Count %,Head,Head %";
inline constexpr std::string_view kMovementHeader = "source,destination,d0,d100,d200,d500,d1000";
inline constexpr std::string_view kThresholdHeader = "quantity,Average,Minimum,Maximum";
inline constexpr std::string_view kComparisonHeader = "bin,sim_mean,ci_lo,ci_hi,census_total";

/// One row per state.
void write_coverage_table(const std::filesystem::path& path, std::span<const impute::CoverageRow> rows);

/// Weekly movement probabilities times 1000 by distance bin, one row per
/// allowed subpopulation pair labelled like "D/z1_19". `only` keeps a single
/// (source type, destination type) block.
void write_movement_table(const std::filesystem::path& path, const movement::MovementParameterSet& m,
                          std::optional<std::pair<TypeB, TypeB>> only = std::nullopt);

/// <p>, p_c and p_c^TS over average, minimum and maximum.
void write_threshold_table(const std::filesystem::path& path, const epi::ThresholdReport& r);

/// Simulated yearly shipments per Size_B bin against the census totals of
/// one county and metric. `shipments` are the imputed shipment sections.
void write_county_comparison(const std::filesystem::path& path, const sim::SimulationSummary& s,
                             std::span<const impute::ImputedSection> shipments, const std::string& fips,
                             sim::Metric metric);

/// File names written by write_report, relative to its directory.
std::string comparison_file(const std::string& fips, sim::Metric metric);

struct ReportInputs {
  impute::CoverageTables coverage;
  movement::MovementParameterSet movement;
  epi::ThresholdReport thresholds;
  sim::SimulationSummary summary;
  std::vector<impute::ImputedSection> shipments;
};

/// Writes every table into `dir` and returns the paths written.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const ReportInputs& in);

}  // namespace cattle::report
