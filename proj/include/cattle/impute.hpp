#pragma once

// Fills withheld census cells by maximum-entropy programs, one program for the
// population section and one for the shipment section of each state, then
// aggregates populations to Size_B and derives the residual Beef type.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cattle/census.hpp"
#include "cattle/maxent.hpp"

namespace cattle::impute {

/// The data of a state census section is inconsistent with its own totals.
class ImputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ImputationSolveError : public ImputationError, public maxent::SolverFailure {
 public:
  ImputationSolveError(const std::string& what, maxent::SolveStatus s)
      : ImputationError(what), maxent::SolverFailure(s) {}
};

/// An entropy program plus the variable index of each census quantity.
struct SectionProgram {
  maxent::EntropyProgram program;
  int kinds = 0;
  int counties = 0;
  std::vector<int> cell_var;    // kind x county x SizeA
  std::vector<int> county_var;  // kind x county
  std::vector<int> size_var;    // kind x SizeA
  std::vector<int> agg_var;     // kind x county x SizeB (populations only)
  /// Cross-type rows dropped because no choice of cells can satisfy them.
  std::vector<ValidationWarning> warnings;

  int cell(int k, int c, SizeA s) const { return cell_var[(k * counties + c) * kSizeA + idx(s)]; }
  int county_total(int k, int c) const { return county_var[k * counties + c]; }
  int size_total(int k, SizeA s) const { return size_var[k * kSizeA + idx(s)]; }
  int aggregate(int k, int c, SizeB j) const { return agg_var[(k * counties + c) * kSizeB + idx(j)]; }
};

/// Entropy program over Pop^x, Tc^x, Tz^x and Pop^R of one state.
/// Throws ImputationError when disclosed values contradict a total.
SectionProgram build_population_program(const StateCensus& state);

/// Entropy program over Sales^x and the shipment totals of one state.
SectionProgram build_shipment_program(const StateCensus& state);

/// Imputed values of one census section of one state.
struct ImputedSection {
  std::string state;
  std::vector<std::string> counties;
  int kinds = 0;
  std::vector<double> cells;          // kind x county x SizeA
  std::vector<double> county_totals;  // kind x county
  std::vector<double> size_totals;    // kind x SizeA
  maxent::SolveReport report;
  std::vector<ValidationWarning> warnings;

  int county_count() const { return static_cast<int>(counties.size()); }
  double cell(int k, int c, SizeA s) const {
    return cells[(static_cast<std::size_t>(k) * counties.size() + c) * kSizeA + idx(s)];
  }
  double& cell(int k, int c, SizeA s) {
    return cells[(static_cast<std::size_t>(k) * counties.size() + c) * kSizeA + idx(s)];
  }
  double county_total(int k, int c) const { return county_totals[k * counties.size() + c]; }
  double size_total(int k, SizeA s) const { return size_totals[k * kSizeA + idx(s)]; }
  /// Sum over the Size_A ranges that make up `j`.
  double aggregate(int k, int c, SizeB j) const;
};

/// Imputed values within this relative distance of an integer are snapped to
/// it, which clears solver noise from forced cells without moving any total
/// by more than the same relative amount. Other values keep full precision;
/// disclosed cells are copied from the input unchanged.
inline constexpr double kSnapTolerance = 1e-9;

double round_imputed(double v);

/// Solves the population program of one state. Throws ImputationError on
/// inconsistent data or when the solver does not reach an optimum.
ImputedSection impute_populations(const StateCensus& state, const maxent::Tolerances& tol = {});
ImputedSection impute_shipments(const StateCensus& state, const maxent::Tolerances& tol = {});

/// Pop^R over Type_B x County x Size_B, counties of all states concatenated.
struct SubpopulationSet {
  std::vector<std::string> states;    // per county
  std::vector<std::string> counties;  // FIPS
  std::vector<double> head;           // county x TypeB x SizeB

  int county_count() const { return static_cast<int>(counties.size()); }
  int subpop_count() const { return county_count() * kSubpopsPerCounty; }
  static int subpop_index(int c, TypeB t, SizeB j) {
    return c * kSubpopsPerCounty + idx(t) * kSizeB + idx(j);
  }
  double pop(int c, TypeB t, SizeB j) const { return head[subpop_index(c, t, j)]; }
  double& pop(int c, TypeB t, SizeB j) { return head[subpop_index(c, t, j)]; }
  double total() const;
};

/// Aggregates to Size_B and forms Beef = All - Dairy - Preslaughter. A negative
/// residual beyond rounding is clamped to 0 and reported in `warnings`.
SubpopulationSet assemble_subpopulations(std::span<const ImputedSection> populations,
                                         std::vector<ValidationWarning>* warnings = nullptr);

struct CoverageRow {
  std::string state;
  long long count = 0;
  double count_percent = 0.0;
  double head = 0.0;
  double head_percent = 0.0;
};

/// Withheld cells counted over all kinds of the section (Dairy and
/// Preslaughter cells are also part of All Cattle, so head is double counted
/// the same way). Percentages are of all cells and of the summed state totals.
CoverageRow coverage(const CensusTable& table, const ImputedSection& imputed);

/// Per-county imputed shipment totals used by the movement program.
struct ShipmentTotals {
  std::vector<std::string> counties;
  std::vector<double> all_movements;     // Tc for all shipments
  std::vector<double> slaughter;         // Tc for slaughter
  std::vector<double> slaughter_500_up;  // slaughter shipments of 500 or more head
};

ShipmentTotals shipment_totals(std::span<const ImputedSection> shipments);

void write_subpopulations(const std::filesystem::path& path, const SubpopulationSet& s);
SubpopulationSet load_subpopulations(const std::filesystem::path& path);

/// Rows state,county_fips,ship_type,size_a,head.
void write_imputed_shipments(const std::filesystem::path& path,
                             std::span<const ImputedSection> shipments);
std::vector<ImputedSection> load_imputed_shipments(const std::filesystem::path& path);

/// Columns section,State,Count,Count %,Head,Head %.
void write_coverage(const std::filesystem::path& path, std::span<const CoverageRow> populations,
                    std::span<const CoverageRow> shipments);

struct CoverageTables {
  std::vector<CoverageRow> populations;
  std::vector<CoverageRow> shipments;
};
CoverageTables load_coverage(const std::filesystem::path& path);

}  // namespace cattle::impute
