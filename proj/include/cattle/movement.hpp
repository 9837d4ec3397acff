#pragma once

// Estimation of weekly movement probabilities and demographic rates from
// subpopulations, county shipment totals and county distance bins.
//
// Decision variables: p[t1][j1][t2][j2][d] shared by all county pairs in
// distance bin d; per subpopulation st, sl, dt, bt; discrepancy terms
// PN_mov, PN_slt (split into positive and negative parts), PN_slt500 per
// county and PN_pop (split) per subpopulation. Yearly census totals are
// divided by 52 to give weekly flows.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cattle/geo.hpp"
#include "cattle/impute.hpp"
#include "cattle/maxent.hpp"

namespace cattle::movement {

inline constexpr double kWeeksPerYear = 52.0;

class MovementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MovementSolveError : public MovementError, public maxent::SolverFailure {
 public:
  MovementSolveError(const std::string& what, maxent::SolveStatus s)
      : MovementError(what), maxent::SolverFailure(s) {}
};

struct Range {
  double min = 0.0;
  double max = 0.0;
};

/// Weekly demographic rate bounds per Type_B.
struct RateBounds {
  std::array<Range, kTypeB> expire{};
  std::array<Range, kTypeB> slaughter{};
  std::array<Range, kTypeB> birth{};
};

RateBounds default_rate_bounds();

/// Throws MovementError when a range is reversed or outside [0, 1].
void check_rate_bounds(const RateBounds& b);

/// Movement from type t1 to type t2 is allowed (Preslaughter never ships
/// live animals; Dairy never ships to Preslaughter).
constexpr bool movement_allowed(TypeB t1, TypeB t2) {
  if (t1 == TypeB::Preslaughter) return false;
  if (t1 == TypeB::Dairy && t2 == TypeB::Preslaughter) return false;
  return true;
}

struct MovementInputs {
  impute::SubpopulationSet subpops;
  impute::ShipmentTotals shipments;
  /// Classifier over exactly the subpopulation counties, in the same order.
  geo::DistanceClassifier distances;
};

/// Aligns shipments and centroids to the subpopulation county order.
/// Throws MovementError naming the first county that is missing.
MovementInputs align_inputs(impute::SubpopulationSet subpops,
                            const impute::ShipmentTotals& shipments,
                            const std::vector<geo::CountyCentroid>& centroids);

/// Index of a p parameter in [t1][j1][t2][j2][d] order over the reachable bins.
constexpr int p_index(TypeB t1, SizeB j1, TypeB t2, SizeB j2, geo::DistanceBin d) {
  return (((idx(t1) * kSizeB + idx(j1)) * kTypeB + idx(t2)) * kSizeB + idx(j2)) *
             geo::kReachableBins +
         geo::idx(d);
}
inline constexpr int kPCount = kTypeB * kSizeB * kTypeB * kSizeB * geo::kReachableBins;

struct MovementProgram {
  maxent::EntropyProgram program;
  std::array<int, kPCount> p_var{};  // -1 when the parameter is absent
  /// Per subpopulation (county-major, as SubpopulationSet::subpop_index).
  std::vector<int> st, sl, dt, bt, pop_plus, pop_minus;
  /// Per county.
  std::vector<int> mov_plus, mov_minus, slt_plus, slt_minus, slt500;
  int budget_row = -1;  // inequality row of the discrepancy budget, -1 if absent
};

/// Builds the estimation program. Without `f_min` the discrepancy budget is
/// omitted and the linear cost sums all discrepancy parts (the phase-1 LP).
MovementProgram build_movement_program(const MovementInputs& in, const RateBounds& bounds,
                                       std::optional<double> f_min);

/// Sizes under the published counting convention: every subpopulation has
/// st, sl, dt, bt, Leaving, Coming and a split PN_pop; every county a split
/// PN_mov, split PN_slt and PN_slt500; p over all six distance bins (486);
/// plus D_mov, D_pop and the objective. Constraints: per subpopulation the
/// outgoing sum, Leaving and Coming definitions, flux, three rate-bound rows
/// and the |PN_pop| link; per county the three shipment rows and three
/// discrepancy links; globally 486 p-bound rows, D_mov, D_pop, the budget
/// and the objective definition.
struct FormulationSize {
  long long variables = 0;
  long long constraints = 0;
};
FormulationSize formulation_size(int counties);

struct FMinResult {
  double d_star = 0.0;   // minimum total discrepancy (head per week)
  double p_total = 0.0;  // total cattle
  double f_min = 0.0;
  maxent::SolveStatus status = maxent::SolveStatus::MaxIter;
};

/// Smallest thousandth at or above D*/P. A relative slack of 1e-6 thousandths
/// absorbs solver noise around exact thousandths and zero.
double round_up_thousandth(double ratio);

/// Solves the phase-1 LP. Throws MovementError when it is infeasible.
FMinResult compute_f_min(const MovementInputs& in, const RateBounds& bounds,
                         const maxent::Tolerances& tol = {});

struct MovementParameterSet {
  std::vector<std::string> states;
  std::vector<std::string> counties;
  std::array<double, kPCount> p{};  // weekly; 0 for absent parameters
  std::vector<double> st, sl, dt, bt;  // per subpopulation
  std::vector<double> pn_pop;          // signed, per subpopulation
  std::vector<double> pn_mov, pn_slt, pn_slt500;  // per county
  double d_mov = 0.0;
  double d_pop = 0.0;
  double f_min = 0.0;
  double d_star = 0.0;
  double p_total = 0.0;
  maxent::SolveReport report;
  int program_variables = 0;
  int program_equalities = 0;
  int program_inequalities = 0;

  double param(TypeB t1, SizeB j1, TypeB t2, SizeB j2, geo::DistanceBin d) const {
    return p[p_index(t1, j1, t2, j2, d)];
  }
  int county_count() const { return static_cast<int>(counties.size()); }
};

/// Reads rates and discrepancies out of a solved program. Large solver
/// vectors are dropped from the stored report.
MovementParameterSet parameters_from(const MovementInputs& in, const MovementProgram& mp,
                                     maxent::SolveReport r);

/// Solves the estimation program with the given budget fraction. Throws
/// MovementError unless the solver reports Optimal.
MovementParameterSet solve_movement(const MovementInputs& in, const RateBounds& bounds,
                                    double f_min, const maxent::Tolerances& tol = {});

/// compute_f_min followed by solve_movement.
MovementParameterSet estimate(const MovementInputs& in, const RateBounds& bounds,
                              const maxent::Tolerances& tol = {});

/// Sum over reachable destinations (c2, t2, j2) of p for subpopulation
/// (c, t, j): the weekly probability of leaving by live shipment.
double outgoing_probability(const MovementParameterSet& m, const geo::DistanceClassifier& geo,
                            int c, TypeB t, SizeB j);

/// movement_params.csv: t1,j1,t2,j2,dist,p_weekly
void write_movement_params(const std::filesystem::path& path, const MovementParameterSet& m);
/// demographics.csv: state,county_fips,type,size,st,sl,dt,bt
void write_demographics(const std::filesystem::path& path, const MovementParameterSet& m);
/// discrepancies.csv: state,county_fips,pn_mov,pn_slt,pn_slt500,pn_pop_abs
void write_discrepancies(const std::filesystem::path& path, const MovementParameterSet& m);
/// run_meta.txt: key=value lines.
void write_run_meta(const std::filesystem::path& path, const MovementParameterSet& m);

/// Reads movement_params.csv and demographics.csv back (discrepancy and
/// solver fields are left empty).
MovementParameterSet load_movement(const std::filesystem::path& params_csv,
                                   const std::filesystem::path& demographics_csv);

}  // namespace cattle::movement
