#pragma once

// Maximum-entropy programs with sparse linear constraints:
//
//   maximize   sum_k  -w_k * (s_k x_k) * log(s_k x_k + o_k)  -  c^T x
//   subject to A_eq x  = b_eq
//              A_in x <= b_in
//              lower <= x <= upper
//
// and plain LPs (minimize c^T x) over the same constraint structure. Both are
// solved by one primal-dual interior point method; see solver.cpp.

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cattle::maxent {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Contributes -weight * (scale * x) * log(scale * x + offset) to the objective.
/// offset 0 is the plain entropy term; offset 1 is the guarded form that stays
/// finite at x = 0.
struct EntropyTerm {
  int index = 0;
  double weight = 1.0;
  double scale = 1.0;
  double offset = 0.0;
};

struct Entry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

using Coeffs = std::vector<std::pair<int, double>>;

struct EntropyProgram {
  std::vector<double> lower;
  std::vector<double> upper;
  /// Typical magnitude of each variable (0 = unknown); used only for internal scaling.
  std::vector<double> typical;
  std::vector<std::string> names;
  std::vector<EntropyTerm> entropy;
  std::vector<Entry> a_eq;
  std::vector<double> b_eq;
  std::vector<Entry> a_in;
  std::vector<double> b_in;
  /// Linear cost (minimized). Empty means zero.
  std::vector<double> cost;

  int variables() const { return static_cast<int>(lower.size()); }
  int equalities() const { return static_cast<int>(b_eq.size()); }
  int inequalities() const { return static_cast<int>(b_in.size()); }

  int add_variable(double lo, double hi, std::string name = {}, double typical_magnitude = 0.0);
  void add_entropy(int var, double weight = 1.0, double scale = 1.0, double offset = 0.0);
  int add_equality(const Coeffs& coeffs, double rhs);
  /// sum coeffs * x <= rhs
  int add_inequality(const Coeffs& coeffs, double rhs);
  void set_cost(int var, double c);
};

struct Tolerances {
  double feasibility = 1e-8;  // relative: |A x - b|_inf <= feasibility * (1 + |b|_inf)
  double kkt = 1e-8;
  double gap = 1e-11;  // complementarity sum <= gap * (1 + |objective|)
  int max_iterations = 200;
};

enum class SolveStatus { Optimal, MaxIter, Infeasible, Unbounded };

const char* to_string(SolveStatus s);

/// Mixed into a module's error type when a solve ended without an optimum,
/// so callers can tell solver failures from bad input.
struct SolverFailure {
  SolveStatus status = SolveStatus::MaxIter;
  explicit SolverFailure(SolveStatus s) : status(s) {}
  virtual ~SolverFailure() = default;
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIter;
  std::vector<double> x;
  /// Maximized objective in entropy mode, minimized cost in LP mode.
  double objective = 0.0;
  double eq_residual = 0.0;    // max |A_eq x - b_eq|
  double ineq_residual = 0.0;  // max (A_in x - b_in)_+
  double bound_residual = 0.0;
  /// Stationarity residual of the scaled problem the iteration works on.
  double kkt_residual = 0.0;
  double complementarity = 0.0;
  int iterations = 0;
  int fixed_by_presolve = 0;
  /// Multipliers in original units, satisfying
  ///   grad F(x) - A_eq^T eq_mult + A_in^T ineq_mult - lower_mult + upper_mult = 0
  /// where F = sum_k w_k (s_k x_k) log(s_k x_k + o_k) + c^T x is the minimized form.
  std::vector<double> eq_multipliers;
  std::vector<double> ineq_multipliers;  // >= 0
  std::vector<double> lower_multipliers;
  std::vector<double> upper_multipliers;
  std::string message;
};

/// Maximizes the entropy objective (minus any linear cost).
SolveReport solve_entropy(const EntropyProgram& p, const Tolerances& tol = {});

/// Minimizes c^T x; entropy terms are ignored.
SolveReport solve_lp(const EntropyProgram& p, const Tolerances& tol = {});

struct ViolationReport {
  double violation = 0.0;  // sum |A_eq x - b_eq| + sum (A_in x - b_in)_+
  std::vector<double> x;
  SolveStatus status = SolveStatus::MaxIter;
};

/// Phase-1 LP: the smallest total constraint violation reachable within the bounds.
ViolationReport minimum_violation(const EntropyProgram& p, const Tolerances& tol = {});

/// Objective of `p` at `x` in maximization form, with 0 log 0 = 0.
double entropy_objective(const EntropyProgram& p, std::span<const double> x);

/// Sparse triplet text dump, one line per item: kind,row,col,value.
///   dims,<equalities>,<variables>,<inequalities>
///   lo,0,j,v  up,0,j,v  typ,0,j,v  cost,0,j,v
///   ent,k,j,weight  entscale,k,j,scale  entoff,k,j,offset
///   aeq,i,j,v  beq,i,0,v  ain,i,j,v  bin,i,0,v
/// Infinite bounds are written as inf / -inf.
void dump_program(std::ostream& os, const EntropyProgram& p);
EntropyProgram load_program(std::istream& is);

}  // namespace cattle::maxent
