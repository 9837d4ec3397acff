#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "cattle/maxent.hpp"

using namespace cattle::maxent;
using namespace oracle;

TEST_CASE("entropy over a simplex is uniform") {
  EntropyProgram p;
  Coeffs sum;
  for (int i = 0; i < 5; ++i) {
    const int v = p.add_variable(0.0, kInf);
    p.add_entropy(v);
    sum.emplace_back(v, 1.0);
  }
  p.add_equality(sum, 1.0);
  const auto r = solve_entropy(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  for (double x : r.x) CHECK(x == doctest::Approx(0.2).epsilon(1e-7));
  CHECK(r.objective == doctest::Approx(std::log(5.0)).epsilon(1e-9));
}

TEST_CASE("moment constraint yields the Gibbs distribution") {
  const std::vector<double> values = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  for (double target : {0.7, 2.5, 4.1}) {
    EntropyProgram p;
    Coeffs sum, moment;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const int v = p.add_variable(0.0, 1.0);
      p.add_entropy(v);
      sum.emplace_back(v, 1.0);
      moment.emplace_back(v, values[i]);
    }
    p.add_equality(sum, 1.0);
    p.add_equality(moment, target);
    const auto r = solve_entropy(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    const auto expect = gibbs_by_bisection(values, target);
    for (std::size_t i = 0; i < values.size(); ++i) {
      CHECK(r.x[i] == doctest::Approx(expect[i]).epsilon(1e-6));
    }
    CHECK(kkt_check(p, r) < 1e-6);
  }
}

TEST_CASE("scaled entropy terms with large totals") {
  // maximize -sum (x/P) log(x/P) with sum x = P is uniform regardless of P.
  const double total = 3.0e6;
  EntropyProgram p;
  Coeffs sum;
  for (int i = 0; i < 4; ++i) {
    const int v = p.add_variable(0.0, total);
    p.add_entropy(v, 1.0, 1.0 / total);
    sum.emplace_back(v, 1.0);
  }
  p.add_equality(sum, total);
  const auto r = solve_entropy(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  for (double x : r.x) CHECK(x == doctest::Approx(total / 4).epsilon(1e-7));
}

TEST_CASE("active upper bound redistributes mass evenly") {
  EntropyProgram p;
  Coeffs sum;
  for (int i = 0; i < 4; ++i) {
    const int v = p.add_variable(0.0, i == 0 ? 0.1 : kInf);
    p.add_entropy(v);
    sum.emplace_back(v, 1.0);
  }
  p.add_equality(sum, 1.0);
  const auto r = solve_entropy(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(0.1).epsilon(1e-6));
  for (int i = 1; i < 4; ++i) CHECK(r.x[i] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(r.upper_multipliers[0] > 0.0);
  CHECK(kkt_check(p, r) < 1e-6);
}

TEST_CASE("guarded terms with offset one") {
  // max -x log(x+1) - 2y log(y+1), x + y = 1: stationarity by bisection.
  EntropyProgram p;
  const int x = p.add_variable(0.0, kInf);
  const int y = p.add_variable(0.0, kInf);
  p.add_entropy(x, 1.0, 1.0, 1.0);
  p.add_entropy(y, 2.0, 1.0, 1.0);
  p.add_equality({{x, 1.0}, {y, 1.0}}, 1.0);
  const auto r = solve_entropy(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  auto dphi = [](double t) { return std::log(t + 1.0) + t / (t + 1.0); };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (dphi(mid) - 2.0 * dphi(1.0 - mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  CHECK(r.x[x] == doctest::Approx(lo).epsilon(1e-6));
  CHECK(r.x[x] + r.x[y] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("inequality constraints and multiplier signs") {
  // Uniform would put 0.5 on the first two; force their sum <= 0.3.
  EntropyProgram p;
  Coeffs sum;
  for (int i = 0; i < 4; ++i) {
    const int v = p.add_variable(0.0, kInf);
    p.add_entropy(v);
    sum.emplace_back(v, 1.0);
  }
  p.add_equality(sum, 1.0);
  p.add_inequality({{0, 1.0}, {1, 1.0}}, 0.3);
  const auto r = solve_entropy(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(0.15).epsilon(1e-6));
  CHECK(r.x[2] == doctest::Approx(0.35).epsilon(1e-6));
  CHECK(r.ineq_multipliers[0] > 0.0);
  CHECK(kkt_check(p, r) < 1e-6);
}

TEST_CASE("LP optimum matches vertex enumeration") {
  // min c^T x over {A x <= b, 0 <= x <= 4} in 2-D.
  const std::vector<std::array<double, 3>> rows = {
      {1.0, 2.0, 6.0}, {3.0, 1.0, 9.0}, {-1.0, 1.0, 2.0}, {1.0, 0.0, 4.0}, {0.0, 1.0, 4.0},
      {-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}};
  for (const auto& c : std::vector<std::array<double, 2>>{{-1.0, -1.0}, {-2.0, 1.0}, {1.0, -3.0}}) {
    double best = kInf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = i + 1; j < rows.size(); ++j) {
        Eigen::Matrix2d a;
        a << rows[i][0], rows[i][1], rows[j][0], rows[j][1];
        if (std::abs(a.determinant()) < 1e-12) continue;
        const Eigen::Vector2d v = a.inverse() * Eigen::Vector2d(rows[i][2], rows[j][2]);
        bool ok = true;
        for (const auto& r : rows) ok = ok && r[0] * v[0] + r[1] * v[1] <= r[2] + 1e-9;
        if (ok) best = std::min(best, c[0] * v[0] + c[1] * v[1]);
      }
    }
    EntropyProgram p;
    p.add_variable(0.0, 4.0);
    p.add_variable(0.0, 4.0);
    for (int i = 0; i < 3; ++i) p.add_inequality({{0, rows[i][0]}, {1, rows[i][1]}}, rows[i][2]);
    p.set_cost(0, c[0]);
    p.set_cost(1, c[1]);
    const auto r = solve_lp(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-7));
  }
}

TEST_CASE("infeasible programs are reported") {
  SUBCASE("caught by bound propagation") {
    EntropyProgram p;
    p.add_variable(0.0, 1.0);
    p.add_variable(0.0, 1.0);
    p.add_entropy(0);
    p.add_entropy(1);
    p.add_equality({{0, 1.0}, {1, 1.0}}, 3.0);
    CHECK(solve_entropy(p).status == SolveStatus::Infeasible);
  }
  SUBCASE("needs the phase-1 program") {
    EntropyProgram p;
    p.add_variable(0.0, 1.0);
    p.add_variable(0.0, 1.0);
    p.add_entropy(0);
    p.add_entropy(1);
    p.add_equality({{0, 1.0}, {1, -1.0}}, 0.8);
    p.add_equality({{0, 1.0}, {1, 1.0}}, 0.5);
    const auto r = solve_entropy(p);
    CHECK(r.status == SolveStatus::Infeasible);
    // Least total violation: x2 = 0 and x1 anywhere in [0.5, 0.8] gives 0.3.
    const auto v = minimum_violation(p);
    CHECK(v.violation == doctest::Approx(0.3).epsilon(1e-6));
  }
}

TEST_CASE("zero budget is fixed by presolve") {
  EntropyProgram p;
  const int a = p.add_variable(0.0, kInf);
  const int b = p.add_variable(0.0, kInf);
  const int c = p.add_variable(0.0, kInf);
  p.add_entropy(c);
  p.add_inequality({{a, 1.0}, {b, 1.0}}, 0.0);
  p.add_equality({{a, 1.0}, {c, 1.0}}, 0.5);
  const auto r = solve_entropy(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x[a] == 0.0);
  CHECK(r.x[b] == 0.0);
  CHECK(r.x[c] == doctest::Approx(0.5));
  CHECK(r.fixed_by_presolve == 2);
}

TEST_CASE("program dump round trip") {
  EntropyProgram p;
  p.add_variable(0.0, kInf, "a", 2.0);
  p.add_variable(-1.0, 3.5, "b");
  p.add_entropy(0, 2.0, 0.25, 1.0);
  p.add_equality({{0, 1.0}, {1, -2.0}}, 0.75);
  p.add_inequality({{1, 1.0}}, 3.0);
  p.set_cost(1, 0.125);
  std::stringstream ss;
  dump_program(ss, p);
  const auto q = load_program(ss);
  CHECK(q.lower == p.lower);
  CHECK(q.upper == p.upper);
  CHECK(q.typical == p.typical);
  CHECK(q.cost == p.cost);
  REQUIRE(q.entropy.size() == 1);
  CHECK(q.entropy[0].scale == 0.25);
  CHECK(q.entropy[0].offset == 1.0);
  CHECK(q.b_eq == p.b_eq);
  CHECK(q.b_in == p.b_in);
  CHECK(q.a_eq.size() == 2);
}
