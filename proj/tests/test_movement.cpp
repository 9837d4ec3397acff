#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "cattle/movement.hpp"

using namespace cattle;
using namespace oracle;
using namespace cattle::movement;
using geo::DistanceBin;

namespace {

MovementInputs make_inputs(const std::vector<geo::CountyCentroid>& centroids) {
  MovementInputs in;
  for (const auto& c : centroids) {
    in.subpops.states.push_back("KS");
    in.subpops.counties.push_back(c.county_fips);
    in.subpops.head.resize(in.subpops.head.size() + kSubpopsPerCounty, 0.0);
    in.shipments.counties.push_back(c.county_fips);
    in.shipments.all_movements.push_back(0.0);
    in.shipments.slaughter.push_back(0.0);
    in.shipments.slaughter_500_up.push_back(0.0);
  }
  in.distances = geo::DistanceClassifier(centroids);
  return in;
}

}  // namespace

TEST_CASE("default rate bounds") {
  const auto b = default_rate_bounds();
  CHECK(b.slaughter[idx(TypeB::Beef)].max == 1.0 / 13.0);
  CHECK(b.slaughter[idx(TypeB::Beef)].min == 0.0);
  CHECK(b.birth[idx(TypeB::Preslaughter)].max == 0.0);
  CHECK(b.birth[idx(TypeB::Dairy)].max == 1.0 / 36.0);
  CHECK(b.expire[idx(TypeB::Dairy)].min == 1.0 / 312.0);
  CHECK(b.slaughter[idx(TypeB::Dairy)].max == 0.0);
}

TEST_CASE("published formulation size") {
  const auto f = formulation_size(1034);
  CHECK(f.variables == 80107);
  CHECK(f.constraints == 81142);
}

TEST_CASE("thousandth rounding") {
  CHECK(round_up_thousandth(0.0) == 0.0);
  CHECK(round_up_thousandth(1e-13) == 0.0);
  CHECK(round_up_thousandth(-1e-12) == 0.0);
  CHECK(round_up_thousandth(0.0041) == 0.005);
  CHECK(round_up_thousandth(0.012) == 0.012);
  CHECK(round_up_thousandth(0.0120001) == 0.013);
}

TEST_CASE("structural zeros are absent from the program") {
  auto in = make_inputs({{"20001", 38.0, -98.0}, {"20003", 38.0, -99.0}});
  in.subpops.pop(0, TypeB::Beef, SizeB::z1_19) = 100;
  const auto mp = build_movement_program(in, default_rate_bounds(), 0.0);
  int present = 0;
  for (TypeB t1 : kAllTypeB) {
    for (SizeB j1 : kAllSizeB) {
      for (TypeB t2 : kAllTypeB) {
        for (SizeB j2 : kAllSizeB) {
          for (DistanceBin d : geo::kReachable) {
            const int v = mp.p_var[p_index(t1, j1, t2, j2, d)];
            if (t1 == TypeB::Preslaughter || (t1 == TypeB::Dairy && t2 == TypeB::Preslaughter)) {
              CHECK(v == -1);
            }
            present += v >= 0;
          }
        }
      }
    }
  }
  // Two counties ~54 miles apart populate d0 and d100 only.
  CHECK(present == 45 * 2);
}

TEST_CASE("single county with one Beef herd and no shipments") {
  auto in = make_inputs({{"20001", 38.0, -98.0}});
  in.subpops.pop(0, TypeB::Beef, SizeB::z20_199) = 100;
  const auto bounds = default_rate_bounds();
  const auto m = solve_movement(in, bounds, 0.0);
  const int s = impute::SubpopulationSet::subpop_index(0, TypeB::Beef, SizeB::z20_199);
  CHECK(m.sl[s] == doctest::Approx(0.0));
  for (TypeB t2 : kAllTypeB) {
    for (SizeB j2 : kAllSizeB) CHECK(m.param(TypeB::Beef, SizeB::z20_199, t2, j2, DistanceBin::d0) == 0.0);
  }
  // Remaining problem: maximize -st log st - dt log dt with st + dt = 1,
  // dt = bt and dt within the intersection of the expiry and birth ranges.
  const auto& ex = bounds.expire[idx(TypeB::Beef)];
  const auto& bt = bounds.birth[idx(TypeB::Beef)];
  const double lo = std::max(ex.min, bt.min), hi = std::min(ex.max, bt.max);
  const double best = golden_max(
      [](double x) { return -x * std::log(x) - (1 - x) * std::log(1 - x); }, lo, hi);
  CHECK(m.dt[s] == doctest::Approx(best).epsilon(1e-6));
  CHECK(m.bt[s] == doctest::Approx(best).epsilon(1e-6));
  CHECK(m.st[s] == doctest::Approx(1.0 - best).epsilon(1e-8));
  CHECK(m.d_mov + m.d_pop <= 1e-9);
}

TEST_CASE("identical counties receive identical rates") {
  // Two copies placed symmetrically; Beef herds ship to each other.
  auto in = make_inputs({{"20001", 38.0, -98.0}, {"20003", 38.0, -99.0}});
  for (int c = 0; c < 2; ++c) {
    in.subpops.pop(c, TypeB::Dairy, SizeB::z20_199) = 300;
    in.subpops.pop(c, TypeB::Beef, SizeB::z1_19) = 200;
    in.subpops.pop(c, TypeB::Beef, SizeB::z200_up) = 800;
    in.subpops.pop(c, TypeB::Preslaughter, SizeB::z200_up) = 500;
    in.shipments.all_movements[c] = 9000;
    in.shipments.slaughter[c] = 5000;
    in.shipments.slaughter_500_up[c] = 4000;
  }
  const auto m = estimate(in, default_rate_bounds());
  for (int k = 0; k < kSubpopsPerCounty; ++k) {
    CHECK(m.st[k] == doctest::Approx(m.st[kSubpopsPerCounty + k]).epsilon(1e-6));
    CHECK(m.sl[k] == doctest::Approx(m.sl[kSubpopsPerCounty + k]).epsilon(1e-6));
    CHECK(m.dt[k] == doctest::Approx(m.dt[kSubpopsPerCounty + k]).epsilon(1e-6));
    CHECK(m.bt[k] == doctest::Approx(m.bt[kSubpopsPerCounty + k]).epsilon(1e-6));
  }
  CHECK(m.d_mov + m.d_pop <= m.f_min * m.p_total + 1e-6 * m.p_total);
  const auto geo = in.distances;
  for (int c = 0; c < 2; ++c) {
    for (TypeB t : kAllTypeB) {
      for (SizeB j : kAllSizeB) {
        const int s = impute::SubpopulationSet::subpop_index(c, t, j);
        const double sum = outgoing_probability(m, geo, c, t, j) + m.st[s] + m.sl[s] + m.dt[s];
        CHECK(std::abs(sum - 1.0) <= 1e-8);
      }
    }
  }
}
