#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cattle/impute.hpp"

using namespace cattle;
using namespace cattle::impute;

namespace {

// One state with `counties` counties; every cell starts disclosed zero.
StateCensus empty_state(int counties) {
  StateCensus st;
  st.state = "KS";
  for (int c = 0; c < counties; ++c) st.add_county("20" + std::to_string(100 + 2 * c + 1));
  return st;
}

void set_cell(CensusTable& t, int k, int c, SizeA s, std::int64_t ops, std::optional<std::int64_t> head) {
  t.cell(k, c, s) = {ops, head};
}

// Closes a table: county, size and state totals from its cells (all disclosed).
void close_totals(CensusTable& t, const std::vector<std::int64_t>& truth) {
  for (int k = 0; k < t.kinds(); ++k) {
    std::int64_t total = 0;
    for (int c = 0; c < t.counties(); ++c) {
      std::int64_t sum = 0;
      for (SizeA s : kAllSizeA) sum += truth[(k * t.counties() + c) * kSizeA + idx(s)];
      t.county_total(k, c).head = sum;
      total += sum;
    }
    for (SizeA s : kAllSizeA) {
      std::int64_t sum = 0;
      for (int c = 0; c < t.counties(); ++c) sum += truth[(k * t.counties() + c) * kSizeA + idx(s)];
      t.size_total(k, s).head = sum;
    }
    t.state_total(k) = total;
  }
}

}  // namespace

TEST_CASE("fully disclosed state is a fixed point") {
  StateCensus st = empty_state(2);
  std::vector<std::int64_t> truth(kTypeA * 2 * kSizeA, 0);
  auto put = [&](TypeA t, int c, SizeA s, std::int64_t ops, std::int64_t head) {
    set_cell(st.populations, idx(t), c, s, ops, head);
    truth[(idx(t) * 2 + c) * kSizeA + idx(s)] = head;
  };
  put(TypeA::Dairy, 0, SizeA::z20_49, 2, 70);
  put(TypeA::AllCattle, 0, SizeA::z20_49, 3, 100);
  put(TypeA::AllCattle, 1, SizeA::z1_9, 4, 17);
  put(TypeA::Preslaughter, 1, SizeA::z500_up, 1, 900);
  put(TypeA::AllCattle, 1, SizeA::z500_up, 2, 1600);
  close_totals(st.populations, truth);
  const auto out = impute_populations(st);
  REQUIRE(out.report.status == maxent::SolveStatus::Optimal);
  for (std::size_t i = 0; i < truth.size(); ++i) CHECK(out.cells[i] == static_cast<double>(truth[i]));
  const auto subs = assemble_subpopulations(std::span(&out, 1));
  CHECK(subs.pop(1, TypeB::Beef, SizeB::z200_up) == 700.0);
  CHECK(subs.pop(0, TypeB::Beef, SizeB::z20_199) == 30.0);
  const auto cov = coverage(st.populations, out);
  CHECK(cov.count == 0);
  CHECK(cov.head == 0.0);
}

TEST_CASE("single suppressed cell is forced by its county total") {
  // County A fully disclosed at 60; county B has one withheld cell with 2
  // operations in z1_9 and disclosed cells summing to 30, county total 40.
  StateCensus st = empty_state(2);
  const int all = idx(TypeA::AllCattle);
  auto& t = st.populations;
  set_cell(t, all, 0, SizeA::z20_49, 2, 60);
  set_cell(t, all, 1, SizeA::z1_9, 2, std::nullopt);
  set_cell(t, all, 1, SizeA::z20_49, 1, 30);
  t.county_total(all, 0).head = 60;
  t.county_total(all, 1).head = 40;
  t.state_total(all) = 100;
  // Interval propagation: cell = 40 - 30, intersected with [2*1, 2*9].
  const double lo = std::max(40.0 - 30.0, 2.0), hi = std::min(40.0 - 30.0, 18.0);
  REQUIRE(lo == hi);
  const auto out = impute_populations(st);
  REQUIRE(out.report.status == maxent::SolveStatus::Optimal);
  CHECK(out.cell(all, 1, SizeA::z1_9) == doctest::Approx(lo).epsilon(1e-9));
  const auto cov = coverage(st.populations, out);
  CHECK(cov.count == 1);
  CHECK(cov.head == doctest::Approx(10.0));
}

TEST_CASE("symmetric suppressed cells are imputed equally") {
  StateCensus st = empty_state(3);
  const int all = idx(TypeA::AllCattle);
  auto& t = st.populations;
  for (int c = 0; c < 3; ++c) set_cell(t, all, c, SizeA::z20_49, 2, std::nullopt);
  t.size_total(all, SizeA::z20_49).head = 210;
  t.state_total(all) = 210;
  const auto out = impute_populations(st);
  REQUIRE(out.report.status == maxent::SolveStatus::Optimal);
  for (int c = 0; c < 3; ++c) CHECK(out.cell(all, c, SizeA::z20_49) == doctest::Approx(70.0).epsilon(1e-8));
  CHECK(std::abs(out.cell(all, 0, SizeA::z20_49) - out.cell(all, 2, SizeA::z20_49)) < 1e-6);
}

TEST_CASE("cross-type relation keeps Dairy below All Cattle") {
  // Dairy has a withheld z200_499 cell whose entropy optimum alone would be
  // large; All Cattle pins the same county's large herds at 450.
  StateCensus st = empty_state(2);
  const int dairy = idx(TypeA::Dairy), all = idx(TypeA::AllCattle);
  auto& t = st.populations;
  set_cell(t, dairy, 0, SizeA::z200_499, 1, std::nullopt);
  set_cell(t, dairy, 1, SizeA::z200_499, 1, std::nullopt);
  t.state_total(dairy) = 700;
  set_cell(t, all, 0, SizeA::z200_499, 1, 250);
  set_cell(t, all, 1, SizeA::z200_499, 1, 450);
  t.county_total(all, 0).head = 250;
  t.county_total(all, 1).head = 450;
  t.state_total(all) = 700;
  const auto out = impute_populations(st);
  REQUIRE(out.report.status == maxent::SolveStatus::Optimal);
  // Only Dairy = All satisfies both the Dairy state total and Dairy <= All.
  CHECK(out.cell(dairy, 0, SizeA::z200_499) == doctest::Approx(250.0).epsilon(1e-7));
  CHECK(out.cell(dairy, 1, SizeA::z200_499) == doctest::Approx(450.0).epsilon(1e-7));
}

TEST_CASE("slaughter county total stays below all shipments") {
  StateCensus st = empty_state(2);
  const int a = idx(ShipType::AllShipments), s = idx(ShipType::Slaughter);
  auto& t = st.shipments;
  set_cell(t, a, 0, SizeA::z20_49, 1, 25);
  set_cell(t, a, 1, SizeA::z20_49, 1, 40);
  t.county_total(a, 0).head = 25;
  t.county_total(a, 1).head = 40;
  t.state_total(a) = 65;
  set_cell(t, s, 0, SizeA::z20_49, 1, std::nullopt);
  set_cell(t, s, 1, SizeA::z20_49, 1, std::nullopt);
  t.state_total(s) = 60;
  const auto out = impute_shipments(st);
  REQUIRE(out.report.status == maxent::SolveStatus::Optimal);
  CHECK(out.county_total(s, 0) <= 25.0 + 1e-6);
  CHECK(out.county_total(s, 1) <= 40.0 + 1e-6);
  // Without the relation both would be 30; with it county 0 is capped at 25.
  CHECK(out.county_total(s, 0) == doctest::Approx(25.0).epsilon(1e-7));
  CHECK(out.county_total(s, 1) == doctest::Approx(35.0).epsilon(1e-7));
}

TEST_CASE("inconsistent totals are diagnosed") {
  StateCensus st = empty_state(1);
  const int all = idx(TypeA::AllCattle);
  set_cell(st.populations, all, 0, SizeA::z1_9, 2, 10);
  st.populations.state_total(all) = 5;
  CHECK_THROWS_AS(build_population_program(st), ImputationError);
}

TEST_CASE("Beef residual arithmetic") {
  ImputedSection sec;
  sec.state = "KS";
  sec.counties = {"20001"};
  sec.kinds = kTypeA;
  sec.cells.assign(kTypeA * kSizeA, 0.0);
  sec.cell(idx(TypeA::Dairy), 0, SizeA::z1_9) = 10;
  sec.cell(idx(TypeA::Preslaughter), 0, SizeA::z10_19) = 20;
  sec.cell(idx(TypeA::AllCattle), 0, SizeA::z1_9) = 50;
  sec.cell(idx(TypeA::Dairy), 0, SizeA::z500_up) = 600;
  sec.cell(idx(TypeA::AllCattle), 0, SizeA::z500_up) = 600;
  const auto subs = assemble_subpopulations(std::span(&sec, 1));
  CHECK(subs.pop(0, TypeB::Beef, SizeB::z1_19) == 20.0);
  CHECK(subs.pop(0, TypeB::Beef, SizeB::z200_up) == 0.0);
}

TEST_CASE("subpopulation and shipment files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "cattle_impute_rt";
  SubpopulationSet s;
  s.states = {"KS", "NE"};
  s.counties = {"20001", "31001"};
  s.head.resize(18);
  for (int i = 0; i < 18; ++i) s.head[i] = 0.5 * i + 1e-6;
  write_subpopulations(dir / "subpopulations.csv", s);
  const auto back = load_subpopulations(dir / "subpopulations.csv");
  CHECK(back.counties == s.counties);
  CHECK(back.states == s.states);
  CHECK(back.head == s.head);

  ImputedSection sec;
  sec.state = "KS";
  sec.counties = {"20001", "20003"};
  sec.kinds = kShipTypes;
  sec.cells.assign(kShipTypes * 2 * kSizeA, 0.0);
  for (std::size_t i = 0; i < sec.cells.size(); ++i) sec.cells[i] = 1.25 * i;
  write_imputed_shipments(dir / "imputed_shipments.csv", std::span(&sec, 1));
  const auto loaded = load_imputed_shipments(dir / "imputed_shipments.csv");
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].cells == sec.cells);
  const auto totals = shipment_totals(loaded);
  CHECK(totals.slaughter_500_up[1] == sec.cell(1, 1, SizeA::z500_up));
  std::filesystem::remove_all(dir);
}

TEST_CASE("solver noise is snapped to whole head") {
  CHECK(round_imputed(70.0 + 1e-9) == 70.0);
  CHECK(round_imputed(12.5) == 12.5);
  CHECK(round_imputed(0.3333333333) == 0.3333333333);
  CHECK(!std::signbit(round_imputed(-1e-12)));
  CHECK(round_imputed(-1e-12) == 0.0);
}
