#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "cattle/sim.hpp"

using namespace cattle;
using namespace oracle;
using namespace cattle::sim;
using geo::DistanceBin;
using impute::SubpopulationSet;
using movement::MovementParameterSet;

namespace {

double total_all_movements(const SimulationSummary& s) {
  double sum = 0.0;
  for (SizeB j : kAllSizeB) sum += s.stat(0, Metric::AllMovements, j).mean;
  return sum;
}

}  // namespace

TEST_CASE("events are binned by their own size") {
  const std::vector<ShipmentEvent> one{{0, 0, 0, 1, 25}};
  auto b = yearly_bins(1, one);
  CHECK(b.at(0, Metric::AllMovements, SizeB::z20_199) == 25);
  CHECK(b.at(0, Metric::AllMovements, SizeB::z1_19) == 0);

  const std::vector<ShipmentEvent> three{{0, 0, 0, 1, 5}, {0, 0, 0, 2, 15}, {0, 0, 0, kSlaughter, 300}};
  b = yearly_bins(1, three);
  CHECK(b.at(0, Metric::AllMovements, SizeB::z1_19) == 20);
  CHECK(b.at(0, Metric::AllMovements, SizeB::z20_199) == 0);
  CHECK(b.at(0, Metric::AllMovements, SizeB::z200_up) == 300);
  CHECK(b.at(0, Metric::Slaughter, SizeB::z200_up) == 300);
  CHECK(b.at(0, Metric::Slaughter, SizeB::z1_19) == 0);
}

TEST_CASE("degree statistics of a hand-counted graph") {
  const std::vector<Edge> edges{{0, 1}, {0, 2}};
  const auto d = degree_statistics(3, edges);
  CHECK(d.k_out == std::vector<int>{2, 0, 0});
  CHECK(d.k_in == std::vector<int>{0, 1, 1});
  CHECK(d.kin_kout_mean == 0.0);
  CHECK(d.k_out_mean == doctest::Approx(2.0 / 3.0));

  const auto empty = degree_statistics(3, {});
  CHECK(empty.k_in_mean == 0.0);
  CHECK(empty.k_out_mean == 0.0);

  // A chain 0->1->2 with node 2 as the restricted destination.
  const std::vector<Edge> chain{{0, 1}, {1, 2}, {1, 1}};
  const std::vector<char> ts{0, 0, 1};
  const auto c = degree_statistics(3, chain, ts);
  CHECK(c.edges == 2);
  CHECK(c.kin_kout_mean == doctest::Approx(1.0 / 3.0));
  CHECK(c.k_out_ts == std::vector<int>{0, 1, 0});
  CHECK(c.kin_kout_ts_mean == doctest::Approx(1.0 / 3.0));
  CHECK(c.k_out_mean == doctest::Approx(static_cast<double>(c.edges) / 3));
}

TEST_CASE("identity parameters keep populations constant") {
  Toy t;
  for (int s = 0; s < kSubpopsPerCounty; ++s) t.subpops.head[s] = 100 + s;
  SimulationConfig cfg;
  cfg.years = 30;
  cfg.replicates = 2;
  const auto s = simulate(t.params, t.subpops, t.geo, cfg);
  CHECK(s.final_head_mean == s.initial_head);
  for (const auto& b : s.bins) CHECK(b.mean == 0.0);
  for (const auto& w : s.network) CHECK(w.edges == 0);
  CHECK(s.conservation_violations == 0);
}

TEST_CASE("binomial toy matches its expectation") {
  const Toy t = binomial_toy();
  SimulationConfig cfg;
  cfg.years = 1;
  cfg.replicates = 1000;
  cfg.network = false;
  const auto s = simulate(t.params, t.subpops, t.geo, cfg);
  // Yearly outflow is a sum of 52 independent Binomial(1000, 0.01) draws.
  const double mean = 1000 * 0.01 * 52;
  const double se = std::sqrt(52 * 1000 * 0.01 * 0.99 / 1000.0);
  CHECK(std::abs(total_all_movements(s) - mean) <= 3 * se);
  CHECK(s.conservation_violations == 0);
  CHECK(s.final_head_mean == 1000);
}

TEST_CASE("99 percent intervals cover the analytic mean") {
  Toy t = binomial_toy();
  // Weekly draws of ~300 head keep every event inside the 200+ bin, so that
  // bin alone carries the whole yearly outflow.
  const int s = SubpopulationSet::subpop_index(0, TypeB::Beef, SizeB::z200_up);
  t.params.p[movement::p_index(TypeB::Beef, SizeB::z200_up, TypeB::Beef, SizeB::z200_up, DistanceBin::d0)] = 0.3;
  t.params.st[s] = 0.7;
  const double mean = 1000 * 0.3 * 52;
  int covered = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    SimulationConfig cfg;
    cfg.years = 1;
    cfg.replicates = 40;
    cfg.network = false;
    cfg.seed = 1000 + k;
    const auto r = simulate(t.params, t.subpops, t.geo, cfg);
    const auto& b = r.stat(0, Metric::AllMovements, SizeB::z200_up);
    covered += b.ci_lo <= mean && mean <= b.ci_hi;
  }
  CHECK(covered >= 0.95 * trials);
}

TEST_CASE("simulation is deterministic for a seed") {
  Toy t = binomial_toy();
  const int s = SubpopulationSet::subpop_index(0, TypeB::Dairy, SizeB::z20_199);
  t.subpops.head[s] = 500;
  t.params.st[s] = 0.9;
  t.params.sl[s] = 0.02;
  t.params.dt[s] = 0.03;
  t.params.bt[s] = 0.05;
  t.params.p[movement::p_index(TypeB::Dairy, SizeB::z20_199, TypeB::Beef, SizeB::z1_19, DistanceBin::d0)] = 0.05;
  SimulationConfig cfg;
  cfg.years = 3;
  cfg.replicates = 6;
  std::vector<ShipmentEvent> a, b;
  cfg.threads = 1;
  const auto s1 = simulate(t.params, t.subpops, t.geo, cfg, [&](const ShipmentEvent& e) { a.push_back(e); });
  simulate(t.params, t.subpops, t.geo, cfg, [&](const ShipmentEvent& e) { b.push_back(e); });
  cfg.threads = 4;
  const auto s2 = simulate(t.params, t.subpops, t.geo, cfg);
  REQUIRE(a.size() == b.size());
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].week == b[i].week && a[i].origin == b[i].origin && a[i].dest == b[i].dest &&
           a[i].head == b[i].head && a[i].replicate == b[i].replicate;
  }
  CHECK(same);
  for (std::size_t k = 0; k < s1.bins.size(); ++k) {
    CHECK(s1.bins[k].mean == s2.bins[k].mean);
    CHECK(s1.bins[k].ci_hi == s2.bins[k].ci_hi);
  }
  CHECK(s1.conservation_violations == 0);

  // The stream of one replicate bins to the same totals the summary used.
  std::vector<ShipmentEvent> first;
  for (const auto& e : a) {
    if (e.replicate == 0 && e.week < 52) first.push_back(e);
  }
  const auto bins = yearly_bins(1, first);
  cfg.replicates = 1;
  cfg.years = 1;
  const auto single = simulate(t.params, t.subpops, t.geo, cfg);
  for (SizeB j : kAllSizeB) {
    CHECK(single.stat(0, Metric::AllMovements, j).mean == bins.at(0, Metric::AllMovements, j));
    CHECK(single.stat(0, Metric::Slaughter, j).mean == bins.at(0, Metric::Slaughter, j));
  }
}

TEST_CASE("row sums away from one are refused") {
  Toy t = binomial_toy();
  const int s = SubpopulationSet::subpop_index(0, TypeB::Beef, SizeB::z200_up);
  t.params.st[s] = 0.995;
  CHECK_THROWS_AS(simulate(t.params, t.subpops, t.geo, SimulationConfig{}), SimulationError);
  SimulationConfig bad;
  bad.replicates = 0;
  CHECK_THROWS_AS(check_config(bad), SimulationError);
}

TEST_CASE("summary and network files round trip") {
  const Toy t = binomial_toy();
  SimulationConfig cfg;
  cfg.years = 2;
  cfg.replicates = 3;
  const auto s = simulate(t.params, t.subpops, t.geo, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "cattle_sim_test";
  write_summary(dir / "sim_summary.csv", s);
  write_network(dir / "network_stats.csv", s.network);
  const auto back = load_summary(dir / "sim_summary.csv");
  CHECK(back.counties == s.counties);
  for (std::size_t k = 0; k < s.bins.size(); ++k) CHECK(back.bins[k].mean == s.bins[k].mean);
  const auto net = load_network(dir / "network_stats.csv");
  REQUIRE(net.size() == s.network.size());
  CHECK(net.back().outward_fraction == s.network.back().outward_fraction);
  std::filesystem::remove_all(dir);
}
