#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "cattle/epi.hpp"

using namespace cattle;
using namespace oracle;
using namespace cattle::epi;
using sim::Edge;

TEST_CASE("closed form agrees with the bisection root") {
  const auto nets = hand_built();
  REQUIRE(nets.size() == 10);
  for (const auto& n : nets) {
    const double ratio = ratio_of(n);
    REQUIRE(ratio > 1.0);
    const double closed = critical_rate(kParams, ratio);
    const double root = bisect_threshold(kParams, ratio);
    CHECK(std::abs(closed - root) <= 1e-10 * root);
    CHECK(reproductive_number(kParams, closed, ratio) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("k-regular networks have moment ratio k") {
  for (int k : {2, 3, 5}) {
    Network n{12, {}};
    for (int i = 0; i < n.nodes; ++i) {
      for (int s = 1; s <= k; ++s) n.edges.push_back({i, (i + s) % n.nodes});
    }
    CHECK(ratio_of(n) == static_cast<double>(k));
  }
}

TEST_CASE("threshold monotonicity") {
  const double ratio = 3.5, base = critical_rate(kParams, ratio);
  auto with = [&](auto change) {
    EpidemicParams e = kParams;
    change(e);
    return critical_rate(e, ratio);
  };
  CHECK(with([](EpidemicParams& e) { e.r0 *= 1.01; }) < base);
  CHECK(with([](EpidemicParams& e) { e.n_bar *= 1.01; }) < base);
  CHECK(with([](EpidemicParams& e) { e.mu *= 1.01; }) > base);
  CHECK(with([](EpidemicParams& e) { e.delta *= 1.01; }) > base);
  CHECK(critical_rate(kParams, ratio * 1.01) < base);
  CHECK(with([](EpidemicParams& e) { e.n_bar *= 2; }) == doctest::Approx(base / 2).epsilon(1e-14));
}

TEST_CASE("degenerate networks have no threshold") {
  CHECK_THROWS_AS(moment_ratio(0.0, 0.0), EpiError);
  CHECK_THROWS_AS(critical_rate(kParams, 1.0), EpiError);
  EpidemicParams sub = kParams;
  sub.r0 = 1.0;
  CHECK_THROWS_AS(critical_rate(sub, 3.0), EpiError);
}

TEST_CASE("restricted threshold is at least the full one") {
  // Nodes 0..3 form a complete digraph and each also ships to the
  // Preslaughter nodes 4..6: full ratio 72/24 = 3, restricted 36/24 = 1.5.
  std::vector<Edge> edges;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 7; ++j) {
      if (i != j) edges.push_back({i, j});
    }
  }
  const std::vector<char> ts{0, 0, 0, 0, 1, 1, 1};
  const auto d = sim::degree_statistics(7, edges, ts);
  sim::WeeklyNetwork w;
  w.k_out_mean = d.k_out_mean;
  w.kin_kout_mean = d.kin_kout_mean;
  w.kin_kout_ts_mean = d.kin_kout_ts_mean;
  CHECK(moment_ratio(w.kin_kout_mean, w.k_out_mean) == doctest::Approx(3.0));
  CHECK(moment_ratio(w.kin_kout_ts_mean, w.k_out_mean) == doctest::Approx(1.5));
  CHECK(critical_rate(kParams, w, true) > critical_rate(kParams, w, false));
}

TEST_CASE("report rows over weekly snapshots") {
  std::vector<sim::WeeklyNetwork> weeks(3);
  const double ratios[] = {2.0, 3.0, 5.0};
  for (int i = 0; i < 3; ++i) {
    weeks[i].week = i;
    weeks[i].k_out_mean = 2.0;
    weeks[i].kin_kout_mean = 2.0 * ratios[i];
    weeks[i].kin_kout_ts_mean = 2.0 * ratios[i] * 0.8;
    weeks[i].outward_fraction = 0.1 + 0.01 * i;
  }
  weeks.push_back({});  // an empty week has no threshold
  const auto r = thresholds(kParams, 0.105, weeks);
  CHECK(r.undefined_weeks == 1);
  CHECK(r.p_c.min == doctest::Approx(critical_rate(kParams, 5.0)));
  CHECK(r.p_c.max == doctest::Approx(critical_rate(kParams, 2.0)));
  CHECK(r.p_c.min <= r.p_c.average);
  CHECK(r.p_c.average <= r.p_c.max);
  CHECK(r.p_mean.min == 0.0);
  CHECK(r.p_mean.max == doctest::Approx(0.12));
  CHECK(r.p_c_ts.average > r.p_c.average);
}
