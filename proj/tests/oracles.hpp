#pragma once

// Reference computations shared by the unit tests and the acceptance runner.
// They are written without calling into the library code they check.

#include <cmath>
#include <random>
#include <vector>

#include "cattle/epi.hpp"
#include "cattle/maxent.hpp"
#include "cattle/sim.hpp"

namespace oracle {

using namespace cattle;

using sim::Edge;

// Mean of the Gibbs distribution p_i ~ exp(-lambda * v_i).
inline double gibbs_mean(const std::vector<double>& v, double lambda) {
  double z = 0.0, m = 0.0;
  for (double x : v) {
    const double w = std::exp(-lambda * x);
    z += w;
    m += w * x;
  }
  return m / z;
}

inline std::vector<double> gibbs_by_bisection(const std::vector<double>& v, double target) {
  double lo = -50.0, hi = 50.0;  // mean decreases in lambda
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gibbs_mean(v, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);
  std::vector<double> p;
  double z = 0.0;
  for (double x : v) z += std::exp(-lambda * x);
  for (double x : v) p.push_back(std::exp(-lambda * x) / z);
  return p;
}

// Stationarity residual in original units from the reported multipliers.
inline double kkt_check(const maxent::EntropyProgram& p, const maxent::SolveReport& r) {
  const int n = p.variables();
  std::vector<double> g(n, 0.0);
  for (const auto& t : p.entropy) {
    const double u = t.scale * r.x[t.index];
    const double a = u + t.offset;
    g[t.index] += t.weight * t.scale * (std::log(a) + u / a);
  }
  for (std::size_t j = 0; j < p.cost.size(); ++j) g[j] += p.cost[j];
  for (const auto& e : p.a_eq) g[e.col] -= e.value * r.eq_multipliers[e.row];
  for (const auto& e : p.a_in) g[e.col] += e.value * r.ineq_multipliers[e.row];
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    g[j] += -r.lower_multipliers[j] + r.upper_multipliers[j];
    worst = std::max(worst, std::abs(g[j]));
  }
  return worst;
}

// Golden-section maximization of a concave function on [a, b].
template <class F>
inline double golden_max(F f, double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  for (int i = 0; i < 300; ++i) {
    if (f(x1) < f(x2)) {
      a = x1;
      x1 = x2;
      x2 = a + g * (b - a);
    } else {
      b = x2;
      x2 = x1;
      x1 = b - g * (b - a);
    }
  }
  return 0.5 * (a + b);
}

inline const epi::EpidemicParams kParams{1.2, 1.0, 0.01516, 5483.8};

// Written out independently of the library so the root is an oracle.
inline double r_star(const epi::EpidemicParams& e, double p, double ratio) {
  return std::pow((e.r0 - 1) / e.r0, 2) * e.n_bar * p / (e.mu + e.delta) * (ratio - 1);
}

inline double bisect_threshold(const epi::EpidemicParams& e, double ratio) {
  double lo = 0.0, hi = 1.0;
  while (r_star(e, hi, ratio) < 1.0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (r_star(e, mid, ratio) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Network {
  int nodes;
  std::vector<Edge> edges;
};

inline std::vector<Network> hand_built() {
  std::vector<Network> nets;
  // Directed rings where each node points to its next k neighbours.
  for (int k : {2, 3, 5}) {
    Network n{12, {}};
    for (int i = 0; i < n.nodes; ++i) {
      for (int s = 1; s <= k; ++s) n.edges.push_back({i, (i + s) % n.nodes});
    }
    nets.push_back(n);
  }
  // Complete digraph on 6 nodes.
  Network complete{6, {}};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i != j) complete.edges.push_back({i, j});
    }
  }
  nets.push_back(complete);
  // Hub with in- and out-spokes plus a ring among the leaves.
  Network hub{7, {}};
  for (int i = 1; i < 7; ++i) {
    hub.edges.push_back({0, i});
    hub.edges.push_back({i, 0});
    hub.edges.push_back({i, i % 6 + 1});
  }
  nets.push_back(hub);
  // Four-node network with a bidirectional core.
  nets.push_back({4, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 3}, {3, 1}, {3, 0}}});
  // Seeded random digraphs of increasing density.
  std::mt19937_64 rng(7);
  for (double density : {0.2, 0.3, 0.45, 0.6}) {
    Network r{15, {}};
    std::bernoulli_distribution coin(density);
    for (int i = 0; i < r.nodes; ++i) {
      for (int j = 0; j < r.nodes; ++j) {
        if (i != j && coin(rng)) r.edges.push_back({i, j});
      }
    }
    nets.push_back(r);
  }
  return nets;
}

inline double ratio_of(const Network& n) {
  const auto d = sim::degree_statistics(n.nodes, n.edges);
  return epi::moment_ratio(d.kin_kout_mean, d.k_out_mean);
}

// One county; every subpopulation stays put unless changed by the caller.
struct Toy {
  impute::SubpopulationSet subpops;
  movement::MovementParameterSet params;
  geo::DistanceClassifier geo;

  Toy() {
    subpops.states = {"KS"};
    subpops.counties = {"20001"};
    subpops.head.assign(kSubpopsPerCounty, 0.0);
    params.states = subpops.states;
    params.counties = subpops.counties;
    params.st.assign(kSubpopsPerCounty, 1.0);
    params.sl.assign(kSubpopsPerCounty, 0.0);
    params.dt.assign(kSubpopsPerCounty, 0.0);
    params.bt.assign(kSubpopsPerCounty, 0.0);
    geo = geo::DistanceClassifier({{"20001", 38.0, -98.0}});
  }
};

inline Toy binomial_toy() {
  Toy t;
  const int s = impute::SubpopulationSet::subpop_index(0, TypeB::Beef, SizeB::z200_up);
  t.subpops.head[s] = 1000;
  t.params.p[movement::p_index(TypeB::Beef, SizeB::z200_up, TypeB::Beef, SizeB::z200_up, geo::DistanceBin::d0)] = 0.01;
  t.params.st[s] = 0.99;
  return t;
}

}  // namespace oracle
