#include "cattle/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <json.hpp>

#include "cattle/csv.hpp"

namespace cattle::synth {

using geo::DistanceBin;
using impute::SubpopulationSet;
using json = nlohmann::ordered_json;

namespace {

struct StateCode {
  const char* code;
  const char* fips;
};

constexpr std::array<StateCode, 10> kStates = {{{"KS", "20"},
                                                {"NE", "31"},
                                                {"OK", "40"},
                                                {"TX", "48"},
                                                {"CO", "08"},
                                                {"IA", "19"},
                                                {"MO", "29"},
                                                {"SD", "46"},
                                                {"ND", "38"},
                                                {"MN", "27"}}};

constexpr StateCode kRemoteState{"AK", "02"};

// Mean operation counts per county by Size_A range.
constexpr std::array<double, kSizeA> kDairyOps = {1.5, 1.5, 2.0, 2.0, 1.5, 1.0, 0.5};
constexpr std::array<double, kSizeA> kPreslaughterOps = {1.5, 1.0, 1.0, 1.0, 1.0, 1.0, 0.6};
constexpr std::array<double, kSizeA> kBeefOps = {8.0, 6.0, 6.0, 4.0, 3.0, 1.5, 0.5};
constexpr std::int64_t kLargestHerd = 2500;

constexpr double kMilesPerDegreeLat = 69.05;

std::string county_fips(const StateCode& s, int k) {
  std::string n = std::to_string(2 * k + 1);
  return s.fips + std::string(3 - n.size(), '0') + n;
}

// Herd sizes of one type in one county, per Size_A range.
struct Herds {
  std::array<std::int64_t, kSizeA> ops{};
  std::array<std::int64_t, kSizeA> head{};
};

Herds draw_herds(std::mt19937_64& rng, const std::array<double, kSizeA>& mean, double factor) {
  Herds h;
  for (SizeA a : kAllSizeA) {
    std::poisson_distribution<int> count(mean[idx(a)] * factor);
    const int n = count(rng);
    const auto range = size_range(a);
    std::uniform_int_distribution<std::int64_t> size(range.lower, range.upper.value_or(kLargestHerd));
    h.ops[idx(a)] = n;
    for (int i = 0; i < n; ++i) h.head[idx(a)] += size(rng);
  }
  // Movement probabilities are shared by all counties, so an empty
  // subpopulation would force every inbound probability of its kind to zero.
  // Each Size_B range therefore gets at least one operation.
  for (SizeB j : kAllSizeB) {
    std::vector<SizeA> members;
    int ops = 0;
    for (SizeA a : kAllSizeA) {
      if (to_size_b(a) != j) continue;
      members.push_back(a);
      ops += static_cast<int>(h.ops[idx(a)]);
    }
    if (ops > 0) continue;
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    const SizeA a = members[pick(rng)];
    const auto range = size_range(a);
    std::uniform_int_distribution<std::int64_t> size(range.lower, range.upper.value_or(kLargestHerd));
    h.ops[idx(a)] = 1;
    h.head[idx(a)] = size(rng);
  }
  return h;
}

// Integers summing to `total` that follow `targets` (largest remainder).
std::vector<std::int64_t> apportion(const std::vector<double>& targets, std::int64_t total) {
  std::vector<std::int64_t> out(targets.size());
  std::int64_t used = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    out[i] = static_cast<std::int64_t>(std::floor(targets[i]));
    used += out[i];
  }
  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return targets[a] - std::floor(targets[a]) > targets[b] - std::floor(targets[b]);
  });
  for (std::size_t k = 0; used < total; ++k) {
    const std::size_t i = order[k % order.size()];
    if (targets[i] <= 0.0 && k < order.size()) continue;
    ++out[i];
    ++used;
  }
  return out;
}

// Moves head that is too small for its range down to a range that can hold
// it, then sets the fewest operations consistent with [ops·l, ops·u].
void settle_cells(CensusTable& t, int kind, int c) {
  for (int a = kSizeA - 1; a > 0; --a) {
    auto& cell = t.cell(kind, c, kAllSizeA[a]);
    if (cell.head && *cell.head > 0 && *cell.head < size_range(kAllSizeA[a]).lower) {
      *t.cell(kind, c, kAllSizeA[a - 1]).head += *cell.head;
      cell.head = 0;
    }
  }
  for (SizeA a : kAllSizeA) {
    auto& cell = t.cell(kind, c, a);
    const std::int64_t h = *cell.head;
    const auto range = size_range(a);
    if (h == 0) {
      cell.operations = 0;
    } else if (range.upper) {
      cell.operations = (h + *range.upper - 1) / *range.upper;
    } else {
      cell.operations = std::max<std::int64_t>(1, h / range.lower);
    }
  }
}

void fill_totals(CensusTable& t) {
  for (int k = 0; k < t.kinds(); ++k) {
    std::int64_t state = 0;
    std::array<std::int64_t, kSizeA> sizes{};
    for (int c = 0; c < t.counties(); ++c) {
      std::int64_t county = 0;
      for (SizeA a : kAllSizeA) {
        county += *t.cell(k, c, a).head;
        sizes[idx(a)] += *t.cell(k, c, a).head;
      }
      t.county_total(k, c).head = county;
      state += county;
    }
    for (SizeA a : kAllSizeA) t.size_total(k, a).head = sizes[idx(a)];
    t.state_total(k) = state;
  }
}

// Entropy program over the true subpopulations with every discrepancy term
// fixed at zero and the shipment rows left free.
movement::MovementParameterSet solve_truth(const movement::MovementInputs& in, double outward_target) {
  auto mp = movement::build_movement_program(in, movement::default_rate_bounds(), std::nullopt);
  auto& prog = mp.program;
  prog.cost.clear();
  auto fix_zero = [&](int v) { prog.lower[v] = prog.upper[v] = 0.0; };
  for (std::size_t s = 0; s < mp.pop_plus.size(); ++s) {
    fix_zero(mp.pop_plus[s]);
    fix_zero(mp.pop_minus[s]);
  }
  for (std::size_t c = 0; c < mp.mov_plus.size(); ++c) {
    fix_zero(mp.mov_plus[c]);
    fix_zero(mp.slt_plus[c]);
    fix_zero(mp.slt500[c]);
  }
  double reach = 0.0;
  for (int c = 0; c < in.distances.size(); ++c) {
    for (DistanceBin d : geo::kReachable) reach += in.distances.counties_in_bin(c, d);
  }
  reach /= std::max(1, in.distances.size());
  const double cap = outward_target / (kSubpopsPerCounty * std::max(1.0, reach));
  for (int v : mp.p_var) {
    if (v >= 0) prog.upper[v] = cap;
  }
  // Only feasibility matters for true rates. Small subpopulations can force
  // some shared probabilities toward zero, where the entropy duals diverge and
  // the iteration limit is reached at a point that is already feasible.
  auto r = maxent::solve_entropy(prog);
  const bool feasible = r.status == maxent::SolveStatus::MaxIter && r.eq_residual <= 1e-9 &&
                        r.ineq_residual <= 1e-9 && r.bound_residual <= 1e-12;
  if (r.status != maxent::SolveStatus::Optimal && !feasible) {
    throw SynthSolveError(std::string("truth program ") + maxent::to_string(r.status) +
                              (r.message.empty() ? "" : " (" + r.message + ")"),
                          r.status);
  }
  return movement::parameters_from(in, mp, std::move(r));
}

}  // namespace

void check_config(const SynthConfig& c) {
  if (c.states < 1 || c.states > static_cast<int>(kStates.size())) {
    throw SynthError("states must be between 1 and " + std::to_string(kStates.size()));
  }
  if (c.counties_per_state < 1 || c.counties_per_state > 499) {
    throw SynthError("counties per state must be between 1 and 499");
  }
  if (c.suppression_threshold < 0) throw SynthError("suppression threshold must be non-negative");
  if (c.perturbation && !(*c.perturbation > 0.0 && *c.perturbation < 1.0)) {
    throw SynthError("perturbation must lie in (0, 1)");
  }
  if (!(c.county_spacing_miles > 0.0) || !(c.state_spacing_miles > 0.0)) {
    throw SynthError("spacings must be positive");
  }
  if (!(c.outward_target > 0.0 && c.outward_target < 1.0)) {
    throw SynthError("outward target must lie in (0, 1)");
  }
}

Interval cell_interval(const CensusCell& cell, SizeA s, std::int64_t cap) {
  const auto range = size_range(s);
  const double n = static_cast<double>(cell.operations);
  return {n * range.lower, n * static_cast<double>(range.upper.value_or(cap))};
}

SynthDataset generate(const SynthConfig& config) {
  check_config(config);
  std::mt19937_64 rng(config.seed);
  SynthDataset out;
  out.config = config;
  GroundTruth& truth = out.truth;

  // Centroids: states on a square grid, counties on a jittered grid inside each.
  const int state_cols = static_cast<int>(std::ceil(std::sqrt(config.states)));
  const int county_cols = static_cast<int>(std::ceil(std::sqrt(config.counties_per_state)));
  const double base_lat = 37.0, base_lon = -101.0;
  const double miles_per_lon = kMilesPerDegreeLat * std::cos(base_lat * std::numbers::pi / 180.0);
  std::uniform_real_distribution<double> jitter(-config.county_spacing_miles / 8,
                                                config.county_spacing_miles / 8);
  std::uniform_real_distribution<double> county_factor(0.8, 1.2);

  std::vector<std::array<Herds, kTypeB>> herds;
  for (int si = 0; si < config.states; ++si) {
    StateCensus st;
    st.state = kStates[si].code;
    const double sy = (si / state_cols) * config.state_spacing_miles;
    const double sx = (si % state_cols) * config.state_spacing_miles;
    for (int k = 0; k < config.counties_per_state; ++k) {
      const std::string fips = county_fips(kStates[si], k);
      st.add_county(fips);
      const double y = sy + (k / county_cols) * config.county_spacing_miles + jitter(rng);
      const double x = sx + (k % county_cols) * config.county_spacing_miles + jitter(rng);
      truth.centroids.push_back({fips, base_lat + y / kMilesPerDegreeLat, base_lon + x / miles_per_lon});

      const double f = county_factor(rng);
      std::array<Herds, kTypeB> h;
      h[idx(TypeB::Dairy)] = draw_herds(rng, kDairyOps, f);
      h[idx(TypeB::Preslaughter)] = draw_herds(rng, kPreslaughterOps, f);
      h[idx(TypeB::Beef)] = draw_herds(rng, kBeefOps, f);
      const int c = st.populations.counties() - 1;
      for (SizeA a : kAllSizeA) {
        const auto& d = h[idx(TypeB::Dairy)];
        const auto& p = h[idx(TypeB::Preslaughter)];
        const auto& b = h[idx(TypeB::Beef)];
        st.populations.cell(idx(TypeA::Dairy), c, a) = CensusCell::known(d.ops[idx(a)], d.head[idx(a)]);
        st.populations.cell(idx(TypeA::Preslaughter), c, a) =
            CensusCell::known(p.ops[idx(a)], p.head[idx(a)]);
        st.populations.cell(idx(TypeA::AllCattle), c, a) =
            CensusCell::known(d.ops[idx(a)] + p.ops[idx(a)] + b.ops[idx(a)],
                              d.head[idx(a)] + p.head[idx(a)] + b.head[idx(a)]);
      }
      herds.push_back(h);
    }
    fill_totals(st.populations);
    truth.census.push_back(std::move(st));
  }

  // True subpopulations.
  SubpopulationSet& sp = truth.subpops;
  for (const auto& st : truth.census) {
    for (const auto& fips : st.counties) {
      sp.states.push_back(st.state);
      sp.counties.push_back(fips);
    }
  }
  const int real_counties = static_cast<int>(sp.counties.size());
  sp.head.assign(static_cast<std::size_t>(real_counties) * kSubpopsPerCounty, 0.0);
  for (int c = 0; c < real_counties; ++c) {
    for (TypeB t : kAllTypeB) {
      for (SizeA a : kAllSizeA) sp.pop(c, t, to_size_b(a)) += static_cast<double>(herds[c][idx(t)].head[idx(a)]);
    }
  }
  const double total_head = sp.total();

  std::int64_t remote_shipments = 0;
  if (config.perturbation) {
    StateCensus remote;
    remote.state = kRemoteState.code;
    truth.remote_county = county_fips(kRemoteState, 0);
    remote.add_county(truth.remote_county);
    fill_totals(remote.populations);
    truth.census.push_back(std::move(remote));
    truth.centroids.push_back({truth.remote_county, 61.2, -149.9});
    sp.states.push_back(kRemoteState.code);
    sp.counties.push_back(truth.remote_county);
    sp.head.resize(sp.head.size() + kSubpopsPerCounty, 0.0);
    remote_shipments = std::llround(*config.perturbation * movement::kWeeksPerYear * total_head);
    truth.remote_shipments = remote_shipments;
  }
  const int counties = static_cast<int>(sp.counties.size());

  movement::MovementInputs in;
  in.subpops = sp;
  in.shipments.counties = sp.counties;
  in.shipments.all_movements.assign(counties, 0.0);
  in.shipments.slaughter.assign(counties, 0.0);
  in.shipments.slaughter_500_up.assign(counties, 0.0);
  in.distances = geo::DistanceClassifier(truth.centroids);
  truth.rates = solve_truth(in, config.outward_target);
  truth.rates.d_star = 0.0;
  const auto& rates = truth.rates;

  // Expected yearly shipments, split over Size_A by All Cattle head share.
  auto& ship = truth.shipments;
  ship.counties = sp.counties;
  ship.all_movements.assign(counties, 0.0);
  ship.slaughter.assign(counties, 0.0);
  ship.slaughter_500_up.assign(counties, 0.0);
  int c = 0;
  for (auto& st : truth.census) {
    for (int k = 0; k < st.populations.counties(); ++k, ++c) {
      std::vector<double> all_target(kSizeA, 0.0), sl_target(kSizeA, 0.0);
      for (SizeB j : kAllSizeB) {
        double e_all = 0.0;
        for (TypeB t : kAllTypeB) {
          const int s = SubpopulationSet::subpop_index(c, t, j);
          e_all += sp.head[s] * (movement::outgoing_probability(rates, in.distances, c, t, j) + rates.sl[s]);
        }
        const int ps = SubpopulationSet::subpop_index(c, TypeB::Preslaughter, j);
        const double e_sl = sp.head[ps] * rates.sl[ps];
        double share = 0.0;
        for (SizeA a : kAllSizeA) {
          if (to_size_b(a) == j) share += static_cast<double>(*st.populations.cell(idx(TypeA::AllCattle), k, a).head);
        }
        if (share == 0.0) continue;
        for (SizeA a : kAllSizeA) {
          if (to_size_b(a) != j) continue;
          const double w = static_cast<double>(*st.populations.cell(idx(TypeA::AllCattle), k, a).head) / share;
          all_target[idx(a)] += movement::kWeeksPerYear * e_all * w;
          sl_target[idx(a)] += movement::kWeeksPerYear * e_sl * w;
        }
      }
      std::int64_t t_all = std::llround(std::accumulate(all_target.begin(), all_target.end(), 0.0));
      const std::int64_t t_sl = std::llround(std::accumulate(sl_target.begin(), sl_target.end(), 0.0));
      if (st.counties[k] == truth.remote_county) {
        all_target.assign(kSizeA, 0.0);
        all_target[idx(SizeA::z500_up)] = static_cast<double>(remote_shipments);
        t_all = remote_shipments;
      }
      const auto all_cells = apportion(all_target, t_all);
      // The 500+ slaughter cell is rounded down so it never exceeds what the
      // largest Preslaughter herds can send.
      const auto big = static_cast<std::int64_t>(std::floor(sl_target[idx(SizeA::z500_up)]));
      std::vector<double> rest(sl_target.begin(), sl_target.end() - 1);
      auto sl_cells = apportion(rest, t_sl - big);
      sl_cells.push_back(big);
      for (SizeA a : kAllSizeA) {
        st.shipments.cell(idx(ShipType::AllShipments), k, a) = CensusCell::known(0, all_cells[idx(a)]);
        st.shipments.cell(idx(ShipType::Slaughter), k, a) = CensusCell::known(0, sl_cells[idx(a)]);
      }
      settle_cells(st.shipments, idx(ShipType::AllShipments), k);
      settle_cells(st.shipments, idx(ShipType::Slaughter), k);
      ship.all_movements[c] = static_cast<double>(t_all);
      ship.slaughter[c] = static_cast<double>(t_sl);
      ship.slaughter_500_up[c] =
          static_cast<double>(*st.shipments.cell(idx(ShipType::Slaughter), k, SizeA::z500_up).head);
    }
    fill_totals(st.shipments);
  }

  for (auto& st : truth.census) {
    StateCensus copy = st;
    const auto warnings = validate(copy);
    if (!warnings.empty()) {
      throw SynthError("generated state " + st.state + " fails validation: " + warnings.front().where +
                       ": " + warnings.front().message);
    }
  }

  // Disclosure suppression.
  out.census = truth.census;
  for (auto& st : out.census) {
    for (CensusTable* t : {&st.populations, &st.shipments}) {
      for (int k = 0; k < t->kinds(); ++k) {
        for (int cc = 0; cc < t->counties(); ++cc) {
          for (SizeA a : kAllSizeA) {
            auto& cell = t->cell(k, cc, a);
            if (cell.operations >= 1 && cell.operations <= config.suppression_threshold) {
              cell.head.reset();
              ++truth.suppressed_cells;
            }
          }
        }
      }
    }
  }
  return out;
}

namespace {

json census_cells(const std::vector<StateCensus>& truth, const std::vector<StateCensus>& published,
                  bool populations) {
  json rows = json::array();
  for (std::size_t si = 0; si < truth.size(); ++si) {
    const auto& t = populations ? truth[si].populations : truth[si].shipments;
    const auto& p = populations ? published[si].populations : published[si].shipments;
    for (int k = 0; k < t.kinds(); ++k) {
      for (int c = 0; c < t.counties(); ++c) {
        for (SizeA a : kAllSizeA) {
          const auto& cell = t.cell(k, c, a);
          json row;
          row["state"] = truth[si].state;
          row["county"] = truth[si].counties[c];
          row[populations ? "cattle_type" : "ship_type"] =
              populations ? token(static_cast<TypeA>(k)) : token(static_cast<ShipType>(k));
          row["size_range"] = token(a);
          row["operations"] = cell.operations;
          row["head"] = *cell.head;
          row["suppressed"] = !p.cell(k, c, a).disclosed();
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const SynthDataset& d) {
  write_census(dir, d.census);
  geo::write_centroids(dir / "centroids.csv", d.truth.centroids);

  const auto& t = d.truth;
  json j;
  j["seed"] = d.config.seed;
  j["states"] = d.config.states;
  j["counties_per_state"] = d.config.counties_per_state;
  j["suppression_threshold"] = d.config.suppression_threshold;
  j["suppressed_cells"] = t.suppressed_cells;
  j["remote_county"] = t.remote_county;
  j["remote_shipments"] = t.remote_shipments;
  j["total_head"] = t.subpops.total();
  j["populations"] = census_cells(t.census, d.census, true);
  j["shipments"] = census_cells(t.census, d.census, false);

  json subpops = json::array();
  json demo = json::array();
  for (int c = 0; c < t.subpops.county_count(); ++c) {
    for (TypeB ty : kAllTypeB) {
      for (SizeB sz : kAllSizeB) {
        const int s = SubpopulationSet::subpop_index(c, ty, sz);
        subpops.push_back({{"state", t.subpops.states[c]},
                           {"county", t.subpops.counties[c]},
                           {"type", token(ty)},
                           {"size", token(sz)},
                           {"head", t.subpops.head[s]}});
        demo.push_back({{"county", t.subpops.counties[c]},
                        {"type", token(ty)},
                        {"size", token(sz)},
                        {"st", t.rates.st[s]},
                        {"sl", t.rates.sl[s]},
                        {"dt", t.rates.dt[s]},
                        {"bt", t.rates.bt[s]}});
      }
    }
  }
  j["subpopulations"] = std::move(subpops);

  json totals = json::array();
  for (std::size_t c = 0; c < t.shipments.counties.size(); ++c) {
    totals.push_back({{"county", t.shipments.counties[c]},
                      {"all_movements", t.shipments.all_movements[c]},
                      {"slaughter", t.shipments.slaughter[c]},
                      {"slaughter_500_up", t.shipments.slaughter_500_up[c]}});
  }
  j["shipment_totals"] = std::move(totals);

  json p = json::array();
  for (TypeB t1 : kAllTypeB) {
    for (SizeB j1 : kAllSizeB) {
      for (TypeB t2 : kAllTypeB) {
        if (!movement::movement_allowed(t1, t2)) continue;
        for (SizeB j2 : kAllSizeB) {
          for (DistanceBin bin : geo::kReachable) {
            p.push_back({{"t1", token(t1)},
                         {"j1", token(j1)},
                         {"t2", token(t2)},
                         {"j2", token(j2)},
                         {"dist", geo::token(bin)},
                         {"p", t.rates.param(t1, j1, t2, j2, bin)}});
          }
        }
      }
    }
  }
  j["rates"] = {{"p", std::move(p)}, {"demographics", std::move(demo)}};
  csv::write_file(dir / "ground_truth.json", j.dump(1) + "\n");
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw SynthError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw SynthError(path.string() + ": " + e.what());
  }
  GroundTruth t;
  try {
    t.remote_county = j.at("remote_county").get<std::string>();
    t.remote_shipments = j.at("remote_shipments").get<std::int64_t>();
    t.suppressed_cells = j.at("suppressed_cells").get<long long>();

    auto state_of = [&](const std::string& code) -> StateCensus& {
      for (auto& s : t.census) {
        if (s.state == code) return s;
      }
      t.census.emplace_back().state = code;
      return t.census.back();
    };
    for (bool pops : {true, false}) {
      for (const auto& row : j.at(pops ? "populations" : "shipments")) {
        StateCensus& st = state_of(row.at("state").get<std::string>());
        const std::string county = row.at("county").get<std::string>();
        const auto known = st.county_index(county);
        const int c = known ? *known : st.add_county(county);
        const SizeA a = parse_size_a(row.at("size_range").get<std::string>());
        auto& cell = pops ? st.populations.cell(idx(parse_type_a(row.at("cattle_type").get<std::string>())), c, a)
                          : st.shipments.cell(idx(parse_ship_type(row.at("ship_type").get<std::string>())), c, a);
        cell = CensusCell::known(row.at("operations").get<std::int64_t>(), row.at("head").get<std::int64_t>());
      }
    }
    for (auto& st : t.census) {
      fill_totals(st.populations);
      fill_totals(st.shipments);
    }

    auto& sp = t.subpops;
    for (const auto& row : j.at("subpopulations")) {
      const std::string county = row.at("county").get<std::string>();
      if (sp.counties.empty() || sp.counties.back() != county) {
        sp.states.push_back(row.at("state").get<std::string>());
        sp.counties.push_back(county);
        sp.head.resize(sp.head.size() + kSubpopsPerCounty, 0.0);
      }
      sp.pop(sp.county_count() - 1, parse_type_b(row.at("type").get<std::string>()),
             parse_size_b(row.at("size").get<std::string>())) = row.at("head").get<double>();
    }
    for (const auto& row : j.at("shipment_totals")) {
      t.shipments.counties.push_back(row.at("county").get<std::string>());
      t.shipments.all_movements.push_back(row.at("all_movements").get<double>());
      t.shipments.slaughter.push_back(row.at("slaughter").get<double>());
      t.shipments.slaughter_500_up.push_back(row.at("slaughter_500_up").get<double>());
    }
    auto& r = t.rates;
    r.states = sp.states;
    r.counties = sp.counties;
    const auto& rates = j.at("rates");
    for (const auto& row : rates.at("p")) {
      r.p[movement::p_index(parse_type_b(row.at("t1").get<std::string>()),
                            parse_size_b(row.at("j1").get<std::string>()),
                            parse_type_b(row.at("t2").get<std::string>()),
                            parse_size_b(row.at("j2").get<std::string>()),
                            geo::parse_distance_bin(row.at("dist").get<std::string>()))] =
          row.at("p").get<double>();
    }
    for (const auto& row : rates.at("demographics")) {
      r.st.push_back(row.at("st").get<double>());
      r.sl.push_back(row.at("sl").get<double>());
      r.dt.push_back(row.at("dt").get<double>());
      r.bt.push_back(row.at("bt").get<double>());
    }
    if (static_cast<int>(r.st.size()) != sp.subpop_count()) {
      throw SynthError(path.string() + ": demographics do not cover every subpopulation");
    }
  } catch (const json::exception& e) {
    throw SynthError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw SynthError(path.string() + ": " + e.what());
  }
  return t;
}

}  // namespace cattle::synth
