#include "cattle/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "cattle/csv.hpp"

namespace cattle::sim {

using geo::DistanceBin;
using impute::SubpopulationSet;
using movement::MovementParameterSet;

std::string_view token(Metric m) { return m == Metric::AllMovements ? "all_movements" : "slaughter"; }

void check_config(const SimulationConfig& c) {
  if (c.years < 1) throw SimulationError("years must be at least 1");
  if (c.weeks_per_year < 1) throw SimulationError("weeks_per_year must be at least 1");
  if (c.replicates < 1) throw SimulationError("replicates must be at least 1");
  if (!(c.row_sum_tolerance >= 0.0)) throw SimulationError("row_sum_tolerance must be non-negative");
}

BinStatistic summarize(std::span<const double> samples) {
  BinStatistic b;
  b.samples = static_cast<int>(samples.size());
  if (samples.empty()) return b;
  double sum = 0.0;
  for (double v : samples) sum += v;
  b.mean = sum / samples.size();
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - b.mean) * (v - b.mean);
    b.sd = std::sqrt(ss / (samples.size() - 1));
  }
  const double half = kZ99 * b.sd / std::sqrt(static_cast<double>(samples.size()));
  b.ci_lo = b.mean - half;
  b.ci_hi = b.mean + half;
  return b;
}

void YearlyBins::add(const ShipmentEvent& e) {
  const int c = e.origin / kSubpopsPerCounty;
  const SizeB j = size_b_of_count(e.head);
  const double h = static_cast<double>(e.head);
  at(c, Metric::AllMovements, j) += h;
  if (e.dest == kSlaughter) at(c, Metric::Slaughter, j) += h;
}

YearlyBins yearly_bins(int counties, std::span<const ShipmentEvent> events) {
  YearlyBins bins(counties);
  for (const auto& e : events) {
    if (e.head <= 0) continue;
    if (e.origin < 0 || e.origin / kSubpopsPerCounty >= counties) {
      throw SimulationError("event origin out of range");
    }
    bins.add(e);
  }
  return bins;
}

DegreeStats degree_statistics(int nodes, std::span<const Edge> edges,
                              std::span<const char> ts_destination) {
  DegreeStats d;
  d.k_in.assign(nodes, 0);
  d.k_out.assign(nodes, 0);
  d.k_out_ts.assign(nodes, 0);
  for (const Edge& e : edges) {
    if (e.from == e.to) continue;
    ++d.k_out[e.from];
    ++d.k_in[e.to];
    if (!ts_destination.empty() && ts_destination[e.to]) ++d.k_out_ts[e.from];
    ++d.edges;
  }
  if (nodes == 0) return d;
  double kin = 0, kout = 0, kk = 0, kts = 0, kkts = 0;
  for (int i = 0; i < nodes; ++i) {
    kin += d.k_in[i];
    kout += d.k_out[i];
    kk += static_cast<double>(d.k_in[i]) * d.k_out[i];
    kts += d.k_out_ts[i];
    kkts += static_cast<double>(d.k_in[i]) * d.k_out_ts[i];
  }
  d.k_in_mean = kin / nodes;
  d.k_out_mean = kout / nodes;
  d.kin_kout_mean = kk / nodes;
  d.k_out_ts_mean = kts / nodes;
  d.kin_kout_ts_mean = kkts / nodes;
  return d;
}

namespace {

// Probability row of one origin (type, size): [t2][j2][bin].
using Row = std::array<double, kTypeB * kSizeB * geo::kReachableBins>;

struct Neighbor {
  int county;
  int bin;
};

struct Plan {
  int counties = 0;
  std::vector<std::vector<Neighbor>> neighbors;  // per county, reachable only
  std::array<Row, kSubpopsPerCounty> rows{};     // per origin (t1, j1)
  std::vector<double> sl, dt, bt;                // per subpopulation
};

Plan make_plan(const MovementParameterSet& params, const geo::DistanceClassifier& geo) {
  Plan plan;
  plan.counties = geo.size();
  plan.neighbors.resize(plan.counties);
  for (int c1 = 0; c1 < plan.counties; ++c1) {
    for (int c2 = 0; c2 < plan.counties; ++c2) {
      const DistanceBin b = geo.bin(c1, c2);
      if (b != DistanceBin::too_far) plan.neighbors[c1].push_back({c2, geo::idx(b)});
    }
  }
  for (TypeB t1 : kAllTypeB) {
    for (SizeB j1 : kAllSizeB) {
      Row& row = plan.rows[idx(t1) * kSizeB + idx(j1)];
      for (TypeB t2 : kAllTypeB) {
        for (SizeB j2 : kAllSizeB) {
          for (DistanceBin d : geo::kReachable) {
            const double p = movement::movement_allowed(t1, t2) ? params.param(t1, j1, t2, j2, d) : 0.0;
            row[(idx(t2) * kSizeB + idx(j2)) * geo::kReachableBins + geo::idx(d)] = std::clamp(p, 0.0, 1.0);
          }
        }
      }
    }
  }
  auto clamp01 = [](std::vector<double> v) {
    for (double& x : v) x = std::clamp(x, 0.0, 1.0);
    return v;
  };
  plan.sl = clamp01(params.sl);
  plan.dt = clamp01(params.dt);
  plan.bt = clamp01(params.bt);
  return plan;
}

struct ReplicateResult {
  std::vector<YearlyBins> years;
  std::vector<WeeklyNetwork> network;
  std::vector<double> node_k_in, node_k_out;
  double initial_head = 0.0;
  double final_head = 0.0;
  long long violations = 0;
};

std::mt19937_64 replicate_engine(std::uint64_t seed, int replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate)};
  return std::mt19937_64(seq);
}

std::int64_t draw_binomial(std::mt19937_64& rng, std::int64_t n, double q) {
  if (n <= 0 || q <= 0.0) return 0;
  if (q >= 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(n, q);
  return dist(rng);
}

ReplicateResult run_replicate(const Plan& plan, const SubpopulationSet& subpops,
                              const SimulationConfig& cfg, int replicate, const EventSink& sink) {
  auto rng = replicate_engine(cfg.seed, replicate);
  const int n_sub = plan.counties * kSubpopsPerCounty;
  std::vector<std::int64_t> cur(n_sub), next(n_sub), in(n_sub);
  ReplicateResult r;
  for (int s = 0; s < n_sub; ++s) {
    const double h = std::max(0.0, subpops.head[s]);
    if (cfg.integerization == Integerization::Round) {
      cur[s] = std::llround(h);
    } else {
      const double f = std::floor(h);
      std::bernoulli_distribution frac(h - f);
      cur[s] = static_cast<std::int64_t>(f) + (frac(rng) ? 1 : 0);
    }
    r.initial_head += static_cast<double>(cur[s]);
  }

  const bool network = cfg.network && replicate == 0;
  std::vector<char> ts_dest;
  if (network) {
    ts_dest.assign(n_sub, 0);
    for (int s = 0; s < n_sub; ++s) ts_dest[s] = (s % kSubpopsPerCounty) / kSizeB == idx(TypeB::Preslaughter);
    r.node_k_in.assign(n_sub, 0.0);
    r.node_k_out.assign(n_sub, 0.0);
  }
  std::vector<Edge> edges;

  const int weeks = cfg.years * cfg.weeks_per_year;
  YearlyBins year(plan.counties);
  for (int w = 0; w < weeks; ++w) {
    std::fill(next.begin(), next.end(), 0);
    std::fill(in.begin(), in.end(), 0);
    edges.clear();
    double bd_start = 0.0, bd_out = 0.0;
    std::vector<std::int64_t> stay(n_sub, 0), born(n_sub, 0);
    std::int64_t week_removed = 0, week_born = 0;
    for (int s = 0; s < n_sub; ++s) {
      const std::int64_t n = cur[s];
      if (n == 0) continue;
      const int c = s / kSubpopsPerCounty;
      const int tj = s % kSubpopsPerCounty;
      const bool beef_or_dairy = tj / kSizeB != idx(TypeB::Preslaughter);
      if (beef_or_dairy) bd_start += static_cast<double>(n);

      // Sequential conditional binomials realize the multinomial split.
      std::int64_t remaining = n;
      double mass = 1.0;
      auto take = [&](double p) -> std::int64_t {
        if (remaining == 0 || p <= 0.0) return 0;
        const double q = mass > p ? p / mass : 1.0;
        const std::int64_t k = draw_binomial(rng, remaining, q);
        remaining -= k;
        mass -= p;
        return k;
      };
      const std::int64_t slaughtered = take(plan.sl[s]);
      const std::int64_t expired = take(plan.dt[s]);
      std::int64_t out = 0;
      const Row& row = plan.rows[tj];
      if (slaughtered > 0) {
        const ShipmentEvent e{replicate, w, s, kSlaughter, slaughtered};
        year.add(e);
        if (sink) sink(e);
      }
      for (const Neighbor& nb : plan.neighbors[c]) {
        if (remaining == 0) break;
        for (int t2j2 = 0; t2j2 < kSubpopsPerCounty; ++t2j2) {
          const double p = row[t2j2 * geo::kReachableBins + nb.bin];
          const std::int64_t k = take(p);
          if (k == 0) continue;
          const int dest = nb.county * kSubpopsPerCounty + t2j2;
          out += k;
          in[dest] += k;
          const ShipmentEvent e{replicate, w, s, dest, k};
          year.add(e);
          if (sink) sink(e);
          if (network && dest != s) edges.push_back({s, dest});
        }
      }
      stay[s] = remaining;
      if (beef_or_dairy) bd_out += static_cast<double>(out);
      born[s] = draw_binomial(rng, n, plan.bt[s]);
      week_removed += slaughtered + expired;
      week_born += born[s];
      if (out + stay[s] + slaughtered + expired != n) ++r.violations;
    }
    // head_end = head_stay + head_in + head_born per subpopulation, and
    // globally the week only loses slaughtered and expired head.
    std::int64_t start_total = 0, end_total = 0;
    for (int s = 0; s < n_sub; ++s) {
      next[s] = stay[s] + in[s] + born[s];
      start_total += cur[s];
      end_total += next[s];
    }
    if (end_total != start_total - week_removed + week_born) ++r.violations;

    if (network) {
      const DegreeStats d = degree_statistics(n_sub, edges, ts_dest);
      WeeklyNetwork snap;
      snap.week = w;
      snap.k_in_mean = d.k_in_mean;
      snap.k_out_mean = d.k_out_mean;
      snap.kin_kout_mean = d.kin_kout_mean;
      snap.k_out_ts_mean = d.k_out_ts_mean;
      snap.kin_kout_ts_mean = d.kin_kout_ts_mean;
      snap.edges = d.edges;
      snap.outward_fraction = bd_start > 0.0 ? bd_out / bd_start : 0.0;
      r.network.push_back(snap);
      for (int s = 0; s < n_sub; ++s) {
        r.node_k_in[s] += d.k_in[s];
        r.node_k_out[s] += d.k_out[s];
      }
    }
    cur.swap(next);
    if ((w + 1) % cfg.weeks_per_year == 0) {
      r.years.push_back(std::move(year));
      year = YearlyBins(plan.counties);
    }
  }
  if (network) {
    for (int s = 0; s < n_sub; ++s) {
      r.node_k_in[s] /= weeks;
      r.node_k_out[s] /= weeks;
    }
  }
  for (std::int64_t v : cur) r.final_head += static_cast<double>(v);
  return r;
}

}  // namespace

void check_parameters(const MovementParameterSet& params, const SubpopulationSet& subpops,
                      const geo::DistanceClassifier& geo, double tolerance) {
  if (params.counties != subpops.counties) {
    throw SimulationError("movement parameters and subpopulations cover different counties");
  }
  if (geo.size() != subpops.county_count()) {
    throw SimulationError("distance classifier does not match the subpopulation counties");
  }
  const std::size_t n_sub = static_cast<std::size_t>(subpops.subpop_count());
  if (params.st.size() != n_sub || params.sl.size() != n_sub || params.dt.size() != n_sub ||
      params.bt.size() != n_sub || subpops.head.size() != n_sub) {
    throw SimulationError("rate vectors do not match the subpopulation count");
  }
  auto in_unit = [&](double v) { return v >= -tolerance && v <= 1.0 + tolerance; };
  for (int c = 0; c < subpops.county_count(); ++c) {
    for (TypeB t : kAllTypeB) {
      for (SizeB j : kAllSizeB) {
        const int s = SubpopulationSet::subpop_index(c, t, j);
        const double out = movement::outgoing_probability(params, geo, c, t, j);
        const double sum = out + params.st[s] + params.sl[s] + params.dt[s];
        if (!in_unit(params.st[s]) || !in_unit(params.sl[s]) || !in_unit(params.dt[s]) ||
            !in_unit(params.bt[s]) || !(std::abs(sum - 1.0) <= tolerance)) {
          std::ostringstream os;
          os << "outgoing distribution of county " << subpops.counties[c] << " " << token(t) << " "
             << token(j) << " sums to " << sum << " (tolerance " << tolerance << ")";
          throw SimulationError(os.str());
        }
      }
    }
  }
  for (double p : params.p) {
    if (!in_unit(p)) throw SimulationError("movement probability outside [0, 1]");
  }
}

SimulationSummary simulate(const MovementParameterSet& params, const SubpopulationSet& subpops,
                           const geo::DistanceClassifier& geo, const SimulationConfig& config,
                           const EventSink& sink) {
  check_config(config);
  check_parameters(params, subpops, geo, config.row_sum_tolerance);
  const Plan plan = make_plan(params, geo);

  std::vector<ReplicateResult> results(config.replicates);
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (sink) threads = 1;
  threads = std::min(threads, config.replicates);
  if (threads <= 1) {
    for (int r = 0; r < config.replicates; ++r) results[r] = run_replicate(plan, subpops, config, r, sink);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) {
      pool.emplace_back([&] {
        for (int r = next++; r < config.replicates; r = next++) {
          try {
            results[r] = run_replicate(plan, subpops, config, r, {});
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  SimulationSummary out;
  out.counties = subpops.counties;
  out.replicates = config.replicates;
  out.years = config.years;
  out.network = std::move(results[0].network);
  out.node_k_in = std::move(results[0].node_k_in);
  out.node_k_out = std::move(results[0].node_k_out);
  out.initial_head = results[0].initial_head;
  for (const auto& r : results) {
    out.final_head_mean += r.final_head / config.replicates;
    out.conservation_violations += r.violations;
  }

  // One sample per replicate (its mean yearly total); a single replicate
  // falls back to its individual years.
  const int cells = plan.counties * kMetrics * kSizeB;
  out.bins.resize(cells);
  std::vector<double> samples;
  for (int k = 0; k < cells; ++k) {
    samples.clear();
    if (config.replicates == 1) {
      for (const auto& y : results[0].years) samples.push_back(y.head[k]);
    } else {
      for (const auto& r : results) {
        double sum = 0.0;
        for (const auto& y : r.years) sum += y.head[k];
        samples.push_back(sum / r.years.size());
      }
    }
    out.bins[k] = summarize(samples);
  }
  return out;
}

void write_summary(const std::filesystem::path& path, const SimulationSummary& s) {
  std::ostringstream os;
  os << "county,bin,metric,mean,ci_lo,ci_hi\n";
  for (int c = 0; c < static_cast<int>(s.counties.size()); ++c) {
    for (Metric m : {Metric::AllMovements, Metric::Slaughter}) {
      for (SizeB j : kAllSizeB) {
        const auto& b = s.stat(c, m, j);
        os << s.counties[c] << ',' << token(j) << ',' << token(m) << ',' << csv::format_double(b.mean)
           << ',' << csv::format_double(b.ci_lo) << ',' << csv::format_double(b.ci_hi) << '\n';
      }
    }
  }
  csv::write_file(path, os.str());
}

SimulationSummary load_summary(const std::filesystem::path& path) {
  csv::Reader r(path);
  const int c_county = r.column("county"), c_bin = r.column("bin"), c_metric = r.column("metric"),
            c_mean = r.column("mean"), c_lo = r.column("ci_lo"), c_hi = r.column("ci_hi");
  SimulationSummary s;
  while (r.next()) {
    const std::string county(r.field(c_county));
    if (s.counties.empty() || s.counties.back() != county) {
      if (std::find(s.counties.begin(), s.counties.end(), county) != s.counties.end()) {
        r.fail("rows of county " + county + " are not contiguous");
      }
      s.counties.push_back(county);
      s.bins.resize(s.counties.size() * kMetrics * kSizeB);
    }
    const SizeB j = parse_size_b(r.field(c_bin));
    const std::string_view metric = r.field(c_metric);
    Metric m;
    if (metric == token(Metric::AllMovements)) {
      m = Metric::AllMovements;
    } else if (metric == token(Metric::Slaughter)) {
      m = Metric::Slaughter;
    } else {
      r.fail("unknown metric '" + std::string(metric) + "'");
    }
    auto& b = s.bins[((s.counties.size() - 1) * kMetrics + static_cast<int>(m)) * kSizeB + idx(j)];
    b.mean = r.double_field(c_mean);
    b.ci_lo = r.double_field(c_lo);
    b.ci_hi = r.double_field(c_hi);
  }
  return s;
}

void write_network(const std::filesystem::path& path, std::span<const WeeklyNetwork> weeks) {
  std::ostringstream os;
  os << "week,k_in_mean,k_out_mean,kin_kout_mean,k_out_ts_mean,kin_kout_ts_mean,edges,outward_fraction\n";
  for (const auto& w : weeks) {
    os << w.week << ',' << csv::format_double(w.k_in_mean) << ',' << csv::format_double(w.k_out_mean)
       << ',' << csv::format_double(w.kin_kout_mean) << ',' << csv::format_double(w.k_out_ts_mean)
       << ',' << csv::format_double(w.kin_kout_ts_mean) << ',' << w.edges << ','
       << csv::format_double(w.outward_fraction) << '\n';
  }
  csv::write_file(path, os.str());
}

std::vector<WeeklyNetwork> load_network(const std::filesystem::path& path) {
  csv::Reader r(path);
  const int c_week = r.column("week"), c_in = r.column("k_in_mean"), c_out = r.column("k_out_mean"),
            c_kk = r.column("kin_kout_mean"), c_ts = r.column("k_out_ts_mean"),
            c_kkts = r.column("kin_kout_ts_mean"), c_edges = r.column("edges"),
            c_frac = r.column("outward_fraction");
  std::vector<WeeklyNetwork> out;
  while (r.next()) {
    WeeklyNetwork w;
    w.week = static_cast<int>(r.int_field(c_week));
    w.k_in_mean = r.double_field(c_in);
    w.k_out_mean = r.double_field(c_out);
    w.kin_kout_mean = r.double_field(c_kk);
    w.k_out_ts_mean = r.double_field(c_ts);
    w.kin_kout_ts_mean = r.double_field(c_kkts);
    w.edges = r.int_field(c_edges);
    w.outward_fraction = r.double_field(c_frac);
    out.push_back(w);
  }
  return out;
}

}  // namespace cattle::sim
