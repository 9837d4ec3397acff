#include "cattle/epi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cattle/csv.hpp"

namespace cattle::epi {

void check_params(const EpidemicParams& e) {
  if (!(e.r0 > 1.0)) throw EpiError("R0 must exceed 1 for a finite threshold");
  if (!(e.mu >= 0.0) || !(e.delta >= 0.0)) throw EpiError("rates must be non-negative");
  if (!(e.mu + e.delta > 0.0)) throw EpiError("mu + delta must be positive");
  if (!(e.n_bar > 0.0)) throw EpiError("average subpopulation size must be positive");
}

double moment_ratio(double kin_kout_mean, double k_out_mean) {
  if (!(k_out_mean > 0.0)) throw EpiError("undefined threshold: network has no edges");
  return kin_kout_mean / k_out_mean;
}

double reproductive_number(const EpidemicParams& e, double p, double ratio) {
  const double a = (e.r0 - 1.0) * (e.r0 - 1.0) / (e.r0 * e.r0);
  return a * (e.n_bar * p / (e.mu + e.delta)) * (ratio - 1.0);
}

double critical_rate(const EpidemicParams& e, double ratio) {
  check_params(e);
  if (!(ratio > 1.0)) throw EpiError("undefined threshold: degree moment ratio is at most 1");
  return e.r0 * e.r0 * (e.mu + e.delta) / ((e.r0 - 1.0) * (e.r0 - 1.0) * e.n_bar * (ratio - 1.0));
}

double critical_rate(const EpidemicParams& e, const sim::WeeklyNetwork& w, bool restricted) {
  const double num = restricted ? w.kin_kout_ts_mean : w.kin_kout_mean;
  return critical_rate(e, moment_ratio(num, w.k_out_mean));
}

PopulationAverages population_averages(const movement::MovementParameterSet& params,
                                       const impute::SubpopulationSet& subpops) {
  double head = 0.0, weighted = 0.0;
  int occupied = 0;
  for (int c = 0; c < subpops.county_count(); ++c) {
    for (TypeB t : {TypeB::Dairy, TypeB::Beef}) {
      for (SizeB j : kAllSizeB) {
        const int s = impute::SubpopulationSet::subpop_index(c, t, j);
        const double n = subpops.head[s];
        if (n <= 0.0) continue;
        head += n;
        weighted += n * (params.dt[s] + params.sl[s]);
        ++occupied;
      }
    }
  }
  if (occupied == 0) throw EpiError("no occupied Beef or Dairy subpopulation");
  return {weighted / head, head / occupied};
}

double average_movement_rate(const movement::MovementParameterSet& params,
                             const impute::SubpopulationSet& subpops,
                             const geo::DistanceClassifier& geo) {
  double head = 0.0, weighted = 0.0;
  for (int c = 0; c < subpops.county_count(); ++c) {
    for (TypeB t : {TypeB::Dairy, TypeB::Beef}) {
      for (SizeB j : kAllSizeB) {
        const double n = subpops.pop(c, t, j);
        if (n <= 0.0) continue;
        head += n;
        weighted += n * movement::outgoing_probability(params, geo, c, t, j);
      }
    }
  }
  if (head == 0.0) throw EpiError("no occupied Beef or Dairy subpopulation");
  return weighted / head;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  double lo = INFINITY;
  double hi = -INFINITY;
  int n = 0;

  void add(double v) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++n;
  }
  Row row() const { return n == 0 ? Row{NAN, NAN, NAN, 0} : Row{sum / n, lo, hi, n}; }
};

}  // namespace

ThresholdReport thresholds(const EpidemicParams& e, double mean_p,
                           std::span<const sim::WeeklyNetwork> weeks) {
  check_params(e);
  if (weeks.empty()) throw EpiError("no weekly network snapshots");
  ThresholdReport r;
  r.params = e;
  Accumulator frac, pc, ts;
  for (const auto& w : weeks) {
    frac.add(w.outward_fraction);
    try {
      pc.add(critical_rate(e, w, false));
    } catch (const EpiError&) {
      ++r.undefined_weeks;
    }
    try {
      ts.add(critical_rate(e, w, true));
    } catch (const EpiError&) {
      ++r.undefined_ts_weeks;
    }
  }
  if (pc.n == 0) throw EpiError("undefined threshold: no weekly snapshot has a degree moment ratio above 1");
  r.p_mean = frac.row();
  r.p_mean.average = mean_p;
  r.p_c = pc.row();
  r.p_c_ts = ts.row();
  return r;
}

void write_thresholds(const std::filesystem::path& path, const ThresholdReport& r) {
  auto f = [](double v) { return std::isfinite(v) ? csv::format_fixed(v, 6) : std::string("nan"); };
  std::ostringstream os;
  os << "quantity,average,min,max\n";
  os << "<p>," << f(r.p_mean.average) << ',' << f(r.p_mean.min) << ',' << f(r.p_mean.max) << '\n';
  os << "p_c," << f(r.p_c.average) << ',' << f(r.p_c.min) << ',' << f(r.p_c.max) << '\n';
  os << "p_c_TS," << f(r.p_c_ts.average) << ',' << f(r.p_c_ts.min) << ',' << f(r.p_c_ts.max) << '\n';
  csv::write_file(path, os.str());
}

ThresholdReport load_thresholds(const std::filesystem::path& path) {
  csv::Reader r(path);
  const int c_q = r.column("quantity"), c_avg = r.column("average"), c_min = r.column("min"),
            c_max = r.column("max");
  ThresholdReport out;
  int seen = 0;
  auto value = [&](int col) {
    return r.field(col) == "nan" ? std::numeric_limits<double>::quiet_NaN() : r.double_field(col);
  };
  while (r.next()) {
    const auto q = r.field(c_q);
    Row* row = q == "<p>" ? &out.p_mean : q == "p_c" ? &out.p_c : q == "p_c_TS" ? &out.p_c_ts : nullptr;
    if (!row) r.fail("unknown quantity '" + std::string(q) + "'");
    *row = {value(c_avg), value(c_min), value(c_max), 0};
    ++seen;
  }
  if (seen != 3) throw EpiError(path.string() + ": expected the rows <p>, p_c and p_c_TS");
  return out;
}

void write_threshold_meta(const std::filesystem::path& path, const ThresholdReport& r) {
  std::ostringstream os;
  os << "r0=" << csv::format_double(r.params.r0) << '\n'
     << "mu=" << csv::format_double(r.params.mu) << '\n'
     << "beta=" << csv::format_double(r.params.beta()) << '\n'
     << "delta=" << csv::format_double(r.params.delta) << '\n'
     << "n_bar=" << csv::format_double(r.params.n_bar) << '\n'
     << "p_over_p_c=" << csv::format_double(r.ratio()) << '\n'
     << "weeks=" << r.p_mean.weeks << '\n'
     << "undefined_weeks=" << r.undefined_weeks << '\n'
     << "undefined_ts_weeks=" << r.undefined_ts_weeks << '\n';
  csv::write_file(path, os.str());
}

}  // namespace cattle::epi
