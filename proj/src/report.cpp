#include "cattle/report.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "cattle/csv.hpp"

namespace cattle::report {

namespace {

// Source and destination blocks in table order.
constexpr std::array<TypeB, 2> kSources = {TypeB::Dairy, TypeB::Beef};
constexpr std::array<TypeB, 3> kDestinations = {TypeB::Dairy, TypeB::Beef, TypeB::Preslaughter};

std::string label(TypeB t, SizeB j) { return std::string(short_label(t)) + "/" + std::string(token(j)); }

}  // namespace

void write_coverage_table(const std::filesystem::path& path, std::span<const impute::CoverageRow> rows) {
  std::ostringstream os;
  os << kCoverageHeader << '\n';
  for (const auto& r : rows) {
    os << r.state << ',' << r.count << ',' << csv::format_fixed(r.count_percent, 2) << ','
       << csv::format_fixed(r.head, 0) << ',' << csv::format_fixed(r.head_percent, 2) << '\n';
  }
  csv::write_file(path, os.str());
}

void write_movement_table(const std::filesystem::path& path, const movement::MovementParameterSet& m,
                          std::optional<std::pair<TypeB, TypeB>> only) {
  std::ostringstream os;
  os << kMovementHeader << '\n';
  for (TypeB t1 : kSources) {
    for (TypeB t2 : kDestinations) {
      if (!movement::movement_allowed(t1, t2)) continue;
      if (only && (only->first != t1 || only->second != t2)) continue;
      for (SizeB j2 : kAllSizeB) {
        for (SizeB j1 : kAllSizeB) {
          os << label(t1, j1) << ',' << label(t2, j2);
          for (geo::DistanceBin d : geo::kReachable) {
            os << ',' << csv::format_fixed(1000.0 * m.param(t1, j1, t2, j2, d), 9);
          }
          os << '\n';
        }
      }
    }
  }
  csv::write_file(path, os.str());
}

void write_threshold_table(const std::filesystem::path& path, const epi::ThresholdReport& r) {
  auto f = [](double v) { return std::isfinite(v) ? csv::format_fixed(v, 6) : std::string("nan"); };
  auto row = [&](std::string_view name, const epi::Row& x) {
    return std::string(name) + ',' + f(x.average) + ',' + f(x.min) + ',' + f(x.max) + '\n';
  };
  std::string out = std::string(kThresholdHeader) + '\n';
  out += row("<p>", r.p_mean);
  out += row("p_c", r.p_c);
  out += row("p_c^TS", r.p_c_ts);
  csv::write_file(path, out);
}

void write_county_comparison(const std::filesystem::path& path, const sim::SimulationSummary& s,
                             std::span<const impute::ImputedSection> shipments, const std::string& fips,
                             sim::Metric metric) {
  int sim_index = -1;
  for (std::size_t c = 0; c < s.counties.size(); ++c) {
    if (s.counties[c] == fips) sim_index = static_cast<int>(c);
  }
  if (sim_index < 0) throw std::invalid_argument("county " + fips + " is not in the simulation summary");
  const int kind = idx(metric == sim::Metric::Slaughter ? ShipType::Slaughter : ShipType::AllShipments);
  std::array<double, kSizeB> census{};
  bool found = false;
  for (const auto& sec : shipments) {
    for (int c = 0; c < sec.county_count(); ++c) {
      if (sec.counties[c] != fips) continue;
      for (SizeB j : kAllSizeB) census[idx(j)] = sec.aggregate(kind, c, j);
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("county " + fips + " has no imputed shipments");

  std::ostringstream os;
  os << kComparisonHeader << '\n';
  for (SizeB j : kAllSizeB) {
    const auto& b = s.stat(sim_index, metric, j);
    os << token(j) << ',' << csv::format_fixed(b.mean, 3) << ',' << csv::format_fixed(b.ci_lo, 3) << ','
       << csv::format_fixed(b.ci_hi, 3) << ',' << csv::format_fixed(census[idx(j)], 3) << '\n';
  }
  csv::write_file(path, os.str());
}

std::string comparison_file(const std::string& fips, sim::Metric metric) {
  return "counties/" + fips + "_" + std::string(sim::token(metric)) + ".csv";
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const ReportInputs& in) {
  std::vector<std::filesystem::path> written;
  auto out = [&](const std::string& name) { return written.emplace_back(dir / name); };
  write_coverage_table(out("coverage_populations.csv"), in.coverage.populations);
  write_coverage_table(out("coverage_shipments.csv"), in.coverage.shipments);
  write_movement_table(out("table1_movement.csv"), in.movement);
  write_movement_table(out("table1_dairy_to_beef.csv"), in.movement, std::pair{TypeB::Dairy, TypeB::Beef});
  write_threshold_table(out("table2_thresholds.csv"), in.thresholds);
  for (const auto& fips : in.summary.counties) {
    // Counties without imputed shipments (none in practice) have nothing to compare.
    bool has_census = false;
    for (const auto& sec : in.shipments) {
      for (const auto& c : sec.counties) has_census = has_census || c == fips;
    }
    if (!has_census) continue;
    for (sim::Metric m : {sim::Metric::AllMovements, sim::Metric::Slaughter}) {
      write_county_comparison(out(comparison_file(fips, m)), in.summary, in.shipments, fips, m);
    }
  }
  return written;
}

}  // namespace cattle::report
