#include "cattle/impute.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cattle/csv.hpp"

namespace cattle::impute {

namespace {

using maxent::Coeffs;
using maxent::kInf;

std::string kind_label(const CensusTable& table, int k) {
  if (table.kinds() == kTypeA) return std::string(token(static_cast<TypeA>(k)));
  return std::string(token(static_cast<ShipType>(k)));
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval cell_interval(const CensusTable& table, int k, int c, SizeA s) {
  const auto& cell = table.cell(k, c, s);
  if (cell.disclosed()) {
    const auto v = static_cast<double>(*cell.head);
    return {v, v};
  }
  const auto n = static_cast<double>(cell.operations);
  return {n * static_cast<double>(lower_limit(s)), n * static_cast<double>(upper_limit(table, k, s))};
}

std::string fmt(double v) { return csv::format_double(v); }

/// Shared part of both programs: cells, county totals, size totals and the
/// equalities tying them to the state total.
SectionProgram build_section(const StateCensus& state, const CensusTable& table) {
  SectionProgram sp;
  auto& p = sp.program;
  const int kinds = table.kinds();
  const int counties = table.counties();
  sp.kinds = kinds;
  sp.counties = counties;
  sp.cell_var.assign(static_cast<std::size_t>(kinds) * counties * kSizeA, -1);
  sp.county_var.assign(static_cast<std::size_t>(kinds) * counties, -1);
  sp.size_var.assign(static_cast<std::size_t>(kinds) * kSizeA, -1);

  for (int k = 0; k < kinds; ++k) {
    const std::string label = kind_label(table, k);
    const auto total = static_cast<double>(table.state_total(k));
    const double scale = total > 0.0 ? 1.0 / total : 1.0;

    std::vector<Interval> county_iv(counties);
    std::array<Interval, kSizeA> size_iv{};
    for (int c = 0; c < counties; ++c) {
      for (SizeA s : kAllSizeA) {
        const Interval iv = cell_interval(table, k, c, s);
        const auto& cell = table.cell(k, c, s);
        const int v = p.add_variable(iv.lo, iv.hi,
                                     label + "," + state.counties[c] + "," + std::string(token(s)));
        const bool positive_datum = cell.disclosed() && *cell.head > 0;
        p.add_entropy(v, 1.0, scale, positive_datum ? 0.0 : 1.0);
        sp.cell_var[(k * counties + c) * kSizeA + idx(s)] = v;
        county_iv[c].lo += iv.lo;
        county_iv[c].hi += iv.hi;
        size_iv[idx(s)].lo += iv.lo;
        size_iv[idx(s)].hi += iv.hi;
      }
    }

    // County totals.
    Interval sum_county{};
    for (int c = 0; c < counties; ++c) {
      const auto& tc = table.county_total(k, c);
      Interval iv = county_iv[c];
      if (tc.disclosed()) {
        const auto v = static_cast<double>(*tc.head);
        if (v < iv.lo || v > iv.hi) {
          throw ImputationError("state " + state.state + ": " + label + " county total of " +
                                state.counties[c] + " (" + fmt(v) + ") lies outside [" +
                                fmt(iv.lo) + ", " + fmt(iv.hi) + "] implied by its cells");
        }
        iv = {v, v};
      }
      sum_county.lo += iv.lo;
      sum_county.hi += iv.hi;
      const int var = p.add_variable(iv.lo, iv.hi, label + "," + state.counties[c] + ",county",
                                     std::max(1.0, total / std::max(1, counties)));
      sp.county_var[k * counties + c] = var;
      Coeffs row;
      for (SizeA s : kAllSizeA) row.emplace_back(sp.cell(k, c, s), 1.0);
      row.emplace_back(var, -1.0);
      p.add_equality(row, 0.0);
    }
    if (total < sum_county.lo || total > sum_county.hi) {
      throw ImputationError("state " + state.state + ": " + label + " state total " + fmt(total) +
                            " lies outside [" + fmt(sum_county.lo) + ", " + fmt(sum_county.hi) +
                            "] implied by the county totals");
    }

    // Size totals.
    Interval sum_size{};
    for (SizeA s : kAllSizeA) {
      const auto& tz = table.size_total(k, s);
      Interval iv = size_iv[idx(s)];
      if (tz.disclosed()) {
        const auto v = static_cast<double>(*tz.head);
        if (v < iv.lo || v > iv.hi) {
          throw ImputationError("state " + state.state + ": " + label + " size total " +
                                std::string(token(s)) + " (" + fmt(v) + ") lies outside [" +
                                fmt(iv.lo) + ", " + fmt(iv.hi) + "] implied by its cells");
        }
        iv = {v, v};
      }
      sum_size.lo += iv.lo;
      sum_size.hi += iv.hi;
      const int var = p.add_variable(iv.lo, iv.hi, label + ",size," + std::string(token(s)),
                                     std::max(1.0, total / kSizeA));
      sp.size_var[k * kSizeA + idx(s)] = var;
      Coeffs row;
      for (int c = 0; c < counties; ++c) row.emplace_back(sp.cell(k, c, s), 1.0);
      row.emplace_back(var, -1.0);
      p.add_equality(row, 0.0);
    }
    if (total < sum_size.lo || total > sum_size.hi) {
      throw ImputationError("state " + state.state + ": " + label + " state total " + fmt(total) +
                            " lies outside [" + fmt(sum_size.lo) + ", " + fmt(sum_size.hi) +
                            "] implied by the size totals");
    }

    Coeffs by_county, by_size;
    for (int c = 0; c < counties; ++c) by_county.emplace_back(sp.county_total(k, c), 1.0);
    for (SizeA s : kAllSizeA) by_size.emplace_back(sp.size_total(k, s), 1.0);
    p.add_equality(by_county, total);
    p.add_equality(by_size, total);
  }
  return sp;
}

Interval aggregate_interval(const SectionProgram& sp, int k, int c, SizeB j) {
  Interval iv{};
  for (SizeA s : kAllSizeA) {
    if (to_size_b(s) != j) continue;
    const int v = sp.cell(k, c, s);
    iv.lo += sp.program.lower[v];
    iv.hi += sp.program.upper[v];
  }
  return iv;
}

}  // namespace

SectionProgram build_population_program(const StateCensus& state) {
  const auto& table = state.populations;
  SectionProgram sp = build_section(state, table);
  auto& p = sp.program;
  const int counties = sp.counties;
  sp.agg_var.assign(static_cast<std::size_t>(kTypeA) * counties * kSizeB, -1);
  for (int k = 0; k < kTypeA; ++k) {
    const std::string label = kind_label(table, k);
    const double typical =
        std::max(1.0, static_cast<double>(table.state_total(k)) / std::max(1, counties * kSizeB));
    for (int c = 0; c < counties; ++c) {
      for (SizeB j : kAllSizeB) {
        const int v = p.add_variable(
            0.0, kInf, label + "," + state.counties[c] + "," + std::string(token(j)), typical);
        sp.agg_var[(k * counties + c) * kSizeB + idx(j)] = v;
        Coeffs row{{v, 1.0}};
        for (SizeA s : kAllSizeA) {
          if (to_size_b(s) == j) row.emplace_back(sp.cell(k, c, s), -1.0);
        }
        p.add_equality(row, 0.0);
      }
    }
  }
  const int dairy = idx(TypeA::Dairy);
  const int presl = idx(TypeA::Preslaughter);
  const int all = idx(TypeA::AllCattle);
  for (int c = 0; c < counties; ++c) {
    for (SizeB j : kAllSizeB) {
      const double least = aggregate_interval(sp, dairy, c, j).lo +
                           aggregate_interval(sp, presl, c, j).lo;
      const double most = aggregate_interval(sp, all, c, j).hi;
      if (least > most) {
        sp.warnings.push_back(
            {state.state + "," + state.counties[c] + "," + std::string(token(j)),
             "Dairy + Preslaughter cannot stay below All Cattle (at least " + fmt(least) +
                 " vs at most " + fmt(most) + "); relation dropped, Beef clamped at 0"});
        continue;
      }
      p.add_inequality({{sp.aggregate(dairy, c, j), 1.0},
                        {sp.aggregate(presl, c, j), 1.0},
                        {sp.aggregate(all, c, j), -1.0}},
                       0.0);
    }
  }
  return sp;
}

SectionProgram build_shipment_program(const StateCensus& state) {
  SectionProgram sp = build_section(state, state.shipments);
  auto& p = sp.program;
  const int all = idx(ShipType::AllShipments);
  const int slaughter = idx(ShipType::Slaughter);
  for (int c = 0; c < sp.counties; ++c) {
    const int vs = sp.county_total(slaughter, c);
    const int va = sp.county_total(all, c);
    if (p.lower[vs] > p.upper[va]) {
      sp.warnings.push_back({state.state + "," + state.counties[c],
                             "slaughter total cannot stay below all shipments (at least " +
                                 fmt(p.lower[vs]) + " vs at most " + fmt(p.upper[va]) +
                                 "); relation dropped"});
      continue;
    }
    p.add_inequality({{vs, 1.0}, {va, -1.0}}, 0.0);
  }
  return sp;
}

double round_imputed(double v) {
  const double n = std::round(v);
  // + 0.0 turns a snapped -0 into 0.
  return std::abs(v - n) <= kSnapTolerance * std::max(1.0, std::abs(v)) ? n + 0.0 : v;
}

double ImputedSection::aggregate(int k, int c, SizeB j) const {
  double sum = 0.0;
  for (SizeA s : kAllSizeA) {
    if (to_size_b(s) == j) sum += cell(k, c, s);
  }
  return round_imputed(sum);
}

namespace {

ImputedSection solve_section(const StateCensus& state, const CensusTable& table,
                             SectionProgram sp, const maxent::Tolerances& tol,
                             const char* section) {
  auto report = maxent::solve_entropy(sp.program, tol);
  if (report.status == maxent::SolveStatus::Infeasible && sp.program.inequalities() > 0) {
    sp.warnings.push_back({state.state, std::string(section) +
                                            ": cross-type relations are jointly infeasible "
                                            "with the totals; solved without them"});
    sp.program.a_in.clear();
    sp.program.b_in.clear();
    report = maxent::solve_entropy(sp.program, tol);
  }
  if (report.status != maxent::SolveStatus::Optimal) {
    double scale = 1.0;
    for (int k = 0; k < table.kinds(); ++k) {
      scale = std::max(scale, static_cast<double>(table.state_total(k)));
    }
    const bool usable = report.status == maxent::SolveStatus::MaxIter &&
                        report.eq_residual <= 1e-6 * scale && report.ineq_residual <= 1e-6 * scale;
    if (!usable) {
      throw ImputationSolveError("state " + state.state + ": " + section + " program " +
                                     maxent::to_string(report.status) +
                                     (report.message.empty() ? "" : " (" + report.message + ")"),
                                 report.status);
    }
    sp.warnings.push_back({state.state, std::string(section) +
                                            ": solver stopped at the iteration limit with "
                                            "residual " +
                                            fmt(report.eq_residual)});
  }

  ImputedSection out;
  out.state = state.state;
  out.counties = state.counties;
  out.kinds = table.kinds();
  const int counties = table.counties();
  out.cells.resize(static_cast<std::size_t>(out.kinds) * counties * kSizeA);
  out.county_totals.resize(static_cast<std::size_t>(out.kinds) * counties);
  out.size_totals.resize(static_cast<std::size_t>(out.kinds) * kSizeA);
  for (int k = 0; k < out.kinds; ++k) {
    for (int c = 0; c < counties; ++c) {
      for (SizeA s : kAllSizeA) {
        const auto& cell = table.cell(k, c, s);
        out.cell(k, c, s) = cell.disclosed() ? static_cast<double>(*cell.head)
                                             : round_imputed(report.x[sp.cell(k, c, s)]);
      }
      const auto& tc = table.county_total(k, c);
      out.county_totals[k * counties + c] =
          tc.disclosed() ? static_cast<double>(*tc.head)
                         : round_imputed(report.x[sp.county_total(k, c)]);
    }
    for (SizeA s : kAllSizeA) {
      const auto& tz = table.size_total(k, s);
      out.size_totals[k * kSizeA + idx(s)] =
          tz.disclosed() ? static_cast<double>(*tz.head) : round_imputed(report.x[sp.size_total(k, s)]);
    }
  }
  out.report = std::move(report);
  out.warnings = std::move(sp.warnings);
  return out;
}

}  // namespace

ImputedSection impute_populations(const StateCensus& state, const maxent::Tolerances& tol) {
  return solve_section(state, state.populations, build_population_program(state), tol,
                       "population");
}

ImputedSection impute_shipments(const StateCensus& state, const maxent::Tolerances& tol) {
  return solve_section(state, state.shipments, build_shipment_program(state), tol, "shipment");
}

double SubpopulationSet::total() const {
  double t = 0.0;
  for (double v : head) t += v;
  return t;
}

SubpopulationSet assemble_subpopulations(std::span<const ImputedSection> populations,
                                         std::vector<ValidationWarning>* warnings) {
  SubpopulationSet out;
  for (const auto& sec : populations) {
    if (sec.kinds != kTypeA) throw std::invalid_argument("expected a population section");
    for (int c = 0; c < sec.county_count(); ++c) {
      const int gc = out.county_count();
      out.states.push_back(sec.state);
      out.counties.push_back(sec.counties[c]);
      out.head.resize(out.head.size() + kSubpopsPerCounty, 0.0);
      for (SizeB j : kAllSizeB) {
        const double dairy = sec.aggregate(idx(TypeA::Dairy), c, j);
        const double presl = sec.aggregate(idx(TypeA::Preslaughter), c, j);
        const double all = sec.aggregate(idx(TypeA::AllCattle), c, j);
        double beef = round_imputed(all - dairy - presl);
        if (beef < 0.0) {
          if (beef < -1e-6 * std::max(1.0, all) && warnings) {
            warnings->push_back({sec.state + "," + sec.counties[c] + "," + std::string(token(j)),
                                 "negative Beef residual " + fmt(beef) + " clamped at 0"});
          }
          beef = 0.0;
        }
        out.pop(gc, TypeB::Dairy, j) = dairy;
        out.pop(gc, TypeB::Preslaughter, j) = presl;
        out.pop(gc, TypeB::Beef, j) = beef;
      }
    }
  }
  return out;
}

CoverageRow coverage(const CensusTable& table, const ImputedSection& imputed) {
  CoverageRow row;
  row.state = imputed.state;
  double total = 0.0;
  for (int k = 0; k < table.kinds(); ++k) {
    total += static_cast<double>(table.state_total(k));
    for (int c = 0; c < table.counties(); ++c) {
      for (SizeA s : kAllSizeA) {
        if (table.cell(k, c, s).disclosed()) continue;
        ++row.count;
        row.head += imputed.cell(k, c, s);
      }
    }
  }
  const double cells = static_cast<double>(table.kinds()) * table.counties() * kSizeA;
  row.count_percent = cells > 0 ? 100.0 * static_cast<double>(row.count) / cells : 0.0;
  row.head_percent = total > 0 ? 100.0 * row.head / total : 0.0;
  return row;
}

ShipmentTotals shipment_totals(std::span<const ImputedSection> shipments) {
  ShipmentTotals out;
  const int all = idx(ShipType::AllShipments);
  const int slaughter = idx(ShipType::Slaughter);
  for (const auto& sec : shipments) {
    if (sec.kinds != kShipTypes) throw std::invalid_argument("expected a shipment section");
    for (int c = 0; c < sec.county_count(); ++c) {
      double a = 0.0, s = 0.0;
      for (SizeA i : kAllSizeA) {
        a += sec.cell(all, c, i);
        s += sec.cell(slaughter, c, i);
      }
      out.counties.push_back(sec.counties[c]);
      out.all_movements.push_back(round_imputed(a));
      out.slaughter.push_back(round_imputed(s));
      out.slaughter_500_up.push_back(sec.cell(slaughter, c, SizeA::z500_up));
    }
  }
  return out;
}

void write_subpopulations(const std::filesystem::path& path, const SubpopulationSet& s) {
  std::ostringstream os;
  os << "state,county_fips,type_b,size_b,head\n";
  for (int c = 0; c < s.county_count(); ++c) {
    for (TypeB t : kAllTypeB) {
      for (SizeB j : kAllSizeB) {
        os << s.states[c] << ',' << s.counties[c] << ',' << token(t) << ',' << token(j) << ','
           << csv::format_double(s.pop(c, t, j)) << '\n';
      }
    }
  }
  csv::write_file(path, os.str());
}

SubpopulationSet load_subpopulations(const std::filesystem::path& path) {
  csv::Reader r(path);
  const int c_state = r.column("state");
  const int c_fips = r.column("county_fips");
  const int c_type = r.column("type_b");
  const int c_size = r.column("size_b");
  const int c_head = r.column("head");
  SubpopulationSet out;
  std::map<std::string, int, std::less<>> index;
  while (r.next()) {
    const std::string fips(r.field(c_fips));
    auto it = index.find(fips);
    if (it == index.end()) {
      it = index.emplace(fips, out.county_count()).first;
      out.states.emplace_back(r.field(c_state));
      out.counties.push_back(fips);
      out.head.resize(out.head.size() + kSubpopsPerCounty, 0.0);
    }
    TypeB t;
    SizeB j;
    try {
      t = parse_type_b(r.field(c_type));
      j = parse_size_b(r.field(c_size));
    } catch (const ParseError& e) {
      r.fail(e.what());
    }
    const double v = r.double_field(c_head);
    if (!(v >= 0.0) || !std::isfinite(v)) r.fail("head must be a non-negative number");
    out.pop(it->second, t, j) = v;
  }
  return out;
}

void write_imputed_shipments(const std::filesystem::path& path,
                             std::span<const ImputedSection> shipments) {
  std::ostringstream os;
  os << "state,county_fips,ship_type,size_a,head\n";
  for (const auto& sec : shipments) {
    for (int c = 0; c < sec.county_count(); ++c) {
      for (int k = 0; k < sec.kinds; ++k) {
        for (SizeA s : kAllSizeA) {
          os << sec.state << ',' << sec.counties[c] << ',' << token(static_cast<ShipType>(k)) << ','
             << token(s) << ',' << csv::format_double(sec.cell(k, c, s)) << '\n';
        }
      }
    }
  }
  csv::write_file(path, os.str());
}

std::vector<ImputedSection> load_imputed_shipments(const std::filesystem::path& path) {
  csv::Reader r(path);
  const int c_state = r.column("state");
  const int c_fips = r.column("county_fips");
  const int c_type = r.column("ship_type");
  const int c_size = r.column("size_a");
  const int c_head = r.column("head");
  struct Row {
    int county;
    ShipType q;
    SizeA s;
    double v;
  };
  std::vector<ImputedSection> out;
  std::vector<std::vector<Row>> rows;
  std::map<std::string, int, std::less<>> state_index;
  std::vector<std::map<std::string, int, std::less<>>> county_index;
  while (r.next()) {
    const std::string st(r.field(c_state));
    auto it = state_index.find(st);
    if (it == state_index.end()) {
      it = state_index.emplace(st, static_cast<int>(out.size())).first;
      out.emplace_back();
      out.back().state = st;
      out.back().kinds = kShipTypes;
      rows.emplace_back();
      county_index.emplace_back();
    }
    auto& sec = out[it->second];
    const std::string fips(r.field(c_fips));
    auto& ci = county_index[it->second];
    auto cit = ci.find(fips);
    if (cit == ci.end()) {
      cit = ci.emplace(fips, sec.county_count()).first;
      sec.counties.push_back(fips);
    }
    Row row{cit->second, ShipType::AllShipments, SizeA::z1_9, 0.0};
    try {
      row.q = parse_ship_type(r.field(c_type));
      row.s = parse_size_a(r.field(c_size));
    } catch (const ParseError& e) {
      r.fail(e.what());
    }
    row.v = r.double_field(c_head);
    if (!(row.v >= 0.0) || !std::isfinite(row.v)) r.fail("head must be a non-negative number");
    rows[it->second].push_back(row);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& sec = out[k];
    const int counties = sec.county_count();
    sec.cells.assign(static_cast<std::size_t>(kShipTypes) * counties * kSizeA, 0.0);
    sec.county_totals.assign(static_cast<std::size_t>(kShipTypes) * counties, 0.0);
    sec.size_totals.assign(static_cast<std::size_t>(kShipTypes) * kSizeA, 0.0);
    for (const auto& row : rows[k]) {
      sec.cell(idx(row.q), row.county, row.s) = row.v;
      sec.county_totals[idx(row.q) * counties + row.county] += row.v;
      sec.size_totals[idx(row.q) * kSizeA + idx(row.s)] += row.v;
    }
  }
  return out;
}

void write_coverage(const std::filesystem::path& path, std::span<const CoverageRow> populations,
                    std::span<const CoverageRow> shipments) {
  std::ostringstream os;
  os << "section,State,Count,Count %,Head,Head %\n";
  auto emit = [&](std::string_view section, const CoverageRow& r) {
    os << section << ',' << r.state << ',' << r.count << ',' << csv::format_fixed(r.count_percent, 2)
       << ',' << csv::format_fixed(r.head, 0) << ',' << csv::format_fixed(r.head_percent, 2) << '\n';
  };
  for (const auto& r : populations) emit("populations", r);
  for (const auto& r : shipments) emit("shipments", r);
  csv::write_file(path, os.str());
}

CoverageTables load_coverage(const std::filesystem::path& path) {
  csv::Reader r(path);
  const int c_sec = r.column("section"), c_state = r.column("State"), c_count = r.column("Count"),
            c_cp = r.column("Count %"), c_head = r.column("Head"), c_hp = r.column("Head %");
  CoverageTables out;
  while (r.next()) {
    CoverageRow row;
    row.state = std::string(r.field(c_state));
    row.count = r.int_field(c_count);
    row.count_percent = r.double_field(c_cp);
    row.head = r.double_field(c_head);
    row.head_percent = r.double_field(c_hp);
    const auto sec = r.field(c_sec);
    if (sec == "populations") {
      out.populations.push_back(std::move(row));
    } else if (sec == "shipments") {
      out.shipments.push_back(std::move(row));
    } else {
      r.fail("unknown section '" + std::string(sec) + "'");
    }
  }
  return out;
}

}  // namespace cattle::impute
