#include "cattle/movement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cattle/csv.hpp"

namespace cattle::movement {

namespace {

using geo::DistanceBin;
using maxent::Coeffs;
using maxent::kInf;

std::string subpop_label(const std::string& county, TypeB t, SizeB j) {
  return county + "," + std::string(token(t)) + "," + std::string(token(j));
}

}  // namespace

RateBounds default_rate_bounds() {
  RateBounds b;
  const int d = idx(TypeB::Dairy), p = idx(TypeB::Preslaughter), f = idx(TypeB::Beef);
  b.slaughter[d] = {0.0, 0.0};
  b.expire[d] = {1.0 / 312.0, 1.0 / 104.0};
  b.birth[d] = {1.0 / 62.0, 1.0 / 36.0};
  b.birth[f] = {0.0, 1.0 / 52.0};
  b.expire[f] = {1.0 / 520.0, 1.0 / 104.0};
  b.slaughter[f] = {0.0, 1.0 / 13.0};
  b.birth[p] = {0.0, 0.0};
  b.expire[p] = {0.0, 1.0 / 104.0};
  b.slaughter[p] = {0.0, 1.0 / 2.0};
  return b;
}

void check_rate_bounds(const RateBounds& b) {
  auto check = [](const Range& r, TypeB t, const char* what) {
    if (!(r.min >= 0.0 && r.max <= 1.0 && r.min <= r.max)) {
      throw MovementError(std::string(what) + " rate range for " + std::string(token(t)) +
                          " must satisfy 0 <= min <= max <= 1");
    }
  };
  for (TypeB t : kAllTypeB) {
    check(b.expire[idx(t)], t, "expiration");
    check(b.slaughter[idx(t)], t, "slaughter");
    check(b.birth[idx(t)], t, "birth");
  }
}

MovementInputs align_inputs(impute::SubpopulationSet subpops,
                            const impute::ShipmentTotals& shipments,
                            const std::vector<geo::CountyCentroid>& centroids) {
  MovementInputs in;
  std::map<std::string, int, std::less<>> ship_index;
  for (std::size_t i = 0; i < shipments.counties.size(); ++i) {
    ship_index.emplace(shipments.counties[i], static_cast<int>(i));
  }
  if (ship_index.size() != subpops.counties.size()) {
    throw MovementError("shipment totals cover " + std::to_string(ship_index.size()) +
                        " counties but subpopulations cover " +
                        std::to_string(subpops.counties.size()));
  }
  for (const auto& fips : subpops.counties) {
    auto it = ship_index.find(fips);
    if (it == ship_index.end()) throw MovementError("no shipment totals for county " + fips);
    in.shipments.counties.push_back(fips);
    in.shipments.all_movements.push_back(shipments.all_movements[it->second]);
    in.shipments.slaughter.push_back(shipments.slaughter[it->second]);
    in.shipments.slaughter_500_up.push_back(shipments.slaughter_500_up[it->second]);
  }
  try {
    in.distances = geo::DistanceClassifier(centroids).subset(subpops.counties);
  } catch (const std::runtime_error& e) {
    throw MovementError(e.what());
  }
  in.subpops = std::move(subpops);
  return in;
}

MovementProgram build_movement_program(const MovementInputs& in, const RateBounds& bounds,
                                       std::optional<double> f_min) {
  check_rate_bounds(bounds);
  const auto& sp = in.subpops;
  const auto& geo = in.distances;
  const int counties = sp.county_count();
  if (static_cast<int>(in.shipments.counties.size()) != counties || geo.size() != counties) {
    throw MovementError("subpopulations, shipments and distances cover different county sets");
  }
  if (f_min && !(*f_min >= 0.0 && *f_min < 1.0)) {
    throw MovementError("f_min must lie in [0, 1)");
  }
  const int subpops = sp.subpop_count();

  MovementProgram mp;
  auto& prog = mp.program;
  mp.p_var.fill(-1);

  std::array<long long, geo::kReachableBins> pairs{};
  for (DistanceBin d : geo::kReachable) pairs[geo::idx(d)] = geo.pairs_in_bin(d);

  for (TypeB t1 : kAllTypeB) {
    for (SizeB j1 : kAllSizeB) {
      for (TypeB t2 : kAllTypeB) {
        if (!movement_allowed(t1, t2)) continue;
        for (SizeB j2 : kAllSizeB) {
          for (DistanceBin d : geo::kReachable) {
            if (pairs[geo::idx(d)] == 0) continue;
            const int v = prog.add_variable(
                0.0, 1.0,
                "p," + std::string(short_label(t1)) + "," + std::string(token(j1)) + "," +
                    std::string(short_label(t2)) + "," + std::string(token(j2)) + "," +
                    std::string(token(d)));
            prog.add_entropy(v, static_cast<double>(pairs[geo::idx(d)]));
            mp.p_var[p_index(t1, j1, t2, j2, d)] = v;
          }
        }
      }
    }
  }

  mp.st.resize(subpops);
  mp.sl.resize(subpops);
  mp.dt.resize(subpops);
  mp.bt.resize(subpops);
  mp.pop_plus.resize(subpops);
  mp.pop_minus.resize(subpops);
  for (int c = 0; c < counties; ++c) {
    for (TypeB t : kAllTypeB) {
      const auto& ex = bounds.expire[idx(t)];
      const auto& sl = bounds.slaughter[idx(t)];
      const auto& bt = bounds.birth[idx(t)];
      for (SizeB j : kAllSizeB) {
        const int s = impute::SubpopulationSet::subpop_index(c, t, j);
        const std::string label = subpop_label(sp.counties[c], t, j);
        mp.st[s] = prog.add_variable(0.0, 1.0, "st," + label);
        prog.add_entropy(mp.st[s]);
        mp.sl[s] = prog.add_variable(sl.min, sl.max, "sl," + label);
        prog.add_entropy(mp.sl[s]);
        mp.dt[s] = prog.add_variable(ex.min, ex.max, "dt," + label);
        prog.add_entropy(mp.dt[s]);
        mp.bt[s] = prog.add_variable(bt.min, bt.max, "bt," + label, std::max(bt.max, 1e-3));
        const double typ = std::max(1.0, sp.head[s] / kWeeksPerYear);
        mp.pop_plus[s] = prog.add_variable(0.0, kInf, "pn_pop+," + label, typ);
        mp.pop_minus[s] = prog.add_variable(0.0, kInf, "pn_pop-," + label, typ);
      }
    }
  }
  mp.mov_plus.resize(counties);
  mp.mov_minus.resize(counties);
  mp.slt_plus.resize(counties);
  mp.slt_minus.resize(counties);
  mp.slt500.resize(counties);
  for (int c = 0; c < counties; ++c) {
    const std::string& f = sp.counties[c];
    const double tm = std::max(1.0, in.shipments.all_movements[c] / kWeeksPerYear);
    const double ts = std::max(1.0, in.shipments.slaughter[c] / kWeeksPerYear);
    const double t5 = std::max(1.0, in.shipments.slaughter_500_up[c] / kWeeksPerYear);
    mp.mov_plus[c] = prog.add_variable(0.0, kInf, "pn_mov+," + f, tm);
    mp.mov_minus[c] = prog.add_variable(0.0, kInf, "pn_mov-," + f, tm);
    mp.slt_plus[c] = prog.add_variable(0.0, kInf, "pn_slt+," + f, ts);
    mp.slt_minus[c] = prog.add_variable(0.0, kInf, "pn_slt-," + f, ts);
    mp.slt500[c] = prog.add_variable(0.0, kInf, "pn_slt500," + f, t5);
  }

  // Outgoing distributions sum to one.
  for (int c = 0; c < counties; ++c) {
    for (TypeB t1 : kAllTypeB) {
      for (SizeB j1 : kAllSizeB) {
        const int s = impute::SubpopulationSet::subpop_index(c, t1, j1);
        Coeffs row;
        for (TypeB t2 : kAllTypeB) {
          for (SizeB j2 : kAllSizeB) {
            for (DistanceBin d : geo::kReachable) {
              const int v = mp.p_var[p_index(t1, j1, t2, j2, d)];
              const int n = geo.counties_in_bin(c, d);
              if (v >= 0 && n > 0) row.emplace_back(v, static_cast<double>(n));
            }
          }
        }
        row.emplace_back(mp.dt[s], 1.0);
        row.emplace_back(mp.sl[s], 1.0);
        row.emplace_back(mp.st[s], 1.0);
        prog.add_equality(row, 1.0);
      }
    }
  }

  // County shipment totals.
  for (int c = 0; c < counties; ++c) {
    Coeffs all, slaughter;
    for (TypeB t1 : kAllTypeB) {
      for (SizeB j1 : kAllSizeB) {
        const double pop = sp.pop(c, t1, j1);
        if (pop == 0.0) continue;
        const int s = impute::SubpopulationSet::subpop_index(c, t1, j1);
        for (TypeB t2 : kAllTypeB) {
          for (SizeB j2 : kAllSizeB) {
            for (DistanceBin d : geo::kReachable) {
              const int v = mp.p_var[p_index(t1, j1, t2, j2, d)];
              const int n = geo.counties_in_bin(c, d);
              if (v >= 0 && n > 0) all.emplace_back(v, pop * n);
            }
          }
        }
        all.emplace_back(mp.sl[s], pop);
        if (t1 == TypeB::Preslaughter) slaughter.emplace_back(mp.sl[s], pop);
      }
    }
    all.emplace_back(mp.mov_plus[c], 1.0);
    all.emplace_back(mp.mov_minus[c], -1.0);
    prog.add_equality(all, in.shipments.all_movements[c] / kWeeksPerYear);
    slaughter.emplace_back(mp.slt_plus[c], 1.0);
    slaughter.emplace_back(mp.slt_minus[c], -1.0);
    prog.add_equality(slaughter, in.shipments.slaughter[c] / kWeeksPerYear);

    // Large slaughter shipments come from the largest Preslaughter herds.
    const int big = impute::SubpopulationSet::subpop_index(c, TypeB::Preslaughter, SizeB::z200_up);
    Coeffs large;
    const double pop_big = sp.head[big];
    if (pop_big != 0.0) large.emplace_back(mp.sl[big], -pop_big);
    large.emplace_back(mp.slt500[c], -1.0);
    prog.add_inequality(large, -in.shipments.slaughter_500_up[c] / kWeeksPerYear);
  }

  // Zero net flux per subpopulation. arriving[c][d][t,j] is the population of
  // subpopulation type (t,j) summed over the counties in bin d of c.
  std::vector<double> arriving(static_cast<std::size_t>(counties) * geo::kReachableBins *
                                   kSubpopsPerCounty,
                               0.0);
  auto arr = [&](int c, DistanceBin d, TypeB t, SizeB j) -> double& {
    return arriving[(static_cast<std::size_t>(c) * geo::kReachableBins + geo::idx(d)) *
                        kSubpopsPerCounty +
                    idx(t) * kSizeB + idx(j)];
  };
  for (int c1 = 0; c1 < counties; ++c1) {
    for (int c2 = 0; c2 < counties; ++c2) {
      const DistanceBin d = geo.bin(c2, c1);
      if (d == DistanceBin::too_far) continue;
      for (TypeB t : kAllTypeB) {
        for (SizeB j : kAllSizeB) arr(c1, d, t, j) += sp.pop(c2, t, j);
      }
    }
  }
  for (int c = 0; c < counties; ++c) {
    for (TypeB t1 : kAllTypeB) {
      for (SizeB j1 : kAllSizeB) {
        const int s = impute::SubpopulationSet::subpop_index(c, t1, j1);
        const double pop = sp.head[s];
        Coeffs row;
        if (pop != 0.0) {
          for (TypeB t2 : kAllTypeB) {
            for (SizeB j2 : kAllSizeB) {
              for (DistanceBin d : geo::kReachable) {
                const int v = mp.p_var[p_index(t1, j1, t2, j2, d)];
                const int n = geo.counties_in_bin(c, d);
                if (v >= 0 && n > 0) row.emplace_back(v, pop * n);
              }
            }
          }
        }
        for (TypeB t2 : kAllTypeB) {
          for (SizeB j2 : kAllSizeB) {
            for (DistanceBin d : geo::kReachable) {
              const int v = mp.p_var[p_index(t2, j2, t1, j1, d)];
              const double incoming = v >= 0 ? arr(c, d, t2, j2) : 0.0;
              if (incoming != 0.0) row.emplace_back(v, -incoming);
            }
          }
        }
        if (pop != 0.0) {
          row.emplace_back(mp.dt[s], pop);
          row.emplace_back(mp.sl[s], pop);
          row.emplace_back(mp.bt[s], -pop);
        }
        row.emplace_back(mp.pop_plus[s], 1.0);
        row.emplace_back(mp.pop_minus[s], -1.0);
        prog.add_equality(row, 0.0);
      }
    }
  }

  std::vector<int> discrepancy;
  for (int s = 0; s < subpops; ++s) {
    discrepancy.push_back(mp.pop_plus[s]);
    discrepancy.push_back(mp.pop_minus[s]);
  }
  for (int c = 0; c < counties; ++c) {
    for (int v : {mp.mov_plus[c], mp.mov_minus[c], mp.slt_plus[c], mp.slt_minus[c], mp.slt500[c]}) {
      discrepancy.push_back(v);
    }
  }
  if (f_min) {
    Coeffs budget;
    for (int v : discrepancy) budget.emplace_back(v, 1.0);
    mp.budget_row = prog.add_inequality(budget, *f_min * sp.total());
  } else {
    for (int v : discrepancy) prog.set_cost(v, 1.0);
  }
  return mp;
}

FormulationSize formulation_size(int counties) {
  const long long c = counties;
  const long long s = c * kSubpopsPerCounty;
  const long long p_all = static_cast<long long>(kSubpopsPerCounty) * kSubpopsPerCounty * geo::kDistanceBins;
  FormulationSize f;
  f.variables = 8 * s + 5 * c + p_all + 3;
  f.constraints = 8 * s + 6 * c + p_all + 4;
  return f;
}

double round_up_thousandth(double ratio) {
  if (!(ratio > 0.0)) return 0.0;
  const double k = std::ceil(1000.0 * ratio - 1e-6);
  return k <= 0.0 ? 0.0 : k / 1000.0;
}

FMinResult compute_f_min(const MovementInputs& in, const RateBounds& bounds,
                         const maxent::Tolerances& tol) {
  const MovementProgram mp = build_movement_program(in, bounds, std::nullopt);
  const auto r = maxent::solve_lp(mp.program, tol);
  FMinResult out;
  out.status = r.status;
  out.p_total = in.subpops.total();
  if (r.status == maxent::SolveStatus::Infeasible || r.status == maxent::SolveStatus::Unbounded) {
    throw MovementSolveError(std::string("discrepancy LP is ") + maxent::to_string(r.status) +
                                 (r.message.empty() ? "" : " (" + r.message + ")"),
                             r.status);
  }
  if (r.status != maxent::SolveStatus::Optimal) {
    throw MovementSolveError("discrepancy LP did not converge: " + r.message, r.status);
  }
  out.d_star = std::max(0.0, r.objective);
  out.f_min = out.p_total > 0.0 ? round_up_thousandth(out.d_star / out.p_total) : 0.0;
  return out;
}

MovementParameterSet parameters_from(const MovementInputs& in, const MovementProgram& mp,
                                     maxent::SolveReport r) {
  MovementParameterSet m;
  m.states = in.subpops.states;
  m.counties = in.subpops.counties;
  for (int k = 0; k < kPCount; ++k) m.p[k] = mp.p_var[k] >= 0 ? r.x[mp.p_var[k]] : 0.0;
  const int subpops = in.subpops.subpop_count();
  for (int s = 0; s < subpops; ++s) {
    m.st.push_back(r.x[mp.st[s]]);
    m.sl.push_back(r.x[mp.sl[s]]);
    m.dt.push_back(r.x[mp.dt[s]]);
    m.bt.push_back(r.x[mp.bt[s]]);
    m.pn_pop.push_back(r.x[mp.pop_plus[s]] - r.x[mp.pop_minus[s]]);
    m.d_pop += r.x[mp.pop_plus[s]] + r.x[mp.pop_minus[s]];
  }
  for (int c = 0; c < in.subpops.county_count(); ++c) {
    m.pn_mov.push_back(r.x[mp.mov_plus[c]] - r.x[mp.mov_minus[c]]);
    m.pn_slt.push_back(r.x[mp.slt_plus[c]] - r.x[mp.slt_minus[c]]);
    m.pn_slt500.push_back(r.x[mp.slt500[c]]);
    m.d_mov += r.x[mp.mov_plus[c]] + r.x[mp.mov_minus[c]] + r.x[mp.slt_plus[c]] +
               r.x[mp.slt_minus[c]] + r.x[mp.slt500[c]];
  }
  m.p_total = in.subpops.total();
  m.program_variables = mp.program.variables();
  m.program_equalities = mp.program.equalities();
  m.program_inequalities = mp.program.inequalities();
  r.x.clear();
  r.eq_multipliers.clear();
  r.ineq_multipliers.clear();
  r.lower_multipliers.clear();
  r.upper_multipliers.clear();
  m.report = std::move(r);
  return m;
}

MovementParameterSet solve_movement(const MovementInputs& in, const RateBounds& bounds,
                                    double f_min, const maxent::Tolerances& tol) {
  const MovementProgram mp = build_movement_program(in, bounds, f_min);
  auto r = maxent::solve_entropy(mp.program, tol);
  if (r.status != maxent::SolveStatus::Optimal) {
    throw MovementSolveError(std::string("movement program ") + maxent::to_string(r.status) +
                                 (r.message.empty() ? "" : " (" + r.message + ")"),
                             r.status);
  }
  MovementParameterSet m = parameters_from(in, mp, std::move(r));
  m.f_min = f_min;
  return m;
}

MovementParameterSet estimate(const MovementInputs& in, const RateBounds& bounds,
                              const maxent::Tolerances& tol) {
  const FMinResult f = compute_f_min(in, bounds, tol);
  MovementParameterSet m = solve_movement(in, bounds, f.f_min, tol);
  m.d_star = f.d_star;
  return m;
}

double outgoing_probability(const MovementParameterSet& m, const geo::DistanceClassifier& geo,
                            int c, TypeB t, SizeB j) {
  double sum = 0.0;
  for (DistanceBin d : geo::kReachable) {
    const int n = geo.counties_in_bin(c, d);
    if (n == 0) continue;
    for (TypeB t2 : kAllTypeB) {
      for (SizeB j2 : kAllSizeB) sum += n * m.param(t, j, t2, j2, d);
    }
  }
  return sum;
}

void write_movement_params(const std::filesystem::path& path, const MovementParameterSet& m) {
  std::ostringstream os;
  os << "t1,j1,t2,j2,dist,p_weekly\n";
  for (TypeB t1 : kAllTypeB) {
    for (SizeB j1 : kAllSizeB) {
      for (TypeB t2 : kAllTypeB) {
        for (SizeB j2 : kAllSizeB) {
          for (DistanceBin d : geo::kReachable) {
            os << token(t1) << ',' << token(j1) << ',' << token(t2) << ',' << token(j2) << ','
               << token(d) << ',' << csv::format_double(m.param(t1, j1, t2, j2, d)) << '\n';
          }
        }
      }
    }
  }
  csv::write_file(path, os.str());
}

void write_demographics(const std::filesystem::path& path, const MovementParameterSet& m) {
  std::ostringstream os;
  os << "state,county_fips,type,size,st,sl,dt,bt\n";
  for (int c = 0; c < m.county_count(); ++c) {
    for (TypeB t : kAllTypeB) {
      for (SizeB j : kAllSizeB) {
        const int s = impute::SubpopulationSet::subpop_index(c, t, j);
        os << m.states[c] << ',' << m.counties[c] << ',' << token(t) << ',' << token(j) << ','
           << csv::format_double(m.st[s]) << ',' << csv::format_double(m.sl[s]) << ','
           << csv::format_double(m.dt[s]) << ',' << csv::format_double(m.bt[s]) << '\n';
      }
    }
  }
  csv::write_file(path, os.str());
}

void write_discrepancies(const std::filesystem::path& path, const MovementParameterSet& m) {
  std::ostringstream os;
  os << "state,county_fips,pn_mov,pn_slt,pn_slt500,pn_pop_abs\n";
  for (int c = 0; c < m.county_count(); ++c) {
    double pop = 0.0;
    for (int k = 0; k < kSubpopsPerCounty; ++k) pop += std::abs(m.pn_pop[c * kSubpopsPerCounty + k]);
    os << m.states[c] << ',' << m.counties[c] << ',' << csv::format_double(m.pn_mov[c]) << ','
       << csv::format_double(m.pn_slt[c]) << ',' << csv::format_double(m.pn_slt500[c]) << ','
       << csv::format_double(pop) << '\n';
  }
  csv::write_file(path, os.str());
}

void write_run_meta(const std::filesystem::path& path, const MovementParameterSet& m) {
  int present = 0, zero = 0;
  for (TypeB t1 : kAllTypeB) {
    for (SizeB j1 : kAllSizeB) {
      for (TypeB t2 : kAllTypeB) {
        if (!movement_allowed(t1, t2)) continue;
        for (SizeB j2 : kAllSizeB) {
          for (DistanceBin d : geo::kReachable) {
            ++present;
            if (m.param(t1, j1, t2, j2, d) < 1e-12) ++zero;
          }
        }
      }
    }
  }
  const auto size = formulation_size(m.county_count());
  std::ostringstream os;
  os << "counties=" << m.county_count() << '\n'
     << "total_cattle=" << csv::format_double(m.p_total) << '\n'
     << "d_star=" << csv::format_double(m.d_star) << '\n'
     << "f_min=" << csv::format_fixed(m.f_min, 3) << '\n'
     << "d_mov=" << csv::format_double(m.d_mov) << '\n'
     << "d_pop=" << csv::format_double(m.d_pop) << '\n'
     << "formulation_constraints=" << size.constraints << '\n'
     << "formulation_variables=" << size.variables << '\n'
     << "program_variables=" << m.program_variables << '\n'
     << "program_equalities=" << m.program_equalities << '\n'
     << "program_inequalities=" << m.program_inequalities << '\n'
     << "solver_status=" << maxent::to_string(m.report.status) << '\n'
     << "solver_iterations=" << m.report.iterations << '\n'
     << "solver_fixed_by_presolve=" << m.report.fixed_by_presolve << '\n'
     << "solver_objective=" << csv::format_double(m.report.objective) << '\n'
     << "solver_eq_residual=" << csv::format_double(m.report.eq_residual) << '\n'
     << "solver_ineq_residual=" << csv::format_double(m.report.ineq_residual) << '\n'
     << "solver_kkt_residual=" << csv::format_double(m.report.kkt_residual) << '\n'
     << "p_near_zero_fraction="
     << csv::format_fixed(present > 0 ? static_cast<double>(zero) / present : 0.0, 6) << '\n';
  csv::write_file(path, os.str());
}

MovementParameterSet load_movement(const std::filesystem::path& params_csv,
                                   const std::filesystem::path& demographics_csv) {
  MovementParameterSet m;
  {
    csv::Reader r(params_csv);
    const int c1 = r.column("t1"), cj1 = r.column("j1"), c2 = r.column("t2"),
              cj2 = r.column("j2"), cd = r.column("dist"), cp = r.column("p_weekly");
    while (r.next()) {
      int k = 0;
      DistanceBin d{};
      try {
        d = geo::parse_distance_bin(r.field(cd));
        if (d != DistanceBin::too_far) {
          k = p_index(parse_type_b(r.field(c1)), parse_size_b(r.field(cj1)),
                      parse_type_b(r.field(c2)), parse_size_b(r.field(cj2)), d);
        }
      } catch (const ParseError& e) {
        r.fail(e.what());
      }
      if (d == DistanceBin::too_far) r.fail("too_far has no movement parameter");
      const double v = r.double_field(cp);
      if (!(v >= 0.0 && v <= 1.0)) r.fail("probability outside [0, 1]");
      m.p[k] = v;
    }
  }
  csv::Reader r(demographics_csv);
  const int cs = r.column("state"), cf = r.column("county_fips"), ct = r.column("type"),
            cz = r.column("size"), cst = r.column("st"), csl = r.column("sl"),
            cdt = r.column("dt"), cbt = r.column("bt");
  std::map<std::string, int, std::less<>> index;
  while (r.next()) {
    const std::string fips(r.field(cf));
    auto it = index.find(fips);
    if (it == index.end()) {
      it = index.emplace(fips, m.county_count()).first;
      m.states.emplace_back(r.field(cs));
      m.counties.push_back(fips);
      for (auto* v : {&m.st, &m.sl, &m.dt, &m.bt}) v->resize(v->size() + kSubpopsPerCounty, 0.0);
    }
    int s = 0;
    try {
      s = impute::SubpopulationSet::subpop_index(it->second, parse_type_b(r.field(ct)),
                                                 parse_size_b(r.field(cz)));
    } catch (const ParseError& e) {
      r.fail(e.what());
    }
    m.st[s] = r.double_field(cst);
    m.sl[s] = r.double_field(csl);
    m.dt[s] = r.double_field(cdt);
    m.bt[s] = r.double_field(cbt);
    for (double v : {m.st[s], m.sl[s], m.dt[s], m.bt[s]}) {
      if (!(v >= 0.0 && v <= 1.0)) r.fail("rate outside [0, 1]");
    }
  }
  m.pn_pop.assign(m.st.size(), 0.0);
  m.pn_mov.assign(m.counties.size(), 0.0);
  m.pn_slt.assign(m.counties.size(), 0.0);
  m.pn_slt500.assign(m.counties.size(), 0.0);
  return m;
}

}  // namespace cattle::movement
