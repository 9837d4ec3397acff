#include "cattle/census.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "cattle/csv.hpp"

namespace cattle {

CensusTable::CensusTable(int kinds, int counties)
    : kinds_(kinds),
      counties_(counties),
      cells_(static_cast<std::size_t>(kinds) * counties * kSizeA),
      county_totals_(static_cast<std::size_t>(kinds) * counties),
      size_totals_(static_cast<std::size_t>(kinds) * kSizeA),
      state_totals_(static_cast<std::size_t>(kinds), 0) {}

int CensusTable::add_county() {
  CensusTable grown(kinds_, counties_ + 1);
  for (int k = 0; k < kinds_; ++k) {
    for (int c = 0; c < counties_; ++c) {
      for (auto s : kAllSizeA) grown.cell(k, c, s) = cell(k, c, s);
      grown.county_total(k, c) = county_total(k, c);
    }
    for (auto s : kAllSizeA) grown.size_total(k, s) = size_total(k, s);
    grown.state_total(k) = state_total(k);
  }
  *this = std::move(grown);
  return counties_ - 1;
}

int CensusTable::suppressed_cells(int kind) const {
  int n = 0;
  for (int c = 0; c < counties_; ++c) {
    for (auto s : kAllSizeA) n += cell(kind, c, s).disclosed() ? 0 : 1;
  }
  return n;
}

std::optional<int> StateCensus::county_index(std::string_view fips) const {
  for (std::size_t i = 0; i < counties.size(); ++i) {
    if (counties[i] == fips) return static_cast<int>(i);
  }
  return std::nullopt;
}

int StateCensus::add_county(std::string fips) {
  counties.push_back(std::move(fips));
  populations.add_county();
  shipments.add_county();
  return static_cast<int>(counties.size()) - 1;
}

namespace {

bool valid_fips(std::string_view s) {
  return s.size() == 5 && std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

bool valid_state(std::string_view s) {
  return s.size() == 2 && std::all_of(s.begin(), s.end(), [](char ch) { return ch >= 'A' && ch <= 'Z'; });
}

std::optional<std::int64_t> parse_head(const csv::Reader& r, int col) {
  if (r.field(col) == kSuppressedToken) return std::nullopt;
  const auto v = r.int_field(col);
  if (v < 0) r.fail("negative head count");
  return v;
}

struct Section {
  std::string_view cells_file;
  std::string_view totals_file;
  std::string_view kind_column;
  int kinds;
  CensusTable StateCensus::*table;
  int (*parse_kind)(std::string_view);
  std::string_view (*kind_token)(int);
};

const Section kPopSection{
    "populations.csv", "pop_totals.csv", "cattle_type", kTypeA, &StateCensus::populations,
    [](std::string_view s) { return idx(parse_type_a(s)); },
    [](int k) { return token(static_cast<TypeA>(k)); }};

const Section kShipSection{
    "shipments.csv", "ship_totals.csv", "ship_type", kShipTypes, &StateCensus::shipments,
    [](std::string_view s) { return idx(parse_ship_type(s)); },
    [](int k) { return token(static_cast<ShipType>(k)); }};

StateCensus& state_entry(std::map<std::string, StateCensus>& states, const csv::Reader& r,
                         std::string_view code) {
  if (!valid_state(code)) r.fail("invalid state code '" + std::string(code) + "'");
  auto [it, inserted] = states.try_emplace(std::string(code));
  if (inserted) it->second.state = std::string(code);
  return it->second;
}

int county_entry(StateCensus& st, const csv::Reader& r, std::string_view fips) {
  if (!valid_fips(fips)) r.fail("invalid county FIPS '" + std::string(fips) + "'");
  if (auto i = st.county_index(fips)) return *i;
  return st.add_county(std::string(fips));
}

void read_cells(const std::filesystem::path& dir, const Section& sec,
                std::map<std::string, StateCensus>& states,
                std::map<std::string, std::set<std::tuple<int, int, int>>>& seen) {
  csv::Reader r(dir / sec.cells_file);
  const int c_state = r.column("state");
  const int c_county = r.column("county_fips");
  const int c_kind = r.column(sec.kind_column);
  const int c_size = r.column("size_range");
  const int c_ops = r.column("operations");
  const int c_head = r.column("head");
  while (r.next()) {
    auto& st = state_entry(states, r, r.field(c_state));
    const int county = county_entry(st, r, r.field(c_county));
    int kind = 0;
    SizeA size{};
    try {
      kind = sec.parse_kind(r.field(c_kind));
      size = parse_size_a(r.field(c_size));
    } catch (const ParseError& e) {
      r.fail(e.what());
    }
    const auto ops = r.int_field(c_ops);
    if (ops < 0) r.fail("negative operation count");
    const auto head = parse_head(r, c_head);
    if (!seen[st.state].insert({kind, county, idx(size)}).second) r.fail("duplicate cell");
    auto& cell = (st.*sec.table).cell(kind, county, size);
    if (!head && ops == 0) {
      // A withheld value with no operations can only be zero.
      cell = CensusCell::known(0, 0);
      st.warnings.push_back({std::string(sec.cells_file) + ":" + std::to_string(r.line()),
                             "suppressed cell with zero operations stored as disclosed zero"});
    } else {
      cell = CensusCell{ops, head};
    }
  }
}

void read_totals(const std::filesystem::path& dir, const Section& sec,
                 std::map<std::string, StateCensus>& states,
                 std::map<std::string, std::set<int>>& state_total_seen) {
  csv::Reader r(dir / sec.totals_file);
  const int c_state = r.column("state");
  const int c_scope = r.column("scope");
  const int c_kind = r.column(sec.kind_column);
  const int c_head = r.column("head");
  const int c_disc = r.column("disclosed");
  while (r.next()) {
    auto& st = state_entry(states, r, r.field(c_state));
    int kind = 0;
    try {
      kind = sec.parse_kind(r.field(c_kind));
    } catch (const ParseError& e) {
      r.fail(e.what());
    }
    const auto disc = r.field(c_disc);
    if (disc != "0" && disc != "1") r.fail("disclosed must be 0 or 1");
    auto head = parse_head(r, c_head);
    if ((disc == "1") != head.has_value()) r.fail("disclosed flag disagrees with head value");
    const auto scope = r.field(c_scope);
    auto& table = st.*sec.table;
    if (scope == "STATE") {
      if (!head) r.fail("state totals must be disclosed");
      table.state_total(kind) = *head;
      state_total_seen[st.state].insert(kind);
    } else if (valid_fips(scope)) {
      const int county = county_entry(st, r, scope);
      (st.*sec.table).county_total(kind, county).head = head;
    } else {
      SizeA size{};
      try {
        size = parse_size_a(scope);
      } catch (const ParseError&) {
        r.fail("scope must be a county FIPS code, a size range or STATE");
      }
      table.size_total(kind, size).head = head;
    }
  }
}

std::string head_token(const std::optional<std::int64_t>& h) {
  return h ? std::to_string(*h) : std::string(kSuppressedToken);
}

void check_table(StateCensus& st, const CensusTable& t, std::string_view section,
                 std::string_view (*kind_token)(int), std::vector<ValidationWarning>& out) {
  auto where = [&](int kind, std::string_view scope) {
    std::ostringstream os;
    os << st.state << "/" << section << "/" << kind_token(kind) << "/" << scope;
    return os.str();
  };
  for (int k = 0; k < t.kinds(); ++k) {
    if (t.state_total(k) < 0) throw ValidationError(where(k, "STATE") + ": negative total");
    for (int c = 0; c < t.counties(); ++c) {
      std::int64_t known = 0;
      bool any_hidden = false;
      for (auto s : kAllSizeA) {
        const auto& cell = t.cell(k, c, s);
        if (!cell.disclosed()) {
          any_hidden = true;
          if (cell.operations < 1) {
            throw ValidationError(where(k, st.counties[c]) + "/" + std::string(token(s)) +
                                  ": suppressed cell needs at least one operation");
          }
          continue;
        }
        known += *cell.head;
        const auto range = size_range(s);
        const auto lo = cell.operations * range.lower;
        const bool over = range.upper && *cell.head > cell.operations * *range.upper;
        if (*cell.head < lo || over) {
          out.push_back({where(k, st.counties[c]) + "/" + std::string(token(s)),
                         "head " + std::to_string(*cell.head) + " outside operation bounds"});
        }
      }
      const auto& tot = t.county_total(k, c);
      if (tot.disclosed()) {
        if (*tot.head < 0) throw ValidationError(where(k, st.counties[c]) + ": negative total");
        if ((!any_hidden && *tot.head != known) || (any_hidden && *tot.head < known)) {
          out.push_back({where(k, st.counties[c]),
                         "county total " + std::to_string(*tot.head) +
                             " inconsistent with disclosed cells summing to " +
                             std::to_string(known)});
        }
      }
    }
    std::int64_t county_sum = 0;
    bool county_hidden = false;
    for (int c = 0; c < t.counties(); ++c) {
      const auto& tot = t.county_total(k, c);
      if (tot.disclosed()) {
        county_sum += *tot.head;
      } else {
        county_hidden = true;
      }
    }
    if ((!county_hidden && county_sum != t.state_total(k)) ||
        (county_hidden && county_sum > t.state_total(k))) {
      out.push_back({where(k, "STATE"), "disclosed county totals sum to " +
                                            std::to_string(county_sum) + " against state total " +
                                            std::to_string(t.state_total(k))});
    }
    std::int64_t size_sum = 0;
    bool size_hidden = false;
    for (auto s : kAllSizeA) {
      const auto& tot = t.size_total(k, s);
      if (tot.disclosed()) {
        if (*tot.head < 0) throw ValidationError(where(k, token(s)) + ": negative total");
        size_sum += *tot.head;
      } else {
        size_hidden = true;
      }
    }
    if ((!size_hidden && size_sum != t.state_total(k)) ||
        (size_hidden && size_sum > t.state_total(k))) {
      out.push_back({where(k, "STATE"), "disclosed size totals sum to " + std::to_string(size_sum) +
                                            " against state total " +
                                            std::to_string(t.state_total(k))});
    }
  }
}

void write_section(std::ostringstream& cells, std::ostringstream& totals, const StateCensus& st,
                   const CensusTable& t, std::string_view (*kind_token)(int)) {
  for (int k = 0; k < t.kinds(); ++k) {
    for (int c = 0; c < t.counties(); ++c) {
      for (auto s : kAllSizeA) {
        const auto& cell = t.cell(k, c, s);
        cells << st.state << ',' << st.counties[c] << ',' << kind_token(k) << ',' << token(s)
              << ',' << cell.operations << ',' << head_token(cell.head) << '\n';
      }
    }
  }
  for (int k = 0; k < t.kinds(); ++k) {
    for (int c = 0; c < t.counties(); ++c) {
      const auto& tot = t.county_total(k, c);
      totals << st.state << ',' << st.counties[c] << ',' << kind_token(k) << ','
             << head_token(tot.head) << ',' << (tot.disclosed() ? 1 : 0) << '\n';
    }
    for (auto s : kAllSizeA) {
      const auto& tot = t.size_total(k, s);
      totals << st.state << ',' << token(s) << ',' << kind_token(k) << ',' << head_token(tot.head)
             << ',' << (tot.disclosed() ? 1 : 0) << '\n';
    }
    totals << st.state << ",STATE," << kind_token(k) << ',' << t.state_total(k) << ",1\n";
  }
}

}  // namespace

std::vector<ValidationWarning> validate(StateCensus& state) {
  if (!valid_state(state.state)) throw ValidationError("invalid state code '" + state.state + "'");
  for (const auto& c : state.counties) {
    if (!valid_fips(c)) throw ValidationError(state.state + ": invalid county FIPS '" + c + "'");
  }
  std::vector<ValidationWarning> out;
  check_table(state, state.populations, "populations", kPopSection.kind_token, out);
  check_table(state, state.shipments, "shipments", kShipSection.kind_token, out);
  state.warnings.insert(state.warnings.end(), out.begin(), out.end());
  return out;
}

std::vector<StateCensus> load_census(const std::filesystem::path& dir) {
  std::map<std::string, StateCensus> states;
  std::map<std::string, std::set<std::tuple<int, int, int>>> pop_seen, ship_seen;
  std::map<std::string, std::set<int>> pop_tot_seen, ship_tot_seen;
  read_cells(dir, kPopSection, states, pop_seen);
  read_cells(dir, kShipSection, states, ship_seen);
  read_totals(dir, kPopSection, states, pop_tot_seen);
  read_totals(dir, kShipSection, states, ship_tot_seen);

  std::vector<StateCensus> out;
  for (auto& [code, st] : states) {
    for (int k = 0; k < kTypeA; ++k) {
      if (!pop_tot_seen[code].count(k)) {
        throw ValidationError(code + ": missing state total for " +
                              std::string(token(static_cast<TypeA>(k))));
      }
    }
    for (int k = 0; k < kShipTypes; ++k) {
      if (!ship_tot_seen[code].count(k)) {
        throw ValidationError(code + ": missing state shipment total for " +
                              std::string(token(static_cast<ShipType>(k))));
      }
    }
    validate(st);
    out.push_back(std::move(st));
  }
  return out;
}

StateCensus load_state_census(const std::filesystem::path& dir, std::string_view state) {
  for (auto& st : load_census(dir)) {
    if (st.state == state) return std::move(st);
  }
  throw ValidationError("state " + std::string(state) + " not found in " + dir.string());
}

void write_census(const std::filesystem::path& dir, std::span<const StateCensus> states) {
  std::ostringstream pop, pop_tot, ship, ship_tot;
  pop << "state,county_fips,cattle_type,size_range,operations,head\n";
  pop_tot << "state,scope,cattle_type,head,disclosed\n";
  ship << "state,county_fips,ship_type,size_range,operations,head\n";
  ship_tot << "state,scope,ship_type,head,disclosed\n";
  std::vector<const StateCensus*> sorted;
  for (const auto& s : states) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->state < b->state; });
  for (const auto* st : sorted) {
    write_section(pop, pop_tot, *st, st->populations, kPopSection.kind_token);
    write_section(ship, ship_tot, *st, st->shipments, kShipSection.kind_token);
  }
  csv::write_file(dir / "populations.csv", pop.str());
  csv::write_file(dir / "pop_totals.csv", pop_tot.str());
  csv::write_file(dir / "shipments.csv", ship.str());
  csv::write_file(dir / "ship_totals.csv", ship_tot.str());
}

std::int64_t upper_limit(const CensusTable& table, int kind, SizeA s) {
  const auto range = size_range(s);
  if (range.upper) return *range.upper;
  const auto& tz = table.size_total(kind, s);
  return tz.disclosed() ? *tz.head : table.state_total(kind);
}

std::int64_t upper_limit(TypeA t, SizeA s, const StateCensus& state) {
  return upper_limit(state.populations, idx(t), s);
}

std::int64_t upper_limit(ShipType q, SizeA s, const StateCensus& state) {
  return upper_limit(state.shipments, idx(q), s);
}

}  // namespace cattle
