#pragma once

// Census data model: per-state tables of aggregated counts with disclosure flags,
// and the CSV files they are exchanged in.
//
// Files in a census directory (one row per cell, all states mixed):
//   populations.csv  state,county_fips,cattle_type,size_range,operations,head
//   pop_totals.csv   state,scope,cattle_type,head,disclosed
//   shipments.csv    state,county_fips,ship_type,size_range,operations,head
//   ship_totals.csv  state,scope,ship_type,head,disclosed
// `head` is a non-negative integer or the token "D" for a withheld value.
// `scope` is a county FIPS code (county total), a size-range token (state size
// total) or the literal STATE (state total, which must be disclosed).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cattle/types.hpp"

namespace cattle {

/// Token used in CSV files for a withheld head count.
inline constexpr std::string_view kSuppressedToken = "D";

/// One published cell: an operation count and a head count that may be withheld.
struct CensusCell {
  std::int64_t operations = 0;
  std::optional<std::int64_t> head = 0;

  bool disclosed() const { return head.has_value(); }

  static CensusCell known(std::int64_t operations, std::int64_t head) { return {operations, head}; }
  static CensusCell suppressed(std::int64_t operations) { return {operations, std::nullopt}; }

  friend bool operator==(const CensusCell&, const CensusCell&) = default;
};

/// A county or size total row.
struct TotalCell {
  std::optional<std::int64_t> head;

  bool disclosed() const { return head.has_value(); }

  friend bool operator==(const TotalCell&, const TotalCell&) = default;
};

/// One section of a state census: cells over kind x county x Size_A, with
/// county totals, state size totals and state totals. `kind` is a TypeA for the
/// population section and a ShipType for the shipment section.
class CensusTable {
 public:
  CensusTable() = default;
  CensusTable(int kinds, int counties);

  int kinds() const { return kinds_; }
  int counties() const { return counties_; }

  CensusCell& cell(int kind, int county, SizeA s) { return cells_[cell_index(kind, county, s)]; }
  const CensusCell& cell(int kind, int county, SizeA s) const {
    return cells_[cell_index(kind, county, s)];
  }
  TotalCell& county_total(int kind, int county) { return county_totals_[kind * counties_ + county]; }
  const TotalCell& county_total(int kind, int county) const {
    return county_totals_[kind * counties_ + county];
  }
  TotalCell& size_total(int kind, SizeA s) { return size_totals_[kind * kSizeA + idx(s)]; }
  const TotalCell& size_total(int kind, SizeA s) const {
    return size_totals_[kind * kSizeA + idx(s)];
  }
  std::int64_t& state_total(int kind) { return state_totals_[kind]; }
  std::int64_t state_total(int kind) const { return state_totals_[kind]; }

  /// Appends a county with all cells disclosed zero and totals suppressed.
  int add_county();

  /// Number of withheld cells of one kind.
  int suppressed_cells(int kind) const;

  friend bool operator==(const CensusTable&, const CensusTable&) = default;

 private:
  std::size_t cell_index(int kind, int county, SizeA s) const {
    return (static_cast<std::size_t>(kind) * counties_ + county) * kSizeA + idx(s);
  }

  int kinds_ = 0;
  int counties_ = 0;
  std::vector<CensusCell> cells_;
  std::vector<TotalCell> county_totals_;
  std::vector<TotalCell> size_totals_;
  std::vector<std::int64_t> state_totals_;
};

struct ValidationWarning {
  std::string where;
  std::string message;
};

/// Invariant breach in otherwise well-formed input.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StateCensus {
  std::string state;
  std::vector<std::string> counties;  // FIPS codes, order defines county indices
  CensusTable populations{kTypeA, 0};
  CensusTable shipments{kShipTypes, 0};
  std::vector<ValidationWarning> warnings;

  std::optional<int> county_index(std::string_view fips) const;
  int add_county(std::string fips);
};

/// Loads every state found in a census directory, states sorted by code.
std::vector<StateCensus> load_census(const std::filesystem::path& dir);

/// Loads one state from a census directory; throws ValidationError when absent.
StateCensus load_state_census(const std::filesystem::path& dir, std::string_view state);

/// Writes the four census files in canonical order (states, counties and
/// enums in index order, every cell present).
void write_census(const std::filesystem::path& dir, std::span<const StateCensus> states);

/// Checks structural invariants. Fatal breaches throw ValidationError; soft
/// inconsistencies (bounds, totals) are returned and also stored on `state`.
std::vector<ValidationWarning> validate(StateCensus& state);

/// Upper head-count limit u of a size range. For 500+ this is the state size
/// total when disclosed, else the state total of that kind.
std::int64_t upper_limit(const CensusTable& table, int kind, SizeA s);
std::int64_t upper_limit(TypeA t, SizeA s, const StateCensus& state);
std::int64_t upper_limit(ShipType q, SizeA s, const StateCensus& state);

/// Lower head-count limit l of a size range.
inline std::int64_t lower_limit(SizeA s) { return size_range(s).lower; }

}  // namespace cattle
