#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cattle {

/// The seven published herd-size ranges.
enum class SizeA : int { z1_9, z10_19, z20_49, z50_99, z100_199, z200_499, z500_up };

/// The three aggregated size ranges used for subpopulations.
enum class SizeB : int { z1_19, z20_199, z200_up };

enum class TypeA : int { Dairy, Preslaughter, AllCattle };
enum class TypeB : int { Dairy, Preslaughter, Beef };
enum class ShipType : int { AllShipments, Slaughter };

inline constexpr int kSizeA = 7;
inline constexpr int kSizeB = 3;
inline constexpr int kTypeA = 3;
inline constexpr int kTypeB = 3;
inline constexpr int kShipTypes = 2;
inline constexpr int kSubpopsPerCounty = kTypeB * kSizeB;

inline constexpr std::array<SizeA, kSizeA> kAllSizeA = {
    SizeA::z1_9,     SizeA::z10_19,   SizeA::z20_49, SizeA::z50_99,
    SizeA::z100_199, SizeA::z200_499, SizeA::z500_up};
inline constexpr std::array<SizeB, kSizeB> kAllSizeB = {SizeB::z1_19, SizeB::z20_199,
                                                       SizeB::z200_up};
inline constexpr std::array<TypeB, kTypeB> kAllTypeB = {TypeB::Dairy, TypeB::Preslaughter,
                                                       TypeB::Beef};

/// Closed head-count interval of a size range; `upper` is empty for 500+.
struct SizeRange {
  std::int64_t lower;
  std::optional<std::int64_t> upper;
};

constexpr int idx(SizeA s) { return static_cast<int>(s); }
constexpr int idx(SizeB s) { return static_cast<int>(s); }
constexpr int idx(TypeA t) { return static_cast<int>(t); }
constexpr int idx(TypeB t) { return static_cast<int>(t); }
constexpr int idx(ShipType q) { return static_cast<int>(q); }

constexpr SizeRange size_range(SizeA s) {
  constexpr std::array<std::int64_t, kSizeA> lo = {1, 10, 20, 50, 100, 200, 500};
  constexpr std::array<std::int64_t, kSizeA - 1> hi = {9, 19, 49, 99, 199, 499};
  if (s == SizeA::z500_up) return {lo[6], std::nullopt};
  return {lo[idx(s)], hi[idx(s)]};
}

constexpr SizeB to_size_b(SizeA s) {
  switch (s) {
    case SizeA::z1_9:
    case SizeA::z10_19:
      return SizeB::z1_19;
    case SizeA::z20_49:
    case SizeA::z50_99:
    case SizeA::z100_199:
      return SizeB::z20_199;
    default:
      return SizeB::z200_up;
  }
}

/// Size_B range a single event of `head` animals falls into (1-19, 20-199, 200+).
constexpr SizeB size_b_of_count(std::int64_t head) {
  if (head < 20) return SizeB::z1_19;
  if (head < 200) return SizeB::z20_199;
  return SizeB::z200_up;
}

/// Thrown for unknown enum tokens and malformed input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view token(SizeA s);
std::string_view token(SizeB s);
std::string_view token(TypeA t);
std::string_view token(TypeB t);
std::string_view token(ShipType q);

SizeA parse_size_a(std::string_view s);
SizeB parse_size_b(std::string_view s);
TypeA parse_type_a(std::string_view s);
TypeB parse_type_b(std::string_view s);
ShipType parse_ship_type(std::string_view s);

/// Short label used in report tables, e.g. "D" or "B".
std::string_view short_label(TypeB t);

}  // namespace cattle
