#include "cattle/types.hpp"

#include <string>

namespace cattle {

namespace {

constexpr std::array<std::string_view, kSizeA> kSizeATokens = {
    "z1_9", "z10_19", "z20_49", "z50_99", "z100_199", "z200_499", "z500_up"};
constexpr std::array<std::string_view, kSizeB> kSizeBTokens = {"z1_19", "z20_199", "z200_up"};
constexpr std::array<std::string_view, kTypeA> kTypeATokens = {"DAIRY", "PRESLAUGHTER", "ALL"};
constexpr std::array<std::string_view, kTypeB> kTypeBTokens = {"DAIRY", "PRESLAUGHTER", "BEEF"};
constexpr std::array<std::string_view, kShipTypes> kShipTokens = {"ALL", "SLAUGHTER"};

template <typename E, std::size_t N>
E parse_token(std::string_view s, const std::array<std::string_view, N>& tokens,
              std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (tokens[i] == s) return static_cast<E>(i);
  }
  throw ParseError("unknown " + std::string(what) + " token '" + std::string(s) + "'");
}

}  // namespace

std::string_view token(SizeA s) { return kSizeATokens[idx(s)]; }
std::string_view token(SizeB s) { return kSizeBTokens[idx(s)]; }
std::string_view token(TypeA t) { return kTypeATokens[idx(t)]; }
std::string_view token(TypeB t) { return kTypeBTokens[idx(t)]; }
std::string_view token(ShipType q) { return kShipTokens[idx(q)]; }

SizeA parse_size_a(std::string_view s) { return parse_token<SizeA>(s, kSizeATokens, "size_range"); }
SizeB parse_size_b(std::string_view s) { return parse_token<SizeB>(s, kSizeBTokens, "size_b"); }
TypeA parse_type_a(std::string_view s) { return parse_token<TypeA>(s, kTypeATokens, "cattle_type"); }
TypeB parse_type_b(std::string_view s) { return parse_token<TypeB>(s, kTypeBTokens, "type_b"); }
ShipType parse_ship_type(std::string_view s) {
  return parse_token<ShipType>(s, kShipTokens, "ship_type");
}

std::string_view short_label(TypeB t) {
  constexpr std::array<std::string_view, kTypeB> labels = {"D", "P", "B"};
  return labels[idx(t)];
}

}  // namespace cattle
