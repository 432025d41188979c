#pragma once

#include <string>
#include <string_view>

#include "ronguard/error.hpp"

namespace ronguard {

/// Binary class. Trojan is the positive class.
enum class Label : int { Golden = -1, Trojan = 1 };

constexpr int sign(Label l) noexcept { return static_cast<int>(l); }
constexpr bool is_positive(Label l) noexcept { return l == Label::Trojan; }

/// Resolution of exact ties (SVM decision 0, GNB posterior 0.5, split
/// two-member ensemble vote).
enum class TieBreak { PreferPositive, PreferNegative };

constexpr Label tie_label(TieBreak t) noexcept {
  return t == TieBreak::PreferPositive ? Label::Trojan : Label::Golden;
}

inline std::string_view to_string(Label l) { return l == Label::Trojan ? "trojan" : "golden"; }

inline std::string_view to_string(TieBreak t) {
  return t == TieBreak::PreferPositive ? "prefer_positive" : "prefer_negative";
}

inline Label parse_label(std::string_view s) {
  if (s == "trojan") return Label::Trojan;
  if (s == "golden") return Label::Golden;
  throw ArgumentError("unknown label '" + std::string(s) + "' (expected golden or trojan)");
}

inline TieBreak parse_tie_break(std::string_view s) {
  if (s == "prefer_positive" || s == "positive") return TieBreak::PreferPositive;
  if (s == "prefer_negative" || s == "negative") return TieBreak::PreferNegative;
  throw ArgumentError("unknown tie-break '" + std::string(s) + "' (expected prefer_positive or prefer_negative)");
}

}  // namespace ronguard
