#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace genmean {

/// Order r of a power mean: -inf, a finite real, or +inf.
///
/// Finite(0) and Finite(1) are matched by exact equality and select the
/// geometric and arithmetic branches; there is no small-|r| threshold.
class PowerOrder {
 public:
  enum class Kind { neg_inf, finite, pos_inf };

  /// Defaults to the arithmetic mean.
  constexpr PowerOrder() noexcept = default;

  static PowerOrder finite(double r);
  static constexpr PowerOrder neg_inf() noexcept { return PowerOrder(Kind::neg_inf, 0.0); }
  static constexpr PowerOrder pos_inf() noexcept { return PowerOrder(Kind::pos_inf, 0.0); }
  static PowerOrder geometric() noexcept { return PowerOrder(Kind::finite, 0.0); }
  static PowerOrder arithmetic() noexcept { return PowerOrder(Kind::finite, 1.0); }

  /// Accepts decimals plus "inf", "+inf", "-inf" (case-insensitive).
  static PowerOrder parse(std::string_view text);

  constexpr Kind kind() const noexcept { return kind_; }
  constexpr bool is_finite() const noexcept { return kind_ == Kind::finite; }
  constexpr bool is_neg_inf() const noexcept { return kind_ == Kind::neg_inf; }
  constexpr bool is_pos_inf() const noexcept { return kind_ == Kind::pos_inf; }
  constexpr bool is_geometric() const noexcept { return is_finite() && value_ == 0.0; }
  constexpr bool is_arithmetic() const noexcept { return is_finite() && value_ == 1.0; }

  /// The finite value; throws PreconditionError for the infinite orders.
  double value() const;

  /// r as an extended real (+-infinity for the limit orders).
  double as_double() const noexcept;

  /// "-inf", "+inf" or the shortest round-trip decimal.
  std::string to_string() const;

  friend constexpr std::partial_ordering operator<=>(const PowerOrder& a, const PowerOrder& b) noexcept {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) <=> static_cast<int>(b.kind_);
    if (a.kind_ != Kind::finite) return std::partial_ordering::equivalent;
    return a.value_ <=> b.value_;
  }
  friend constexpr bool operator==(const PowerOrder& a, const PowerOrder& b) noexcept {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.value_ == b.value_);
  }

 private:
  constexpr PowerOrder(Kind k, double v) noexcept : kind_(k), value_(v) {}

  Kind kind_ = Kind::finite;
  double value_ = 1.0;
};

/// Parses a comma-separated list such as "-inf,-2,0,0.5,1,+inf".
/// Throws InvalidInput on an empty list or a bad entry.
std::vector<PowerOrder> parse_order_list(std::string_view text);

/// True when the grid is non-empty and strictly increasing.
bool is_strictly_increasing(const std::vector<PowerOrder>& grid);

}  // namespace genmean
