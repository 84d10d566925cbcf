#include "genmean/power_order.hpp"

#include <cmath>

#include "genmean/errors.hpp"
#include "genmean/numeric.hpp"

namespace genmean {

PowerOrder PowerOrder::finite(double r) {
  if (!std::isfinite(r)) throw InvalidInput("finite power order must be a finite real, got " + format_exact(r));
  // -0.0 and 0.0 are the same order.
  return PowerOrder(Kind::finite, r == 0.0 ? 0.0 : r);
}

PowerOrder PowerOrder::parse(std::string_view text) {
  const double r = parse_double(text);
  if (std::isnan(r)) throw InvalidInput("power order cannot be NaN");
  if (std::isinf(r)) return r > 0 ? pos_inf() : neg_inf();
  return finite(r);
}

double PowerOrder::value() const {
  if (kind_ != Kind::finite) throw PreconditionError("power order " + to_string() + " has no finite value");
  return value_;
}

double PowerOrder::as_double() const noexcept {
  switch (kind_) {
    case Kind::neg_inf: return -HUGE_VAL;
    case Kind::pos_inf: return HUGE_VAL;
    case Kind::finite: break;
  }
  return value_;
}

std::string PowerOrder::to_string() const { return format_exact(as_double()); }

std::vector<PowerOrder> parse_order_list(std::string_view text) {
  std::vector<PowerOrder> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    const auto token = text.substr(start, end - start);
    if (token.find_first_not_of(" \t") != std::string_view::npos) {
      out.push_back(PowerOrder::parse(token));
    } else if (comma != std::string_view::npos || !out.empty()) {
      throw InvalidInput("empty entry in order list '" + std::string(text) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw InvalidInput("order list is empty");
  return out;
}

bool is_strictly_increasing(const std::vector<PowerOrder>& grid) {
  if (grid.empty()) return false;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i - 1] < grid[i])) return false;
  return true;
}

}  // namespace genmean
