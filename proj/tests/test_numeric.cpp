#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "genmean/errors.hpp"
#include "genmean/numeric.hpp"
#include "genmean/power_order.hpp"

using namespace genmean;

TEST_SUITE("numeric") {

TEST_CASE("pairwise sum matches long-double accumulation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(100000);
  long double ref = 0.0L;
  for (auto& x : v) ref += (x = u(rng));
  CHECK(std::abs(pairwise_sum(v) - static_cast<double>(ref)) < 1e-10);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("logsumexp is shift invariant and handles -inf") {
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(logsumexp(std::vector<double>{}) == ninf);
  CHECK(logsumexp(std::vector<double>{ninf, ninf}) == ninf);
  CHECK(logsumexp(std::vector<double>{0.0, ninf}) == 0.0);
  CHECK(logsumexp(std::vector<double>{-1000.0, -1000.0}) == doctest::Approx(-1000.0 + std::log(2.0)));
  CHECK(logsumexp(std::vector<double>{800.0, 800.0}) == doctest::Approx(800.0 + std::log(2.0)));
  CHECK(log_add_exp(std::log(0.25), std::log(0.5)) == doctest::Approx(std::log(0.75)));
}

TEST_CASE("mean_std uses the n-1 denominator") {
  const auto ms = mean_std(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(mean_std(std::vector<double>{7.0}).stddev == 0.0);
}

TEST_CASE("exact formatting round-trips") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(u(rng)) * (i % 2 ? -1 : 1);
    CHECK(parse_double(format_exact(x)) == x);
  }
  CHECK(format_exact(std::numeric_limits<double>::infinity()) == "+inf");
  CHECK(format_exact(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_12g(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("parse_double is strict") {
  CHECK(parse_double(" 0.5 ") == 0.5);
  CHECK(parse_double("+2") == 2.0);
  CHECK(std::isinf(parse_double("INF")));
  CHECK_THROWS_AS(parse_double("0.5x"), InvalidInput);
  CHECK_THROWS_AS(parse_double(""), InvalidInput);
  CHECK_THROWS_AS(parse_double("--1"), InvalidInput);
  CHECK_THROWS_AS(parse_double("+-1"), InvalidInput);
}

TEST_CASE("power orders parse and sort") {
  CHECK(PowerOrder::parse("-INF").is_neg_inf());
  CHECK(PowerOrder::parse("inf").is_pos_inf());
  CHECK(PowerOrder::parse("+Inf").is_pos_inf());
  CHECK(PowerOrder::parse("0").is_geometric());
  CHECK(PowerOrder::parse("-0").is_geometric());
  CHECK(PowerOrder::parse("1").is_arithmetic());
  CHECK(PowerOrder::parse("1.0").is_arithmetic());
  CHECK_FALSE(PowerOrder::parse("1e-300").is_geometric());
  CHECK_THROWS_AS(PowerOrder::parse("nan"), InvalidInput);
  CHECK_THROWS_AS(PowerOrder::finite(std::numeric_limits<double>::infinity()), InvalidInput);
  CHECK_THROWS_AS(PowerOrder::neg_inf().value(), PreconditionError);

  CHECK(PowerOrder::neg_inf() < PowerOrder::finite(-1e300));
  CHECK(PowerOrder::finite(1e300) < PowerOrder::pos_inf());
  CHECK(PowerOrder::finite(0.25) < PowerOrder::finite(0.5));
  CHECK(PowerOrder::pos_inf() == PowerOrder::pos_inf());

  const auto grid = parse_order_list("-inf,-2,-1,0,0.25,0.5,0.75,1,2,+inf");
  CHECK(grid.size() == 10);
  CHECK(is_strictly_increasing(grid));
  CHECK_FALSE(is_strictly_increasing(parse_order_list("0,0")));
  CHECK_FALSE(is_strictly_increasing({}));
  CHECK_THROWS_AS(parse_order_list(""), InvalidInput);
  CHECK_THROWS_AS(parse_order_list("0,,1"), InvalidInput);
  CHECK(PowerOrder::neg_inf().to_string() == "-inf");
  CHECK(PowerOrder::finite(0.25).to_string() == "0.25");
}

}
