#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "bwmarket/market.hpp"

using bwm::CashRule;
using bwm::MarketState;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("zero volume leaves the quote alone") {
  MarketState m(10.0, 10.0);
  const auto t = m.execute(0.0);
  CHECK(m.price() == 10.0);
  CHECK(t.unit_price == 10.0);
  CHECK(t.cash_delta == 0.0);
}

TEST_CASE("ten units into liquidity ten scale the price by e") {
  MarketState m(10.0, 10.0);
  const auto t = m.execute(10.0);
  CHECK(t.unit_price == doctest::Approx(27.182818284590452).epsilon(1e-15));
  CHECK(t.new_quote == t.unit_price);
  CHECK(m.price() == t.unit_price);
  CHECK(t.cash_delta == doctest::Approx(-271.82818284590452).epsilon(1e-15));
}

TEST_CASE("cash rule selects the settlement price") {
  MarketState post(10.0, 10.0);
  MarketState pre(10.0, 10.0);
  CHECK(post.execute(2.0, CashRule::PostImpact).cash_delta ==
        doctest::Approx(-20.0 * std::exp(0.2)));
  CHECK(pre.execute(2.0, CashRule::PreTrade).cash_delta == doctest::Approx(-20.0));
  CHECK(pre.price() == post.price());
}

TEST_CASE("buy then sell of the same size returns to the start") {
  MarketState m(10.0, 10.0);
  m.execute(5.0);
  m.execute(-5.0);
  CHECK(m.price() == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("implied load inverts the impact") {
  MarketState fresh(10.0, 10.0);
  CHECK(fresh.implied_load() == 0.0);

  MarketState m(10.0, 10.0);
  m.execute(10.0);
  CHECK(m.implied_load() == doctest::Approx(10.0).epsilon(1e-14));

  MarketState t(10.0, 10.0);
  t.execute(3.0);
  t.execute(4.0);
  t.execute(-2.0);
  CHECK(t.implied_load() == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("invalid construction and trades") {
  CHECK_THROWS_AS(MarketState(0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(MarketState(10.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(MarketState(10.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(MarketState(NAN, 1.0), std::invalid_argument);
  MarketState m(10.0, 1.0);
  CHECK_THROWS_AS(m.execute(NAN), std::invalid_argument);
  CHECK_THROWS_AS(m.execute(1e6), std::range_error);
  CHECK(m.price() == 10.0);
}

TEST_CASE("circle trades, composition and relative price change") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> log_price(-3.0, 5.0);
  std::uniform_real_distribution<double> log_liq(-1.0, 3.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double s = std::pow(10.0, log_price(gen));
    const double lambda = std::pow(10.0, log_liq(gen));
    const double w1 = 5.0 * lambda * unit(gen);
    const double w2 = 5.0 * lambda * unit(gen);

    MarketState circle(s, lambda);
    circle.execute(w1);
    circle.execute(w2);
    circle.execute(-(w1 + w2));
    CHECK(rel(circle.price(), s) < 1e-9);

    MarketState split(s, lambda);
    MarketState joined(s, lambda);
    split.execute(w1);
    split.execute(w2);
    joined.execute(w1 + w2);
    CHECK(rel(split.price(), joined.price()) < 1e-9);

    MarketState step(s, lambda);
    const double before = step.price();
    step.execute(w1);
    CHECK(rel(step.price() / before, std::exp(w1 / lambda)) < 1e-12);
    CHECK(step.price() > 0.0);
  }
}

TEST_CASE("permuted volume sequences reach the same quote") {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> vol(-8, 8);
  std::vector<double> volumes(25);
  for (auto& v : volumes) v = vol(gen);
  MarketState base(10.0, 10.0);
  for (double v : volumes) base.execute(v);
  for (int p = 0; p < 100; ++p) {
    std::shuffle(volumes.begin(), volumes.end(), gen);
    MarketState m(10.0, 10.0);
    for (double v : volumes) m.execute(v);
    CHECK(rel(m.price(), base.price()) < 1e-9);
  }
}
