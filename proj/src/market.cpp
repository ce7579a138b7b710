#include "bwmarket/market.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bwm {

MarketState::MarketState(double initial_price, double liquidity)
    : price_(initial_price), initial_price_(initial_price), liquidity_(liquidity) {
  if (!(initial_price > 0.0) || !std::isfinite(initial_price)) {
    throw std::invalid_argument("market: initial price must be positive and finite, got " +
                                std::to_string(initial_price));
  }
  if (!(liquidity > 0.0) || !std::isfinite(liquidity)) {
    throw std::invalid_argument("market: liquidity must be positive and finite, got " +
                                std::to_string(liquidity));
  }
}

Trade MarketState::execute(double volume, CashRule rule) {
  if (!std::isfinite(volume)) throw std::invalid_argument("market: non-finite trade volume");
  const double unit_price = price_ * std::exp(volume / liquidity_);
  if (!std::isfinite(unit_price) || !(unit_price > 0.0)) {
    throw std::range_error("market: price impact of volume " + std::to_string(volume) +
                           " leaves the representable range");
  }
  const double settle = rule == CashRule::PostImpact ? unit_price : price_;
  Trade trade{volume, unit_price, -volume * settle, unit_price};
  price_ = unit_price;
  return trade;
}

double MarketState::implied_load() const {
  return liquidity_ * std::log(price_ / initial_price_);
}

}  // namespace bwm
