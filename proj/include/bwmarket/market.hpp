#pragma once

namespace bwm {

/// Which price a trade is settled at.
enum class CashRule {
  /// Settle at the post-impact unit price S * exp(w / lambda).
  PostImpact,
  /// Settle at the pre-trade quote S. Compatibility mode only.
  PreTrade,
};

struct Trade {
  double volume = 0.0;      // signed units, positive = buy
  double unit_price = 0.0;  // S * exp(volume / lambda)
  double cash_delta = 0.0;  // change in the trader's cash
  double new_quote = 0.0;   // equals unit_price
};

/// One exponential price-impact spot market. The market maker always
/// absorbs the trade; scarcity only ever shows up in the price.
class MarketState {
 public:
  MarketState(double initial_price, double liquidity);

  double price() const noexcept { return price_; }
  double initial_price() const noexcept { return initial_price_; }
  double liquidity() const noexcept { return liquidity_; }

  /// Executes a signed volume. Throws std::invalid_argument for a non-finite
  /// volume and std::range_error when the new price leaves the finite
  /// positive doubles. On throw the state is unchanged.
  Trade execute(double volume, CashRule rule = CashRule::PostImpact);

  /// lambda * log(price / initial_price): the net volume absorbed so far.
  double implied_load() const;

 private:
  double price_;
  double initial_price_;
  double liquidity_;
};

}  // namespace bwm
