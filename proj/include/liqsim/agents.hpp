#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include "liqsim/order_book.hpp"
#include "liqsim/params.hpp"
#include "liqsim/rng.hpp"

namespace liqsim {

// Per-agent state.  w1 weighs reversion to the fundamental price, w2 weighs
// the recent trend, u weighs noise; tau is the lookback of the trend term.
// The weights learn, u and tau are fixed at birth.
struct NormalAgentState {
    double w1 = 0.0;
    double w2 = 0.0;
    double u = 0.0;
    int64_t tau = 1;
};

inline NormalAgentState init_normal_agent(const MarketParams& p, Rng& rng) {
    NormalAgentState a;
    a.w1 = rng.uniform(0.0, p.w1_max);
    a.w2 = rng.uniform(0.0, p.w2_max);
    a.u = rng.uniform(0.0, p.u_max);
    a.tau = rng.uniform_int(1, p.tau_max);
    return a;
}

// Read-only view of the step-indexed price series.  Indices before the start
// of the run resolve to the fundamental price.
class PriceHistory {
public:
    PriceHistory(std::span<const double> series, double p_f) : series_(series), p_f_(p_f) {}

    double at(int64_t t) const {
        if (t < 0) return p_f_;
        assert(static_cast<size_t>(t) < series_.size());
        return series_[static_cast<size_t>(t)];
    }

private:
    std::span<const double> series_;
    double p_f_;
};

struct StrategyReturns {
    double fundamental = 0.0;  // expects the price to revert toward p_f
    double technical = 0.0;    // expects the recent trend to continue
};

inline StrategyReturns strategy_returns(const PriceHistory& hist, int64_t t, int64_t lag,
                                        int64_t tau, double p_f) {
    const double p_lag = hist.at(t - lag);
    return {std::log(p_f / p_lag), std::log(p_lag / hist.at(t - lag - tau))};
}

// Weighted blend of the two strategy returns and a noise draw.  Undefined
// when every weight is zero (the agent has no opinion and places no order).
inline std::optional<double> expected_return(const NormalAgentState& a, const StrategyReturns& sr,
                                             double eps) {
    const double total = a.w1 + a.w2 + a.u;
    if (total <= 0.0) return std::nullopt;
    return (a.w1 * sr.fundamental + a.w2 * sr.technical + a.u * eps) / total;
}

inline double expected_price(double last_price, double expected_ret) {
    return last_price * std::exp(expected_ret);
}

// Zero only matches zero; any nonzero return disagrees with a flat market.
constexpr bool signs_match(double a, double b) {
    return (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0) || (a == 0.0 && b == 0.0);
}

struct LearningStep {
    double w;
    bool clamped;
};

// One multiplicative weight update.  A step size above 1 would overshoot the
// [0, w_max] interval, so it saturates at the boundary and reports the clamp.
inline LearningStep learning_update(double w, double w_max, double k_l, double r_l,
                                    bool same_sign, double q) {
    double step = k_l * std::fabs(r_l) * q;
    bool clamped = false;
    if (step > 1.0) {
        step = 1.0;
        clamped = true;
    }
    const double next = same_sign ? w + step * (w_max - w) : w - step * w;
    return {next, clamped};
}

struct LearnStats {
    uint64_t bound_hits = 0;
};

// Reinforce or weaken each strategy weight by comparing its current forecast
// with the realised return, then occasionally reset the weight entirely.
inline LearnStats learn(NormalAgentState& a, const StrategyReturns& sr, double realized_ret,
                        const MarketParams& p, Rng& rng) {
    LearnStats stats;
    const auto update_one = [&](double& w, double w_max, double forecast) {
        const double q = rng.uniform01();
        const auto res = learning_update(w, w_max, p.k_l, realized_ret,
                                         signs_match(forecast, realized_ret), q);
        w = res.w;
        stats.bound_hits += res.clamped ? 1 : 0;
        if (rng.uniform01() < p.m) w = rng.uniform(0.0, w_max);
    };
    update_one(a.w1, p.w1_max, sr.fundamental);
    update_one(a.w2, p.w2_max, sr.technical);
    return stats;
}

// Buy when the agent believes the drawn price is a bargain, sell when it
// looks rich, do nothing on an exact tie.
inline std::optional<Side> classify_order(double expected, double order_price) {
    if (expected > order_price) return Side::buy;
    if (expected < order_price) return Side::sell;
    return std::nullopt;
}

struct OrderIntent {
    Side side;
    double raw_price;  // pre-rounding
};

// Draw an order price around the expected price; non-positive draws are
// redrawn from the same distribution.
inline std::optional<OrderIntent> draw_order(double expected, double est, Rng& rng) {
    assert(expected > 0.0);
    const double sigma = expected * est;
    double price = rng.normal(expected, sigma);
    for (int tries = 0; price <= 0.0; ++tries) {
        if (tries > 1000) throw std::runtime_error("order price draw failed to turn positive");
        price = rng.normal(expected, sigma);
    }
    const auto side = classify_order(expected, price);
    if (!side) return std::nullopt;
    return OrderIntent{*side, price};
}

// Market-making state: net inventory plus the ids of the live quote pair.
struct HftState {
    int64_t position = 0;
    std::optional<uint64_t> live_buy_id;
    std::optional<uint64_t> live_sell_id;
};

struct HftQuotes {
    double buy_price;
    double sell_price;
};

// Quote pair around the book mid, shifted down as inventory grows long and up
// as it grows short (cubic in the position).  When the skewed pair would
// cross the standing book it is pulled back to one tick inside the touch, so
// the quotes always rest.  The gap between the two prices is p_f * theta_h in
// every branch.
inline HftQuotes hft_quotes(int64_t position, double best_bid, double best_ask, double p_f,
                            double theta_h, double w_h, double tick) {
    assert(best_bid < best_ask);
    const double s = static_cast<double>(position);
    const double mid = 0.5 * (best_bid + best_ask);
    const double base = (1.0 - w_h * s * s * s) * mid;
    const double half_gap = 0.5 * (p_f * theta_h);
    double buy = base - half_gap;
    double sell = base + half_gap;
    if (buy >= best_ask) {  // would lift the ask
        buy = best_ask - tick;
        sell = (best_ask - tick) + p_f * theta_h;
    }
    if (sell <= best_bid) {  // would hit the bid
        buy = (best_bid + tick) - p_f * theta_h;
        sell = best_bid + tick;
    }
    return {buy, sell};
}

}  // namespace liqsim
