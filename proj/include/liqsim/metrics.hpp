#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "liqsim/engine.hpp"
#include "liqsim/event_log.hpp"
#include "liqsim/format.hpp"
#include "liqsim/stats.hpp"

namespace liqsim {

// Stride of the return series behind the tail and clustering statistics.
inline constexpr int64_t kStylizedReturnInterval = 100;

// Total shares traded.  Every trade is one share.
inline uint64_t volume(const RunTrace& tr) { return tr.trades; }

// Shares traded with the market maker on either side.
inline uint64_t hft_volume(const RunTrace& tr) { return tr.hft_trades; }

// Mean bid-ask spread in currency.  Steps where either side lacked a quote
// contribute to neither the numerator nor the denominator.
inline std::optional<double> tightness(const RunTrace& tr) {
    double sum = 0.0;
    int64_t count = 0;
    for (size_t t = 1; t < tr.spread_ticks.size(); ++t) {
        if (tr.spread_ticks[t] >= 0) {
            sum += tr.spread_ticks[t];
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count) * tr.params.delta_p;
}

// Mean over days of (daily high - daily low) / daily volume, using trade
// prices only.  Days without a trade are excluded; partial trailing days are
// not scored.  Lower values mean the market absorbs volume with less price
// movement.
inline std::optional<double> resiliency(const RunTrace& tr) {
    const int64_t days = tr.params.t_day > 0 ? tr.params.t_end / tr.params.t_day : 0;
    double sum = 0.0;
    int64_t scored = 0;
    for (int64_t d = 0; d < days; ++d) {
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        int64_t vol = 0;
        const int64_t begin = d * tr.params.t_day + 1;
        const int64_t end = (d + 1) * tr.params.t_day;
        for (int64_t t = begin; t <= end; ++t) {
            if (tr.flags[static_cast<size_t>(t)] & RunTrace::kTrade) {
                ++vol;
                const double px = tr.price[static_cast<size_t>(t)];
                hi = std::max(hi, px);
                lo = std::min(lo, px);
            }
        }
        if (vol > 0) {
            sum += (hi - lo) / static_cast<double>(vol);
            ++scored;
        }
    }
    if (scored == 0) return std::nullopt;
    return sum / static_cast<double>(scored);
}

// Time average of (bid-side count + ask-side count) / 2 within the depth
// window; steps with a one-sided book contribute zero.
inline double depth(const RunTrace& tr) {
    if (tr.params.t_end <= 0) return 0.0;
    uint64_t total = 0;
    for (size_t t = 1; t < tr.depth_buy.size(); ++t)
        total += tr.depth_buy[t] + tr.depth_sell[t];
    return static_cast<double>(total) / 2.0 / static_cast<double>(tr.params.t_end);
}

// Fraction of normal agents' orders answered by an execution out of the
// book.  Every trade consumes exactly one resting order, so the numerator is
// the trade count.
inline std::optional<double> execution_rate(const RunTrace& tr) {
    if (tr.normal_orders == 0) return std::nullopt;
    return static_cast<double>(tr.trades) / static_cast<double>(tr.normal_orders);
}

// Variant that only counts executions of resting orders normal agents owned.
inline std::optional<double> execution_rate_normal_resting(const RunTrace& tr) {
    if (tr.normal_orders == 0) return std::nullopt;
    return static_cast<double>(tr.normal_resting_trades) / static_cast<double>(tr.normal_orders);
}

// Sample standard deviation of log returns taken every vol_sample_interval
// steps, as a fraction (multiply by 100 for percent).
inline std::optional<double> volatility(const RunTrace& tr) {
    return sample_stddev(log_returns(tr.price, tr.params.vol_sample_interval));
}

struct StylizedFacts {
    std::optional<double> excess_kurtosis;
    std::array<std::optional<double>, 5> sq_return_autocorr{};
};

// Tail weight and volatility clustering of the coarse return series.
inline StylizedFacts stylized_facts(std::span<const double> prices,
                                    int64_t interval = kStylizedReturnInterval) {
    StylizedFacts out;
    const auto returns = log_returns(prices, interval);
    out.excess_kurtosis = excess_kurtosis(returns);
    std::vector<double> squared(returns.size());
    for (size_t i = 0; i < returns.size(); ++i) squared[i] = returns[i] * returns[i];
    for (int64_t lag = 1; lag <= 5; ++lag)
        out.sq_return_autocorr[static_cast<size_t>(lag - 1)] = autocorrelation(squared, lag);
    return out;
}

inline StylizedFacts stylized_facts(const RunTrace& tr, int64_t interval = kStylizedReturnInterval) {
    return stylized_facts(std::span<const double>(tr.price), interval);
}

struct LiquidityReport {
    uint64_t volume = 0;
    uint64_t hft_volume = 0;
    std::optional<double> tightness;
    std::optional<double> resiliency;
    double depth = 0.0;
    std::optional<double> execution_rate;
    std::optional<double> execution_rate_normal_resting;
    std::optional<double> volatility;
    StylizedFacts stylized;
    int64_t hft_position = 0;
};

inline LiquidityReport liquidity_report(const RunTrace& tr) {
    LiquidityReport r;
    r.volume = volume(tr);
    r.hft_volume = hft_volume(tr);
    r.tightness = tightness(tr);
    r.resiliency = resiliency(tr);
    r.depth = depth(tr);
    r.execution_rate = execution_rate(tr);
    r.execution_rate_normal_resting = execution_rate_normal_resting(tr);
    r.volatility = volatility(tr);
    r.stylized = stylized_facts(tr);
    r.hft_position = tr.hft_position;
    return r;
}

// Rebuilds a trace by pushing a recorded event stream through a fresh book.
// Trades are regenerated by the matching rules and cross-checked against the
// logged trade rows, so a log that disagrees with the rules is rejected.
inline RunTrace replay_event_log(const std::vector<LogRecord>& records, const MarketParams& params) {
    params.validate();
    RunTrace tr;
    tr.params = params;
    const size_t len = static_cast<size_t>(params.t_end) + 1;
    tr.price.assign(len, params.p_f);
    tr.spread_ticks.assign(len, -1);
    tr.depth_buy.assign(len, 0);
    tr.depth_sell.assign(len, 0);
    tr.flags.assign(len, 0);

    OrderBook book(params.delta_p);
    {
        // the log starts at step 1; the opening book is rebuilt from params
        auto agents = init_agents(params);
        uint64_t next_id = 1;
        open_market(params, agents, book, next_id);
    }
    HftState hft;
    std::optional<Trade> pending;  // regenerated trade awaiting its log row
    uint64_t cancel_rows = 0, expire_rows = 0;
    size_t i = 0;
    const auto fail = [](size_t idx, const std::string& msg) {
        throw std::runtime_error("replay: record " + std::to_string(idx + 1) + ": " + msg);
    };

    const auto to_ticks = [&](double price, size_t idx) {
        const double scaled = price / params.delta_p;
        const auto ticks = static_cast<int64_t>(std::llround(scaled));
        if (std::fabs(scaled - static_cast<double>(ticks)) > 1e-6)
            fail(idx, "price " + format_double(price) + " is off the tick grid");
        return ticks;
    };

    for (int64_t t = 1; t <= params.t_end; ++t) {
        tr.price[static_cast<size_t>(t)] = tr.price[static_cast<size_t>(t - 1)];
        while (i < records.size() && records[i].t == t) {
            const LogRecord& r = records[i];
            if (pending && r.type != EventType::trade)
                fail(i, "expected the trade row for order " + std::to_string(pending->aggressor_id));
            switch (r.type) {
                case EventType::submit: {
                    const Order order{r.order_id, r.owner, r.side, to_ticks(r.price, i), t};
                    if (order.owner >= 0) {
                        ++tr.normal_orders;
                        tr.flags[static_cast<size_t>(t)] |= RunTrace::kOrderPlaced;
                    }
                    pending = book.submit(order);
                    break;
                }
                case EventType::trade: {
                    if (!pending) fail(i, "trade row without a crossing submit before it");
                    const int32_t resting_owner =
                        pending->aggressor == Side::buy ? pending->sell_owner : pending->buy_owner;
                    if (pending->resting_id != r.order_id || resting_owner != r.owner ||
                        pending->aggressor != r.side || pending->price_ticks != to_ticks(r.price, i))
                        fail(i, "logged trade disagrees with the matching rules");
                    tr.price[static_cast<size_t>(t)] = ticks_to_price(pending->price_ticks, params.delta_p);
                    tr.flags[static_cast<size_t>(t)] |= RunTrace::kTrade;
                    ++tr.trades;
                    if (pending->buy_owner == kHftOwner || pending->sell_owner == kHftOwner)
                        ++tr.hft_trades;
                    if (resting_owner == kHftOwner) {
                        tr.flags[static_cast<size_t>(t)] |= RunTrace::kRestingHft;
                        hft.position += opposite(pending->aggressor) == Side::buy ? 1 : -1;
                    } else {
                        ++tr.normal_resting_trades;
                    }
                    pending.reset();
                    break;
                }
                case EventType::cancel:
                case EventType::expire: {
                    if (!book.cancel(r.order_id))
                        fail(i, "removal of order " + std::to_string(r.order_id) + " which is not resting");
                    if (r.type == EventType::cancel)
                        ++cancel_rows;
                    else
                        ++expire_rows;
                    break;
                }
            }
            ++i;
        }
        if (pending) fail(i - 1, "crossing submit not followed by its trade row");
        const auto bb = book.best_bid();
        const auto ba = book.best_ask();
        if (bb && ba) {
            tr.spread_ticks[static_cast<size_t>(t)] = static_cast<int32_t>(*ba - *bb);
            const auto [db, ds] = book.depth_within(kDepthWindowTicks);
            tr.depth_buy[static_cast<size_t>(t)] = static_cast<uint32_t>(db);
            tr.depth_sell[static_cast<size_t>(t)] = static_cast<uint32_t>(ds);
        }
    }
    if (i != records.size())
        fail(i, "timestamp " + std::to_string(records[i].t) + " is out of order or beyond t_end");

    tr.book_submitted = book.submitted();
    tr.book_executed = book.executed();
    tr.book_cancelled = cancel_rows;
    tr.book_expired = expire_rows;
    tr.book_resting = book.resting_count();
    tr.hft_position = hft.position;
    return tr;
}

inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("undefined");
}

inline void print_report(const LiquidityReport& r, std::ostream& out) {
    out << "volume: " << r.volume << "\n";
    out << "hft_volume: " << r.hft_volume << "\n";
    out << "tightness: " << format_optional(r.tightness) << "\n";
    out << "resiliency: " << format_optional(r.resiliency) << "\n";
    out << "depth: " << format_double(r.depth) << "\n";
    out << "execution_rate: " << format_optional(r.execution_rate) << "\n";
    out << "execution_rate_normal_resting: " << format_optional(r.execution_rate_normal_resting)
        << "\n";
    out << "volatility: " << format_optional(r.volatility) << "\n";
    out << "excess_kurtosis: " << format_optional(r.stylized.excess_kurtosis) << "\n";
    out << "sq_return_autocorr:";
    for (const auto& ac : r.stylized.sq_return_autocorr) out << " " << format_optional(ac);
    out << "\n";
    out << "hft_position_end: " << r.hft_position << "\n";
}

}  // namespace liqsim
