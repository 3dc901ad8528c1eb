#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>

namespace liqsim {

enum class Side : uint8_t { buy, sell };

inline Side opposite(Side s) { return s == Side::buy ? Side::sell : Side::buy; }
inline char side_char(Side s) { return s == Side::buy ? 'b' : 's'; }

// Owner id of the market-making agent; normal agents are 0..n-1.
inline constexpr int32_t kHftOwner = -1;

// Levels counted on each side of the touch by the depth indicator.
inline constexpr int64_t kDepthWindowTicks = 50;

// One-share limit order.  Prices are integer multiples of the tick, so all
// book comparisons are exact.
struct Order {
    uint64_t id = 0;
    int32_t owner = 0;
    Side side = Side::buy;
    int64_t price_ticks = 0;
    int64_t placed_at = 0;
};

// Execution record.  One trade consumes the incoming order and exactly one
// resting order; the price is the resting order's price.
struct Trade {
    int64_t time = 0;
    int64_t price_ticks = 0;
    int32_t buy_owner = 0;
    int32_t sell_owner = 0;
    Side aggressor = Side::buy;
    uint64_t resting_id = 0;
    uint64_t aggressor_id = 0;
};

// Snap a raw price onto the tick grid: sells round up, buys round down, and
// values already on the grid pass through (the snap tolerance absorbs the
// rounding noise of price/tick).  A buy landing at or below zero has no
// representable price and yields nullopt.
inline std::optional<int64_t> round_to_ticks(double raw_price, Side side, double tick) {
    assert(raw_price > 0.0 && tick > 0.0);
    const double scaled = raw_price / tick;
    const auto nearest = static_cast<int64_t>(std::llround(scaled));
    int64_t ticks;
    if (std::fabs(scaled - static_cast<double>(nearest)) <= 1e-6)
        ticks = nearest;
    else if (side == Side::sell)
        ticks = static_cast<int64_t>(std::ceil(scaled));
    else
        ticks = static_cast<int64_t>(std::floor(scaled));
    if (ticks <= 0) {
        if (side == Side::buy) return std::nullopt;
        ticks = 1;
    }
    return ticks;
}

inline double ticks_to_price(int64_t ticks, double tick) { return static_cast<double>(ticks) * tick; }

// Continuous double auction book with price-time priority.  All quantities
// are one share.  Expiry assumes placed_at never decreases across submits,
// which the simulation loop guarantees.
class OrderBook {
public:
    explicit OrderBook(double tick) : tick_(tick) { assert(tick > 0.0); }

    // Executes against the best opposite level when prices cross, otherwise
    // rests the order.  Returns the trade if one happened.
    std::optional<Trade> submit(const Order& order) {
        assert(order.price_ticks >= 1);
        ++submitted_;
        if (order.side == Side::buy) {
            if (!asks_.empty() && asks_.begin()->first <= order.price_ticks)
                return execute_against(asks_, order);
            rest(bids_, order);
        } else {
            if (!bids_.empty() && bids_.begin()->first >= order.price_ticks)
                return execute_against(bids_, order);
            rest(asks_, order);
        }
        return std::nullopt;
    }

    // Removes a resting order by id; nullopt when the id is not resting
    // (already executed, expired, or never seen).
    std::optional<Order> cancel(uint64_t id) {
        auto removed = remove_resting(id);
        if (removed) ++cancelled_;
        return removed;
    }

    // Removes every order whose age reached t_c, reporting each one.
    template <class F>
    int64_t expire(int64_t t, int64_t t_c, F&& on_expired) {
        int64_t count = 0;
        while (!fifo_.empty() && t - fifo_.front().first >= t_c) {
            const uint64_t id = fifo_.front().second;
            fifo_.pop_front();
            if (auto removed = remove_resting(id)) {
                ++expired_;
                ++count;
                on_expired(*removed);
            }
        }
        return count;
    }

    int64_t expire(int64_t t, int64_t t_c) {
        return expire(t, t_c, [](const Order&) {});
    }

    std::optional<int64_t> best_bid() const {
        if (bids_.empty()) return std::nullopt;
        return bids_.begin()->first;
    }

    std::optional<int64_t> best_ask() const {
        if (asks_.empty()) return std::nullopt;
        return asks_.begin()->first;
    }

    // Order counts within n_ticks levels of the touch, best level included.
    // Zero for both sides unless both best quotes exist.
    std::pair<uint64_t, uint64_t> depth_within(int64_t n_ticks = kDepthWindowTicks) const {
        if (bids_.empty() || asks_.empty()) return {0, 0};
        uint64_t buys = 0, sells = 0;
        const int64_t bb = bids_.begin()->first;
        for (auto it = bids_.begin(); it != bids_.end() && it->first > bb - n_ticks; ++it)
            buys += it->second.size();
        const int64_t ba = asks_.begin()->first;
        for (auto it = asks_.begin(); it != asks_.end() && it->first < ba + n_ticks; ++it)
            sells += it->second.size();
        return {buys, sells};
    }

    size_t resting_count() const { return index_.size(); }
    double tick() const { return tick_; }

    uint64_t submitted() const { return submitted_; }
    uint64_t executed() const { return executed_; }   // counts both sides of each trade
    uint64_t cancelled() const { return cancelled_; }
    uint64_t expired() const { return expired_; }

    template <class F>
    void for_each_resting(F&& f) const {
        for (const auto& [price, level] : bids_)
            for (const auto& o : level) f(o);
        for (const auto& [price, level] : asks_)
            for (const auto& o : level) f(o);
    }

private:
    using Level = std::list<Order>;
    using Bids = std::map<int64_t, Level, std::greater<>>;
    using Asks = std::map<int64_t, Level>;

    struct Slot {
        Side side;
        int64_t price_ticks;
        Level::iterator pos;
    };

    template <class Map>
    Trade execute_against(Map& levels, const Order& incoming) {
        auto level = levels.begin();
        const Order resting = level->second.front();
        Trade tr;
        tr.time = incoming.placed_at;
        tr.price_ticks = resting.price_ticks;
        tr.aggressor = incoming.side;
        tr.resting_id = resting.id;
        tr.aggressor_id = incoming.id;
        if (incoming.side == Side::buy) {
            tr.buy_owner = incoming.owner;
            tr.sell_owner = resting.owner;
        } else {
            tr.buy_owner = resting.owner;
            tr.sell_owner = incoming.owner;
        }
        index_.erase(resting.id);
        level->second.pop_front();
        if (level->second.empty()) levels.erase(level);
        executed_ += 2;
        return tr;
    }

    template <class Map>
    void rest(Map& levels, const Order& order) {
        auto& level = levels[order.price_ticks];
        level.push_back(order);
        index_.emplace(order.id, Slot{order.side, order.price_ticks, std::prev(level.end())});
        fifo_.emplace_back(order.placed_at, order.id);
    }

    std::optional<Order> remove_resting(uint64_t id) {
        const auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        const Slot slot = it->second;
        index_.erase(it);
        Order removed = *slot.pos;
        if (slot.side == Side::buy) {
            auto level = bids_.find(slot.price_ticks);
            level->second.erase(slot.pos);
            if (level->second.empty()) bids_.erase(level);
        } else {
            auto level = asks_.find(slot.price_ticks);
            level->second.erase(slot.pos);
            if (level->second.empty()) asks_.erase(level);
        }
        return removed;
    }

    double tick_;
    Bids bids_;
    Asks asks_;
    std::unordered_map<uint64_t, Slot> index_;
    std::deque<std::pair<int64_t, uint64_t>> fifo_;  // (placed_at, id) in arrival order
    uint64_t submitted_ = 0, executed_ = 0, cancelled_ = 0, expired_ = 0;
};

}  // namespace liqsim
