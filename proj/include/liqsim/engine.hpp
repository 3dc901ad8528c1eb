#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "liqsim/agents.hpp"
#include "liqsim/event_log.hpp"
#include "liqsim/order_book.hpp"
#include "liqsim/params.hpp"
#include "liqsim/rng.hpp"

namespace liqsim {

// Everything one run leaves behind.  Steps are 1..t_end; index 0 holds the
// initial state, so every per-step vector has t_end + 1 entries.  price[t] is
// the last trade price as of the end of step t (the fundamental price until
// the first trade); spread and depth are sampled at the end of each step.
struct RunTrace {
    static constexpr uint8_t kTrade = 1;        // a trade happened this step
    static constexpr uint8_t kRestingHft = 2;   // ...and consumed a market-maker quote
    static constexpr uint8_t kOrderPlaced = 4;  // a normal agent's order reached the book

    MarketParams params;
    std::vector<double> price;
    std::vector<int32_t> spread_ticks;  // -1 while either side lacks a quote
    std::vector<uint32_t> depth_buy;
    std::vector<uint32_t> depth_sell;
    std::vector<uint8_t> flags;

    uint64_t normal_orders = 0;         // orders normal agents actually placed
    uint64_t trades = 0;
    uint64_t hft_trades = 0;            // trades with the market maker on either side
    uint64_t normal_resting_trades = 0; // trades that consumed a normal agent's resting order
    uint64_t rejected_orders = 0;       // buy prices that rounded to zero or below
    uint64_t no_order_draws = 0;        // exact price ties or all-zero weights
    uint64_t abstained = 0;
    uint64_t hft_quote_turns = 0;       // turns the market maker took
    uint64_t hft_quotes_placed = 0;     // turns that ended with a fresh quote pair
    uint64_t hft_skipped_no_book = 0;   // turns skipped because a side had no quote
    uint64_t hft_degenerate_skips = 0;  // turns skipped because a quote price was unusable
    uint64_t learning_bound_hits = 0;
    int64_t hft_position = 0;

    // order conservation, mirrored from the book at the end of the run
    uint64_t book_submitted = 0;
    uint64_t book_executed = 0;
    uint64_t book_cancelled = 0;
    uint64_t book_expired = 0;
    uint64_t book_resting = 0;
};

// The agent population a fresh run starts from.
inline std::vector<NormalAgentState> init_agents(const MarketParams& p) {
    Rng init_rng(derive_seed(p.seed, "agent_init"));
    std::vector<NormalAgentState> agents;
    agents.reserve(static_cast<size_t>(p.n));
    for (int32_t i = 0; i < p.n; ++i) agents.push_back(init_normal_agent(p, init_rng));
    return agents;
}

// Builds the book the market opens with.  The agents trade for a tenth of
// an order lifetime before step 1 against a price history pinned at the
// fundamental price.  An empty open lets the first prints scatter far
// enough to ignite the trend-following feedback, while a fully seasoned
// book suppresses the young market's burst of early turnover; a short
// session damps the former and keeps the latter.  Birth times are
// negative, staggering the synthetic orders' expiry across early real
// steps.  A pinned history zeroes every strategy return, so the learning
// calls only consume the reset draws, which leave the weight ensemble
// distribution unchanged.
inline void open_market(const MarketParams& p, std::vector<NormalAgentState>& agents,
                        OrderBook& book, uint64_t& next_id) {
    Rng noise(derive_seed(p.seed, "prefill_noise"));
    Rng learn_rng(derive_seed(p.seed, "prefill_learning"));
    Rng price_rng(derive_seed(p.seed, "prefill_order_price"));
    Rng abstain(derive_seed(p.seed, "prefill_abstain"));
    const StrategyReturns at_rest{0.0, 0.0};
    const int64_t pre_steps = p.t_c / 10;
    for (int64_t tv = 1 - pre_steps; tv <= 0; ++tv) {
        if (abstain.uniform01() >= p.pr_o) continue;
        const auto idx = static_cast<size_t>(((tv - 1) % p.n + p.n) % p.n);
        NormalAgentState& agent = agents[idx];
        learn(agent, at_rest, 0.0, p, learn_rng);
        const double eps = noise.normal(0.0, p.sigma_eps);
        const auto ret = expected_return(agent, at_rest, eps);
        if (!ret) continue;
        const auto intent = draw_order(expected_price(p.p_f, *ret), p.est, price_rng);
        if (!intent) continue;
        const auto ticks = round_to_ticks(intent->raw_price, intent->side, p.delta_p);
        if (!ticks) continue;
        book.submit(Order{next_id++, static_cast<int32_t>(idx), intent->side, *ticks, tv});
    }
}

// One market run.  Each step: expired orders leave, one normal agent takes
// its turn (learn, forecast, order), then the market maker refreshes its
// quote pair; the step closes with a book snapshot into the trace.
class Simulation {
public:
    explicit Simulation(const MarketParams& params, EventLogWriter* log = nullptr)
        : p_(params),
          log_(log),
          book_(params.delta_p),
          noise_rng_(derive_seed(params.seed, "noise")),
          learn_rng_(derive_seed(params.seed, "learning")),
          price_rng_(derive_seed(params.seed, "order_price")),
          abstain_rng_(derive_seed(params.seed, "abstain")) {
        p_.validate();
        agents_ = init_agents(p_);
        open_market(p_, agents_, book_, next_id_);
        const size_t len = static_cast<size_t>(p_.t_end) + 1;
        trace_.params = p_;
        trace_.price.assign(len, p_.p_f);
        trace_.spread_ticks.assign(len, -1);
        trace_.depth_buy.assign(len, 0);
        trace_.depth_sell.assign(len, 0);
        trace_.flags.assign(len, 0);
    }

    int64_t now() const { return t_; }
    bool done() const { return t_ >= p_.t_end; }

    void step() {
        assert(!done());
        const int64_t t = ++t_;
        trace_.price[static_cast<size_t>(t)] = trace_.price[static_cast<size_t>(t - 1)];
        book_.expire(t, p_.t_c, [&](const Order& o) { log_event(t, EventType::expire, o); });
        const bool acts = abstain_rng_.uniform01() < p_.pr_o;
        if (acts) {
            normal_turn(t, static_cast<int32_t>((t - 1) % p_.n));
        } else {
            ++trace_.abstained;
        }
        if (p_.hft_enabled && (acts || p_.hft_on_abstain)) hft_turn(t);
        sample(t);
    }

    void run_to_end() {
        while (!done()) step();
        sync_counters();
    }

    // Copies the book's conservation counters into the trace.  run_to_end
    // does this automatically; manual steppers call it before reading totals.
    void sync_counters() {
        trace_.book_submitted = book_.submitted();
        trace_.book_executed = book_.executed();
        trace_.book_cancelled = book_.cancelled();
        trace_.book_expired = book_.expired();
        trace_.book_resting = book_.resting_count();
        trace_.hft_position = hft_.position;
    }

    const RunTrace& trace() const { return trace_; }
    RunTrace take_trace() { return std::move(trace_); }
    const OrderBook& book() const { return book_; }
    const HftState& hft() const { return hft_; }
    const std::vector<NormalAgentState>& agents() const { return agents_; }

private:
    void normal_turn(int64_t t, int32_t agent_idx) {
        NormalAgentState& agent = agents_[static_cast<size_t>(agent_idx)];
        const PriceHistory hist(trace_.price, p_.p_f);
        const int64_t lag = p_.history_lag();
        const auto sr = strategy_returns(hist, t, lag, agent.tau, p_.p_f);
        const double realized = std::log(hist.at(t - 1) / hist.at(t - lag));
        trace_.learning_bound_hits += learn(agent, sr, realized, p_, learn_rng_).bound_hits;
        const double eps = noise_rng_.normal(0.0, p_.sigma_eps);
        const auto ret = expected_return(agent, sr, eps);
        if (!ret) {
            ++trace_.no_order_draws;
            return;
        }
        const double pe = expected_price(hist.at(t - 1), *ret);
        const auto intent = draw_order(pe, p_.est, price_rng_);
        if (!intent) {
            ++trace_.no_order_draws;
            return;
        }
        const auto ticks = round_to_ticks(intent->raw_price, intent->side, p_.delta_p);
        if (!ticks) {
            ++trace_.rejected_orders;
            return;
        }
        const Order order{next_id_++, agent_idx, intent->side, *ticks, t};
        ++trace_.normal_orders;
        trace_.flags[static_cast<size_t>(t)] |= RunTrace::kOrderPlaced;
        log_event(t, EventType::submit, order);
        apply(book_.submit(order), t);
    }

    void hft_turn(int64_t t) {
        ++trace_.hft_quote_turns;
        cancel_live(hft_.live_buy_id, t);
        cancel_live(hft_.live_sell_id, t);
        const auto bb = book_.best_bid();
        const auto ba = book_.best_ask();
        if (!bb || !ba) {
            ++trace_.hft_skipped_no_book;
            return;  // nothing to quote around yet
        }
        const auto q = hft_quotes(hft_.position, ticks_to_price(*bb, p_.delta_p),
                                  ticks_to_price(*ba, p_.delta_p), p_.p_f, p_.theta_h, p_.w_h,
                                  p_.delta_p);
        if (q.buy_price <= 0.0 || q.sell_price <= 0.0) {
            ++trace_.hft_degenerate_skips;
            return;
        }
        const auto buy_ticks = round_to_ticks(q.buy_price, Side::buy, p_.delta_p);
        const auto sell_ticks = round_to_ticks(q.sell_price, Side::sell, p_.delta_p);
        if (!buy_ticks || *sell_ticks <= *buy_ticks) {
            ++trace_.hft_degenerate_skips;
            return;
        }
        place_quote(t, Side::buy, *buy_ticks, hft_.live_buy_id);
        place_quote(t, Side::sell, *sell_ticks, hft_.live_sell_id);
        ++trace_.hft_quotes_placed;
    }

    void place_quote(int64_t t, Side side, int64_t ticks, std::optional<uint64_t>& live_id) {
        const Order order{next_id_++, kHftOwner, side, ticks, t};
        log_event(t, EventType::submit, order);
        const auto tr = book_.submit(order);
        // quotes are pulled inside the touch before rounding, so they rest
        assert(!tr);
        if (tr)
            apply(tr, t);
        else
            live_id = order.id;
    }

    void cancel_live(std::optional<uint64_t>& live_id, int64_t t) {
        if (!live_id) return;
        if (const auto removed = book_.cancel(*live_id)) log_event(t, EventType::cancel, *removed);
        live_id.reset();
    }

    void apply(const std::optional<Trade>& tr, int64_t t) {
        if (!tr) return;
        assert((trace_.flags[static_cast<size_t>(t)] & RunTrace::kTrade) == 0);
        trace_.price[static_cast<size_t>(t)] = ticks_to_price(tr->price_ticks, p_.delta_p);
        trace_.flags[static_cast<size_t>(t)] |= RunTrace::kTrade;
        ++trace_.trades;
        const int32_t resting_owner = tr->aggressor == Side::buy ? tr->sell_owner : tr->buy_owner;
        if (tr->buy_owner == kHftOwner || tr->sell_owner == kHftOwner) ++trace_.hft_trades;
        if (resting_owner == kHftOwner) {
            trace_.flags[static_cast<size_t>(t)] |= RunTrace::kRestingHft;
            // a filled quote changes inventory and frees its live slot
            hft_.position += opposite(tr->aggressor) == Side::buy ? 1 : -1;
            if (hft_.live_buy_id == tr->resting_id) hft_.live_buy_id.reset();
            if (hft_.live_sell_id == tr->resting_id) hft_.live_sell_id.reset();
        } else {
            ++trace_.normal_resting_trades;
        }
        if (log_) {
            LogRecord r;
            r.t = t;
            r.type = EventType::trade;
            r.order_id = tr->resting_id;
            r.owner = resting_owner;
            r.side = tr->aggressor;
            r.price = ticks_to_price(tr->price_ticks, p_.delta_p);
            r.qty = 1;
            log_->record(r);
        }
    }

    void sample(int64_t t) {
        const auto bb = book_.best_bid();
        const auto ba = book_.best_ask();
        if (bb && ba) {
            trace_.spread_ticks[static_cast<size_t>(t)] = static_cast<int32_t>(*ba - *bb);
            const auto [db, ds] = book_.depth_within(kDepthWindowTicks);
            trace_.depth_buy[static_cast<size_t>(t)] = static_cast<uint32_t>(db);
            trace_.depth_sell[static_cast<size_t>(t)] = static_cast<uint32_t>(ds);
        }
    }

    void log_event(int64_t t, EventType type, const Order& o) {
        if (!log_) return;
        LogRecord r;
        r.t = t;
        r.type = type;
        r.order_id = o.id;
        r.owner = o.owner;
        r.side = o.side;
        r.price = ticks_to_price(o.price_ticks, p_.delta_p);
        r.qty = 1;
        log_->record(r);
    }

    MarketParams p_;
    EventLogWriter* log_;
    OrderBook book_;
    Rng noise_rng_;
    Rng learn_rng_;
    Rng price_rng_;
    Rng abstain_rng_;
    std::vector<NormalAgentState> agents_;
    HftState hft_;
    RunTrace trace_;
    int64_t t_ = 0;
    uint64_t next_id_ = 1;
};

inline RunTrace run_simulation(const MarketParams& params, EventLogWriter* log = nullptr) {
    Simulation sim(params, log);
    sim.run_to_end();
    return sim.take_trace();
}

}  // namespace liqsim
