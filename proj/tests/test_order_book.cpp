#include <catch2/catch_amalgamated.hpp>

#include "liqsim/order_book.hpp"
#include "liqsim/rng.hpp"
#include "reference_book.hpp"

using namespace liqsim;

TEST_CASE("tick rounding: sells up, buys down, exact multiples pass through") {
    // frozen examples
    REQUIRE(round_to_ticks(100.03, Side::sell, 0.1).value() == 1001);
    REQUIRE(round_to_ticks(100.03, Side::buy, 0.1).value() == 1000);
    REQUIRE(round_to_ticks(100.0, Side::buy, 0.1).value() == 1000);
    REQUIRE(ticks_to_price(1001, 0.1) == Catch::Approx(100.1).epsilon(1e-13));
    REQUIRE(ticks_to_price(1000, 0.1) == 100.0);

    REQUIRE(round_to_ticks(9999.95, Side::sell, 0.1).value() == 100000);
    REQUIRE(round_to_ticks(9999.95, Side::buy, 0.1).value() == 99999);
    REQUIRE(round_to_ticks(10000.0, Side::sell, 0.1).value() == 100000);

    // coarse grid
    REQUIRE(round_to_ticks(9990.0, Side::buy, 100.0).value() == 99);
    REQUIRE(round_to_ticks(9990.0, Side::sell, 100.0).value() == 100);
    REQUIRE(round_to_ticks(10000.0, Side::buy, 100.0).value() == 100);

    // a buy that lands at or below zero is degenerate
    REQUIRE_FALSE(round_to_ticks(0.04, Side::buy, 0.1).has_value());
    // the smallest valid sell is one tick
    REQUIRE(round_to_ticks(0.04, Side::sell, 0.1).value() == 1);
}

TEST_CASE("price-time priority and resting-price execution") {
    OrderBook book(0.1);
    // two sells rest at the same level, then a higher buy arrives
    REQUIRE_FALSE(book.submit({1, 10, Side::sell, 1001, 0}).has_value());
    REQUIRE_FALSE(book.submit({2, 11, Side::sell, 1001, 0}).has_value());
    const auto tr = book.submit({3, 12, Side::buy, 1002, 1});
    REQUIRE(tr.has_value());
    CHECK(tr->resting_id == 1);             // earlier arrival first
    CHECK(tr->price_ticks == 1001);         // trade at the resting price
    CHECK(tr->buy_owner == 12);
    CHECK(tr->sell_owner == 10);
    CHECK(tr->aggressor == Side::buy);
    CHECK(book.best_ask().value() == 1001); // id 2 still there
    CHECK_FALSE(book.best_bid().has_value());
}

TEST_CASE("better-priced opposite level wins over a worse one") {
    OrderBook book(0.1);
    book.submit({1, 0, Side::sell, 1005, 0});
    book.submit({2, 1, Side::sell, 1003, 0});
    const auto tr = book.submit({3, 2, Side::buy, 1010, 1});
    REQUIRE(tr.has_value());
    CHECK(tr->resting_id == 2);
    CHECK(tr->price_ticks == 1003);

    book.submit({4, 3, Side::buy, 990, 2});
    book.submit({5, 4, Side::buy, 995, 2});
    const auto tr2 = book.submit({6, 5, Side::sell, 980, 3});
    REQUIRE(tr2.has_value());
    CHECK(tr2->resting_id == 5);             // highest bid first
    CHECK(tr2->price_ticks == 995);
}

TEST_CASE("non-crossing orders rest; equal prices do not cross") {
    OrderBook book(0.1);
    REQUIRE_FALSE(book.submit({1, 0, Side::buy, 1000, 0}).has_value());
    // a sell at a higher price rests
    REQUIRE_FALSE(book.submit({2, 1, Side::sell, 1001, 0}).has_value());
    CHECK(book.best_bid().value() == 1000);
    CHECK(book.best_ask().value() == 1001);
    // a sell at the bid executes
    const auto tr = book.submit({3, 2, Side::sell, 1000, 1});
    REQUIRE(tr.has_value());
    CHECK(tr->price_ticks == 1000);
}

TEST_CASE("cancel removes a resting order once") {
    OrderBook book(0.1);
    book.submit({1, 0, Side::buy, 1000, 0});
    const auto removed = book.cancel(1);
    REQUIRE(removed.has_value());
    CHECK(removed->id == 1);
    CHECK_FALSE(book.cancel(1).has_value());   // second attempt finds nothing
    CHECK_FALSE(book.best_bid().has_value());
    CHECK(book.cancelled() == 1);
}

TEST_CASE("cancel after execution finds nothing") {
    OrderBook book(0.1);
    book.submit({1, 0, Side::sell, 1000, 0});
    REQUIRE(book.submit({2, 1, Side::buy, 1000, 0}).has_value());
    CHECK_FALSE(book.cancel(1).has_value());
}

TEST_CASE("orders expire at age t_c exactly") {
    OrderBook book(0.1);
    book.submit({1, 0, Side::buy, 1000, 0});
    book.submit({2, 0, Side::sell, 1010, 5});
    CHECK(book.expire(19999, 20000) == 0);
    CHECK(book.expire(20000, 20000) == 1);     // id 1 is exactly t_c old
    CHECK_FALSE(book.best_bid().has_value());
    CHECK(book.best_ask().value() == 1010);
    CHECK(book.expire(20005, 20000) == 1);     // id 2 follows
    CHECK(book.expired() == 2);
}

TEST_CASE("expire reports each removed order") {
    OrderBook book(0.1);
    book.submit({7, 3, Side::buy, 1000, 0});
    std::vector<uint64_t> seen;
    book.expire(100, 10, [&](const Order& o) { seen.push_back(o.id); });
    REQUIRE(seen == std::vector<uint64_t>{7});
}

TEST_CASE("depth window spans the best level and the 49 levels behind it") {
    OrderBook book(0.1);
    // bid side: best at 1000, one at the window edge, one just outside
    book.submit({1, 0, Side::buy, 1000, 0});
    book.submit({2, 0, Side::buy, 1000 - 49, 0});
    book.submit({3, 0, Side::buy, 1000 - 50, 0});  // excluded
    // ask side: best at 1010 plus one inside the window
    book.submit({4, 0, Side::sell, 1010, 0});
    book.submit({5, 0, Side::sell, 1010 + 49, 0});
    book.submit({6, 0, Side::sell, 1010 + 50, 0}); // excluded
    const auto [buys, sells] = book.depth_within(50);
    CHECK(buys == 2);
    CHECK(sells == 2);
}

TEST_CASE("depth is zero while either side is empty") {
    OrderBook book(0.1);
    book.submit({1, 0, Side::buy, 1000, 0});
    const auto [buys, sells] = book.depth_within(50);
    CHECK(buys == 0);
    CHECK(sells == 0);
}

TEST_CASE("conservation: submitted = resting + executed + cancelled + expired") {
    OrderBook book(0.1);
    uint64_t id = 0;
    book.submit({++id, 0, Side::buy, 1000, 0});
    book.submit({++id, 0, Side::sell, 1000, 0});   // executes both
    book.submit({++id, 0, Side::buy, 990, 1});
    book.submit({++id, 0, Side::sell, 1005, 1});
    book.cancel(3);
    book.submit({++id, 0, Side::buy, 980, 2});
    book.expire(10, 8, [](const Order&) {});       // removes ids 4 and nothing else
    CHECK(book.submitted() == book.resting_count() + book.executed() + book.cancelled() + book.expired());
    CHECK(book.executed() == 2);
}

// Randomized comparison against the brute-force matcher.  Every operation's
// visible result and the whole book state must agree at every point.
TEST_CASE("random order flow matches the brute-force reference") {
    Rng rng(derive_seed(2024, "book_oracle"));
    const int sequences = 250;
    for (int seq = 0; seq < sequences; ++seq) {
        OrderBook book(0.1);
        testing::ReferenceBook ref;
        uint64_t next_id = 1;
        int64_t t = 0;
        const int64_t t_c = 1 + rng.uniform_int(1, 30);
        const int ops = static_cast<int>(rng.uniform_int(1, 200));
        std::vector<uint64_t> live;

        for (int k = 0; k < ops; ++k) {
            t += rng.uniform_int(0, 2);
            const double what = rng.uniform01();
            if (what < 0.72 || live.empty()) {
                const Side side = rng.uniform01() < 0.5 ? Side::buy : Side::sell;
                const int64_t price = rng.uniform01() < 0.9 ? rng.uniform_int(95, 105)
                                                            : rng.uniform_int(1, 200);
                const Order o{next_id++, static_cast<int32_t>(rng.uniform_int(-1, 20)), side, price, t};
                const auto got = book.submit(o);
                const auto want = ref.submit(o);
                REQUIRE(got.has_value() == want.has_value());
                if (got) {
                    CHECK(got->price_ticks == want->price_ticks);
                    CHECK(got->resting_id == want->resting_id);
                    CHECK(got->buy_owner == want->buy_owner);
                    CHECK(got->sell_owner == want->sell_owner);
                    CHECK(got->aggressor == want->aggressor);
                } else {
                    live.push_back(o.id);
                }
            } else if (what < 0.86) {
                const uint64_t id = live[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(live.size()) - 1))];
                const auto got = book.cancel(id);
                const auto want = ref.cancel(id);
                REQUIRE(got.has_value() == want.has_value());
            } else {
                const auto got = book.expire(t, t_c);
                const auto want = ref.expire(t, t_c);
                REQUIRE(got == want);
            }

            // visible state must agree after every operation
            REQUIRE(book.best_bid() == ref.best_bid());
            REQUIRE(book.best_ask() == ref.best_ask());
            REQUIRE(book.resting_count() == ref.resting_count());
            REQUIRE(book.depth_within(5) == ref.depth_within(5));
            REQUIRE(book.depth_within(50) == ref.depth_within(50));
            // the book must never be crossed
            if (book.best_bid() && book.best_ask()) REQUIRE(*book.best_bid() < *book.best_ask());
            // conservation identity
            REQUIRE(book.submitted() == book.resting_count() + book.executed() + book.cancelled() + book.expired());
        }

        // full book content comparison at the end of the sequence
        std::vector<Order> got_orders;
        book.for_each_resting([&](const Order& o) { got_orders.push_back(o); });
        std::sort(got_orders.begin(), got_orders.end(), [](const Order& a, const Order& b) { return a.id < b.id; });
        const auto want_orders = ref.sorted_orders();
        REQUIRE(got_orders.size() == want_orders.size());
        for (size_t i = 0; i < got_orders.size(); ++i) {
            CHECK(got_orders[i].id == want_orders[i].id);
            CHECK(got_orders[i].price_ticks == want_orders[i].price_ticks);
            CHECK(got_orders[i].side == want_orders[i].side);
            CHECK(got_orders[i].owner == want_orders[i].owner);
            CHECK(got_orders[i].placed_at == want_orders[i].placed_at);
        }
        CHECK(book.submitted() == ref.submitted());
        CHECK(book.executed() == ref.executed());
        CHECK(book.cancelled() == ref.cancelled());
        CHECK(book.expired() == ref.expired());
    }
}
