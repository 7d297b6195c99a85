#include "cosim/kernel/event_queue.hpp"
#include "cosim/kernel/sim_time.hpp"

#include <doctest.h>

#include <string>
#include <vector>

using namespace cosim::kernel;
using namespace cosim::kernel::literals;

TEST_CASE("SimTime arithmetic is checked")
{
    CHECK((3_ms).micros() == 3000);
    CHECK(1_ms + 250_us == SimTime(1250));
    CHECK(5_ms - 2_ms == 3_ms);
    CHECK_THROWS_AS(SimTime::max() + 1_us, TimeOverflow);
    CHECK_THROWS_AS(1_us - 2_us, TimeUnderflow);
    CHECK_THROWS_AS(SimTime::from_ms(UINT64_MAX / 10), TimeOverflow);
    CHECK(SimTime::zero() < 1_us);
}

TEST_CASE("events pop in time order")
{
    EventQueue<std::string> q;
    q.schedule(30_us, "a", "third", 0_us);
    q.schedule(10_us, "b", "first", 0_us);
    q.schedule(20_us, "c", "second", 0_us);
    std::vector<std::string> order;
    while (auto e = q.pop_next()) order.push_back(e->payload);
    CHECK(order == std::vector<std::string>{"first", "second", "third"});
    CHECK(q.empty());
}

TEST_CASE("same-time events pop in insertion order")
{
    EventQueue<int> q;
    for (int i = 0; i < 5; ++i) q.schedule(7_us, "o", i, 0_us);
    for (int i = 0; i < 5; ++i) CHECK(q.pop_next()->payload == i);
}

TEST_CASE("scheduling before now is rejected")
{
    EventQueue<int> q;
    CHECK_THROWS_AS(q.schedule(4_us, "late", 0, 5_us), SchedulingInPast);
    CHECK_NOTHROW(q.schedule(5_us, "on time", 0, 5_us));
}

TEST_CASE("cancel removes exactly one pending event")
{
    EventQueue<int> q;
    const auto a = q.schedule(1_us, "o", 1, 0_us);
    const auto b = q.schedule(2_us, "o", 2, 0_us);
    CHECK(q.cancel(a));
    CHECK_FALSE(q.cancel(a));
    CHECK_FALSE(q.contains(a));
    CHECK(q.contains(b));
    CHECK(q.size() == 1);
    CHECK(q.peek_time() == 2_us);
    CHECK(q.pop_next()->id == b);
    CHECK_FALSE(q.cancel(b));
    CHECK_FALSE(q.peek_time().has_value());
}
