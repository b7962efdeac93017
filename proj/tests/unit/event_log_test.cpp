#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "clauseviz/event_log.hpp"
#include "support.hpp"

using namespace clauseviz;

namespace {

std::vector<ClauseEvent> random_events(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<ClauseEvent> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto raw = testing_support::random_raw_clause(gen, 200, 0, 8);
        out.push_back(make_event(gen() % 3 ? EventKind::Add : EventKind::Delete, std::span<const std::int32_t>(raw), i));
    }
    return out;
}

}  // namespace

TEST(EventLog, AppendAssignsSequenceAndReadsBack) {
    EventLog log(EventLogOptions{.block_size = 16, .memory_budget = 0, .spill_dir = {}});
    auto events = random_events(100, 1);
    for (auto e : events) {
        e.sequence = 999;
        log.append(e);
    }
    ASSERT_EQ(log.size(), 100u);
    for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(log.at(i), events[i]);
    EXPECT_THROW(log.at(100), std::out_of_range);
}

TEST(EventLog, ClosedLogRejectsAppends) {
    EventLog log;
    log.close();
    EXPECT_TRUE(log.closed());
    EXPECT_THROW(log.append(ClauseEvent{}), std::logic_error);
}

TEST(EventLog, SpillRoundTrip) {
    testing_support::TempDir dir("spill");
    EventLog log(EventLogOptions{.block_size = 64, .memory_budget = 200, .spill_dir = dir.path()});
    const auto events = random_events(3000, 2);
    for (const auto& e : events) log.append(e);
    EXPECT_GT(log.spilled_blocks(), 0u);
    EXPECT_LE(log.resident_events(), 200u + 64u);
    std::size_t seen = 0;
    log.for_each(0, log.size(), [&](std::size_t i, const ClauseEvent& e) {
        ASSERT_EQ(i, seen++);
        ASSERT_EQ(e, events[i]);
    });
    EXPECT_EQ(seen, events.size());
    std::size_t expect = 2900;
    log.for_each_reverse(1000, 2900, [&](std::size_t i, const ClauseEvent& e) {
        ASSERT_EQ(i, --expect);
        ASSERT_EQ(e, events[i]);
    });
    EXPECT_EQ(expect, 1000u);
    EXPECT_EQ(log.at(5), events[5]);
}

TEST(EventLog, ConcurrentAppendAndRead) {
    EventLog log(EventLogOptions{.block_size = 32, .memory_budget = 0, .spill_dir = {}});
    const auto events = random_events(5000, 3);
    std::thread writer([&] {
        for (const auto& e : events) log.append(e);
        log.close();
    });
    std::size_t known = 0;
    std::size_t checked = 0;
    while (true) {
        const std::size_t now = log.wait_for_more(known, std::chrono::milliseconds(100));
        log.for_each(known, now, [&](std::size_t i, const ClauseEvent& e) {
            ASSERT_EQ(e, events[i]);
            ++checked;
        });
        known = now;
        if (log.closed() && known == log.size()) break;
    }
    writer.join();
    EXPECT_EQ(checked, events.size());
}

TEST(EventLog, WaitTimesOut) {
    EventLog log;
    const auto start = std::chrono::steady_clock::now();
    EXPECT_EQ(log.wait_for_more(0, std::chrono::milliseconds(30)), 0u);
    EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(25));
}
