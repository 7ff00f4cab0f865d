#include <agentmem/policy.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace agentmem;

namespace {

std::vector<UnitKey> keys_of(const ReplacementPolicy& p)
{
    std::vector<UnitKey> out;
    for (const auto& e : p.resident_keys()) out.push_back(e.key);
    return out;
}

PolicyConfig wide_sketch(PolicyConfig c)
{
    c.sketch_width = 1 << 14;
    c.sketch_reset_threshold = 1 << 30;
    return c;
}

} // namespace

TEST(PolicyConfig, ValidatesSplit)
{
    EXPECT_NO_THROW(ReplacementPolicy(PolicyConfig::w_tinylfu(9, 1)));
    PolicyConfig bad{PolicyVariant::w_tinylfu, 10, 6, 5};
    EXPECT_THROW(ReplacementPolicy{bad}, ConfigError);
    EXPECT_THROW(ReplacementPolicy(PolicyConfig::w_tinylfu(10, 0)), ConfigError);
    EXPECT_THROW(ReplacementPolicy(PolicyConfig::fifo(0)), ConfigError);
}

TEST(Fifo, EmptyPolicy)
{
    ReplacementPolicy p(PolicyConfig::fifo(10));
    EXPECT_TRUE(p.resident_keys().empty());
    EXPECT_EQ(p.hit_rate(), 0.0);
    EXPECT_EQ(p.occupancy(), 0.0);
    EXPECT_EQ(p.access("a"), AccessResult::miss);
    EXPECT_EQ(p.queries(), 1u);
    EXPECT_EQ(p.hits(), 0u);
}

TEST(Fifo, HitRateArithmetic)
{
    ReplacementPolicy p(PolicyConfig::fifo(2));
    p.insert("a");
    p.insert("b");
    EXPECT_EQ(p.access("a"), AccessResult::hit);
    EXPECT_EQ(p.access("c"), AccessResult::miss);
    EXPECT_EQ(p.access("a"), AccessResult::hit);
    EXPECT_NEAR(p.hit_rate(), 2.0 / 3.0, 1e-12);
    // Access never inserts.
    EXPECT_FALSE(p.contains("c"));
}

TEST(Fifo, EvictsQueueHead)
{
    ReplacementPolicy p(PolicyConfig::fifo(2));
    EXPECT_FALSE(p.insert("a").evicted);
    EXPECT_FALSE(p.insert("b").evicted);
    EXPECT_EQ(keys_of(p), (std::vector<UnitKey>{"a", "b"}));
    auto r = p.insert("c");
    ASSERT_TRUE(r.evicted);
    EXPECT_EQ(*r.evicted, "a");
    EXPECT_EQ(keys_of(p), (std::vector<UnitKey>{"b", "c"}));
}

TEST(Fifo, ReinsertIsNoop)
{
    ReplacementPolicy p(PolicyConfig::fifo(2));
    p.insert("a");
    p.insert("b");
    auto r = p.insert("a");
    EXPECT_FALSE(r.evicted);
    EXPECT_FALSE(r.merged);
    EXPECT_EQ(keys_of(p), (std::vector<UnitKey>{"a", "b"}));
}

TEST(FifoMerge, SameObjectMergesInPlace)
{
    ReplacementPolicy p(PolicyConfig::fifo_merge(2));
    p.insert("A");
    p.insert("B");
    auto r = p.insert("A");
    EXPECT_TRUE(r.merged);
    EXPECT_FALSE(r.evicted);
    EXPECT_EQ(keys_of(p), (std::vector<UnitKey>{"A", "B"}));
}

TEST(Occupancy, StrictWarmupThreshold)
{
    ReplacementPolicy ten(PolicyConfig::fifo(10));
    for (int i = 0; i < 10; ++i) ten.insert("k" + std::to_string(i));
    EXPECT_EQ(ten.occupancy(), 1.0);
    EXPECT_TRUE(is_warmed(ten.occupancy()));

    ReplacementPolicy twenty(PolicyConfig::fifo(20));
    for (int i = 0; i < 19; ++i) twenty.insert("k" + std::to_string(i));
    EXPECT_DOUBLE_EQ(twenty.occupancy(), 0.95);
    EXPECT_FALSE(is_warmed(twenty.occupancy()));
}

// Reference queue: a plain deque scanned linearly.
TEST(Fifo, MatchesBruteForceQueue)
{
    for (auto variant : {PolicyVariant::fifo, PolicyVariant::fifo_merge}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            std::mt19937_64 rng(seed);
            std::size_t cap = 1 + rng() % 12;
            ReplacementPolicy p({variant, cap});
            std::deque<UnitKey> ref;
            std::uint64_t ref_hits = 0, ref_queries = 0;
            for (int i = 0; i < 10000; ++i) {
                auto k = "o" + std::to_string(rng() % 30);
                if (rng() % 2) {
                    ++ref_queries;
                    bool hit = std::find(ref.begin(), ref.end(), k) != ref.end();
                    ref_hits += hit;
                    ASSERT_EQ(p.access(k) == AccessResult::hit, hit);
                } else {
                    std::optional<UnitKey> expect;
                    if (std::find(ref.begin(), ref.end(), k) == ref.end()) {
                        if (ref.size() == cap) {
                            expect = ref.front();
                            ref.pop_front();
                        }
                        ref.push_back(k);
                    }
                    ASSERT_EQ(p.insert(k).evicted, expect) << "seed " << seed << " op " << i;
                }
                ASSERT_LE(p.size(), cap);
            }
            EXPECT_EQ(keys_of(p), std::vector<UnitKey>(ref.begin(), ref.end()));
            EXPECT_EQ(p.hits(), ref_hits);
            EXPECT_EQ(p.queries(), ref_queries);
        }
    }
}

TEST(WTinyLfu, EvictsMinimumFrequencyAmongWindowAndProbation)
{
    // capacity 2: window 1, main 1 (no protected room).
    ReplacementPolicy p(wide_sketch(PolicyConfig::w_tinylfu(1, 1)));
    p.insert("x");                                  // x: 1
    p.insert("y");                                  // y: 1, x shifts to probation
    for (int i = 0; i < 4; ++i) p.access("x");      // x: 5
    EXPECT_EQ(p.segment_of("x"), Segment::probation);
    EXPECT_EQ(p.segment_of("y"), Segment::window);
    EXPECT_EQ(p.access("z"), AccessResult::miss);   // z: 1
    auto r = p.insert("z");                         // z: 2, y shifts; candidates {z:2, y:1, x:5}
    ASSERT_TRUE(r.evicted);
    EXPECT_EQ(*r.evicted, "y");
    EXPECT_EQ(p.sketch()->estimate("x"), 5u);
    EXPECT_EQ(p.sketch()->estimate("z"), 2u);
    EXPECT_EQ(p.segment_of("z"), Segment::window);
    EXPECT_EQ(p.segment_of("x"), Segment::probation);
}

TEST(WTinyLfu, TieGoesToLeastRecentlyTouched)
{
    ReplacementPolicy p(wide_sketch(PolicyConfig::w_tinylfu(2, 1)));
    p.insert("a");
    p.insert("b");
    p.insert("c"); // a shifts to probation; all estimates 1, nothing evicted yet
    auto r = p.insert("d");
    ASSERT_TRUE(r.evicted);
    EXPECT_EQ(*r.evicted, "a");
}

TEST(WTinyLfu, ProbationHitPromotesAndProtectedOverflowDemotes)
{
    // main 5 -> protected capacity 4.
    ReplacementPolicy p(wide_sketch(PolicyConfig::w_tinylfu(1, 5)));
    ASSERT_EQ(p.protected_capacity(), 4u);
    for (const char* k : {"a", "b", "c", "d", "e", "f"}) p.insert(k);
    for (const char* k : {"a", "b", "c", "d", "e"}) ASSERT_EQ(p.segment_of(k), Segment::probation) << k;
    for (const char* k : {"a", "b", "c", "d"}) p.access(k);
    for (const char* k : {"a", "b", "c", "d"}) EXPECT_EQ(p.segment_of(k), Segment::protected_) << k;
    p.access("e"); // protected full: its LRU key "a" moves back to probation
    EXPECT_EQ(p.segment_of("e"), Segment::protected_);
    EXPECT_EQ(p.segment_of("a"), Segment::probation);
}

TEST(WTinyLfu, ResidentKeysCarrySegmentLabels)
{
    ReplacementPolicy p(wide_sketch(PolicyConfig::w_tinylfu(1, 5)));
    p.insert("a");
    p.insert("b");
    p.access("a");
    auto keys = p.resident_keys();
    ASSERT_EQ(keys.size(), 2u);
    EXPECT_EQ(keys[0], (ResidentEntry{"b", Segment::window}));
    EXPECT_EQ(keys[1], (ResidentEntry{"a", Segment::protected_}));
}

// Randomized invariants checked through the trace.
TEST(WTinyLfu, InvariantsOnRandomStreams)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::size_t window = rng() % 6;
        std::size_t main = 1 + rng() % 8;
        PolicyConfig cfg = PolicyConfig::w_tinylfu(window, main);
        cfg.seed = seed;
        ReplacementPolicy p(cfg);
        std::set<UnitKey> demoted_pending;
        std::uint64_t last_hits = 0, last_queries = 0;
        bool failed = false;
        p.set_trace([&](const TraceRecord& r) {
            if (r.op == "evict") {
                if (r.segment == Segment::protected_) failed = true;
                auto victim = p.sketch()->estimate(*r.evicted);
                for (const auto& e : p.resident_keys())
                    if (e.segment != Segment::protected_ && p.sketch()->estimate(e.key) < victim) failed = true;
            }
        });
        std::map<UnitKey, Segment> prev;
        for (int i = 0; i < 5000 && !failed; ++i) {
            auto k = "k" + std::to_string(rng() % 25);
            if (rng() % 3) p.access(k);
            else p.insert(k);

            auto resident = p.resident_keys();
            ASSERT_LE(resident.size(), cfg.capacity);
            std::set<UnitKey> unique;
            std::size_t in_window = 0, in_protected = 0;
            std::map<UnitKey, Segment> now;
            for (const auto& e : resident) {
                ASSERT_TRUE(unique.insert(e.key).second) << "key in two segments";
                in_window += e.segment == Segment::window;
                in_protected += e.segment == Segment::protected_;
                now[e.key] = e.segment;
            }
            ASSERT_LE(in_window, window);
            ASSERT_LE(in_protected, p.protected_capacity());
            // A key that was protected is either still protected or now in probation.
            for (const auto& [key, seg] : prev)
                if (seg == Segment::protected_) {
                    auto it = now.find(key);
                    ASSERT_TRUE(it != now.end()) << "protected key " << key << " evicted directly";
                    ASSERT_TRUE(it->second == Segment::protected_ || it->second == Segment::probation);
                }
            prev = std::move(now);
            ASSERT_GE(p.hits(), last_hits);
            ASSERT_GE(p.queries(), last_queries);
            ASSERT_LE(p.hits(), p.queries());
            last_hits = p.hits();
            last_queries = p.queries();
        }
        EXPECT_FALSE(failed) << "seed " << seed;
    }
}

TEST(Policy, DeterministicTraces)
{
    for (auto cfg : {PolicyConfig::fifo(5), PolicyConfig::fifo_merge(5), PolicyConfig::w_tinylfu(3, 4)}) {
        auto run = [&] {
            ReplacementPolicy p(cfg);
            std::vector<std::string> lines;
            p.set_trace([&](const TraceRecord& r) { lines.push_back(r.line()); });
            std::mt19937_64 rng(11);
            for (int i = 0; i < 3000; ++i) {
                auto k = "k" + std::to_string(rng() % 20);
                if (rng() % 2) p.access(k);
                else p.insert(k);
            }
            return lines;
        };
        EXPECT_EQ(run(), run());
    }
}

TEST(Policy, RestoreRoundTripsResidentOrder)
{
    ReplacementPolicy p(PolicyConfig::w_tinylfu(2, 5));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        auto k = "k" + std::to_string(rng() % 15);
        if (rng() % 2) p.access(k);
        else p.insert(k);
    }
    ReplacementPolicy q(PolicyConfig::w_tinylfu(2, 5));
    q.restore(p.resident_keys());
    EXPECT_EQ(q.resident_keys(), p.resident_keys());
    ReplacementPolicy fifo(PolicyConfig::fifo(7));
    EXPECT_THROW(fifo.restore(p.resident_keys()), ConfigError);
}

TEST(Trace, LineFormat)
{
    TraceRecord r{12, "evict", "Apple|1", Segment::probation, UnitKey("Apple|1")};
    EXPECT_EQ(r.line(), "12\tevict\tApple|1\tprobation\tApple|1");
    TraceRecord h{3, "access-hit", "x", Segment::window, std::nullopt};
    EXPECT_EQ(h.line(), "3\taccess-hit\tx\twindow\t-");
}
