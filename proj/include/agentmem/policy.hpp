#pragma once

#include "errors.hpp"
#include "frequency_sketch.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <list>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace agentmem {

/// Stable per-object identity; equality means "same object".
using UnitKey = std::string;

enum class PolicyVariant { fifo, fifo_merge, w_tinylfu };

enum class Segment { queue, window, probation, protected_ };

enum class AccessResult { hit, miss };

inline std::string_view to_string(PolicyVariant v)
{
    switch (v) {
    case PolicyVariant::fifo: return "fifo";
    case PolicyVariant::fifo_merge: return "fifo_merge";
    case PolicyVariant::w_tinylfu: return "w_tinylfu";
    }
    return "?";
}

inline std::string_view to_string(Segment s)
{
    switch (s) {
    case Segment::queue: return "queue";
    case Segment::window: return "window";
    case Segment::probation: return "probation";
    case Segment::protected_: return "protected";
    }
    return "?";
}

inline PolicyVariant parse_policy_variant(std::string_view s)
{
    if (s == "fifo") return PolicyVariant::fifo;
    if (s == "fifo_merge") return PolicyVariant::fifo_merge;
    if (s == "w_tinylfu" || s == "wtinylfu") return PolicyVariant::w_tinylfu;
    throw ConfigError("unknown policy variant '" + std::string(s) + "'");
}

inline Segment parse_segment(std::string_view s)
{
    if (s == "queue") return Segment::queue;
    if (s == "window") return Segment::window;
    if (s == "probation") return Segment::probation;
    if (s == "protected") return Segment::protected_;
    throw ParseError("unknown segment '" + std::string(s) + "'");
}

struct PolicyConfig {
    PolicyVariant variant = PolicyVariant::fifo;
    std::size_t capacity = 10;
    // W-TinyLFU only: window + main must equal capacity.
    std::size_t window = 0;
    std::size_t main = 0;
    double protected_ratio = 0.8;
    // Zero width / reset_threshold select 8x and 10x capacity.
    std::size_t sketch_depth = 4;
    std::size_t sketch_width = 0;
    std::uint64_t sketch_reset_threshold = 0;
    std::uint8_t sketch_counter_cap = 15;
    std::uint64_t seed = 0x5eed;

    static PolicyConfig fifo(std::size_t capacity) { return {PolicyVariant::fifo, capacity}; }
    static PolicyConfig fifo_merge(std::size_t capacity) { return {PolicyVariant::fifo_merge, capacity}; }
    static PolicyConfig w_tinylfu(std::size_t window, std::size_t main)
    {
        return {PolicyVariant::w_tinylfu, window + main, window, main};
    }

    SketchConfig sketch() const
    {
        return {sketch_depth, sketch_width ? sketch_width : 8 * capacity,
                sketch_reset_threshold ? sketch_reset_threshold : 10 * std::uint64_t(capacity),
                sketch_counter_cap, seed};
    }

    /// Throws ConfigError naming the offending field.
    void validate() const
    {
        if (capacity == 0) throw ConfigError("capacity must be >= 1");
        if (variant != PolicyVariant::w_tinylfu) return;
        if (window + main != capacity)
            throw ConfigError("window (" + std::to_string(window) + ") + main (" + std::to_string(main) +
                              ") must equal capacity (" + std::to_string(capacity) + ")");
        if (main == 0) throw ConfigError("main must be >= 1");
        if (!(protected_ratio >= 0.0 && protected_ratio <= 1.0))
            throw ConfigError("protected_ratio must lie in [0, 1]");
    }
};

struct EvictionReport {
    std::optional<UnitKey> evicted;
    bool merged = false;
};

struct ResidentEntry {
    UnitKey key;
    Segment segment;

    bool operator==(const ResidentEntry&) const = default;
};

/// One line of the eviction trace: "step\top\tkey\tsegment\tevicted".
struct TraceRecord {
    std::uint64_t step;
    std::string op; // access-hit, access-miss, insert, merge, shift, promote, demote, evict
    UnitKey key;
    Segment segment;
    std::optional<UnitKey> evicted;

    std::string line() const
    {
        std::string s = std::to_string(step);
        s += '\t';
        s += op;
        s += '\t';
        s += key;
        s += '\t';
        s += to_string(segment);
        s += '\t';
        s += evicted ? *evicted : "-";
        return s;
    }
};

using TraceSink = std::function<void(const TraceRecord&)>;

/**
 * Capacity-bounded replacement over unit keys.
 *
 * FIFO and FIFO-with-merge keep one arrival-ordered queue. W-TinyLFU keeps an LRU window
 * and a segmented main area (probation + protected). New keys enter the window; the
 * window's LRU key shifts into probation when the window overflows. When the total
 * exceeds capacity the victim is the key with the smallest sketch estimate among
 * window and probation, ties going to the least recently touched key. Protected keys
 * are never evicted directly: overflow from protected demotes its LRU key into probation.
 *
 * Accessing never inserts. Callers decide when a miss is followed by insert().
 */
class ReplacementPolicy {
public:
    explicit ReplacementPolicy(const PolicyConfig& config) : config_(config)
    {
        config_.validate();
        if (config_.variant == PolicyVariant::w_tinylfu) {
            protected_capacity_ = static_cast<std::size_t>(config_.protected_ratio * double(config_.main));
            sketch_.emplace(config_.sketch());
        }
    }

    // Index entries hold list iterators, so copies would alias the source lists.
    ReplacementPolicy(const ReplacementPolicy&) = delete;
    ReplacementPolicy& operator=(const ReplacementPolicy&) = delete;
    ReplacementPolicy(ReplacementPolicy&&) noexcept = default;
    ReplacementPolicy& operator=(ReplacementPolicy&&) noexcept = default;

    const PolicyConfig& config() const noexcept { return config_; }
    PolicyVariant variant() const noexcept { return config_.variant; }
    std::size_t capacity() const noexcept { return config_.capacity; }
    std::size_t protected_capacity() const noexcept { return protected_capacity_; }

    void set_trace(TraceSink sink) { trace_ = std::move(sink); }

    AccessResult access(std::string_view key)
    {
        ++queries_;
        ++step_;
        UnitKey k(key);
        if (sketch_) sketch_->increment(key);
        auto it = index_.find(k);
        if (it == index_.end()) {
            emit("access-miss", k, Segment::queue, std::nullopt);
            return AccessResult::miss;
        }
        ++hits_;
        auto& node = it->second;
        node.last_touch = step_;
        emit("access-hit", k, node.segment, std::nullopt);
        switch (node.segment) {
        case Segment::queue: break;
        case Segment::window: move_to_front(node, window_); break;
        case Segment::protected_: move_to_front(node, protected_); break;
        case Segment::probation:
            if (protected_capacity_ == 0) {
                move_to_front(node, probation_);
            } else {
                relocate(node, protected_, Segment::protected_);
                emit("promote", k, Segment::protected_, std::nullopt);
                if (protected_.size() > protected_capacity_) {
                    UnitKey demoted = protected_.back();
                    relocate(index_.at(demoted), probation_, Segment::probation);
                    emit("demote", demoted, Segment::probation, std::nullopt);
                }
            }
            break;
        }
        return AccessResult::hit;
    }

    /// Counts a query that matched no key at all (e.g. recall against an empty store).
    void record_unmatched_query()
    {
        ++queries_;
        ++step_;
    }

    EvictionReport insert(std::string_view key)
    {
        if (key.empty()) throw ConfigError("unit key must be non-empty");
        ++step_;
        UnitKey k(key);
        if (auto it = index_.find(k); it != index_.end()) {
            // Plain FIFO leaves the resident entry untouched; the others replace the payload in place.
            if (config_.variant == PolicyVariant::fifo) return {};
            emit("merge", k, it->second.segment, std::nullopt);
            return {std::nullopt, true};
        }

        if (config_.variant != PolicyVariant::w_tinylfu) {
            std::optional<UnitKey> evicted;
            if (queue_.size() >= config_.capacity) {
                evicted = queue_.front();
                index_.erase(*evicted);
                queue_.pop_front();
            }
            queue_.push_back(k);
            index_[k] = Node{Segment::queue, std::prev(queue_.end()), step_};
            emit("insert", k, Segment::queue, std::nullopt);
            if (evicted) emit("evict", *evicted, Segment::queue, evicted);
            return {evicted, false};
        }

        sketch_->increment(key);
        window_.push_front(k);
        index_[k] = Node{Segment::window, window_.begin(), step_};
        emit("insert", k, Segment::window, std::nullopt);
        while (window_.size() > config_.window) {
            UnitKey shifted = window_.back();
            relocate(index_.at(shifted), probation_, Segment::probation);
            emit("shift", shifted, Segment::probation, std::nullopt);
        }
        std::optional<UnitKey> evicted;
        if (size() > config_.capacity) {
            evicted = select_victim();
            auto& node = index_.at(*evicted);
            Segment from = node.segment;
            (from == Segment::window ? window_ : probation_).erase(node.pos);
            index_.erase(*evicted);
            emit("evict", *evicted, from, evicted);
        }
        return {evicted, false};
    }

    bool contains(std::string_view key) const { return index_.count(UnitKey(key)) != 0; }

    std::optional<Segment> segment_of(std::string_view key) const
    {
        auto it = index_.find(UnitKey(key));
        if (it == index_.end()) return std::nullopt;
        return it->second.segment;
    }

    std::size_t size() const noexcept { return index_.size(); }

    /// Visits resident keys in resident_keys() order without copying them.
    template <typename Fn>
    void for_each_resident(Fn&& fn) const
    {
        for (const auto& k : queue_) fn(k, Segment::queue);
        for (auto it = window_.rbegin(); it != window_.rend(); ++it) fn(*it, Segment::window);
        for (auto it = probation_.rbegin(); it != probation_.rend(); ++it) fn(*it, Segment::probation);
        for (auto it = protected_.rbegin(); it != protected_.rend(); ++it) fn(*it, Segment::protected_);
    }

    /// Oldest first within each segment; segments listed window, probation, protected.
    std::vector<ResidentEntry> resident_keys() const
    {
        std::vector<ResidentEntry> out;
        out.reserve(size());
        for_each_resident([&](const UnitKey& k, Segment s) { out.push_back({k, s}); });
        return out;
    }

    /// Rebuilds residency from a resident_keys() snapshot of a policy with the same config.
    void restore(const std::vector<ResidentEntry>& entries)
    {
        if (size() != 0) throw ConfigError("restore requires an empty policy");
        if (entries.size() > config_.capacity)
            throw ConfigError("snapshot holds " + std::to_string(entries.size()) + " keys, capacity is " +
                              std::to_string(config_.capacity));
        for (const auto& e : entries) {
            if (e.key.empty()) throw ConfigError("unit key must be non-empty");
            if (index_.count(e.key)) throw ConfigError("duplicate key '" + e.key + "' in snapshot");
            bool queued = config_.variant != PolicyVariant::w_tinylfu;
            if (queued != (e.segment == Segment::queue))
                throw ConfigError("segment '" + std::string(to_string(e.segment)) + "' does not belong to policy " +
                                  std::string(to_string(config_.variant)));
            ++step_;
            if (queued) {
                queue_.push_back(e.key);
                index_[e.key] = Node{Segment::queue, std::prev(queue_.end()), step_};
            } else {
                auto& l = list_for(e.segment);
                l.push_front(e.key);
                index_[e.key] = Node{e.segment, l.begin(), step_};
            }
        }
        if (window_.size() > config_.window || protected_.size() > protected_capacity_)
            throw ConfigError("snapshot segment sizes exceed the configured split");
    }

    std::uint64_t hits() const noexcept { return hits_; }
    std::uint64_t queries() const noexcept { return queries_; }

    double hit_rate() const noexcept { return queries_ == 0 ? 0.0 : double(hits_) / double(queries_); }

    double occupancy() const noexcept { return double(size()) / double(config_.capacity); }

    /// Present only for W-TinyLFU.
    const FrequencySketch* sketch() const noexcept { return sketch_ ? &*sketch_ : nullptr; }

private:
    struct Node {
        Segment segment;
        std::list<UnitKey>::iterator pos;
        std::uint64_t last_touch;
    };

    std::list<UnitKey>& list_for(Segment s)
    {
        switch (s) {
        case Segment::window: return window_;
        case Segment::probation: return probation_;
        case Segment::protected_: return protected_;
        case Segment::queue: break;
        }
        return queue_;
    }

    static void move_to_front(Node& node, std::list<UnitKey>& l) { l.splice(l.begin(), l, node.pos); }

    void relocate(Node& node, std::list<UnitKey>& dest, Segment dest_segment)
    {
        dest.splice(dest.begin(), list_for(node.segment), node.pos);
        node.pos = dest.begin();
        node.segment = dest_segment;
    }

    UnitKey select_victim() const
    {
        const UnitKey* best = nullptr;
        std::uint32_t best_freq = std::numeric_limits<std::uint32_t>::max();
        std::uint64_t best_touch = std::numeric_limits<std::uint64_t>::max();
        auto scan = [&](const std::list<UnitKey>& l) {
            for (const auto& k : l) {
                std::uint32_t f = sketch_->estimate(k);
                std::uint64_t t = index_.at(k).last_touch;
                if (f < best_freq || (f == best_freq && t < best_touch)) {
                    best = &k;
                    best_freq = f;
                    best_touch = t;
                }
            }
        };
        scan(window_);
        scan(probation_);
        return *best;
    }

    void emit(const char* op, const UnitKey& key, Segment segment, const std::optional<UnitKey>& evicted)
    {
        if (trace_) trace_(TraceRecord{step_, op, key, segment, evicted});
    }

    PolicyConfig config_;
    std::size_t protected_capacity_ = 0;
    std::optional<FrequencySketch> sketch_;
    std::list<UnitKey> queue_;
    std::list<UnitKey> window_;    // MRU at front
    std::list<UnitKey> probation_; // MRU at front
    std::list<UnitKey> protected_; // MRU at front
    std::unordered_map<UnitKey, Node> index_;
    std::uint64_t hits_ = 0;
    std::uint64_t queries_ = 0;
    std::uint64_t step_ = 0;
    TraceSink trace_;
};

/// Warm-up test: occupancy strictly above 95%.
inline bool is_warmed(double occupancy) noexcept { return occupancy > 0.95; }

} // namespace agentmem
