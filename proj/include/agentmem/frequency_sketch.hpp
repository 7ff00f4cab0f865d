#pragma once

#include "errors.hpp"
#include "hash.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace agentmem {

struct SketchConfig {
    std::size_t depth = 4;
    std::size_t width = 1024;
    std::uint64_t reset_threshold = 10000;
    std::uint8_t counter_cap = 15;
    std::uint64_t seed = 0x5eed;
};

/**
 * Counting Bloom filter used as a usage-frequency estimator.
 *
 * `depth` rows of `width` saturating counters, each row addressed by its own keyed
 * hash. An increment bumps one counter per row and the estimate is the row minimum,
 * so estimates never undercount between resets. Every increment also advances a
 * global counter; when it reaches `reset_threshold` all counters are halved (floor)
 * and the global counter restarts from zero.
 *
 * Not thread-safe. One writer per instance.
 */
class FrequencySketch {
public:
    explicit FrequencySketch(const SketchConfig& config)
        : depth_(config.depth),
          width_(config.width),
          reset_threshold_(config.reset_threshold),
          cap_(config.counter_cap)
    {
        if (depth_ == 0) throw ConfigError("sketch depth must be >= 1");
        if (width_ == 0) throw ConfigError("sketch width must be >= 1");
        if (reset_threshold_ == 0) throw ConfigError("sketch reset_threshold must be >= 1");
        if (cap_ == 0) throw ConfigError("sketch counter_cap must be >= 1");
        counters_.assign(depth_ * width_, 0);
        detail::SeedSequence seeds(config.seed);
        seeds_.reserve(depth_);
        for (std::size_t i = 0; i < depth_; ++i) seeds_.push_back(seeds.next());
    }

    FrequencySketch(std::size_t depth, std::size_t width, std::uint64_t reset_threshold)
        : FrequencySketch(SketchConfig{depth, width, reset_threshold})
    {
    }

    void increment(std::string_view key)
    {
        for (std::size_t row = 0; row < depth_; ++row) {
            auto& c = counters_[slot(row, key)];
            if (c < cap_) ++c;
        }
        if (++global_count_ >= reset_threshold_) reset_halve();
    }

    std::uint32_t estimate(std::string_view key) const
    {
        std::uint8_t best = cap_;
        for (std::size_t row = 0; row < depth_; ++row) best = std::min(best, counters_[slot(row, key)]);
        return best;
    }

    void reset_halve() noexcept
    {
        for (auto& c : counters_) c = static_cast<std::uint8_t>(c >> 1);
        global_count_ = 0;
    }

    std::size_t depth() const noexcept { return depth_; }
    std::size_t width() const noexcept { return width_; }
    std::uint64_t reset_threshold() const noexcept { return reset_threshold_; }
    std::uint8_t counter_cap() const noexcept { return cap_; }
    std::uint64_t global_count() const noexcept { return global_count_; }

    /// Row-major view of the raw counters (depth x width).
    const std::vector<std::uint8_t>& counters() const noexcept { return counters_; }

private:
    std::size_t slot(std::size_t row, std::string_view key) const noexcept
    {
        return row * width_ + static_cast<std::size_t>(detail::keyed_hash(key, seeds_[row]) % width_);
    }

    std::size_t depth_;
    std::size_t width_;
    std::uint64_t reset_threshold_;
    std::uint8_t cap_;
    std::uint64_t global_count_ = 0;
    std::vector<std::uint8_t> counters_;
    std::vector<std::uint64_t> seeds_;
};

} // namespace agentmem
