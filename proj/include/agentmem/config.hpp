#pragma once

#include "errors.hpp"
#include "policy.hpp"
#include "workload.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace agentmem {

/**
 * Flat `key = value` text with `[section]` headers. Keys are addressed as "section.key".
 * '#' and ';' start comment lines. Every key must be consumed by the reader; leftovers are
 * reported by `reject_unused()`.
 */
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text)
    {
        KeyValueConfig cfg;
        std::istringstream in{std::string(text)};
        std::string line;
        std::string section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto s = trim(line);
            if (s.empty() || s.front() == '#' || s.front() == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
                section = std::string(trim(s.substr(1, s.size() - 2)));
                if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            std::string key(trim(s.substr(0, eq)));
            if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            std::string full = section.empty() ? key : section + "." + key;
            if (cfg.values_.count(full)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
            cfg.values_[full] = {std::string(trim(s.substr(eq + 1))), lineno};
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::optional<std::string> text(const std::string& key) const
    {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        used_.insert(key);
        return it->second.value;
    }

    template <typename T>
    void read(const std::string& key, T& out) const
    {
        auto v = text(key);
        if (!v) return;
        out = convert<T>(key, *v);
    }

    template <typename T>
    void read_list(const std::string& key, std::vector<T>& out) const
    {
        auto v = text(key);
        if (!v) return;
        out.clear();
        std::string_view rest = *v;
        while (!rest.empty()) {
            auto comma = rest.find(',');
            auto item = trim(rest.substr(0, comma));
            if (item.empty()) throw bad(key, *v, "empty list item");
            out.push_back(convert<T>(key, std::string(item)));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }

    void reject_unused() const
    {
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) throw ConfigError("unknown config key '" + k + "' (line " + std::to_string(v.line) + ")");
    }

    static ConfigError bad(const std::string& key, const std::string& value, const std::string& why)
    {
        return ConfigError("config key '" + key + "': " + why + " (got '" + value + "')");
    }

private:
    struct Entry {
        std::string value;
        std::size_t line;
    };

    static std::string_view trim(std::string_view s)
    {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    template <typename T>
    static T convert(const std::string& key, const std::string& v)
    {
        if constexpr (std::is_same_v<T, std::string>) {
            return v;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (v == "true" || v == "1") return true;
            if (v == "false" || v == "0") return false;
            throw bad(key, v, "expected true or false");
        } else if constexpr (std::is_floating_point_v<T>) {
            try {
                std::size_t used = 0;
                T x = static_cast<T>(std::stod(v, &used));
                if (used != v.size()) throw std::invalid_argument(v);
                return x;
            } catch (const std::logic_error&) {
                throw bad(key, v, "expected a number");
            }
        } else if constexpr (std::is_integral_v<T>) {
            T x{};
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc() || p != v.data() + v.size()) throw bad(key, v, "expected a non-negative integer");
            return x;
        } else if constexpr (std::is_same_v<T, PolicyVariant>) {
            try {
                return parse_policy_variant(v);
            } catch (const ConfigError&) {
                throw bad(key, v, "expected fifo, fifo_merge or w_tinylfu");
            }
        } else if constexpr (std::is_same_v<T, DistributionSpec>) {
            try {
                return DistributionSpec::parse(v);
            } catch (const ConfigError&) {
                throw bad(key, v, "expected uniform, zipf:<s> or repeat_block:<n>");
            }
        } else if constexpr (std::is_same_v<T, std::pair<std::size_t, std::size_t>>) {
            auto colon = v.find(':');
            if (colon == std::string::npos) throw bad(key, v, "expected <window>:<main>");
            return {convert<std::size_t>(key, v.substr(0, colon)), convert<std::size_t>(key, v.substr(colon + 1))};
        } else {
            static_assert(sizeof(T) == 0, "unsupported config value type");
        }
    }

    std::map<std::string, Entry> values_;
    mutable std::set<std::string> used_;
};

struct EmbeddingSettings {
    std::string provider = "local"; // local | remote
    std::size_t dimension = LocalEmbedder::kDefaultDimension;
    std::string endpoint;
    std::string model = "text-embedding-3-large";
    std::uint64_t timeout_ms = 10000;
    unsigned retries = 0;
};

struct OutputSettings {
    std::string csv;
    std::string dir;
    std::string trace;
};

struct RunConfig {
    PolicyConfig policy;
    StreamParams stream;
    ExperimentOptions options;
    EmbeddingSettings embedding;
    OutputSettings output;
    SweepConfig sweep;

    /// Checks every module precondition up front; errors name the offending key.
    void validate(bool for_sweep) const
    {
        auto wrap = [](const char* key, auto&& fn) {
            try {
                fn();
            } catch (const ConfigError& e) {
                throw ConfigError(std::string(key) + ": " + e.what());
            }
        };
        if (!for_sweep) wrap("policy", [&] { policy.validate(); });
        wrap("sketch", [&] {
            if (policy.sketch_depth == 0) throw ConfigError("depth must be >= 1");
            if (policy.sketch_counter_cap == 0) throw ConfigError("counter_cap must be >= 1");
        });
        wrap("workload", [&] { stream.validate(); });
        if (options.recall_k == 0) throw ConfigError("recall.k must be >= 1");
        if (options.cost.explore_cost < 0) throw ConfigError("cost.explore must be >= 0");
        if (options.cost.goto_cost < 0) throw ConfigError("cost.goto must be >= 0");
        if (options.cost.explore_cost + options.cost.goto_cost <= 0)
            throw ConfigError("cost.explore + cost.goto must be > 0");
        if (embedding.provider != "local" && embedding.provider != "remote")
            throw ConfigError("embedding.provider must be local or remote");
        if (embedding.dimension == 0) throw ConfigError("embedding.dimension must be >= 1");
        if (for_sweep) wrap("sweep", [&] { expand_sweep(sweep); });
    }
};

inline RunConfig parse_run_config(const KeyValueConfig& kv)
{
    RunConfig c;
    kv.read("policy.variant", c.policy.variant);
    kv.read("policy.capacity", c.policy.capacity);
    kv.read("policy.window", c.policy.window);
    kv.read("policy.main", c.policy.main);
    kv.read("policy.protected_ratio", c.policy.protected_ratio);
    kv.read("sketch.depth", c.policy.sketch_depth);
    kv.read("sketch.width", c.policy.sketch_width);
    kv.read("sketch.reset_threshold", c.policy.sketch_reset_threshold);
    unsigned cap = c.policy.sketch_counter_cap;
    kv.read("sketch.counter_cap", cap);
    if (cap > 255) throw KeyValueConfig::bad("sketch.counter_cap", std::to_string(cap), "must be <= 255");
    c.policy.sketch_counter_cap = static_cast<std::uint8_t>(cap);

    kv.read("workload.distribution", c.stream.distribution);
    kv.read("workload.pool_size", c.stream.pool_size);
    kv.read("workload.length", c.stream.length);
    kv.read("workload.seed", c.stream.seed);
    kv.read("workload.ambiguous_fraction", c.stream.ambiguous_fraction);
    c.policy.seed = c.stream.seed;

    kv.read("recall.k", c.options.recall_k);
    kv.read("cost.explore", c.options.cost.explore_cost);
    kv.read("cost.goto", c.options.cost.goto_cost);

    kv.read("embedding.provider", c.embedding.provider);
    kv.read("embedding.dimension", c.embedding.dimension);
    kv.read("embedding.endpoint", c.embedding.endpoint);
    kv.read("embedding.model", c.embedding.model);
    kv.read("embedding.timeout_ms", c.embedding.timeout_ms);
    kv.read("embedding.retries", c.embedding.retries);

    kv.read("output.csv", c.output.csv);
    kv.read("output.dir", c.output.dir);
    kv.read("output.trace", c.output.trace);

    auto& s = c.sweep;
    s.policies = {c.policy.variant};
    s.capacities = {c.policy.capacity};
    if (c.policy.variant == PolicyVariant::w_tinylfu) s.splits = {{c.policy.window, c.policy.main}};
    s.distributions = {c.stream.distribution};
    s.seeds = {c.stream.seed};
    kv.read_list("sweep.policies", s.policies);
    kv.read_list("sweep.capacities", s.capacities);
    kv.read_list("sweep.splits", s.splits);
    kv.read_list("sweep.window_fractions", s.window_fractions);
    kv.read_list("sweep.distributions", s.distributions);
    kv.read_list("sweep.seeds", s.seeds);
    kv.read("sweep.jobs", s.jobs);
    s.stream = c.stream;
    s.policy_defaults = c.policy;
    s.options = c.options;

    kv.reject_unused();
    return c;
}

} // namespace agentmem
