#pragma once

#include "errors.hpp"
#include "policy.hpp"
#include "short_term_memory.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

namespace agentmem {

enum class Distribution { uniform, zipf, repeat_block };

struct DistributionSpec {
    Distribution kind = Distribution::zipf;
    double zipf_s = 1.0;
    std::size_t block_length = 4;

    /// "uniform", "zipf:<s>", "repeat_block:<len>".
    std::string label() const
    {
        char buf[64];
        switch (kind) {
        case Distribution::uniform: return "uniform";
        case Distribution::zipf: std::snprintf(buf, sizeof buf, "zipf:%g", zipf_s); return buf;
        case Distribution::repeat_block: return "repeat_block:" + std::to_string(block_length);
        }
        return "?";
    }

    static DistributionSpec parse(std::string_view text)
    {
        auto colon = text.find(':');
        std::string_view name = text.substr(0, colon);
        std::string arg = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
        DistributionSpec d;
        try {
            if (name == "uniform" && arg.empty()) {
                d.kind = Distribution::uniform;
            } else if (name == "zipf") {
                d.kind = Distribution::zipf;
                if (!arg.empty()) {
                    std::size_t used = 0;
                    d.zipf_s = std::stod(arg, &used);
                    if (used != arg.size()) throw std::invalid_argument(arg);
                }
            } else if (name == "repeat_block") {
                d.kind = Distribution::repeat_block;
                if (!arg.empty()) {
                    std::size_t used = 0;
                    long long n = std::stoll(arg, &used);
                    if (used != arg.size() || n < 1) throw std::invalid_argument(arg);
                    d.block_length = std::size_t(n);
                }
            } else {
                throw std::invalid_argument(std::string(text));
            }
        } catch (const std::logic_error&) {
            throw ConfigError("bad distribution '" + std::string(text) + "' (expected uniform, zipf:<s> or repeat_block:<n>)");
        }
        return d;
    }

    bool operator==(const DistributionSpec&) const = default;
};

struct StreamParams {
    DistributionSpec distribution;
    std::size_t pool_size = 100;
    std::size_t length = 10000;
    std::uint64_t seed = 1;
    /// Fraction of tasks phrased without naming the target's type.
    double ambiguous_fraction = 0.0;

    void validate() const
    {
        if (pool_size == 0) throw ConfigError("pool_size must be >= 1");
        if (length == 0) throw ConfigError("length must be >= 1");
        if (distribution.kind == Distribution::zipf && !(distribution.zipf_s >= 0.0 && std::isfinite(distribution.zipf_s)))
            throw ConfigError("zipf exponent must be finite and >= 0");
        if (distribution.kind == Distribution::repeat_block && distribution.block_length == 0)
            throw ConfigError("block_length must be >= 1");
        if (!(ambiguous_fraction >= 0.0 && ambiguous_fraction <= 1.0))
            throw ConfigError("ambiguous_fraction must lie in [0, 1]");
    }
};

struct PoolObject {
    std::string type;
    UnitKey id;
    Vec3 position;
};

struct Task {
    std::string instruction;
    UnitKey target;
    std::string target_type;
    ObjectState resulting_state = ObjectState::none;
    bool requires_memory = false; // target already appeared earlier in the stream
    bool ambiguous = false;
};

struct TaskStream {
    StreamParams params;
    std::vector<PoolObject> pool;
    std::vector<Task> tasks;

    const PoolObject& object(const UnitKey& id) const
    {
        for (const auto& o : pool)
            if (o.id == id) return o;
        throw ConfigError("object '" + id + "' is not in the pool");
    }
};

namespace detail {

inline constexpr std::array<std::string_view, 50> kObjectTypes{
    "Apple",     "Tomato",        "Potato",        "Bread",      "Lettuce",     "Egg",          "Knife",
    "ButterKnife", "Fork",        "Spoon",         "Spatula",    "Ladle",       "Pan",          "Pot",
    "Plate",     "Bowl",          "Cup",           "Mug",        "Kettle",      "Toaster",      "Microwave",
    "Fridge",    "Cabinet",       "Drawer",        "Sink",       "Faucet",      "StoveBurner",  "CoffeeMachine",
    "DishSponge", "SoapBottle",   "PaperTowelRoll", "SaltShaker", "PepperShaker", "Book",        "Laptop",
    "Pencil",    "Pen",           "CellPhone",     "KeyChain",   "CreditCard",  "Vase",         "Statue",
    "Pillow",    "Lamp",          "Candle",        "Watch",      "Box",         "Newspaper",    "RemoteControl",
    "Television",
};

struct Phrase {
    std::string_view prefix;
    std::string_view suffix;
    ObjectState state;
};

inline constexpr std::array<Phrase, 12> kPhrases{{
    {"wash the ", "", ObjectState::cleaned},
    {"slice the ", "", ObjectState::sliced},
    {"heat the ", "", ObjectState::heated},
    {"cook the ", "", ObjectState::cooked},
    {"bring me the ", "", ObjectState::none},
    {"put the ", " on the countertop", ObjectState::none},
    {"pick up the ", "", ObjectState::none},
    {"open the ", "", ObjectState::opened},
    {"close the ", "", ObjectState::closed},
    {"turn on the ", "", ObjectState::on},
    {"turn off the ", "", ObjectState::off},
    {"fill the ", "", ObjectState::filled},
}};

// No token here may coincide with a lowercased object type.
inline constexpr std::array<std::string_view, 6> kVaguePhrases{
    "get me something to eat", "tidy up the room a little",      "fetch the thing I used earlier",
    "find a red food",         "bring over whatever is nearby", "prepare a snack for me",
};

/// Uniform double in [0, 1) from the top 53 bits; independent of the standard library's distributions.
inline double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * double(n)));
}

inline std::string thor_coord(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+06.2f", v);
    return buf;
}

inline std::string lowercase(std::string s)
{
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace detail

/// Deterministic object pool: unique types ("Apple", ..., "Apple2", ...) and THOR-style ids.
inline std::vector<PoolObject> make_pool(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x706f6f6cULL);
    std::vector<PoolObject> pool;
    pool.reserve(n);
    const std::size_t vocab = detail::kObjectTypes.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::string type(detail::kObjectTypes[i % vocab]);
        if (i >= vocab) type += std::to_string(i / vocab + 1);
        Vec3 p{detail::unit_uniform(rng) * 6.0 - 3.0, detail::unit_uniform(rng) * 2.0,
               detail::unit_uniform(rng) * 6.0 - 3.0};
        std::string id = type + "|" + detail::thor_coord(p.x) + "|" + detail::thor_coord(p.y) + "|" + detail::thor_coord(p.z);
        pool.push_back({std::move(type), std::move(id), p});
    }
    return pool;
}

/// Reproducible task sequence. Under zipf(s), pool index i has weight 1 / (i + 1)^s.
inline TaskStream generate_stream(const StreamParams& params)
{
    params.validate();
    TaskStream stream{params, make_pool(params.pool_size, params.seed), {}};
    std::mt19937_64 rng(params.seed);
    const std::size_t n = params.pool_size;

    std::vector<double> cdf;
    if (params.distribution.kind == Distribution::zipf) {
        cdf.resize(n);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) cdf[i] = acc += 1.0 / std::pow(double(i + 1), params.distribution.zipf_s);
        for (auto& c : cdf) c /= acc;
    }
    auto draw = [&]() -> std::size_t {
        if (params.distribution.kind != Distribution::zipf) return detail::uniform_index(rng, n);
        double u = detail::unit_uniform(rng);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return std::min(n - 1, std::size_t(it - cdf.begin()));
    };

    std::vector<bool> seen(n, false);
    std::size_t current = 0;
    stream.tasks.reserve(params.length);
    for (std::size_t t = 0; t < params.length; ++t) {
        if (params.distribution.kind != Distribution::repeat_block || t % params.distribution.block_length == 0)
            current = draw();
        const auto& obj = stream.pool[current];
        Task task;
        task.target = obj.id;
        task.target_type = obj.type;
        task.requires_memory = seen[current];
        seen[current] = true;
        task.ambiguous = params.ambiguous_fraction > 0.0 && detail::unit_uniform(rng) < params.ambiguous_fraction;
        const auto& phrase = detail::kPhrases[detail::uniform_index(rng, detail::kPhrases.size())];
        task.resulting_state = phrase.state;
        if (task.ambiguous)
            task.instruction = detail::kVaguePhrases[detail::uniform_index(rng, detail::kVaguePhrases.size())];
        else
            task.instruction = std::string(phrase.prefix) + detail::lowercase(obj.type) + std::string(phrase.suffix);
        stream.tasks.push_back(std::move(task));
    }
    return stream;
}

/// Abstract action costs in time units.
struct CostModel {
    double explore_cost = 5.0;
    double goto_cost = 1.0;
};

struct ExperimentOptions {
    std::size_t recall_k = ShortTermStore::kDefaultRecallK;
    CostModel cost;
};

struct ExperimentReport {
    double mhr = 0.0;             // hits / queries over the whole run
    double mhr_post_warmup = 0.0; // hits / tasks inside the measurement window
    double mra = 0.0;
    double re = 0.0;
    double rt = 0.0;
    std::optional<std::size_t> warmup_step; // 0-based index of the first task leaving occupancy > 0.95
    std::vector<double> hit_rate_series;    // cumulative hit rate after each task
    std::vector<double> occupancy_series;
    std::uint64_t hits = 0;
    std::uint64_t queries = 0;
    std::uint64_t mra_hits = 0;
    std::uint64_t mra_total = 0;
    std::uint64_t window_tasks = 0;
    std::uint64_t e_total = 0;
    std::uint64_t e_reduced = 0;
    double t_total = 0.0;
    double t_reduced = 0.0;

    bool operator==(const ExperimentReport&) const = default;
};

/**
 * Replays `stream` against `store`, which must be fresh.
 *
 * Per task: rank-1 recall feeds MRA (tasks with requires_memory only); one policy access on
 * the target decides hit or miss; the target's fresh unit is then recorded. A hit avoids the
 * exploration and a miss pays for it. Exploration and time totals count the would-be cost of
 * every task in the measurement window, so RE = hits/tasks and RT = RE * explore/(explore+goto)
 * in that window. The window is the tasks after warm-up, or the whole run if the store never
 * warms up.
 */
inline ExperimentReport run_experiment(const TaskStream& stream, ShortTermStore& store, const ExperimentOptions& options = {})
{
    if (store.size() != 0 || store.policy().queries() != 0) throw ConfigError("run_experiment needs a fresh store");
    if (options.recall_k == 0) throw ConfigError("recall k must be >= 1");
    if (!(options.cost.explore_cost >= 0.0 && options.cost.goto_cost >= 0.0) ||
        options.cost.explore_cost + options.cost.goto_cost <= 0.0)
        throw ConfigError("cost model needs non-negative costs with a positive sum");

    ExperimentReport r;
    const std::size_t n = stream.tasks.size();
    std::vector<bool> hit_at(n, false);
    r.hit_rate_series.reserve(n);
    r.occupancy_series.reserve(n);

    std::unordered_map<UnitKey, const PoolObject*> objects;
    for (const auto& o : stream.pool) objects.emplace(o.id, &o);

    for (std::size_t i = 0; i < n; ++i) {
        const Task& task = stream.tasks[i];
        if (task.requires_memory) {
            ++r.mra_total;
            auto top = store.peek_recall(task.instruction, options.recall_k);
            if (!top.empty() && top.front().unit.object_id == task.target) ++r.mra_hits;
        }
        hit_at[i] = store.policy().access(task.target) == AccessResult::hit;

        const PoolObject& obj = *objects.at(task.target);
        MemoryUnit unit;
        unit.object_type = obj.type;
        unit.object_id = obj.id;
        unit.position = obj.position;
        unit.state = task.resulting_state;
        unit.image_path = "/short_term/images/" + obj.type + ".jpg";
        store.record(std::move(unit));

        double occ = store.policy().occupancy();
        if (!r.warmup_step && is_warmed(occ)) r.warmup_step = i;
        r.hit_rate_series.push_back(store.policy().hit_rate());
        r.occupancy_series.push_back(occ);
    }

    r.hits = store.policy().hits();
    r.queries = store.policy().queries();
    r.mhr = store.policy().hit_rate();
    r.mra = r.mra_total ? double(r.mra_hits) / double(r.mra_total) : 0.0;

    std::size_t first = r.warmup_step ? *r.warmup_step + 1 : 0;
    std::uint64_t window_hits = 0;
    for (std::size_t i = first; i < n; ++i) window_hits += hit_at[i] ? 1 : 0;
    r.window_tasks = n - first;
    r.e_total = r.window_tasks;
    r.e_reduced = window_hits;
    r.t_total = double(r.window_tasks) * (options.cost.explore_cost + options.cost.goto_cost);
    r.t_reduced = double(window_hits) * options.cost.explore_cost;
    r.mhr_post_warmup = r.window_tasks ? double(window_hits) / double(r.window_tasks) : 0.0;
    r.re = r.e_total ? double(r.e_reduced) / double(r.e_total) : 0.0;
    r.rt = r.t_total > 0.0 ? r.t_reduced / r.t_total : 0.0;
    return r;
}

// --- sweeps -----------------------------------------------------------------------------

struct SweepConfig {
    std::vector<PolicyVariant> policies;
    std::vector<std::size_t> capacities;
    /// Absolute W-TinyLFU (window, main) splits; each applies where window + main == capacity.
    std::vector<std::pair<std::size_t, std::size_t>> splits;
    /// Relative W-TinyLFU window sizes: window = round(f * capacity), clamped so main >= 1.
    std::vector<double> window_fractions;
    std::vector<DistributionSpec> distributions;
    std::vector<std::uint64_t> seeds;
    StreamParams stream; // distribution and seed are overridden per grid point
    PolicyConfig policy_defaults;
    ExperimentOptions options;
    unsigned jobs = 1;
};

struct SweepPoint {
    PolicyConfig policy;
    DistributionSpec distribution;
    std::uint64_t seed;
};

struct SweepRow {
    SweepPoint point;
    ExperimentReport report;
};

inline std::size_t window_for_fraction(std::size_t capacity, double fraction)
{
    auto w = static_cast<std::size_t>(std::floor(fraction * double(capacity) + 0.5));
    return std::min(w, capacity - 1);
}

/// Expands the grid in a fixed order: distribution, seed, policy, capacity, split.
inline std::vector<SweepPoint> expand_sweep(const SweepConfig& cfg)
{
    if (cfg.policies.empty() || cfg.capacities.empty() || cfg.distributions.empty() || cfg.seeds.empty())
        throw ConfigError("sweep grid is empty (policies, capacities, distributions and seeds must be non-empty)");
    std::vector<SweepPoint> points;
    for (const auto& dist : cfg.distributions)
        for (auto seed : cfg.seeds)
            for (auto variant : cfg.policies)
                for (auto cap : cfg.capacities) {
                    if (cap == 0) throw ConfigError("sweep capacity must be >= 1");
                    PolicyConfig base = cfg.policy_defaults;
                    base.variant = variant;
                    base.capacity = cap;
                    base.seed = seed;
                    if (variant != PolicyVariant::w_tinylfu) {
                        base.window = base.main = 0;
                        points.push_back({base, dist, seed});
                        continue;
                    }
                    std::size_t before = points.size();
                    for (auto [w, m] : cfg.splits)
                        if (w + m == cap) {
                            base.window = w;
                            base.main = m;
                            base.validate();
                            points.push_back({base, dist, seed});
                        }
                    for (double f : cfg.window_fractions) {
                        base.window = window_for_fraction(cap, f);
                        base.main = cap - base.window;
                        points.push_back({base, dist, seed});
                    }
                    if (points.size() == before)
                        throw ConfigError("no W-TinyLFU split matches capacity " + std::to_string(cap));
                }
    return points;
}

/// Runs every grid point on a fresh store; points sharing (distribution, seed) share one stream.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg, const Embedder& embedder = LocalEmbedder{})
{
    auto points = expand_sweep(cfg);
    std::vector<SweepRow> rows(points.size());

    std::vector<std::pair<std::pair<std::string, std::uint64_t>, TaskStream>> streams;
    for (const auto& p : points) {
        auto key = std::make_pair(p.distribution.label(), p.seed);
        bool have = std::any_of(streams.begin(), streams.end(), [&](const auto& s) { return s.first == key; });
        if (have) continue;
        StreamParams sp = cfg.stream;
        sp.distribution = p.distribution;
        sp.seed = p.seed;
        streams.emplace_back(key, generate_stream(sp));
    }
    auto stream_for = [&](const SweepPoint& p) -> const TaskStream& {
        auto key = std::make_pair(p.distribution.label(), p.seed);
        for (const auto& s : streams)
            if (s.first == key) return s.second;
        throw ConfigError("internal: missing stream");
    };

    auto run_one = [&](std::size_t i) {
        ShortTermStore store(points[i].policy, embedder);
        rows[i] = {points[i], run_experiment(stream_for(points[i]), store, cfg.options)};
    };

    unsigned jobs = std::max(1u, cfg.jobs);
    if (jobs == 1 || points.size() == 1) {
        for (std::size_t i = 0; i < points.size(); ++i) run_one(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w)
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < points.size();) run_one(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

} // namespace agentmem
