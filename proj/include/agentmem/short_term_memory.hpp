#pragma once

#include "embedding.hpp"
#include "errors.hpp"
#include "policy.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace agentmem {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Vec3&) const = default;
};

/// Object state vocabulary a vision model may assign to an object of interest.
enum class ObjectState { heated, cooked, sliced, cleaned, dirty, filled, used_up, off, on, opened, closed, none };

inline constexpr std::array<std::pair<ObjectState, std::string_view>, 12> kObjectStateLabels{{
    {ObjectState::heated, "heated"},
    {ObjectState::cooked, "cooked"},
    {ObjectState::sliced, "sliced"},
    {ObjectState::cleaned, "cleaned"},
    {ObjectState::dirty, "dirty"},
    {ObjectState::filled, "filled"},
    {ObjectState::used_up, "used_up"},
    {ObjectState::off, "off"},
    {ObjectState::on, "on"},
    {ObjectState::opened, "opened"},
    {ObjectState::closed, "closed"},
    {ObjectState::none, "none"},
}};

inline std::string_view to_string(ObjectState s)
{
    for (const auto& [state, label] : kObjectStateLabels)
        if (state == s) return label;
    throw ConfigError("invalid object state value " + std::to_string(static_cast<int>(s)));
}

/// Accepts the canonical labels plus "used up" with a space.
inline ObjectState parse_object_state(std::string_view label)
{
    if (label == "used up") return ObjectState::used_up;
    for (const auto& [state, l] : kObjectStateLabels)
        if (l == label) return state;
    throw ParseError("unknown object state '" + std::string(label) + "'");
}

struct MemoryUnit {
    std::string object_type;
    UnitKey object_id;
    Vec3 position;
    ObjectState state = ObjectState::none;
    std::string image_path;
    // Derived by the store on record(): render_unit_text() and its embedding.
    std::string text_rendering;
    EmbeddingVector embedding;

    bool operator==(const MemoryUnit&) const = default;
};

namespace detail {

inline std::string fixed2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    // Avoid "-0.00" for values that round to zero.
    if (std::string_view(buf) == "-0.00") return "0.00";
    return buf;
}

} // namespace detail

/// "<objectType> at position (x, y, z), state: <state>" with two-decimal coordinates.
inline std::string render_unit_text(const MemoryUnit& unit)
{
    std::string s = unit.object_type;
    s += " at position (";
    s += detail::fixed2(unit.position.x);
    s += ", ";
    s += detail::fixed2(unit.position.y);
    s += ", ";
    s += detail::fixed2(unit.position.z);
    s += "), state: ";
    s += to_string(unit.state);
    return s;
}

struct RecallResult {
    MemoryUnit unit;
    double distance;
};

/**
 * Volatile capacity-bounded store of memory units.
 *
 * Residency is decided by the wrapped ReplacementPolicy; this class keeps the payload map
 * in lockstep with the policy's resident set. A new store is always empty.
 */
class ShortTermStore {
public:
    static constexpr std::size_t kDefaultRecallK = 3;

    explicit ShortTermStore(const PolicyConfig& config, Embedder embedder = LocalEmbedder{})
        : policy_(config), embedder_(std::move(embedder))
    {
    }

    EvictionReport record(MemoryUnit unit)
    {
        if (unit.object_id.empty()) throw ConfigError("memory unit needs a non-empty objectId");
        to_string(unit.state); // rejects out-of-range enum values
        unit.text_rendering = render_unit_text(unit);
        unit.embedding = embedder_(unit.text_rendering);

        auto report = policy_.insert(unit.object_id);
        if (report.evicted) units_.erase(*report.evicted);
        auto it = units_.find(unit.object_id);
        if (it == units_.end())
            units_.emplace(unit.object_id, std::move(unit));
        else if (report.merged)
            it->second = std::move(unit);
        return report;
    }

    /// Top-k by cosine distance, counting one policy query per returned unit
    /// (or one unmatched query when nothing is resident).
    std::vector<RecallResult> recall(std::string_view query, std::size_t k = kDefaultRecallK)
    {
        auto results = peek_recall(query, k);
        if (results.empty()) policy_.record_unmatched_query();
        for (const auto& r : results) policy_.access(r.unit.object_id);
        return results;
    }

    /// Same ranking as recall() with no policy bookkeeping.
    std::vector<RecallResult> peek_recall(std::string_view query, std::size_t k = kDefaultRecallK) const
    {
        if (k == 0) throw ConfigError("recall k must be >= 1");
        if (units_.empty()) return {};
        auto q = embedder_(query);
        std::vector<const MemoryUnit*> order;
        order.reserve(units_.size());
        policy_.for_each_resident([&](const UnitKey& key, Segment) { order.push_back(&units_.at(key)); });
        std::vector<std::pair<double, std::size_t>> scored;
        scored.reserve(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) scored.emplace_back(cosine_distance(q, order[i]->embedding), i);
        // Ties keep resident order.
        std::size_t n = std::min(k, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(n), scored.end());
        std::vector<RecallResult> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back({*order[scored[i].second], scored[i].first});
        return out;
    }

    const MemoryUnit* find(std::string_view key) const
    {
        auto it = units_.find(UnitKey(key));
        return it == units_.end() ? nullptr : &it->second;
    }

    /// Units in policy resident order.
    std::vector<const MemoryUnit*> units() const
    {
        std::vector<const MemoryUnit*> out;
        for (const auto& e : policy_.resident_keys()) out.push_back(&units_.at(e.key));
        return out;
    }

    std::size_t size() const noexcept { return units_.size(); }
    const ReplacementPolicy& policy() const noexcept { return policy_; }
    ReplacementPolicy& policy() noexcept { return policy_; }
    const Embedder& embedder() const noexcept { return embedder_; }

    /// Rebuilds a store from a serialized snapshot; see deserialize_store().
    void restore(std::vector<std::pair<MemoryUnit, Segment>> snapshot)
    {
        std::vector<ResidentEntry> entries;
        entries.reserve(snapshot.size());
        for (const auto& [u, seg] : snapshot) entries.push_back({u.object_id, seg});
        policy_.restore(entries);
        for (auto& [u, seg] : snapshot) {
            u.text_rendering = render_unit_text(u);
            u.embedding = embedder_(u.text_rendering);
            units_.emplace(u.object_id, std::move(u));
        }
    }

private:
    ReplacementPolicy policy_;
    Embedder embedder_;
    std::unordered_map<UnitKey, MemoryUnit> units_;
};

// --- text serialization ---------------------------------------------------------------
//
// A JSON array of records in resident order:
//   {"objectType": ..., "position": {"x": ..., "y": ..., "z": ...}, "objectId": ..., "imagePath": ...,
//    "extensions": {"state": ..., "segment": ...}}
// "extensions" and each of its keys are omitted at their defaults (state none, segment queue).
// Embeddings are not stored; they are recomputed from the rendered text on load.
// Layout is two-space indented with shortest round-trip numbers, so documents written
// by common JSON emitters (Python's json.dumps(indent=2), for one) survive a load/save cycle unchanged.

namespace detail {

/// Shortest round-trip decimal, with ".0" kept on integral values.
inline std::string json_number(double v)
{
    if (!std::isfinite(v)) throw ConfigError("cannot serialize a non-finite coordinate");
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string out(buf, end);
    if (out.find_first_of(".e") == std::string::npos) out += ".0";
    return out;
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

} // namespace detail

inline std::string serialize_store(const ShortTermStore& store)
{
    auto keys = store.policy().resident_keys();
    if (keys.empty()) return "[]\n";
    std::string out = "[\n";
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const MemoryUnit& u = *store.find(keys[i].key);
        out += "  {\n    \"objectType\": " + detail::json_string(u.object_type) + ",\n";
        out += "    \"position\": {\n";
        out += "      \"x\": " + detail::json_number(u.position.x) + ",\n";
        out += "      \"y\": " + detail::json_number(u.position.y) + ",\n";
        out += "      \"z\": " + detail::json_number(u.position.z) + "\n    },\n";
        out += "    \"objectId\": " + detail::json_string(u.object_id) + ",\n";
        out += "    \"imagePath\": " + detail::json_string(u.image_path);
        std::vector<std::pair<const char*, std::string_view>> ext;
        if (u.state != ObjectState::none) ext.emplace_back("state", to_string(u.state));
        if (keys[i].segment != Segment::queue) ext.emplace_back("segment", to_string(keys[i].segment));
        if (!ext.empty()) {
            out += ",\n    \"extensions\": {\n";
            for (std::size_t j = 0; j < ext.size(); ++j) {
                out += std::string("      \"") + ext[j].first + "\": " + detail::json_string(std::string(ext[j].second));
                out += j + 1 < ext.size() ? ",\n" : "\n";
            }
            out += "    }";
        }
        out += i + 1 < keys.size() ? "\n  },\n" : "\n  }\n";
    }
    out += "]\n";
    return out;
}

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::ptrdiff_t(offset), '\n'));
}

} // namespace detail

/// Parses the record array into (unit, segment) pairs without building a store.
inline std::vector<std::pair<MemoryUnit, Segment>> parse_store_records(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), detail::line_of_offset(text, e.byte));
    }
    if (!doc.is_array()) throw ParseError("short-term memory document must be a JSON array of records");

    std::vector<std::pair<MemoryUnit, Segment>> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        std::string where = "record " + std::to_string(i);
        if (rec.is_object() && rec.contains("objectId") && rec["objectId"].is_string())
            where += " (" + rec["objectId"].get<std::string>() + ")";
        auto fail = [&](const std::string& msg) -> ParseError { return ParseError(where + ": " + msg); };
        if (!rec.is_object()) throw fail("not an object");

        for (const auto& [name, _] : rec.items())
            if (name != "objectType" && name != "position" && name != "objectId" && name != "imagePath" &&
                name != "extensions")
                throw fail("unknown field '" + name + "'");
        auto str = [&](const char* name) {
            if (!rec.contains(name)) throw fail(std::string("missing ") + name);
            if (!rec[name].is_string()) throw fail(std::string(name) + " must be a string");
            return rec[name].get<std::string>();
        };

        MemoryUnit u;
        u.object_type = str("objectType");
        u.object_id = str("objectId");
        u.image_path = str("imagePath");
        if (u.object_id.empty()) throw fail("objectId must be non-empty");
        if (!rec.contains("position")) throw fail("missing position");
        const auto& pos = rec["position"];
        if (!pos.is_object()) throw fail("position must be an object");
        for (const auto& [name, _] : pos.items())
            if (name != "x" && name != "y" && name != "z") throw fail("unknown position field '" + name + "'");
        auto coord = [&](const char* axis) {
            if (!pos.contains(axis)) throw fail(std::string("missing position.") + axis);
            if (!pos[axis].is_number()) throw fail(std::string("position.") + axis + " is not numeric");
            return pos[axis].get<double>();
        };
        u.position = {coord("x"), coord("y"), coord("z")};

        Segment seg = Segment::queue;
        if (rec.contains("extensions")) {
            const auto& ext = rec["extensions"];
            if (!ext.is_object()) throw fail("extensions must be an object");
            for (const auto& [name, value] : ext.items()) {
                if (!value.is_string()) throw fail("extensions." + name + " must be a string");
                try {
                    if (name == "state")
                        u.state = parse_object_state(value.get<std::string>());
                    else if (name == "segment")
                        seg = parse_segment(value.get<std::string>());
                    else
                        throw fail("unknown field 'extensions." + name + "'");
                } catch (const ParseError& e) {
                    if (std::string_view(e.what()).starts_with(where)) throw;
                    throw fail(e.what());
                }
            }
        }
        out.emplace_back(std::move(u), seg);
    }
    return out;
}

/// Fresh store under `config` holding exactly the serialized units in their serialized order.
inline ShortTermStore deserialize_store(std::string_view text, const PolicyConfig& config,
                                        Embedder embedder = LocalEmbedder{})
{
    ShortTermStore store(config, std::move(embedder));
    store.restore(parse_store_records(text));
    return store;
}

} // namespace agentmem
