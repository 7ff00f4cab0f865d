#pragma once

#include "errors.hpp"
#include "short_term_memory.hpp" // Vec3, detail::fixed2

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace agentmem {

/**
 * Three-level hierarchical topological graph: floors contain areas, areas contain objects.
 * Undirected edges connect navigable area pairs. Node names are unique across all levels.
 *
 * Insertion order is preserved everywhere and drives the prompt rendering.
 */
class SceneGraph {
public:
    static constexpr std::string_view kDefaultFloor = "floor_0";
    static constexpr double kDefaultRadius = 1.5;

    enum class Level { floor, area, object };

    struct Area {
        std::string name;
        Vec3 position;
        std::string floor;
        std::vector<std::string> contains;

        bool operator==(const Area&) const = default;
    };

    struct Object {
        std::string name;
        std::string area;
        Vec3 position;
        std::optional<double> volume; // m^3

        bool operator==(const Object&) const = default;
    };

    struct ObjectAttributes {
        Vec3 position;
        std::optional<double> volume;
    };

    void add_floor(const std::string& name)
    {
        check_new_name(name);
        floors_.push_back(name);
        levels_.emplace(name, Level::floor);
    }

    /// An empty floor name places the area on the default floor, created on demand.
    void add_area(const std::string& name, Vec3 position, const std::string& floor = {})
    {
        std::string parent = floor.empty() ? std::string(kDefaultFloor) : floor;
        check_new_name(name);
        if (!has(parent, Level::floor)) {
            if (!floor.empty()) throw GraphError("area '" + name + "' references missing floor '" + floor + "'");
            add_floor(parent);
        }
        areas_.push_back(Area{name, position, parent, {}});
        levels_.emplace(name, Level::area);
    }

    void add_object(const std::string& area, const std::string& name, ObjectAttributes attributes)
    {
        if (!has(area, Level::area)) throw GraphError("object '" + name + "' references missing area '" + area + "'");
        check_new_name(name);
        if (attributes.volume && !(*attributes.volume >= 0.0))
            throw GraphError("object '" + name + "' has a negative volume");
        objects_.push_back(Object{name, area, attributes.position, attributes.volume});
        levels_.emplace(name, Level::object);
        area_ref(area).contains.push_back(name);
    }

    /// Idempotent: re-adding an existing edge (either orientation) does nothing.
    void add_edge(const std::string& a, const std::string& b)
    {
        if (!has(a, Level::area)) throw GraphError("edge endpoint '" + a + "' is not an area");
        if (!has(b, Level::area)) throw GraphError("edge endpoint '" + b + "' is not an area");
        if (a == b) throw GraphError("self-loop on '" + a + "'");
        if (has_edge(a, b)) return;
        edges_.emplace_back(a, b);
    }

    bool has_edge(const std::string& a, const std::string& b) const
    {
        return std::any_of(edges_.begin(), edges_.end(), [&](const auto& e) {
            return (e.first == a && e.second == b) || (e.first == b && e.second == a);
        });
    }

    /// Removing a floor removes its areas; removing an area removes its objects and edges.
    void remove_node(const std::string& name)
    {
        auto it = levels_.find(name);
        if (it == levels_.end()) throw GraphError("no node named '" + name + "'");
        switch (it->second) {
        case Level::object: {
            auto obj = std::find_if(objects_.begin(), objects_.end(), [&](const Object& o) { return o.name == name; });
            auto& contains = area_ref(obj->area).contains;
            contains.erase(std::find(contains.begin(), contains.end(), name));
            objects_.erase(obj);
            levels_.erase(name);
            break;
        }
        case Level::area: {
            auto area = find_area(name);
            for (const auto& o : area->contains) levels_.erase(o);
            std::erase_if(objects_, [&](const Object& o) { return o.area == name; });
            std::erase_if(edges_, [&](const auto& e) { return e.first == name || e.second == name; });
            areas_.erase(areas_.begin() + (area - areas_.data()));
            levels_.erase(name);
            break;
        }
        case Level::floor: {
            std::vector<std::string> doomed;
            for (const auto& a : areas_)
                if (a.floor == name) doomed.push_back(a.name);
            for (const auto& a : doomed) remove_node(a);
            floors_.erase(std::find(floors_.begin(), floors_.end(), name));
            levels_.erase(name);
            break;
        }
        }
    }

    /// True iff a path of navigability edges joins the two areas.
    bool navigable(const std::string& a, const std::string& b) const
    {
        if (!has(a, Level::area)) throw GraphError("unknown area '" + a + "'");
        if (!has(b, Level::area)) throw GraphError("unknown area '" + b + "'");
        if (a == b) return true;
        std::unordered_map<std::string, std::vector<std::string>> adj;
        for (const auto& [u, v] : edges_) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        std::unordered_set<std::string> seen{a};
        std::deque<std::string> frontier{a};
        while (!frontier.empty()) {
            auto cur = std::move(frontier.front());
            frontier.pop_front();
            for (const auto& n : adj[cur]) {
                if (n == b) return true;
                if (seen.insert(n).second) frontier.push_back(n);
            }
        }
        return false;
    }

    /// Neighbors of `area` in edge insertion order.
    std::vector<std::string> adjacent(const std::string& area) const
    {
        std::vector<std::string> out;
        for (const auto& [u, v] : edges_) {
            if (u == area) out.push_back(v);
            else if (v == area) out.push_back(u);
        }
        return out;
    }

    struct Observation {
        std::string name;
        Vec3 position;
        std::optional<double> volume;
    };

    /**
     * Assigns each observed object to the nearest area within `radius` (meters).
     * Returns the names of observations that fell outside every area's radius.
     */
    std::vector<std::string> ingest_objects(const std::vector<Observation>& observations, double radius = kDefaultRadius)
    {
        std::vector<std::string> unassigned;
        for (const auto& obs : observations) {
            const Area* best = nullptr;
            double best_d = radius;
            for (const auto& a : areas_) {
                double dx = a.position.x - obs.position.x;
                double dy = a.position.y - obs.position.y;
                double dz = a.position.z - obs.position.z;
                double d = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (d <= best_d && (!best || d < best_d)) {
                    best = &a;
                    best_d = d;
                }
            }
            if (!best) {
                unassigned.push_back(obs.name);
                continue;
            }
            add_object(best->name, obs.name, {obs.position, obs.volume});
        }
        return unassigned;
    }

    /**
     * Prompt text: one record per area in insertion order, then the edge set, e.g.
     *
     *   {name: node_1, type: Area, contains: [bed, table], adjacent nodes: [node_2], position: [2.34, 0.00, 2.23]}
     *   {node_1 ↔ node_2}
     */
    std::string serialize_to_prompt() const
    {
        std::string out;
        for (const auto& a : areas_) {
            out += "{name: " + a.name + ", type: Area, contains: [" + join(a.contains) + "], adjacent nodes: [" +
                   join(adjacent(a.name)) + "], position: [" + detail::fixed2(a.position.x) + ", " +
                   detail::fixed2(a.position.y) + ", " + detail::fixed2(a.position.z) + "]}\n";
        }
        out += "{";
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            if (i) out += ", ";
            out += edges_[i].first + " ↔ " + edges_[i].second;
        }
        out += "}\n";
        return out;
    }

    const std::vector<std::string>& floors() const noexcept { return floors_; }
    const std::vector<Area>& areas() const noexcept { return areas_; }
    const std::vector<Object>& objects() const noexcept { return objects_; }
    const std::vector<std::pair<std::string, std::string>>& edges() const noexcept { return edges_; }

    std::optional<Level> level_of(const std::string& name) const
    {
        auto it = levels_.find(name);
        if (it == levels_.end()) return std::nullopt;
        return it->second;
    }

    const Area* area(const std::string& name) const
    {
        auto it = std::find_if(areas_.begin(), areas_.end(), [&](const Area& a) { return a.name == name; });
        return it == areas_.end() ? nullptr : &*it;
    }

    bool empty() const noexcept { return levels_.empty(); }

    /// Same nodes with the same attributes and the same undirected edge set.
    friend bool operator==(const SceneGraph& l, const SceneGraph& r)
    {
        return l.floors_ == r.floors_ && l.areas_ == r.areas_ && l.objects_ == r.objects_ &&
               l.edge_set() == r.edge_set();
    }

private:
    static std::string join(const std::vector<std::string>& v)
    {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += v[i];
        }
        return s;
    }

    std::set<std::pair<std::string, std::string>> edge_set() const
    {
        std::set<std::pair<std::string, std::string>> s;
        for (auto [a, b] : edges_) s.emplace(std::min(a, b), std::max(a, b));
        return s;
    }

    bool has(const std::string& name, Level level) const
    {
        auto it = levels_.find(name);
        return it != levels_.end() && it->second == level;
    }

    void check_new_name(const std::string& name) const
    {
        if (name.empty()) throw GraphError("node names must be non-empty");
        for (char c : name)
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '[' || c == ']' || c == '{' ||
                c == '}')
                throw GraphError("node name '" + name + "' contains whitespace or a delimiter");
        if (levels_.count(name)) throw GraphError("duplicate node name '" + name + "'");
    }

    Area* find_area(const std::string& name)
    {
        auto it = std::find_if(areas_.begin(), areas_.end(), [&](const Area& a) { return a.name == name; });
        return it == areas_.end() ? nullptr : &*it;
    }

    Area& area_ref(const std::string& name) { return *find_area(name); }

    std::vector<std::string> floors_;
    std::vector<Area> areas_;
    std::vector<Object> objects_;
    std::vector<std::pair<std::string, std::string>> edges_;
    std::unordered_map<std::string, Level> levels_;
};

// --- persistence ------------------------------------------------------------------------
//
//   agentmem-scene-graph 1
//   floor <name>
//   area <name> <floor> <x> <y> <z>
//   object <name> <area> <x> <y> <z> [<volume>]
//   edge <a> <b>
//   end
//
// Blank lines and lines starting with '#' are ignored. Records may only reference nodes
// declared on earlier lines. The trailing "end" line guards against truncation.

inline constexpr std::string_view kSceneGraphHeader = "agentmem-scene-graph 1";

namespace detail {

inline std::string exact(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline std::string write_scene_graph(const SceneGraph& g)
{
    std::string out(kSceneGraphHeader);
    out += '\n';
    for (const auto& f : g.floors()) out += "floor " + f + "\n";
    for (const auto& a : g.areas())
        out += "area " + a.name + " " + a.floor + " " + detail::exact(a.position.x) + " " +
               detail::exact(a.position.y) + " " + detail::exact(a.position.z) + "\n";
    for (const auto& o : g.objects()) {
        out += "object " + o.name + " " + o.area + " " + detail::exact(o.position.x) + " " +
               detail::exact(o.position.y) + " " + detail::exact(o.position.z);
        if (o.volume) out += " " + detail::exact(*o.volume);
        out += "\n";
    }
    for (const auto& [a, b] : g.edges()) out += "edge " + a + " " + b + "\n";
    out += "end\n";
    return out;
}

inline SceneGraph read_scene_graph(std::string_view text)
{
    SceneGraph g;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    bool ended = false;

    auto number = [&](const std::string& tok) {
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw ParseError("'" + tok + "' is not a number", lineno);
        }
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (ended) throw ParseError("content after 'end'", lineno);
        if (!header) {
            if (line != kSceneGraphHeader) throw ParseError("expected header '" + std::string(kSceneGraphHeader) + "'", lineno);
            header = true;
            continue;
        }
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        const std::string& kind = tok[0];
        auto arity = [&](std::size_t lo, std::size_t hi) {
            if (tok.size() < lo || tok.size() > hi) throw ParseError("wrong field count for '" + kind + "'", lineno);
        };
        try {
            if (kind == "floor") {
                arity(2, 2);
                g.add_floor(tok[1]);
            } else if (kind == "area") {
                arity(6, 6);
                g.add_area(tok[1], {number(tok[3]), number(tok[4]), number(tok[5])}, tok[2]);
            } else if (kind == "object") {
                arity(6, 7);
                SceneGraph::ObjectAttributes attrs{{number(tok[3]), number(tok[4]), number(tok[5])}, std::nullopt};
                if (tok.size() == 7) attrs.volume = number(tok[6]);
                g.add_object(tok[2], tok[1], attrs);
            } else if (kind == "edge") {
                arity(3, 3);
                g.add_edge(tok[1], tok[2]);
            } else if (kind == "end") {
                arity(1, 1);
                ended = true;
            } else {
                throw ParseError("unknown record '" + kind + "'", lineno);
            }
        } catch (const GraphError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (!header) throw ParseError("empty scene-graph file", lineno);
    if (!ended) throw ParseError("missing 'end' line (truncated file?)", lineno);
    return g;
}

inline void save_scene_graph(const SceneGraph& g, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << write_scene_graph(g);
    if (!out) throw Error("write to '" + path + "' failed");
}

inline SceneGraph load_scene_graph(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return read_scene_graph(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace agentmem
