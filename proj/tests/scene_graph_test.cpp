#include <agentmem/scene_graph.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace agentmem;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SceneGraph node_fixture()
{
    SceneGraph g;
    g.add_area("node_1", {2.34, 0.0, 2.23});
    g.add_area("node_2", {5.0, 0.0, 2.0});
    g.add_area("node_8", {0.5, 0.0, -1.0});
    for (const char* o : {"bed", "table", "window"}) g.add_object("node_1", o, {{2.3, 0.5, 2.2}, std::nullopt});
    g.add_edge("node_1", "node_2");
    g.add_edge("node_1", "node_8");
    return g;
}

SceneGraph random_graph(std::uint64_t seed, int floors, int areas, int objects)
{
    std::mt19937_64 rng(seed);
    auto coord = [&] { return double(rng() % 100000) / 997.0 - 50.0; };
    SceneGraph g;
    for (int f = 0; f < floors; ++f) g.add_floor("floor_" + std::to_string(f));
    for (int a = 0; a < areas; ++a)
        g.add_area("area_" + std::to_string(a), {coord(), coord(), coord()}, "floor_" + std::to_string(rng() % floors));
    for (int o = 0; o < objects; ++o) {
        std::optional<double> vol;
        if (rng() % 2) vol = double(rng() % 1000) / 3.0;
        g.add_object("area_" + std::to_string(rng() % areas), "obj_" + std::to_string(o), {{coord(), coord(), coord()}, vol});
    }
    for (int e = 0; e < areas * 2; ++e) {
        auto a = rng() % areas, b = rng() % areas;
        if (a != b) g.add_edge("area_" + std::to_string(a), "area_" + std::to_string(b));
    }
    return g;
}

} // namespace

TEST(SceneGraph, PromptNodeStringIsByteExact)
{
    auto golden = slurp(std::string(AGENTMEM_GOLDEN_DIR) + "/scene_node.txt");
    auto first_line = golden.substr(0, golden.find('\n') + 1);
    auto edge_line = golden.substr(golden.find('\n') + 1);
    auto text = node_fixture().serialize_to_prompt();
    EXPECT_EQ(text.substr(0, first_line.size()), first_line);
    ASSERT_GE(text.size(), edge_line.size());
    EXPECT_EQ(text.substr(text.size() - edge_line.size()), edge_line);
}

TEST(SceneGraph, EmptyAndSingleEdgePrompts)
{
    EXPECT_EQ(SceneGraph{}.serialize_to_prompt(), "{}\n");
    SceneGraph g;
    g.add_area("node_1", {0, 0, 0});
    g.add_area("node_2", {1, 0, 0});
    g.add_edge("node_1", "node_2");
    auto text = g.serialize_to_prompt();
    EXPECT_EQ(text.substr(text.rfind('{')), "{node_1 ↔ node_2}\n");
}

TEST(SceneGraph, ReferentialIntegrity)
{
    SceneGraph g;
    g.add_floor("f1");
    EXPECT_THROW(g.add_floor("f1"), GraphError);
    EXPECT_THROW(g.add_area("a", {}, "nowhere"), GraphError);
    g.add_area("a", {}, "f1");
    EXPECT_THROW(g.add_object("missing", "cup", {}), GraphError);
    EXPECT_THROW(g.add_object("a", "bad name", {}), GraphError);
    EXPECT_THROW(g.add_object("a", "cup", {{}, -1.0}), GraphError);
    g.add_object("a", "cup", {});
    EXPECT_THROW(g.add_area("cup", {}), GraphError);
    EXPECT_THROW(g.add_edge("a", "a"), GraphError);
    EXPECT_THROW(g.add_edge("a", "cup"), GraphError);
    EXPECT_THROW(g.remove_node("ghost"), GraphError);
}

TEST(SceneGraph, DefaultFloorAndLevels)
{
    SceneGraph g;
    g.add_area("kitchen", {1, 0, 1});
    EXPECT_EQ(g.level_of("floor_0"), SceneGraph::Level::floor);
    EXPECT_EQ(g.level_of("kitchen"), SceneGraph::Level::area);
    EXPECT_EQ(g.area("kitchen")->floor, "floor_0");
    EXPECT_FALSE(g.level_of("attic"));
}

TEST(SceneGraph, EdgesAreIdempotentAndUndirected)
{
    auto g = node_fixture();
    g.add_edge("node_2", "node_1");
    EXPECT_EQ(g.edges().size(), 2u);
    EXPECT_EQ(g.adjacent("node_2"), std::vector<std::string>{"node_1"});
}

TEST(SceneGraph, Navigability)
{
    SceneGraph g;
    for (const char* n : {"a", "b", "c", "x", "y"}) g.add_area(n, {});
    g.add_edge("a", "b");
    g.add_edge("b", "c");
    g.add_edge("x", "y");
    EXPECT_TRUE(g.navigable("a", "c"));
    EXPECT_TRUE(g.navigable("c", "a"));
    EXPECT_FALSE(g.navigable("a", "y"));
    EXPECT_THROW(g.navigable("a", "zzz"), GraphError);
}

TEST(SceneGraph, RemovalCascades)
{
    auto g = node_fixture();
    g.remove_node("table");
    EXPECT_EQ(g.area("node_1")->contains, (std::vector<std::string>{"bed", "window"}));
    g.remove_node("node_1");
    EXPECT_TRUE(g.objects().empty());
    EXPECT_TRUE(g.edges().empty());
    EXPECT_FALSE(g.level_of("bed"));
    g.remove_node("floor_0");
    EXPECT_TRUE(g.empty());
}

TEST(SceneGraph, IngestAssignsNearestAreaWithinRadius)
{
    SceneGraph g;
    g.add_area("kitchen", {0, 0, 0});
    g.add_area("bedroom", {3, 0, 0});
    auto missed = g.ingest_objects({{"apple", {0.5, 0, 0}, std::nullopt},
                                    {"pillow", {2.2, 0, 0}, 0.01},
                                    {"car", {100, 0, 0}, std::nullopt}});
    EXPECT_EQ(missed, std::vector<std::string>{"car"});
    EXPECT_EQ(g.area("kitchen")->contains, std::vector<std::string>{"apple"});
    EXPECT_EQ(g.area("bedroom")->contains, std::vector<std::string>{"pillow"});
}

TEST(SceneGraphPersistence, RoundTripLargeGraph)
{
    auto g = random_graph(42, 3, 20, 100);
    auto text = write_scene_graph(g);
    EXPECT_EQ(read_scene_graph(text), g);
    EXPECT_EQ(write_scene_graph(read_scene_graph(text)), text);

    auto path = (std::filesystem::temp_directory_path() / "agentmem_scene_graph_test.txt").string();
    save_scene_graph(g, path);
    EXPECT_EQ(load_scene_graph(path), g);
    std::filesystem::remove(path);
}

TEST(SceneGraphPersistence, RejectsBrokenFiles)
{
    auto text = write_scene_graph(node_fixture());
    auto line_of = [](const std::string& t) -> std::size_t {
        try {
            read_scene_graph(t);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    // Truncation: drop the trailing end line.
    EXPECT_GT(line_of(text.substr(0, text.rfind("end"))), 0u);
    EXPECT_EQ(line_of("agentmem-scene-graph 1\nfloor f\narea a f 1 2\nend\n"), 3u);
    EXPECT_EQ(line_of("agentmem-scene-graph 1\nobject o nowhere 0 0 0\nend\n"), 2u);
    EXPECT_EQ(line_of("agentmem-scene-graph 1\nfloor f\narea a f x 0 0\nend\n"), 3u);
    EXPECT_EQ(line_of("not a graph\n"), 1u);
    EXPECT_NO_THROW(read_scene_graph("agentmem-scene-graph 1\n   \n# note\nend\n"));
    EXPECT_THROW(load_scene_graph("/nonexistent/dir/graph.txt"), Error);
}
