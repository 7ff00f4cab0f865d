#pragma once

// Command-line front end. Kept in a header so tests can drive run_cli() in-process.
//
//   agentmem simulate --config FILE [--out CSV] [--force] [--seed N]
//   agentmem sweep    --config FILE [--out DIR] [--force] [--jobs N] [--seed N]
//   agentmem graph render FILE
//   agentmem graph check FILE
//   agentmem graph query FILE AREA_A AREA_B
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
//
// simulate writes one CSV header plus one row:
//   policy,capacity,window,main,seed,mhr,mra,re,rt,warmup_step
// sweep writes DIR/sweep.csv with a distribution column after main, and one
//   DIR/series/<policy>_<capacity>_<window>-<main>_<distribution>_<seed>.csv
// per grid point with columns step,hit_rate,occupancy.
// With output.trace set, simulate also writes the policy trace as tab-separated
//   step, op, key, segment, evicted ("-" when nothing was evicted)
// lines, one per policy event.

#include <agentmem/config.hpp>
#include <agentmem/remote_embedder.hpp>
#include <agentmem/scene_graph.hpp>
#include <agentmem/workload.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace agentmem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

inline constexpr std::string_view kSimulateHeader = "policy,capacity,window,main,seed,mhr,mra,re,rt,warmup_step";
inline constexpr std::string_view kSweepHeader =
    "policy,capacity,window,main,distribution,seed,mhr,mra,re,rt,warmup_step";

/// Output refused because the target exists and --force was not given.
class OutputConflict : public Error {
public:
    using Error::Error;
};

inline std::string fmt6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string csv_row(const SweepPoint& p, const ExperimentReport& r, bool with_distribution)
{
    std::string row(to_string(p.policy.variant));
    row += "," + std::to_string(p.policy.capacity) + "," + std::to_string(p.policy.window) + "," +
           std::to_string(p.policy.main);
    if (with_distribution) row += "," + p.distribution.label();
    row += "," + std::to_string(p.seed) + "," + fmt6(r.mhr) + "," + fmt6(r.mra) + "," + fmt6(r.re) + "," + fmt6(r.rt) + ",";
    if (r.warmup_step) row += std::to_string(*r.warmup_step);
    return row;
}

inline std::string series_csv(const ExperimentReport& r)
{
    std::string out = "step,hit_rate,occupancy\n";
    for (std::size_t i = 0; i < r.hit_rate_series.size(); ++i)
        out += std::to_string(i) + "," + fmt6(r.hit_rate_series[i]) + "," + fmt6(r.occupancy_series[i]) + "\n";
    return out;
}

inline std::string series_filename(const SweepPoint& p)
{
    std::string dist = p.distribution.label();
    std::replace(dist.begin(), dist.end(), ':', '-');
    return std::string(to_string(p.policy.variant)) + "_" + std::to_string(p.policy.capacity) + "_" +
           std::to_string(p.policy.window) + "-" + std::to_string(p.policy.main) + "_" + dist + "_" +
           std::to_string(p.seed) + ".csv";
}

inline void write_file(const std::filesystem::path& path, const std::string& content, bool force)
{
    if (!force && std::filesystem::exists(path))
        throw OutputConflict("refusing to overwrite '" + path.string() + "' (pass --force)");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline Embedder make_embedder(const EmbeddingSettings& s)
{
    if (s.provider == "local") return LocalEmbedder(s.dimension);
    RemoteEmbedderConfig rc;
    rc.endpoint = s.endpoint;
    rc.model = s.model;
    rc.timeout = std::chrono::milliseconds(s.timeout_ms);
    rc.dimension = s.dimension;
    rc.retries = s.retries;
    rc.apply_environment();
    if (rc.endpoint.empty()) throw ConfigError("embedding.endpoint (or EMBED_ENDPOINT) is required for the remote provider");
    return RemoteEmbedder(rc);
}

inline RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed, bool for_sweep)
{
    RunConfig c = parse_run_config(KeyValueConfig::load(path));
    if (seed) {
        c.stream.seed = c.policy.seed = *seed;
        c.sweep.seeds = {*seed};
        c.sweep.stream.seed = c.sweep.policy_defaults.seed = *seed;
    }
    c.validate(for_sweep);
    return c;
}

inline void cmd_simulate(const std::string& config_path, std::string out_path, bool force,
                         std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err)
{
    RunConfig c = load_config(config_path, seed, false);
    if (out_path.empty()) out_path = c.output.csv;
    if (!out_path.empty() && !force && std::filesystem::exists(out_path))
        throw OutputConflict("refusing to overwrite '" + out_path + "' (pass --force)");

    auto stream = generate_stream(c.stream);
    ShortTermStore store(c.policy, make_embedder(c.embedding));
    std::ofstream trace;
    if (!c.output.trace.empty()) {
        if (!force && std::filesystem::exists(c.output.trace))
            throw OutputConflict("refusing to overwrite '" + c.output.trace + "' (pass --force)");
        trace.open(c.output.trace, std::ios::binary | std::ios::trunc);
        if (!trace) throw Error("cannot write '" + c.output.trace + "'");
        store.policy().set_trace([&trace](const TraceRecord& r) { trace << r.line() << '\n'; });
    }
    auto report = run_experiment(stream, store, c.options);

    SweepPoint point{c.policy, c.stream.distribution, c.stream.seed};
    std::string csv = std::string(kSimulateHeader) + "\n" + csv_row(point, report, false) + "\n";
    if (out_path.empty())
        out << csv;
    else
        write_file(out_path, csv, true);

    err << to_string(c.policy.variant) << " capacity " << c.policy.capacity;
    if (c.policy.variant == PolicyVariant::w_tinylfu) err << " [" << c.policy.window << "," << c.policy.main << "]";
    err << " on " << c.stream.distribution.label() << " (" << c.stream.length << " tasks, seed " << c.stream.seed
        << ")\n  MHR " << fmt6(report.mhr) << "  post-warm-up MHR " << fmt6(report.mhr_post_warmup) << "  MRA "
        << fmt6(report.mra) << "  RE " << fmt6(report.re) << "  RT " << fmt6(report.rt) << "\n  warm-up step "
        << (report.warmup_step ? std::to_string(*report.warmup_step) : std::string("none")) << "\n";
}

inline void cmd_sweep(const std::string& config_path, std::string out_dir, bool force, std::optional<unsigned> jobs,
                      std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err)
{
    RunConfig c = load_config(config_path, seed, true);
    if (jobs) c.sweep.jobs = *jobs;
    if (out_dir.empty()) out_dir = c.output.dir;
    if (out_dir.empty()) throw ConfigError("sweep needs --out or output.dir");

    namespace fs = std::filesystem;
    fs::path dir(out_dir);
    auto points = expand_sweep(c.sweep);
    if (!force) {
        if (fs::exists(dir / "sweep.csv"))
            throw OutputConflict("refusing to overwrite '" + (dir / "sweep.csv").string() + "' (pass --force)");
        for (const auto& p : points)
            if (fs::exists(dir / "series" / series_filename(p)))
                throw OutputConflict("refusing to overwrite '" + (dir / "series" / series_filename(p)).string() +
                                     "' (pass --force)");
    }
    fs::create_directories(dir / "series");

    auto rows = run_sweep(c.sweep, make_embedder(c.embedding));
    std::string csv = std::string(kSweepHeader) + "\n";
    for (const auto& r : rows) {
        csv += csv_row(r.point, r.report, true) + "\n";
        write_file(dir / "series" / series_filename(r.point), series_csv(r.report), true);
    }
    write_file(dir / "sweep.csv", csv, true);
    out << "wrote " << rows.size() << " rows to " << (dir / "sweep.csv").string() << "\n";
    (void)err;
}

inline void cmd_graph(const std::string& sub, const std::string& file, const std::vector<std::string>& areas,
                      std::ostream& out)
{
    SceneGraph g = load_scene_graph(file);
    if (sub == "render") {
        out << g.serialize_to_prompt();
    } else if (sub == "check") {
        out << "ok: " << g.floors().size() << " floors, " << g.areas().size() << " areas, " << g.objects().size()
            << " objects, " << g.edges().size() << " edges\n";
    } else if (sub == "query") {
        out << (g.navigable(areas.at(0), areas.at(1)) ? "true" : "false") << "\n";
    }
}

/// Entry point shared by the binary and the tests. `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Agent memory simulator: replacement-policy experiments and scene-graph tools", "agentmem"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    bool force = false;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;

    auto* simulate = app.add_subcommand("simulate", "run one experiment and print a CSV row");
    simulate->add_option("--config", config_path, "config file")->required();
    simulate->add_option("--out", out_path, "CSV output path (default: output.csv or stdout)");
    simulate->add_flag("--force", force, "overwrite existing outputs");
    simulate->add_option("--seed", seed, "override workload.seed");

    auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write CSV files");
    sweep->add_option("--config", config_path, "config file")->required();
    sweep->add_option("--out", out_path, "output directory (default: output.dir)");
    sweep->add_flag("--force", force, "overwrite existing outputs");
    sweep->add_option("--jobs", jobs, "parallel grid points")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", seed, "run a single seed instead of sweep.seeds");

    std::string graph_cmd, graph_file;
    std::vector<std::string> graph_areas;
    auto* graph = app.add_subcommand("graph", "scene-graph file tools");
    graph->require_subcommand(1);
    for (const char* name : {"render", "check"}) {
        auto* sub = graph->add_subcommand(name, name == std::string("render") ? "print the prompt serialization"
                                                                              : "validate the file");
        sub->add_option("file", graph_file, "scene-graph file")->required();
        sub->callback([&graph_cmd, name] { graph_cmd = name; });
    }
    auto* query = graph->add_subcommand("query", "print whether two areas are navigable");
    query->add_option("file", graph_file, "scene-graph file")->required();
    query->add_option("areas", graph_areas, "two area names")->required()->expected(2);
    query->callback([&graph_cmd] { graph_cmd = "query"; });

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed())
            cmd_simulate(config_path, out_path, force, seed, out, err);
        else if (sweep->parsed())
            cmd_sweep(config_path, out_path, force, jobs, seed, out, err);
        else
            cmd_graph(graph_cmd, graph_file, graph_areas, out);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const OutputConflict& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace agentmem::cli
