// Command line harness around the route-following library: teach scripted
// routes in the simulator, repeat them under configurable corruption, sweep
// parameter grids, adapt routes between cameras, and poke at raw image
// matches. Exit codes: 0 success, 1 trial failure, 2 usage or config error.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tandem/trials.hpp"

namespace {

using namespace tandem;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out;
};

Config load_base_config(const CommonArgs& args) {
    Config cfg;
    if (!args.config_path.empty()) cfg = load_config(args.config_path);
    return cfg;
}

RecordingParams recording_params(const Config& cfg) {
    RecordingParams p;
    p.tau_d = cfg.tau_d;
    p.tau_alpha = deg_to_rad(cfg.tau_alpha);
    p.image_width = cfg.image_width;
    p.image_height = cfg.image_height;
    p.patch_size = cfg.patch_size;
    p.fov = deg_to_rad(cfg.fov_deg);
    p.search_range = cfg.ncc_search_px;
    return p;
}

std::vector<std::pair<double, double>> parse_waypoints(const std::string& text) {
    std::vector<std::pair<double, double>> points;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(';', pos);
        if (end == std::string::npos) end = text.size();
        const std::string pair = text.substr(pos, end - pos);
        const std::size_t comma = pair.find(',');
        if (comma == std::string::npos)
            throw ConfigError("waypoint '" + pair + "' is not x,y");
        try {
            points.emplace_back(std::stod(pair.substr(0, comma)),
                                std::stod(pair.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError("waypoint '" + pair + "' is not numeric");
        }
        pos = end + 1;
    }
    return points;
}

int cmd_teach(const CommonArgs& args, const std::string& world_name, std::uint64_t world_seed,
              const std::string& waypoint_text) {
    const Config cfg = load_base_config(args);
    const World world = build_world(world_name, world_seed);
    const std::vector<std::pair<double, double>> waypoints =
        waypoint_text.empty() ? world_route(world_name) : parse_waypoints(waypoint_text);

    const Route route =
        teach_route(world, waypoints, recording_params(cfg), cfg.controller_gains());
    save_route(route, args.out);
    std::printf("taught %zu keyframes (%dx%d, fov %.1f deg) -> %s\n", route.size(),
                route.params.image_width, route.params.image_height,
                rad_to_deg(route.params.fov), args.out.c_str());
    return 0;
}

int cmd_repeat(const CommonArgs& args, const std::string& route_dir,
               const std::string& world_name, std::uint64_t world_seed, int init_scan) {
    const Config cfg = load_base_config(args);
    const World world = build_world(world_name, world_seed);
    const Route route = load_route(route_dir);

    TrialSetup ts = make_trial_setup(cfg, args.seed);
    ts.init_scan = init_scan;
    std::vector<TickRecord> log;
    const TrialSummary s = run_repeat_trial(route, world, ts, &log);
    if (!args.out.empty()) write_trial_csv(args.out, log);

    std::printf("%s after %.1f s at goal %d/%zu\n", to_string(s.result), s.duration,
                s.final_goal_index, route.size() - 1);
    std::printf("lateral: mean %.3f m, max %.3f m; |along-path| mean %.3f m\n",
                s.mean_abs_lateral, s.max_abs_lateral, s.mean_abs_along);
    return s.result == TrialResult::Success ? 0 : 1;
}

int cmd_sweep(const CommonArgs& args, const std::string& route_dir,
              const std::string& world_name, std::uint64_t world_seed, SweepRequest req,
              bool dat) {
    const Config cfg = load_base_config(args);
    const World world = build_world(world_name, world_seed);
    const Route route = load_route(route_dir);

    req.master_seed = args.seed;
    if (!args.out.empty()) {
        req.out_dir = args.out;
        std::filesystem::create_directories(req.out_dir);
    }
    const std::vector<SweepRow> rows = run_sweep(route, world, cfg, req);
    for (const SweepRow& r : rows)
        std::printf("%-10s %d/%d  mean |lateral| %.3f m, max %.3f m\n", r.value.c_str(),
                    r.successes, r.total, r.mean_lateral, r.max_lateral);
    if (!args.out.empty()) {
        write_sweep_csv(req.out_dir / "sweep.csv", req.axis, rows);
        if (dat) write_sweep_dat(req.out_dir / "sweep.dat", rows);
        std::printf("wrote %s\n", (req.out_dir / "sweep.csv").string().c_str());
    }
    return 0;
}

int cmd_transfer(const CommonArgs& args, const std::string& route_dir, double fov_deg,
                 int width) {
    const Route source = load_route(route_dir);
    const Route target = transfer_route(source, deg_to_rad(fov_deg), width);
    save_route(target, args.out);
    std::printf("transferred %zu keyframes to %dx%d, fov %.1f deg, search %d px -> %s\n",
                target.size(), target.params.image_width, target.params.image_height,
                rad_to_deg(target.params.fov), target.params.search_range, args.out.c_str());
    return 0;
}

int cmd_offset(const CommonArgs& args, const std::string& ref_path,
               const std::string& query_path) {
    const Config cfg = load_base_config(args);
    const RawImage ref_raw = read_pgm(ref_path);
    const RawImage query_raw = read_pgm(query_path);
    const ProcessedImage ref =
        preprocess(ref_raw, cfg.image_width, cfg.image_height, cfg.patch_size);
    const ProcessedImage query =
        preprocess(query_raw, cfg.image_width, cfg.image_height, cfg.patch_size);
    const CorrelationProfile p = ncc_profile(ref, query, cfg.ncc_search_px);

    std::printf("best offset %d px (%.3f deg), peak %.4f\n", p.best_offset,
                rad_to_deg(pixel_to_angle(p.best_offset, deg_to_rad(cfg.fov_deg),
                                          cfg.image_width)),
                p.peak);
    for (int d = -p.search_range; d <= p.search_range; ++d)
        std::printf("%d,%.6f\n", d, p.value_at(d));
    return 0;
}

int cmd_bench(int reps) {
    const BenchResult b = bench_correction(115, 44, 8, 75, 3, reps);
    std::printf("full correction, %d windows at 115x44, D=75: best %.2f ms, mean %.2f ms\n",
                b.windows, b.best_ms, b.mean_ms);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"teach-and-repeat route following trials"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "flat key=value config file");
    app.add_option("--seed", common.seed, "master seed (noise, sweep seeding)");
    app.add_option("--out", common.out, "output path (route dir, csv file, or sweep dir)");

    std::string world_name = "corridor-loop";
    std::uint64_t world_seed = 17;
    std::string route_dir;
    std::string waypoint_text;
    int init_scan = 8;

    CLI::App* teach = app.add_subcommand("teach", "drive the waypoints and record a route");
    teach->add_option("--world", world_name, "world name");
    teach->add_option("--world-seed", world_seed, "world texture seed");
    teach->add_option("--waypoints", waypoint_text, "x,y;x,y;... (default: world centerline)");

    CLI::App* repeat = app.add_subcommand("repeat", "repeat a taught route once");
    repeat->add_option("--route", route_dir, "route directory")->required();
    repeat->add_option("--world", world_name, "world name");
    repeat->add_option("--world-seed", world_seed, "world texture seed");
    repeat->add_option("--init-scan", init_scan,
                       "keyframes scanned at initialization (0 = whole route)");

    SweepRequest req;
    bool dat = false;
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid of repeat trials");
    sweep->add_option("--route", route_dir, "route directory")->required();
    sweep->add_option("--world", world_name, "world name");
    sweep->add_option("--world-seed", world_seed, "world texture seed");
    sweep->add_option("--axis", req.axis,
                      "odometry_scale | k_theta | k_p | correction_rate | resolution")
        ->required();
    sweep->add_option("--values", req.values, "axis values (resolution as WxH)")
        ->required()
        ->delimiter(',');
    sweep->add_option("--reps", req.repetitions, "repetitions per value");
    sweep->add_option("--jobs", req.jobs, "parallel trials");
    sweep->add_flag("--per-trial", req.per_trial_csv, "write per-trial tick CSVs");
    sweep->add_flag("--dat", dat, "also write gnuplot sweep.dat");

    double fov_deg = 75.0;
    int width = 115;
    CLI::App* transfer = app.add_subcommand("transfer", "adapt a route to a narrower camera");
    transfer->add_option("--route", route_dir, "source route directory")->required();
    transfer->add_option("--fov", fov_deg, "target horizontal fov, degrees");
    transfer->add_option("--width", width, "target image width, pixels");

    std::string ref_path, query_path;
    CLI::App* offset = app.add_subcommand("offset", "print the correlation profile of two PGMs");
    offset->add_option("ref", ref_path, "reference image")->required();
    offset->add_option("query", query_path, "query image")->required();

    int bench_reps = 50;
    CLI::App* bench = app.add_subcommand("bench", "time one full visual correction");
    bench->add_option("--reps", bench_reps, "measurement repetitions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help exits cleanly, usage errors exit 2
    }

    try {
        if (teach->parsed()) {
            if (common.out.empty()) throw ConfigError("teach needs --out <route dir>");
            return cmd_teach(common, world_name, world_seed, waypoint_text);
        }
        if (repeat->parsed())
            return cmd_repeat(common, route_dir, world_name, world_seed, init_scan);
        if (sweep->parsed())
            return cmd_sweep(common, route_dir, world_name, world_seed, req, dat);
        if (transfer->parsed()) {
            if (common.out.empty()) throw ConfigError("transfer needs --out <route dir>");
            return cmd_transfer(common, route_dir, fov_deg, width);
        }
        if (offset->parsed()) return cmd_offset(common, ref_path, query_path);
        if (bench->parsed()) return cmd_bench(bench_reps);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
