// Experiment harness: scripted teach runs, closed-loop repeat trials with
// crash/stall detection, parameter sweeps with per-trial seeding, and the
// CSV/dat outputs the CLI exposes.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "tandem/config.hpp"
#include "tandem/controller.hpp"
#include "tandem/metrics.hpp"
#include "tandem/route.hpp"
#include "tandem/sim.hpp"

namespace tandem {

enum class TrialResult { Success, Crash, Stall, NotStarted };

inline const char* to_string(TrialResult r) {
    switch (r) {
        case TrialResult::Success: return "success";
        case TrialResult::Crash: return "crash";
        case TrialResult::Stall: return "stall";
        case TrialResult::NotStarted: return "not_on_route";
    }
    return "?";
}

struct TickRecord {
    double t;
    Pose2 true_pose;
    Pose2 odom_pose;
    int goal_index;
    double u;
    double d_theta;
    double d_p;
    double lateral;
    double along_path;
};

struct TrialSummary {
    TrialResult result = TrialResult::NotStarted;
    double mean_abs_lateral = 0.0;
    double max_abs_lateral = 0.0;
    double mean_abs_along = 0.0;
    double duration = 0.0;
    int final_goal_index = 0;
};

struct TrialSetup {
    ControllerGains gains;
    CorrectionGains corrections;
    int proc_width = 115, proc_height = 44, patch_size = 8, search_px = 75;
    double control_dt = 0.02;
    OdometryModel odometry;
    LightingPerturbation lighting;
    Pose2 start_perturbation;  // expressed in the frame of the route start
    double crash_lateral = 1.0;
    double stall_timeout = 30.0;
    double time_limit = 600.0;
    double init_threshold = 0.3;
    // Trials start near the route head, so initialization only considers the
    // leading keyframes instead of the whole (possibly self-similar) map.
    int init_scan = 8;
};

inline TrialSetup make_trial_setup(const Config& cfg, std::uint64_t seed) {
    TrialSetup ts;
    ts.gains = cfg.controller_gains();
    ts.corrections = cfg.correction_gains();
    ts.proc_width = cfg.image_width;
    ts.proc_height = cfg.image_height;
    ts.patch_size = cfg.patch_size;
    ts.search_px = cfg.ncc_search_px;
    ts.control_dt = 1.0 / cfg.control_rate_hz;
    ts.odometry = OdometryModel{cfg.odom_scale, cfg.odom_linear_noise, cfg.odom_angular_noise,
                                seed};
    ts.lighting = LightingPerturbation{cfg.lighting_gain, cfg.lighting_bias,
                                       cfg.lighting_shadow};
    ts.start_perturbation =
        Pose2(cfg.start_along_m, cfg.start_lateral_m, deg_to_rad(cfg.start_heading_deg));
    ts.crash_lateral = cfg.crash_lateral_m;
    ts.stall_timeout = cfg.stall_timeout_s;
    ts.time_limit = cfg.time_limit_s;
    ts.init_threshold = cfg.init_threshold;
    return ts;
}

// The repeat camera always renders at the route's stored resolution; any
// working-resolution change happens in preprocessing.
inline CameraConfig camera_for(const RecordingParams& p) {
    CameraConfig cam;
    cam.fov = p.fov;
    cam.image_width = p.image_width;
    cam.image_height = p.image_height;
    return cam;
}

// Drives the simulated robot through the waypoints with the pose controller
// (clean odometry; control runs on the true pose) while the recorder watches
// the true pose. A final keyframe is forced at the stop pose.
inline Route teach_route(const World& world, const std::vector<std::pair<double, double>>& waypoints,
                         const RecordingParams& params, const ControllerGains& gains,
                         double dt = 0.02) {
    if (waypoints.size() < 2)
        throw UnreachableWaypoint("teach_route: need at least 2 waypoints");

    const double heading0 = std::atan2(waypoints[1].second - waypoints[0].second,
                                       waypoints[1].first - waypoints[0].first);
    const Pose2 start(waypoints[0].first, waypoints[0].second, heading0);
    Simulator sim(world, camera_for(params), OdometryModel{}, start);
    RouteRecorder recorder(params);
    recorder.update(sim.state().true_pose, sim.view());

    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double heading = std::atan2(waypoints[i].second - waypoints[i - 1].second,
                                          waypoints[i].first - waypoints[i - 1].first);
        const Pose2 goal(waypoints[i].first, waypoints[i].second, heading);
        const double budget =
            3.0 * position_distance(sim.state().true_pose, goal) / gains.v_max + 20.0;
        const double t0 = sim.state().time;
        while (position_distance(sim.state().true_pose, goal) > 0.05) {
            sim.step(pose_control_step(sim.state().true_pose, goal, gains), dt);
            if (recorder.due(sim.state().true_pose))
                recorder.update(sim.state().true_pose, sim.view());
            if (sim.state().time - t0 > budget)
                throw UnreachableWaypoint("teach_route: waypoint " + std::to_string(i) +
                                          " not reached");
        }
    }
    recorder.force_final(sim.state().true_pose, sim.view());
    return recorder.take();
}

// Closed-loop repeat until the route finishes, the robot leaves the corridor
// (crash), or progress stops (stall). The perturbed start applies to the true
// pose only: odometry still believes it is at the route start.
inline TrialSummary run_repeat_trial(const Route& route, const World& world,
                                     const TrialSetup& ts,
                                     std::vector<TickRecord>* log = nullptr) {
    const Pose2 start = route.keyframes.front().pose;
    Simulator sim(world, camera_for(route.params), ts.odometry,
                  compose(start, ts.start_perturbation));
    sim.set_odom_pose(start);

    RepeatController ctrl(route, ts.gains, ts.corrections);
    if (ts.proc_width != route.params.image_width ||
        ts.proc_height != route.params.image_height ||
        ts.patch_size != route.params.patch_size || ts.search_px != route.params.search_range)
        ctrl.set_processing(ts.proc_width, ts.proc_height, ts.patch_size, ts.search_px);

    TeachPath path(route);
    TrialSummary summary;
    try {
        ctrl.global_initialize(sim.view(ts.lighting), sim.state().odom_pose,
                               ts.init_threshold, ts.init_scan);
    } catch (const NotOnRoute&) {
        summary.result = TrialResult::NotStarted;
        return summary;
    }

    double last_image_time = -1e18;
    double last_advance_time = 0.0;
    int last_goal = ctrl.state().goal_index;
    double sum_lat = 0.0, sum_along = 0.0, max_lat = 0.0;
    std::size_t ticks = 0;

    TrialResult result = TrialResult::Stall;
    while (true) {
        const double now = sim.state().time;
        if (now > ts.time_limit) break;

        RawImage image;
        bool has_image = false;
        if (now - last_image_time >= ts.corrections.correction_period - 1e-9) {
            image = sim.view(ts.lighting);
            has_image = true;
            last_image_time = now;
        }

        const VelocityCommand cmd =
            ctrl.repeat_tick(sim.state().odom_pose, has_image ? &image : nullptr, now);
        sim.step(cmd, ts.control_dt);

        const double u = ctrl.progress_u(sim.state().odom_pose);
        const PathMetrics m =
            compute_metrics(sim.state().true_pose, path, ctrl.state().goal_index, u);
        sum_lat += std::abs(m.lateral);
        sum_along += std::abs(m.along_path);
        max_lat = std::max(max_lat, std::abs(m.lateral));
        ++ticks;
        if (log)
            log->push_back(TickRecord{sim.state().time, sim.state().true_pose,
                                      sim.state().odom_pose, ctrl.state().goal_index, u,
                                      ctrl.last_d_theta(), ctrl.last_d_p(), m.lateral,
                                      m.along_path});

        if (ctrl.state().goal_index != last_goal) {
            last_goal = ctrl.state().goal_index;
            last_advance_time = sim.state().time;
        }
        if (std::abs(m.lateral) > ts.crash_lateral) {
            result = TrialResult::Crash;
            break;
        }
        if (ctrl.state().finished) {
            result = TrialResult::Success;
            break;
        }
        if (sim.state().time - last_advance_time > ts.stall_timeout) break;
    }

    summary.result = result;
    summary.duration = sim.state().time;
    summary.final_goal_index = ctrl.state().goal_index;
    if (ticks > 0) {
        summary.mean_abs_lateral = sum_lat / static_cast<double>(ticks);
        summary.mean_abs_along = sum_along / static_cast<double>(ticks);
        summary.max_abs_lateral = max_lat;
    }
    return summary;
}

inline void write_trial_csv(const std::filesystem::path& path,
                            const std::vector<TickRecord>& ticks) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_trial_csv: cannot open " + path.string());
    out << "t,true_x,true_y,true_theta,odom_x,odom_y,odom_theta,goal_index,u,d_theta,d_p,"
           "lat_err,path_err\n";
    char line[512];
    for (const TickRecord& r : ticks) {
        std::snprintf(line, sizeof(line),
                      "%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.t,
                      r.true_pose.x, r.true_pose.y, r.true_pose.theta, r.odom_pose.x,
                      r.odom_pose.y, r.odom_pose.theta, r.goal_index, r.u, r.d_theta, r.d_p,
                      r.lateral, r.along_path);
        out << line;
    }
    if (!out) throw IoError("write_trial_csv: write failed " + path.string());
}

// Axis values are strings so resolution entries like 23x8 ride along with
// numeric gains. Applying a value rewrites the config; the search range
// follows a resolution change proportionally.
inline void apply_axis_value(Config& cfg, const std::string& axis, const std::string& value) {
    try {
        if (axis == "odometry_scale") {
            cfg.odom_scale = std::stod(value);
        } else if (axis == "k_theta") {
            cfg.k_theta = std::stod(value);
        } else if (axis == "k_p") {
            cfg.k_p = std::stod(value);
        } else if (axis == "correction_rate") {
            cfg.correction_rate_hz = std::stod(value);
        } else if (axis == "resolution") {
            const std::size_t x = value.find('x');
            if (x == std::string::npos) throw ConfigError("resolution needs WxH: " + value);
            const int w = std::stoi(value.substr(0, x));
            const int h = std::stoi(value.substr(x + 1));
            if (w < 1 || h < 1) throw ConfigError("bad resolution: " + value);
            cfg.ncc_search_px = std::clamp(
                static_cast<int>(std::lround(cfg.ncc_search_px * static_cast<double>(w) /
                                             cfg.image_width)),
                1, w - 1);
            cfg.image_width = w;
            cfg.image_height = h;
        } else {
            throw ConfigError("unknown sweep axis '" + axis + "'");
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad value '" + value + "' for axis " + axis);
    } catch (const std::out_of_range&) {
        throw ConfigError("bad value '" + value + "' for axis " + axis);
    }
}

inline std::uint64_t trial_seed(std::uint64_t master, const std::string& axis,
                                std::size_t value_index, std::size_t rep) {
    std::uint64_t h = splitmix64(master);
    for (const char ch : axis) h = hash_combine(h, static_cast<unsigned char>(ch));
    h = hash_combine(h, value_index);
    return hash_combine(h, rep);
}

struct SweepRequest {
    std::string axis;
    std::vector<std::string> values;
    int repetitions = 5;
    std::uint64_t master_seed = 1;
    std::filesystem::path out_dir;  // empty: keep everything in memory
    bool per_trial_csv = false;
    int jobs = 1;
};

struct SweepRow {
    std::string value;
    int successes = 0;
    int total = 0;
    double mean_lateral = 0.0;   // mean over trials of per-trial mean |lateral|
    double max_lateral = 0.0;
    double mean_abs_along = 0.0;
};

// Runs the trial grid. Trials are independent; with jobs > 1 they run on a
// small thread pool, and results are aggregated in index order so the output
// never depends on scheduling.
inline std::vector<SweepRow> run_sweep(const Route& route, const World& world,
                                       const Config& base, const SweepRequest& req) {
    const std::size_t reps = static_cast<std::size_t>(req.repetitions);
    const std::size_t total = req.values.size() * reps;
    std::vector<TrialSummary> results(total);

    auto run_one = [&](std::size_t index) {
        const std::size_t vi = index / reps;
        const std::size_t rep = index % reps;
        Config cfg = base;
        apply_axis_value(cfg, req.axis, req.values[vi]);
        const TrialSetup ts = make_trial_setup(cfg, trial_seed(req.master_seed, req.axis, vi, rep));
        std::vector<TickRecord> log;
        std::vector<TickRecord>* log_ptr = req.per_trial_csv ? &log : nullptr;
        results[index] = run_repeat_trial(route, world, ts, log_ptr);
        if (req.per_trial_csv && !req.out_dir.empty()) {
            const std::string name = "trial_" + req.axis + "_" + req.values[vi] + "_r" +
                                     std::to_string(rep) + ".csv";
            write_trial_csv(req.out_dir / name, log);
        }
    };

    if (req.jobs <= 1) {
        for (std::size_t i = 0; i < total; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) run_one(i);
        };
        std::vector<std::thread> pool;
        const int n = std::min<int>(req.jobs, static_cast<int>(total));
        pool.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::vector<SweepRow> rows;
    rows.reserve(req.values.size());
    for (std::size_t vi = 0; vi < req.values.size(); ++vi) {
        SweepRow row;
        row.value = req.values[vi];
        row.total = static_cast<int>(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            const TrialSummary& s = results[vi * reps + r];
            if (s.result == TrialResult::Success) ++row.successes;
            row.mean_lateral += s.mean_abs_lateral;
            row.mean_abs_along += s.mean_abs_along;
            row.max_lateral = std::max(row.max_lateral, s.max_abs_lateral);
        }
        row.mean_lateral /= static_cast<double>(reps);
        row.mean_abs_along /= static_cast<double>(reps);
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(const std::filesystem::path& path, const std::string& axis,
                            const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_sweep_csv: cannot open " + path.string());
    out << "axis,value,successes,total,mean_lateral,max_lateral,mean_abs_along\n";
    char line[256];
    for (const SweepRow& r : rows) {
        std::snprintf(line, sizeof(line), "%s,%s,%d,%d,%.6f,%.6f,%.6f\n", axis.c_str(),
                      r.value.c_str(), r.successes, r.total, r.mean_lateral, r.max_lateral,
                      r.mean_abs_along);
        out << line;
    }
    if (!out) throw IoError("write_sweep_csv: write failed " + path.string());
}

// gnuplot-friendly: value, success rate, mean lateral error.
inline void write_sweep_dat(const std::filesystem::path& path,
                            const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_sweep_dat: cannot open " + path.string());
    out << "# value success_rate mean_lateral\n";
    char line[256];
    for (const SweepRow& r : rows) {
        std::snprintf(line, sizeof(line), "%s %.4f %.6f\n", r.value.c_str(),
                      static_cast<double>(r.successes) / r.total, r.mean_lateral);
        out << line;
    }
}

struct BenchResult {
    double best_ms = 0.0;
    double mean_ms = 0.0;
    int windows = 0;
};

// Times one full visual correction: preprocessing a query frame plus NCC
// against the whole search window.
inline BenchResult bench_correction(int width = 115, int height = 44, int patch = 8,
                                    int search_px = 75, int k_window = 3, int reps = 50) {
    const int windows = 2 * (k_window + 1);  // k in [-(K+1), K]
    std::vector<ProcessedImage> refs;
    RawImage query_raw(width, height, 1);
    for (int w = 0; w <= windows; ++w) {
        RawImage raw(width, height, 1);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const std::uint64_t h =
                    hash_combine(hash_combine(static_cast<std::uint64_t>(w), y), x);
                raw.at(x, y) = static_cast<std::uint8_t>(40 + (h % 176));
            }
        if (w == windows) query_raw = raw;
        else refs.push_back(preprocess(raw, width, height, patch));
    }

    using clock = std::chrono::steady_clock;
    double best = 1e18, sum = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clock::now();
        const ProcessedImage query = preprocess(query_raw, width, height, patch);
        double sink = 0.0;
        for (const ProcessedImage& ref : refs) {
            CorrelationProfile p = ncc_profile(ref, query, search_px);
            sink += p.peak;
        }
        const auto t1 = clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        best = std::min(best, ms);
        sum += ms;
        if (sink == -1e300) std::abort();  // keep the work observable
    }
    return BenchResult{best, sum / reps, windows};
}

}  // namespace tandem
