// Deterministic planar test world: line-segment walls with procedural 1D
// textures, a raycast strip camera, exact unicycle kinematics, and an
// odometry model with systematic scale corruption and optional seeded noise.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tandem/controller.hpp"
#include "tandem/errors.hpp"
#include "tandem/image.hpp"
#include "tandem/pose2.hpp"

namespace tandem {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

namespace detail {
// Uniform [0, 1) from a hash.
inline double hash_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }
}  // namespace detail

struct Wall {
    double x1, y1, x2, y2;
    std::uint64_t texture_id;

    double length() const { return std::hypot(x2 - x1, y2 - y1); }
};

struct World {
    std::vector<Wall> walls;
    double wall_height = 2.0;       // meters
    double sky_intensity = 205.0;   // base gray levels before lighting
    double floor_intensity = 70.0;
    std::uint64_t seed = 0;
};

struct CameraConfig {
    double fov = deg_to_rad(75.0);
    int image_width = 115;
    int image_height = 44;
    double mount_height = 1.0;   // camera height above the floor
    double max_range = 80.0;
};

struct LightingPerturbation {
    double gain = 1.0;
    double bias = 0.0;
    double shadow_gain = 1.0;  // multiplies the left image half when != 1
};

struct OdometryModel {
    double linear_scale = 1.0;      // systematic multiplier on linear motion
    double linear_noise_std = 0.0;  // std per sqrt-meter travelled
    double angular_noise_std = 0.0; // std per sqrt-radian turned
    std::uint64_t seed = 0;
};

struct SimState {
    Pose2 true_pose;
    Pose2 odom_pose;
    double time = 0.0;
};

// Multi-octave value noise over wall arc-length. Wavelengths are kept long
// enough that heavy downsampling of rendered views retains structure.
inline double wall_texture(std::uint64_t world_seed, std::uint64_t texture_id, double s) {
    constexpr double kWavelength[3] = {3.0, 1.1, 0.45};
    constexpr double kAmplitude[3] = {1.0, 0.55, 0.3};
    constexpr double kTotal = kAmplitude[0] + kAmplitude[1] + kAmplitude[2];
    double value = 0.0;
    for (int o = 0; o < 3; ++o) {
        const double t = s / kWavelength[o];
        const double cell = std::floor(t);
        double f = t - cell;
        f = f * f * (3.0 - 2.0 * f);
        const std::uint64_t base =
            hash_combine(hash_combine(world_seed, texture_id), static_cast<std::uint64_t>(o));
        const auto lattice = static_cast<std::uint64_t>(static_cast<std::int64_t>(cell));
        const double a = detail::hash_unit(hash_combine(base, lattice));
        const double b = detail::hash_unit(hash_combine(base, lattice + 1));
        value += kAmplitude[o] * (a + f * (b - a));
    }
    return value / kTotal;  // in [0, 1)
}

namespace detail {

struct RayHit {
    double distance = std::numeric_limits<double>::infinity();
    double arc_length = 0.0;
    std::uint64_t texture_id = 0;
    bool hit = false;
};

inline RayHit cast_ray(const World& world, double ox, double oy, double bearing,
                       double max_range) {
    const double dx = std::cos(bearing);
    const double dy = std::sin(bearing);
    RayHit best;
    for (const Wall& w : world.walls) {
        const double ex = w.x2 - w.x1;
        const double ey = w.y2 - w.y1;
        const double denom = dx * ey - dy * ex;
        if (std::abs(denom) < 1e-12) continue;  // parallel
        const double qx = w.x1 - ox;
        const double qy = w.y1 - oy;
        const double t = (qx * ey - qy * ex) / denom;   // along the ray
        const double u = (qx * dy - qy * dx) / denom;   // along the wall
        if (t <= 1e-9 || t > max_range || u < 0.0 || u > 1.0) continue;
        if (t < best.distance) {
            best.distance = t;
            best.arc_length = u * w.length();
            best.texture_id = w.texture_id;
            best.hit = true;
        }
    }
    return best;
}

}  // namespace detail

// Bearing of image column c: column 0 looks half an FOV to the left of the
// heading, the last column half an FOV to the right.
inline double column_bearing(const CameraConfig& cam, const Pose2& pose, int column) {
    return pose.theta + cam.fov * (0.5 - (column + 0.5) / cam.image_width);
}

// One ray per column. A wall hit paints a vertical band whose height follows
// a pinhole model (fixed 50 degree vertical FOV), floor below, sky above.
// Deterministic: identical inputs give bit-identical images.
inline RawImage render_view(const World& world, const CameraConfig& cam, const Pose2& pose,
                            const LightingPerturbation& lighting = {}) {
    RawImage img(cam.image_width, cam.image_height, 1);
    const double focal =
        (cam.image_height / 2.0) / std::tan(deg_to_rad(50.0) / 2.0);
    const double horizon = cam.image_height / 2.0;

    for (int c = 0; c < cam.image_width; ++c) {
        const double bearing = column_bearing(cam, pose, c);
        const detail::RayHit hit = detail::cast_ray(world, pose.x, pose.y, bearing,
                                                    cam.max_range);
        double band_top = horizon, band_bottom = horizon;
        double wall_value = 0.0;
        if (hit.hit) {
            wall_value = 40.0 + 175.0 * wall_texture(world.seed, hit.texture_id, hit.arc_length);
            band_top = horizon - focal * (world.wall_height - cam.mount_height) / hit.distance;
            band_bottom = horizon + focal * cam.mount_height / hit.distance;
        }
        const double h = cam.image_height;
        const int y0 = static_cast<int>(std::floor(std::clamp(band_top, 0.0, h)));
        const int y1 = static_cast<int>(std::ceil(std::clamp(band_bottom, 0.0, h)));

        const double column_gain =
            (lighting.shadow_gain != 1.0 && c < cam.image_width / 2)
                ? lighting.gain * lighting.shadow_gain
                : lighting.gain;
        for (int y = 0; y < cam.image_height; ++y) {
            double v = (y < y0) ? world.sky_intensity
                                : (y >= y1 ? world.floor_intensity : wall_value);
            v = v * column_gain + lighting.bias;
            img.at(c, y) =
                static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
        }
    }
    return img;
}

// Owns the true and odometric state of one robot. Noise draws are consumed
// only when the corresponding std and increment are non-zero, so noise-free
// configurations are bit-exact regardless of seed.
class Simulator {
public:
    Simulator(World world, CameraConfig camera, OdometryModel odometry, const Pose2& start)
        : world_(std::move(world)),
          camera_(camera),
          odometry_(odometry),
          rng_(splitmix64(odometry.seed)) {
        state_.true_pose = start;
        state_.odom_pose = start;
    }

    // Start the odometry frame somewhere other than the true pose (models a
    // perturbed repeat start: odometry still believes it is at the origin).
    void set_odom_pose(const Pose2& pose) { state_.odom_pose = pose; }

    const SimState& state() const { return state_; }
    const World& world() const { return world_; }
    const CameraConfig& camera() const { return camera_; }

    RawImage view(const LightingPerturbation& lighting = {}) const {
        return render_view(world_, camera_, state_.true_pose, lighting);
    }

    void step(const VelocityCommand& cmd, double dt) {
        const double ds = cmd.v * dt;
        const double dtheta = cmd.omega * dt;
        state_.true_pose = integrate_arc(state_.true_pose, ds, dtheta);

        double ds_odom = ds * odometry_.linear_scale;
        double dtheta_odom = dtheta;
        if (odometry_.linear_noise_std > 0.0 && ds != 0.0)
            ds_odom += gauss_(rng_) * odometry_.linear_noise_std * std::sqrt(std::abs(ds));
        if (odometry_.angular_noise_std > 0.0 && dtheta != 0.0)
            dtheta_odom += gauss_(rng_) * odometry_.angular_noise_std *
                           std::sqrt(std::abs(dtheta));
        state_.odom_pose = integrate_arc(state_.odom_pose, ds_odom, dtheta_odom);
        state_.time += dt;
    }

    // Closed-form arc motion: straight for zero rotation, circular otherwise.
    static Pose2 integrate_arc(const Pose2& p, double ds, double dtheta) {
        if (std::abs(dtheta) < 1e-12) {
            return {p.x + ds * std::cos(p.theta), p.y + ds * std::sin(p.theta), p.theta};
        }
        const double radius = ds / dtheta;
        const double next = p.theta + dtheta;
        return {p.x + radius * (std::sin(next) - std::sin(p.theta)),
                p.y + radius * (-std::cos(next) + std::cos(p.theta)),
                wrap_angle(next)};
    }

private:
    World world_;
    CameraConfig camera_;
    OdometryModel odometry_;
    SimState state_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

namespace detail {

// Mitered offset of an open polyline, `offset` meters to the left.
inline std::vector<std::pair<double, double>> offset_polyline(
    const std::vector<std::pair<double, double>>& pts, double offset) {
    const std::size_t n = pts.size();
    std::vector<std::pair<double, double>> out(n);
    auto normal = [&](std::size_t i) {
        const double dx = pts[i + 1].first - pts[i].first;
        const double dy = pts[i + 1].second - pts[i].second;
        const double len = std::hypot(dx, dy);
        return std::pair<double, double>{-dy / len, dx / len};
    };
    for (std::size_t i = 0; i < n; ++i) {
        std::pair<double, double> nrm;
        if (i == 0) {
            nrm = normal(0);
        } else if (i == n - 1) {
            nrm = normal(n - 2);
        } else {
            const auto a = normal(i - 1);
            const auto b = normal(i);
            const double dot = a.first * b.first + a.second * b.second;
            nrm = {(a.first + b.first) / (1.0 + dot), (a.second + b.second) / (1.0 + dot)};
        }
        out[i] = {pts[i].first + offset * nrm.first, pts[i].second + offset * nrm.second};
    }
    return out;
}

inline void add_polyline_walls(World& world, const std::vector<std::pair<double, double>>& pts,
                               bool closed, std::uint64_t& next_id) {
    const std::size_t n = pts.size();
    const std::size_t segments = closed ? n : n - 1;
    for (std::size_t i = 0; i < segments; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % n];
        world.walls.push_back({a.first, a.second, b.first, b.second, next_id++});
    }
}

}  // namespace detail

// Deterministic worlds. The centerline returned by world_route is the
// intended teach trajectory for each of them.
inline World build_world(const std::string& name, std::uint64_t seed) {
    World world;
    world.seed = seed;
    std::uint64_t id = 1;

    if (name == "corridor-loop") {
        // rectangular loop, corridor width 2 m around the centerline
        detail::add_polyline_walls(world, {{-1, -1}, {13, -1}, {13, 7}, {-1, 7}}, true, id);
        detail::add_polyline_walls(world, {{1, 1}, {11, 1}, {11, 5}, {1, 5}}, true, id);
    } else if (name == "L-corridor") {
        const std::vector<std::pair<double, double>> center = {{0, 0}, {8, 0}, {8, 6}};
        detail::add_polyline_walls(world, detail::offset_polyline(center, 1.0), false, id);
        detail::add_polyline_walls(world, detail::offset_polyline(center, -1.0), false, id);
    } else if (name == "open-sparse") {
        // distant box only: few nearby features
        detail::add_polyline_walls(world, {{-30, -30}, {30, -30}, {30, 30}, {-30, 30}}, true,
                                   id);
    } else if (name == "long-campus") {
        // ~240 m snake, corridor width 3 m
        const std::vector<std::pair<double, double>> center = {
            {0, 0},  {40, 0},  {40, 10}, {0, 10},  {0, 20},
            {40, 20}, {40, 30}, {0, 30},  {0, 40},  {40, 40}};
        detail::add_polyline_walls(world, detail::offset_polyline(center, 1.5), false, id);
        detail::add_polyline_walls(world, detail::offset_polyline(center, -1.5), false, id);
    } else {
        throw UnknownWorld("build_world: '" + name + "'");
    }
    return world;
}

// Teach waypoints matching each world's corridor centerline.
inline std::vector<std::pair<double, double>> world_route(const std::string& name) {
    if (name == "corridor-loop")
        return {{0, 0}, {12, 0}, {12, 6}, {0, 6}, {0, 0}};
    if (name == "L-corridor") return {{0, 0}, {8, 0}, {8, 6}};
    if (name == "open-sparse") return {{-8, 0}, {8, 0}};
    if (name == "long-campus")
        return {{0, 0},  {40, 0},  {40, 10}, {0, 10},  {0, 20},
                {40, 20}, {40, 30}, {0, 30},  {0, 40},  {40, 40}};
    throw UnknownWorld("world_route: '" + name + "'");
}

}  // namespace tandem
