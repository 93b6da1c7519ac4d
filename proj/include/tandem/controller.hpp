// Repeat-phase control: a polar pose controller running at the control
// rate, with decoupled lower-rate visual corrections that rotate and slide
// the current goal, plus goal advancement and global initialization.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tandem/errors.hpp"
#include "tandem/image.hpp"
#include "tandem/ncc.hpp"
#include "tandem/pose2.hpp"
#include "tandem/route.hpp"

namespace tandem {

struct VelocityCommand {
    double v = 0.0;      // m/s, forward only
    double omega = 0.0;  // rad/s
};

struct ControllerGains {
    // Stability needs k_rho > 0, k_beta < 0, k_alpha > k_rho.
    double k_rho = 1.0;
    double k_alpha = 4.0;
    double k_beta = -1.5;
    double v_max = 0.4;
    double omega_max = 1.5;
};

struct CorrectionGains {
    double k_theta = 0.01;
    double k_p = 0.01;
    int k_window = 3;             // K: half-width of the along-path search window
    double rho_bar = 0.1;         // correlation noise floor
    double correction_period = 0.1;  // seconds between visual corrections
    bool eq8_literal = false;     // see along-path correction
};

struct OffsetEntry {
    int delta_px = 0;
    double angle = 0.0;  // delta_px converted through the camera model
    double peak = 0.0;
};

// Velocity toward a goal pose using the polar-coordinates controller:
// rho = distance, alpha = bearing to the goal in the robot frame,
// beta = -theta_goal_in_robot_frame - alpha. Forward-only: a goal behind
// the robot re-wraps alpha so the robot turns around rather than reversing.
inline VelocityCommand pose_control_step(const Pose2& robot, const Pose2& goal,
                                         const ControllerGains& g) {
    const Pose2 rel = relative(robot, goal);
    const double rho = std::hypot(rel.x, rel.y);

    VelocityCommand cmd;
    if (rho < 1e-3) {
        // On top of the goal: align heading in place.
        cmd.v = 0.0;
        cmd.omega = std::clamp(g.k_alpha * rel.theta, -g.omega_max, g.omega_max);
        return cmd;
    }

    double alpha = wrap_angle(std::atan2(rel.y, rel.x));
    if (alpha > kPi / 2) alpha -= kPi;      // goal behind: target it while
    else if (alpha < -kPi / 2) alpha += kPi;  // turning, never drive backward
    const double beta = wrap_angle(-rel.theta - alpha);

    cmd.v = std::clamp(g.k_rho * rho, 0.0, g.v_max);
    cmd.omega = std::clamp(g.k_alpha * alpha + g.k_beta * beta, -g.omega_max, g.omega_max);
    return cmd;
}

// Along-path window for goal index n of an N-keyframe route: keyframe
// offsets k in [-(K_eff+1), K_eff] with K_eff = min(K, n-1, N-1-n), so the
// window always covers the previous and current goal images and never
// leaves the route.
struct SearchWindow {
    int k_eff = 0;
    int k_min = -1;
    int k_max = 0;
};

inline SearchWindow search_window(int n, int N, int K) {
    SearchWindow w;
    w.k_eff = std::max(0, std::min({K, n - 1, N - 1 - n}));
    w.k_min = -(w.k_eff + 1);
    w.k_max = w.k_eff;
    return w;
}

struct RepeatState {
    int goal_index = 1;        // n: index of the keyframe currently chased
    Pose2 prev_goal_pose;      // goal n-1 as last seen in the repeat odometry frame
    Pose2 cur_goal_pose;
    std::map<int, OffsetEntry> last_offsets;  // keyframe index -> latest match
    bool finished = false;
};

class RepeatController {
public:
    RepeatController(const Route& route, ControllerGains gains, CorrectionGains corrections)
        : route_(&route), gains_(gains), corr_(corrections) {
        proc_width_ = route.params.image_width;
        proc_height_ = route.params.image_height;
        patch_size_ = route.params.patch_size;
        search_px_ = route.params.search_range;
        fov_ = route.params.fov;
        rebuild_processed();
    }

    // Re-preprocesses every route image at a different working resolution;
    // lets one recording serve resolution studies. The search range is given
    // in working-resolution pixels.
    void set_processing(int width, int height, int patch, int search_px) {
        proc_width_ = width;
        proc_height_ = height;
        patch_size_ = patch;
        search_px_ = std::clamp(search_px, 1, width - 1);
        rebuild_processed();
    }

    const Route& route() const { return *route_; }
    const RepeatState& state() const { return state_; }
    RepeatState& state() { return state_; }
    int processed_width() const { return proc_width_; }
    int search_px() const { return search_px_; }

    // Matches the query against every keyframe and seeds the repeat state at
    // the best one. The caller supplies the current odometry pose so goals
    // can be expressed in the repeat odometry frame.
    // scan_limit > 0 restricts the candidates to the leading keyframes. A
    // whole-map scan aliases badly in self-similar corridors, so callers that
    // know the robot stands near the start should pass a small prefix.
    int global_initialize(const RawImage& query_raw, const Pose2& odom_pose,
                          double init_threshold, int scan_limit = 0) {
        const ProcessedImage query = preprocess_query(query_raw);
        const int N = static_cast<int>(route_->size());
        const int limit = scan_limit > 0 ? std::min(N, scan_limit) : N;
        int best_index = 0;
        double best_peak = -2.0;
        for (int i = 0; i < limit; ++i) {
            CorrelationProfile p = ncc_profile(processed_[static_cast<std::size_t>(i)], query,
                                               search_px_);
            if (p.peak > best_peak) {
                best_peak = p.peak;
                best_index = i;
            }
        }
        if (best_peak < init_threshold)
            throw NotOnRoute("global_initialize: best correlation " + std::to_string(best_peak) +
                             " below threshold " + std::to_string(init_threshold));

        state_ = RepeatState{};
        state_.goal_index = std::min(best_index + 1, N - 1);
        const int prev = state_.goal_index - 1;
        // Place the goal chain in the odometry frame as if the robot stood
        // exactly on keyframe prev.
        state_.prev_goal_pose = odom_pose;
        state_.cur_goal_pose =
            compose(odom_pose, relative(route_->keyframes[static_cast<std::size_t>(prev)].pose,
                                        route_->keyframes[static_cast<std::size_t>(state_.goal_index)].pose));
        last_correction_time_ = -1e18;
        initialized_ = true;
        return best_index;
    }

    // Correlates the query against the whole search window around the
    // current goal; records the k=-1 and k=0 offsets for the orientation
    // correction.
    std::map<int, CorrelationProfile> estimate_offsets(const ProcessedImage& query) {
        const int N = static_cast<int>(route_->size());
        const SearchWindow w = search_window(state_.goal_index, N, corr_.k_window);
        std::map<int, CorrelationProfile> profiles;
        for (int k = w.k_min; k <= w.k_max; ++k) {
            const int idx = state_.goal_index + k;
            CorrelationProfile p =
                ncc_profile(processed_[static_cast<std::size_t>(idx)], query, search_px_);
            if (k == -1 || k == 0) {
                state_.last_offsets[idx] = OffsetEntry{
                    p.best_offset, pixel_to_angle(p.best_offset, fov_, proc_width_), p.peak};
            }
            profiles.emplace(k, std::move(p));
        }
        return profiles;
    }

    // Rotates the current goal about the robot against the interpolated
    // visual heading offset. Distance to the goal is preserved.
    void apply_orientation_correction(const Pose2& robot) {
        if (corr_.k_theta == 0.0) return;
        const auto prev_it = state_.last_offsets.find(state_.goal_index - 1);
        const auto cur_it = state_.last_offsets.find(state_.goal_index);
        if (prev_it == state_.last_offsets.end() || cur_it == state_.last_offsets.end()) return;
        if (prev_it->second.peak < corr_.rho_bar || cur_it->second.peak < corr_.rho_bar) return;

        double u;
        try {
            u = interpolation_factor(state_.prev_goal_pose, state_.cur_goal_pose, robot);
        } catch (const DegenerateSegment&) {
            return;
        }
        u = std::clamp(u, 0.0, 1.0);
        double d_theta = (1.0 - u) * prev_it->second.angle + u * cur_it->second.angle;
        d_theta = std::clamp(d_theta, -fov_ / 2.0, fov_ / 2.0);
        if (d_theta == 0.0) return;
        last_d_theta_ = d_theta;
        state_.cur_goal_pose =
            rotate_about_point(state_.cur_goal_pose, robot, -corr_.k_theta * d_theta);
    }

    // Slides the current goal along the robot->goal ray according to where
    // the correlation mass sits relative to the odometric progress estimate.
    void apply_along_path_correction(const Pose2& robot,
                                     const std::map<int, CorrelationProfile>& profiles) {
        if (corr_.k_p == 0.0) return;

        double mass = 0.0, moment = 0.0;
        for (const auto& [k, profile] : profiles) {
            const double rho = std::max(0.0, profile.peak - corr_.rho_bar);
            mass += rho;
            moment += k * rho;
        }
        if (mass < 1e-9) return;
        const double v_hat = moment / mass;

        double u;
        try {
            u = interpolation_factor(state_.prev_goal_pose, state_.cur_goal_pose, robot);
        } catch (const DegenerateSegment&) {
            return;
        }
        u = std::clamp(u, 0.0, 1.0);
        // The previous goal sits at k=-1 and the current goal at k=0, so the
        // odometric estimate lands at u-1 on the k axis. The literal flag
        // keeps the uncentred form for comparison.
        const double d_p = corr_.eq8_literal ? (v_hat - u) : (v_hat - (u - 1.0));
        if (d_p == 0.0) return;

        const double dx = state_.cur_goal_pose.x - robot.x;
        const double dy = state_.cur_goal_pose.y - robot.y;
        const double dist = std::hypot(dx, dy);
        if (dist < 1e-3) return;
        const double s =
            std::max(0.0, (dist - corr_.k_p * d_p * route_->params.tau_d) / dist);
        last_d_p_ = d_p;
        state_.cur_goal_pose.x = robot.x + s * dx;
        state_.cur_goal_pose.y = robot.y + s * dy;
    }

    // Switches to the next goal once the robot is on top of the current one
    // or odometrically past it. Keyframe pairs closer than 1 mm are treated
    // as pure rotations and switch on heading alignment instead.
    bool advance_goal(const Pose2& robot) {
        if (state_.finished) return false;
        const int N = static_cast<int>(route_->size());
        bool advanced = false;
        while (!state_.finished) {
            const std::size_t n = static_cast<std::size_t>(state_.goal_index);
            const Pose2& teach_prev = route_->keyframes[n - 1].pose;
            const Pose2& teach_cur = route_->keyframes[n].pose;

            bool reached;
            if (position_distance(teach_prev, teach_cur) < 1e-3) {
                reached = std::abs(heading_difference(robot, state_.cur_goal_pose)) <
                          deg_to_rad(5.0);
            } else {
                const double dist = position_distance(robot, state_.cur_goal_pose);
                reached = dist < 0.25 * route_->params.tau_d;
                if (!reached) {
                    try {
                        reached = interpolation_factor(state_.prev_goal_pose,
                                                       state_.cur_goal_pose, robot) >= 1.0;
                    } catch (const DegenerateSegment&) {
                        reached = true;  // corrections collapsed the segment
                    }
                }
            }
            if (!reached) break;

            advanced = true;
            if (state_.goal_index + 1 > N - 1) {
                state_.finished = true;
                break;
            }
            const Pose2 step = relative(route_->keyframes[n].pose, route_->keyframes[n + 1].pose);
            state_.prev_goal_pose = state_.cur_goal_pose;
            state_.cur_goal_pose = compose(state_.cur_goal_pose, step);
            state_.goal_index += 1;
        }
        return advanced;
    }

    // One control tick. Runs the pose controller every call; when an image
    // is supplied and the correction period has elapsed, runs the full
    // correction pipeline first. Degrades to pure odometry following when
    // images never arrive.
    VelocityCommand repeat_tick(const Pose2& odom_pose, const RawImage* image, double now) {
        if (!initialized_) throw Error("repeat_tick: not initialized");
        if (state_.finished) return VelocityCommand{};

        if (image != nullptr && now - last_correction_time_ >= corr_.correction_period) {
            last_correction_time_ = now;
            try {
                const ProcessedImage query = preprocess_query(*image);
                auto profiles = estimate_offsets(query);
                apply_orientation_correction(odom_pose);
                apply_along_path_correction(odom_pose, profiles);
            } catch (const Error&) {
                // a failed correction never interrupts control
            }
        }

        advance_goal(odom_pose);
        if (state_.finished) return VelocityCommand{};
        return pose_control_step(odom_pose, state_.cur_goal_pose, gains_);
    }

    double last_d_theta() const { return last_d_theta_; }
    double last_d_p() const { return last_d_p_; }

    // Interpolation factor of the robot between the goal pair, for logging.
    double progress_u(const Pose2& robot) const {
        try {
            return interpolation_factor(state_.prev_goal_pose, state_.cur_goal_pose, robot);
        } catch (const DegenerateSegment&) {
            return 1.0;
        }
    }

    ProcessedImage preprocess_query(const RawImage& raw) const {
        return preprocess(raw, proc_width_, proc_height_, patch_size_);
    }

private:
    void rebuild_processed() {
        processed_.clear();
        processed_.reserve(route_->size());
        for (const Keyframe& kf : route_->keyframes)
            processed_.push_back(
                preprocess(kf.raw_image, proc_width_, proc_height_, patch_size_));
    }

    const Route* route_;
    ControllerGains gains_;
    CorrectionGains corr_;
    std::vector<ProcessedImage> processed_;
    int proc_width_, proc_height_, patch_size_, search_px_;
    double fov_;
    RepeatState state_;
    bool initialized_ = false;
    double last_correction_time_ = -1e18;
    double last_d_theta_ = 0.0;
    double last_d_p_ = 0.0;
};

}  // namespace tandem
