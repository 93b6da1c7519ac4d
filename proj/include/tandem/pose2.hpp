#pragma once

#include <cmath>
#include <numbers>

#include "tandem/errors.hpp"

namespace tandem {

inline constexpr double kPi = std::numbers::pi;

// Segments shorter than this are treated as pure rotations (interpolation
// along them is undefined).
inline constexpr double kSegmentEpsilon = 1e-6;

// Normalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);  // lands in [-pi, pi]
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Planar rigid-body pose. Behaves like the 3x3 homogeneous SE(2) matrix
/// [R(theta) t; 0 1]; theta is kept in (-pi, pi].
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose2() = default;
    Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

    static Pose2 identity() { return {}; }
    static Pose2 rotation(double angle) { return {0.0, 0.0, angle}; }
    static Pose2 translation(double tx, double ty) { return {tx, ty, 0.0}; }
};

// a * b as homogeneous matrices: apply b in the frame of a.
inline Pose2 compose(const Pose2& a, const Pose2& b) {
    const double c = std::cos(a.theta);
    const double s = std::sin(a.theta);
    return {a.x + c * b.x - s * b.y,
            a.y + s * b.x + c * b.y,
            wrap_angle(a.theta + b.theta)};
}

inline Pose2 inverse(const Pose2& p) {
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    return {-c * p.x - s * p.y,
             s * p.x - c * p.y,
            wrap_angle(-p.theta)};
}

// Pose of b expressed in the frame of a: inverse(a) * b.
inline Pose2 relative(const Pose2& a, const Pose2& b) {
    return compose(inverse(a), b);
}

// Maps a point given in the frame of p into the parent frame.
inline void transform_point(const Pose2& p, double px, double py, double& ox, double& oy) {
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    ox = p.x + c * px - s * py;
    oy = p.y + s * px + c * py;
}

inline double position_distance(const Pose2& a, const Pose2& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

inline double heading_difference(const Pose2& a, const Pose2& b) {
    return wrap_angle(b.theta - a.theta);
}

/// Rotates `target` by `angle` about the position of `pivot`:
/// pivot * Rot(angle) * inverse(pivot) * target. The pivot's own heading
/// cancels out, so only its position matters. Preserves the distance from
/// the pivot to the target.
inline Pose2 rotate_about_point(const Pose2& target, const Pose2& pivot, double angle) {
    return compose(pivot, compose(Pose2::rotation(angle),
                                  compose(inverse(pivot), target)));
}

/// Scalar projection of (robot - prev_goal) onto (cur_goal - prev_goal),
/// normalized by the squared segment length: 0 at prev_goal, 1 at cur_goal,
/// outside [0, 1] beyond the segment. Only positions matter.
/// Throws DegenerateSegment when the goals are closer than kSegmentEpsilon.
inline double interpolation_factor(const Pose2& prev_goal, const Pose2& cur_goal,
                                   const Pose2& robot) {
    const double sx = cur_goal.x - prev_goal.x;
    const double sy = cur_goal.y - prev_goal.y;
    const double len_sq = sx * sx + sy * sy;
    if (len_sq < kSegmentEpsilon * kSegmentEpsilon) {
        throw DegenerateSegment("interpolation segment shorter than epsilon");
    }
    const double rx = robot.x - prev_goal.x;
    const double ry = robot.y - prev_goal.y;
    return (sx * rx + sy * ry) / len_sq;
}

}  // namespace tandem
