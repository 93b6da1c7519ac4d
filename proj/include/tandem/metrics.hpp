// Error metrics against the taught path: signed lateral deviation and the
// difference between believed and actual progress along the route.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "tandem/pose2.hpp"
#include "tandem/route.hpp"

namespace tandem {

// Keyframe positions as a polyline with cumulative arc length.
class TeachPath {
public:
    explicit TeachPath(const Route& route) {
        points_.reserve(route.size());
        for (const Keyframe& kf : route.keyframes) points_.push_back({kf.pose.x, kf.pose.y});
        init();
    }

    explicit TeachPath(std::vector<std::pair<double, double>> points)
        : points_(std::move(points)) {
        init();
    }

    double total_length() const { return cumulative_.back(); }
    double arc_length_at(std::size_t index) const { return cumulative_[index]; }
    bool closed() const { return closed_; }

    // Nearest point on the polyline. Returns {signed lateral distance
    // (positive left of the path direction), arc length of the projection}.
    std::pair<double, double> project(double x, double y) const {
        double best_d2 = std::numeric_limits<double>::infinity();
        double best_lateral = 0.0, best_arc = 0.0;
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            const double ax = points_[i].first, ay = points_[i].second;
            const double bx = points_[i + 1].first, by = points_[i + 1].second;
            const double ex = bx - ax, ey = by - ay;
            const double len2 = ex * ex + ey * ey;
            if (len2 < 1e-18) continue;
            const double t = std::clamp(((x - ax) * ex + (y - ay) * ey) / len2, 0.0, 1.0);
            const double px = ax + t * ex, py = ay + t * ey;
            const double dx = x - px, dy = y - py;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {
                best_d2 = d2;
                const double cross = ex * dy - ey * dx;  // >0 when left of the segment
                best_lateral = std::copysign(std::sqrt(d2), cross == 0.0 ? 1.0 : cross);
                best_arc = cumulative_[i] + t * std::sqrt(len2);
            }
        }
        return {best_lateral, best_arc};
    }

    // Along-path error: believed progress (arc length of the goal segment
    // interpolated by u) minus the projected arc length. Wrapped into
    // [-L/2, L/2] on closed routes, where the projection is ambiguous at
    // the seam.
    double along_path_error(double believed_arc, double projected_arc) const {
        double diff = believed_arc - projected_arc;
        if (closed_) {
            const double L = total_length();
            if (diff > L / 2) diff -= L;
            if (diff < -L / 2) diff += L;
        }
        return diff;
    }

    double believed_arc(int goal_index, double u) const {
        const auto n = static_cast<std::size_t>(std::clamp<int>(
            goal_index, 1, static_cast<int>(points_.size()) - 1));
        const double seg = cumulative_[n] - cumulative_[n - 1];
        return cumulative_[n - 1] + std::clamp(u, 0.0, 1.0) * seg;
    }

private:
    void init() {
        cumulative_.resize(points_.size(), 0.0);
        for (std::size_t i = 1; i < points_.size(); ++i)
            cumulative_[i] = cumulative_[i - 1] +
                             std::hypot(points_[i].first - points_[i - 1].first,
                                        points_[i].second - points_[i - 1].second);
        closed_ = points_.size() > 2 &&
                  std::hypot(points_.back().first - points_.front().first,
                             points_.back().second - points_.front().second) < 1.0;
    }

    std::vector<std::pair<double, double>> points_;
    std::vector<double> cumulative_;
    bool closed_ = false;
};

struct PathMetrics {
    double lateral = 0.0;
    double along_path = 0.0;
};

inline PathMetrics compute_metrics(const Pose2& true_pose, const TeachPath& path,
                                   int goal_index, double u) {
    const auto [lateral, projected] = path.project(true_pose.x, true_pose.y);
    PathMetrics m;
    m.lateral = lateral;
    m.along_path = path.along_path_error(path.believed_arc(goal_index, u), projected);
    return m;
}

}  // namespace tandem
