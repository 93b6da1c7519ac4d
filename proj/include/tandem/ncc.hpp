#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "tandem/errors.hpp"
#include "tandem/image.hpp"

namespace tandem {

/// Normalized cross-correlation of a query against a reference over the
/// horizontal shift range d in [-D, D]. Positive d means the query's
/// content sits d pixels to the right of the reference's (the camera
/// panned left between the two views); shifting the query left by d
/// aligns it with the reference.
struct CorrelationProfile {
    int search_range = 0;         // D
    std::vector<double> values;   // index i corresponds to d = i - D
    int best_offset = 0;          // argmax d
    double peak = 0.0;            // values[best_offset + D]

    double value_at(int d) const { return values[static_cast<std::size_t>(d + search_range)]; }
};

/// Sweeps the query horizontally over [-D, D] and computes the NCC at each
/// shift. The x,y sums run over the overlap only; the reference mean is
/// recomputed over its overlapped sub-window per shift, while the query
/// mean is taken over the full image. Shifts whose summed squared
/// deviation falls below 1e-12 on either side get NCC = 0 (featureless,
/// no information). Argmax ties break toward smaller |d|, then negative d.
inline CorrelationProfile ncc_profile(const ProcessedImage& reference,
                                      const ProcessedImage& query, int D) {
    const int W = reference.width;
    const int H = reference.height;
    if (query.width != W || query.height != H)
        throw DimensionMismatch("ncc_profile: reference " + std::to_string(W) + "x" +
                                std::to_string(H) + " vs query " + std::to_string(query.width) +
                                "x" + std::to_string(query.height));
    if (D < 0 || D >= W)
        throw DimensionMismatch("ncc_profile: search range " + std::to_string(D) +
                                " outside [0, " + std::to_string(W) + ")");

    // Full-image query mean, then center the query once.
    double query_sum = 0.0;
    for (double v : query.pixels) query_sum += v;
    const double query_mean = query_sum / (static_cast<double>(W) * H);
    std::vector<double> qc(query.pixels);
    for (double& v : qc) v -= query_mean;

    // Column prefix sums: reference raw and raw-squared, centered query and
    // its square. Lets each shift fetch its overlap statistics in O(1);
    // only the cross product below still walks the overlap.
    std::vector<double> ref_ps(W + 1, 0.0), ref_pss(W + 1, 0.0);
    std::vector<double> qc_ps(W + 1, 0.0), qc_pss(W + 1, 0.0);
    for (int x = 0; x < W; ++x) {
        double rs = 0.0, rss = 0.0, qs = 0.0, qss = 0.0;
        for (int y = 0; y < H; ++y) {
            const double r = reference.pixels[static_cast<std::size_t>(y) * W + x];
            const double q = qc[static_cast<std::size_t>(y) * W + x];
            rs += r;
            rss += r * r;
            qs += q;
            qss += q * q;
        }
        ref_ps[x + 1] = ref_ps[x] + rs;
        ref_pss[x + 1] = ref_pss[x] + rss;
        qc_ps[x + 1] = qc_ps[x] + qs;
        qc_pss[x + 1] = qc_pss[x] + qss;
    }

    CorrelationProfile profile;
    profile.search_range = D;
    profile.values.resize(2 * D + 1, 0.0);

    for (int d = -D; d <= D; ++d) {
        const int x0 = std::max(0, -d);
        const int x1 = std::min(W, W - d);
        const int cols = x1 - x0;
        const double count = static_cast<double>(cols) * H;

        const double ref_sum = ref_ps[x1] - ref_ps[x0];
        const double ref_mean = ref_sum / count;
        const double ref_ss = (ref_pss[x1] - ref_pss[x0]) - count * ref_mean * ref_mean;
        const double qc_sum = qc_ps[x1 + d] - qc_ps[x0 + d];
        const double qc_ss = qc_pss[x1 + d] - qc_pss[x0 + d];

        if (ref_ss < 1e-12 || qc_ss < 1e-12) continue;  // value stays 0

        double cross = 0.0;
        for (int y = 0; y < H; ++y) {
            const double* ref_row = reference.pixels.data() + static_cast<std::size_t>(y) * W;
            const double* qc_row = qc.data() + static_cast<std::size_t>(y) * W + d;
            for (int x = x0; x < x1; ++x) cross += ref_row[x] * qc_row[x];
        }
        const double numerator = cross - ref_mean * qc_sum;
        profile.values[static_cast<std::size_t>(d + D)] = numerator / std::sqrt(ref_ss * qc_ss);
    }

    int best = -D;
    double best_value = profile.values[0];
    for (int d = -D + 1; d <= D; ++d) {
        const double v = profile.values[static_cast<std::size_t>(d + D)];
        if (v > best_value ||
            (v == best_value &&
             (std::abs(d) < std::abs(best) || (std::abs(d) == std::abs(best) && d < best)))) {
            best_value = v;
            best = d;
        }
    }
    profile.best_offset = best;
    profile.peak = best_value;
    return profile;
}

/// Pixel offset to bearing, treating the offset as purely rotational:
/// (fov / image_width) * delta.
inline double pixel_to_angle(double delta, double fov, int image_width) {
    return fov / image_width * delta;
}

}  // namespace tandem
