// Test-only reference implementations, kept deliberately naive and
// independent of the optimized library paths they are checked against.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tandem/image.hpp"
#include "tandem/route.hpp"

namespace oracles {

// Straight per-shift double loop: recomputes every mean with explicit
// passes, no prefix sums, no centering trick.
inline std::vector<double> naive_ncc_values(const tandem::ProcessedImage& ref,
                                            const tandem::ProcessedImage& query, int D) {
    const int W = ref.width, H = ref.height;
    double query_mean = 0.0;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) query_mean += query.at(x, y);
    query_mean /= static_cast<double>(W) * H;

    std::vector<double> values(2 * D + 1, 0.0);
    for (int d = -D; d <= D; ++d) {
        const int x0 = std::max(0, -d);
        const int x1 = std::min(W, W - d);

        double ref_mean = 0.0;
        int count = 0;
        for (int y = 0; y < H; ++y)
            for (int x = x0; x < x1; ++x) {
                ref_mean += ref.at(x, y);
                ++count;
            }
        ref_mean /= count;

        double num = 0.0, ref_ss = 0.0, q_ss = 0.0;
        for (int y = 0; y < H; ++y)
            for (int x = x0; x < x1; ++x) {
                const double a = ref.at(x, y) - ref_mean;
                const double b = query.at(x + d, y) - query_mean;
                num += a * b;
                ref_ss += a * a;
                q_ss += b * b;
            }
        if (ref_ss < 1e-12 || q_ss < 1e-12) continue;
        values[static_cast<std::size_t>(d + D)] = num / std::sqrt(ref_ss * q_ss);
    }
    return values;
}

inline tandem::ProcessedImage random_textured(int w, int h, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    tandem::ProcessedImage img(w, h);
    for (double& v : img.pixels) v = dist(rng);
    return img;
}

inline tandem::RawImage random_raw(int w, int h, std::mt19937& rng, int lo = 0, int hi = 255,
                                   int channels = 1) {
    std::uniform_int_distribution<int> dist(lo, hi);
    tandem::RawImage img(w, h, channels);
    for (auto& v : img.pixels) v = static_cast<std::uint8_t>(dist(rng));
    return img;
}

// Synthetic in-memory route: given poses get independent random textures.
// Small images keep correlation cheap; params cover them exactly.
inline tandem::Route synthetic_route(const std::vector<tandem::Pose2>& poses,
                                     std::mt19937& rng) {
    tandem::Route route;
    route.params.tau_d = 0.3;
    route.params.tau_alpha = tandem::deg_to_rad(15.0);
    route.params.image_width = 23;
    route.params.image_height = 8;
    route.params.patch_size = 8;
    route.params.fov = tandem::deg_to_rad(75.0);
    route.params.search_range = 15;
    for (const tandem::Pose2& pose : poses) {
        tandem::Keyframe kf;
        kf.pose = pose;
        kf.raw_image = random_raw(23, 8, rng, 30, 220);
        kf.processed = tandem::preprocess(kf.raw_image, 23, 8, 8);
        route.keyframes.push_back(std::move(kf));
    }
    return route;
}

// Evenly spaced straight-line route along +x.
inline tandem::Route straight_route(int keyframes, double spacing, std::mt19937& rng) {
    std::vector<tandem::Pose2> poses;
    for (int i = 0; i < keyframes; ++i)
        poses.emplace_back(i * spacing, 0.0, 0.0);
    return synthetic_route(poses, rng);
}

// Reference/query pair cut from one wide texture so the overlap content is
// consistent. The query's content sits `shift` pixels to the right of the
// reference's, i.e. the expected best offset is +shift.
inline std::pair<tandem::ProcessedImage, tandem::ProcessedImage> shifted_pair(
    int w, int h, int shift, std::mt19937& rng) {
    const int margin = std::abs(shift);
    tandem::ProcessedImage texture = random_textured(w + 2 * margin, h, rng);
    tandem::ProcessedImage ref(w, h), query(w, h);
    const int ref_off = margin;          // reference window
    const int query_off = margin - shift;  // query content = reference shifted right
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            ref.at(x, y) = texture.at(x + ref_off, y);
            query.at(x, y) = texture.at(x + query_off, y);
        }
    return {ref, query};
}

}  // namespace oracles
