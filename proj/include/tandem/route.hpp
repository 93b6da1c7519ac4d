// Keyframe route recording and the on-disk route format: a directory with
// manifest.json plus one PGM per keyframe.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tandem/errors.hpp"
#include "tandem/image.hpp"
#include "tandem/ncc.hpp"
#include "tandem/pose2.hpp"

namespace tandem {

inline constexpr const char* kRouteFormatVersion = "tandem-route/1";

struct RecordingParams {
    double tau_d = 0.3;                    // keyframe distance spacing, meters
    double tau_alpha = deg_to_rad(15.0);   // keyframe heading spacing, radians
    int image_width = 115;                 // stored image dimensions
    int image_height = 44;
    int patch_size = 8;
    double fov = deg_to_rad(75.0);         // horizontal field of view, radians
    int search_range = 75;                 // correlation search range D, pixels
};

struct Keyframe {
    Pose2 pose;             // teach odometry frame
    RawImage raw_image;
    ProcessedImage processed;  // preprocess(raw_image) under the route params
};

struct Route {
    RecordingParams params;
    std::vector<Keyframe> keyframes;

    std::size_t size() const { return keyframes.size(); }
};

namespace detail {

inline Keyframe make_keyframe(const Pose2& pose, RawImage raw, const RecordingParams& p) {
    if (raw.width != p.image_width || raw.height != p.image_height)
        throw DimensionMismatch("keyframe image " + std::to_string(raw.width) + "x" +
                                std::to_string(raw.height) + " does not match route params " +
                                std::to_string(p.image_width) + "x" +
                                std::to_string(p.image_height));
    Keyframe kf;
    kf.pose = pose;
    kf.processed = preprocess(raw, p.image_width, p.image_height, p.patch_size);
    kf.raw_image = std::move(raw);
    return kf;
}

inline std::string keyframe_filename(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu.pgm", index);
    return buf;
}

}  // namespace detail

// Emits a keyframe for the first sample unconditionally, then whenever the
// pose moved more than tau_d or turned more than tau_alpha (both strict)
// since the last recorded keyframe.
class RouteRecorder {
public:
    explicit RouteRecorder(const RecordingParams& params) { route_.params = params; }

    // True when the next update() at this pose would record a keyframe.
    // Lets callers skip producing an image otherwise.
    bool due(const Pose2& pose) const {
        if (route_.keyframes.empty()) return true;
        const Pose2& last = route_.keyframes.back().pose;
        return position_distance(last, pose) > route_.params.tau_d ||
               std::abs(heading_difference(last, pose)) > route_.params.tau_alpha;
    }

    bool update(const Pose2& pose, const RawImage& image) {
        if (!due(pose)) return false;
        route_.keyframes.push_back(detail::make_keyframe(pose, image, route_.params));
        return true;
    }

    // Appends the stop pose as a terminal keyframe even below the spacing
    // thresholds, so the route ends where the teach run ended.
    bool force_final(const Pose2& pose, const RawImage& image) {
        if (!route_.keyframes.empty()) {
            const Pose2& last = route_.keyframes.back().pose;
            if (position_distance(last, pose) < 1e-6 &&
                std::abs(heading_difference(last, pose)) < 1e-6)
                return false;
        }
        route_.keyframes.push_back(detail::make_keyframe(pose, image, route_.params));
        return true;
    }

    const Route& route() const { return route_; }
    Route take() { return std::move(route_); }

private:
    Route route_;
};

inline void save_route(const Route& route, const std::filesystem::path& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw IoError("save_route: cannot create " + directory.string());

    nlohmann::json manifest;
    manifest["version"] = kRouteFormatVersion;
    manifest["tau_d"] = route.params.tau_d;
    manifest["tau_alpha"] = route.params.tau_alpha;
    manifest["image_width"] = route.params.image_width;
    manifest["image_height"] = route.params.image_height;
    manifest["patch_size"] = route.params.patch_size;
    manifest["fov_rad"] = route.params.fov;
    manifest["ncc_search_px"] = route.params.search_range;
    manifest["keyframes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < route.keyframes.size(); ++i) {
        const Keyframe& kf = route.keyframes[i];
        const std::string name = detail::keyframe_filename(i);
        write_pgm(kf.raw_image, directory / name);
        manifest["keyframes"].push_back({{"index", i},
                                         {"x", kf.pose.x},
                                         {"y", kf.pose.y},
                                         {"theta", kf.pose.theta},
                                         {"image", name}});
    }

    std::ofstream out(directory / "manifest.json", std::ios::binary);
    if (!out) throw IoError("save_route: cannot open " + (directory / "manifest.json").string());
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("save_route: write failed " + (directory / "manifest.json").string());
}

inline Route load_route(const std::filesystem::path& directory) {
    const std::filesystem::path manifest_path = directory / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw FormatError("load_route: cannot open " + manifest_path.string());

    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("load_route: bad manifest " + manifest_path.string() + ": " + e.what());
    }

    Route route;
    try {
        const std::string version = manifest.at("version").get<std::string>();
        if (version != kRouteFormatVersion)
            throw VersionError("load_route: unknown version '" + version + "' in " +
                               manifest_path.string());
        route.params.tau_d = manifest.at("tau_d").get<double>();
        route.params.tau_alpha = manifest.at("tau_alpha").get<double>();
        route.params.image_width = manifest.at("image_width").get<int>();
        route.params.image_height = manifest.at("image_height").get<int>();
        route.params.patch_size = manifest.at("patch_size").get<int>();
        route.params.fov = manifest.at("fov_rad").get<double>();
        route.params.search_range = manifest.at("ncc_search_px").get<int>();

        const auto& kfs = manifest.at("keyframes");
        route.keyframes.reserve(kfs.size());
        for (std::size_t i = 0; i < kfs.size(); ++i) {
            const auto& entry = kfs.at(i);
            if (entry.at("index").get<std::size_t>() != i)
                throw FormatError("load_route: keyframe indices not dense in " +
                                  manifest_path.string());
            Pose2 pose(entry.at("x").get<double>(), entry.at("y").get<double>(),
                       entry.at("theta").get<double>());
            RawImage raw = read_pgm(directory / entry.at("image").get<std::string>());
            if (raw.width != route.params.image_width || raw.height != route.params.image_height)
                throw FormatError("load_route: image dimensions disagree with params: " +
                                  entry.at("image").get<std::string>());
            Keyframe kf;
            kf.pose = pose;
            kf.processed = preprocess(raw, route.params.image_width, route.params.image_height,
                                      route.params.patch_size);
            kf.raw_image = std::move(raw);
            route.keyframes.push_back(std::move(kf));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("load_route: bad manifest " + manifest_path.string() + ": " + e.what());
    }
    if (route.keyframes.size() < 2)
        throw FormatError("load_route: route needs at least 2 keyframes: " +
                          manifest_path.string());
    return route;
}

// Adapts a route recorded with a wide camera to a narrower one: every image
// is center-cropped to the target FOV fraction, resampled to the target
// width, and the manifest parameters are rewritten to match. The search
// range is rescaled to keep the same angular extent per pixel.
inline Route transfer_route(const Route& source, double target_fov, int target_width) {
    const RecordingParams& sp = source.params;
    if (target_fov > sp.fov + 1e-12)
        throw IncompatibleFov("transfer_route: target fov " + std::to_string(target_fov) +
                              " exceeds source " + std::to_string(sp.fov));
    if (target_width < 1 || target_fov <= 0.0)
        throw IncompatibleFov("transfer_route: bad target camera");

    const int crop_w = std::clamp(
        static_cast<int>(std::lround(sp.image_width * target_fov / sp.fov)), 1, sp.image_width);
    if (target_width > crop_w)
        throw IncompatibleFov("transfer_route: target width " + std::to_string(target_width) +
                              " exceeds cropped width " + std::to_string(crop_w));
    const int x0 = (sp.image_width - crop_w) / 2;

    Route out;
    out.params = sp;
    out.params.fov = target_fov;
    out.params.image_width = target_width;
    const double px_per_rad_ratio =
        (target_width / target_fov) / (sp.image_width / sp.fov);
    out.params.search_range =
        std::clamp(static_cast<int>(std::lround(sp.search_range * px_per_rad_ratio)), 1,
                   target_width - 1);

    out.keyframes.reserve(source.keyframes.size());
    for (const Keyframe& kf : source.keyframes) {
        std::vector<double> crop(static_cast<std::size_t>(crop_w) * sp.image_height);
        for (int y = 0; y < sp.image_height; ++y)
            for (int x = 0; x < crop_w; ++x)
                crop[static_cast<std::size_t>(y) * crop_w + x] = kf.raw_image.at(x0 + x, y);
        std::vector<double> resampled =
            detail::box_downscale(crop, crop_w, sp.image_height, target_width, sp.image_height);
        RawImage raw(target_width, sp.image_height, 1);
        for (std::size_t i = 0; i < resampled.size(); ++i)
            raw.pixels[i] = static_cast<std::uint8_t>(
                std::clamp<long>(std::lround(resampled[i]), 0, 255));
        out.keyframes.push_back(detail::make_keyframe(kf.pose, std::move(raw), out.params));
    }
    return out;
}

}  // namespace tandem
