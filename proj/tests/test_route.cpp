#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "tandem/errors.hpp"
#include "tandem/route.hpp"

using namespace tandem;
namespace fs = std::filesystem;

namespace {

RecordingParams small_params() {
    RecordingParams p;
    p.image_width = 23;
    p.image_height = 8;
    p.patch_size = 8;
    p.search_range = 15;
    return p;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Recorder, FirstSampleAlwaysRecorded) {
    std::mt19937 rng(3);
    RouteRecorder rec(small_params());
    EXPECT_TRUE(rec.update(Pose2(5, 5, 1), oracles::random_raw(23, 8, rng)));
    EXPECT_EQ(rec.route().size(), 1u);
}

TEST(Recorder, DistanceThresholdIsStrict) {
    std::mt19937 rng(5);
    RawImage img = oracles::random_raw(23, 8, rng);
    RouteRecorder rec(small_params());
    rec.update(Pose2(0, 0, 0), img);
    // advancing 0.1 m per sample: 0.1, 0.2, 0.3 stay inside, 0.4 triggers
    EXPECT_FALSE(rec.update(Pose2(0.1, 0, 0), img));
    EXPECT_FALSE(rec.update(Pose2(0.2, 0, 0), img));
    EXPECT_FALSE(rec.update(Pose2(0.3, 0, 0), img));
    EXPECT_TRUE(rec.update(Pose2(0.4, 0, 0), img));
    EXPECT_EQ(rec.route().size(), 2u);
    EXPECT_DOUBLE_EQ(rec.route().keyframes.back().pose.x, 0.4);
}

TEST(Recorder, InPlaceRotationTriggers) {
    std::mt19937 rng(7);
    RawImage img = oracles::random_raw(23, 8, rng);
    RouteRecorder rec(small_params());
    rec.update(Pose2(0, 0, 0), img);
    EXPECT_FALSE(rec.update(Pose2(0, 0, deg_to_rad(10)), img));
    EXPECT_TRUE(rec.update(Pose2(0, 0, deg_to_rad(20)), img));
}

TEST(Recorder, StationaryRobotRecordsOnlyOnce) {
    std::mt19937 rng(11);
    RawImage img = oracles::random_raw(23, 8, rng);
    RouteRecorder rec(small_params());
    for (int i = 0; i < 100; ++i) rec.update(Pose2(1, 2, 0.5), img);
    EXPECT_EQ(rec.route().size(), 1u);
}

TEST(Recorder, ConsecutiveKeyframesAlwaysExceedAThreshold) {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> step(-0.08, 0.12);
    std::uniform_real_distribution<double> turn(-0.1, 0.12);
    RawImage img = oracles::random_raw(23, 8, rng);
    RouteRecorder rec(small_params());
    Pose2 pose;
    for (int i = 0; i < 2000; ++i) {
        pose = compose(pose, Pose2(step(rng), 0, turn(rng)));
        rec.update(pose, img);
    }
    const Route& route = rec.route();
    ASSERT_GT(route.size(), 3u);
    for (std::size_t i = 1; i < route.size(); ++i) {
        const double d = position_distance(route.keyframes[i - 1].pose, route.keyframes[i].pose);
        const double a =
            std::abs(heading_difference(route.keyframes[i - 1].pose, route.keyframes[i].pose));
        EXPECT_TRUE(d > route.params.tau_d || a > route.params.tau_alpha)
            << "keyframe " << i << " d=" << d << " a=" << a;
    }
}

TEST(Recorder, ForceFinalAppendsBelowThreshold) {
    std::mt19937 rng(17);
    RawImage img = oracles::random_raw(23, 8, rng);
    RouteRecorder rec(small_params());
    rec.update(Pose2(0, 0, 0), img);
    EXPECT_TRUE(rec.force_final(Pose2(0.1, 0, 0), img));
    EXPECT_EQ(rec.route().size(), 2u);
    // but an exact repeat of the last pose is dropped
    EXPECT_FALSE(rec.force_final(Pose2(0.1, 0, 0), img));
}

TEST(Recorder, RejectsWrongImageSize) {
    std::mt19937 rng(19);
    RouteRecorder rec(small_params());
    EXPECT_THROW(rec.update(Pose2(), oracles::random_raw(10, 8, rng)), DimensionMismatch);
}

TEST(RouteIo, SaveThenLoadRoundTrips) {
    std::mt19937 rng(23);
    Route route = oracles::synthetic_route(
        {Pose2(0, 0, 0), Pose2(0.4, 0.01, 0.02), Pose2(0.81, -0.02, -0.4)}, rng);
    fs::path dir = fresh_dir("tandem_route_roundtrip");
    save_route(route, dir);

    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "000000.pgm"));
    EXPECT_TRUE(fs::exists(dir / "000002.pgm"));

    Route back = load_route(dir);
    ASSERT_EQ(back.size(), route.size());
    EXPECT_NEAR(back.params.tau_d, route.params.tau_d, 1e-12);
    EXPECT_NEAR(back.params.tau_alpha, route.params.tau_alpha, 1e-12);
    EXPECT_NEAR(back.params.fov, route.params.fov, 1e-12);
    EXPECT_EQ(back.params.image_width, route.params.image_width);
    EXPECT_EQ(back.params.search_range, route.params.search_range);
    for (std::size_t i = 0; i < route.size(); ++i) {
        EXPECT_NEAR(back.keyframes[i].pose.x, route.keyframes[i].pose.x, 1e-9);
        EXPECT_NEAR(back.keyframes[i].pose.y, route.keyframes[i].pose.y, 1e-9);
        EXPECT_NEAR(back.keyframes[i].pose.theta, route.keyframes[i].pose.theta, 1e-9);
        EXPECT_EQ(back.keyframes[i].raw_image.pixels, route.keyframes[i].raw_image.pixels);
        // processed recomputed from raw must agree too
        ASSERT_EQ(back.keyframes[i].processed.pixels.size(),
                  route.keyframes[i].processed.pixels.size());
        for (std::size_t j = 0; j < back.keyframes[i].processed.pixels.size(); ++j)
            EXPECT_DOUBLE_EQ(back.keyframes[i].processed.pixels[j],
                             route.keyframes[i].processed.pixels[j]);
    }
    fs::remove_all(dir);
}

TEST(RouteIo, SaveIsIdempotentOverwrite) {
    std::mt19937 rng(29);
    Route route = oracles::straight_route(3, 0.4, rng);
    fs::path dir = fresh_dir("tandem_route_overwrite");
    save_route(route, dir);
    save_route(route, dir);
    Route back = load_route(dir);
    EXPECT_EQ(back.size(), 3u);
    fs::remove_all(dir);
}

TEST(RouteIo, MissingImageFileThrows) {
    std::mt19937 rng(31);
    Route route = oracles::straight_route(3, 0.4, rng);
    fs::path dir = fresh_dir("tandem_route_missing");
    save_route(route, dir);
    fs::remove(dir / "000001.pgm");
    EXPECT_THROW(load_route(dir), MissingImage);
    fs::remove_all(dir);
}

TEST(RouteIo, UnknownVersionThrows) {
    std::mt19937 rng(37);
    Route route = oracles::straight_route(2, 0.4, rng);
    fs::path dir = fresh_dir("tandem_route_version");
    save_route(route, dir);
    {
        std::ifstream in(dir / "manifest.json");
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        in.close();
        const std::string needle = "tandem-route/1";
        text.replace(text.find(needle), needle.size(), "tandem-route/999");
        std::ofstream out(dir / "manifest.json", std::ios::trunc);
        out << text;
    }
    EXPECT_THROW(load_route(dir), VersionError);
    fs::remove_all(dir);
}

TEST(RouteIo, MismatchedDimensionsThrow) {
    std::mt19937 rng(41);
    Route route = oracles::straight_route(2, 0.4, rng);
    fs::path dir = fresh_dir("tandem_route_dims");
    save_route(route, dir);
    {
        // replace one image with a wider one
        RawImage wide = oracles::random_raw(30, 8, rng);
        write_pgm(wide, dir / "000001.pgm");
    }
    EXPECT_THROW(load_route(dir), FormatError);
    fs::remove_all(dir);
}

TEST(RouteIo, GarbageManifestThrows) {
    fs::path dir = fresh_dir("tandem_route_garbage");
    fs::create_directories(dir);
    std::ofstream(dir / "manifest.json") << "{not json";
    EXPECT_THROW(load_route(dir), FormatError);
    fs::remove_all(dir);
}

TEST(RouteIo, MissingManifestThrows) {
    fs::path dir = fresh_dir("tandem_route_nomanifest");
    fs::create_directories(dir);
    EXPECT_THROW(load_route(dir), FormatError);
    fs::remove_all(dir);
}

TEST(RouteIo, SingleKeyframeRouteRejectedOnLoad) {
    std::mt19937 rng(43);
    Route route = oracles::synthetic_route({Pose2(0, 0, 0)}, rng);
    fs::path dir = fresh_dir("tandem_route_single");
    save_route(route, dir);
    EXPECT_THROW(load_route(dir), FormatError);
    fs::remove_all(dir);
}

TEST(Transfer, IdentityKeepsPixels) {
    std::mt19937 rng(47);
    Route route = oracles::straight_route(3, 0.4, rng);
    Route same = transfer_route(route, route.params.fov, route.params.image_width);
    ASSERT_EQ(same.size(), route.size());
    EXPECT_EQ(same.params.image_width, route.params.image_width);
    EXPECT_EQ(same.params.search_range, route.params.search_range);
    for (std::size_t i = 0; i < route.size(); ++i)
        EXPECT_EQ(same.keyframes[i].raw_image.pixels, route.keyframes[i].raw_image.pixels);
}

TEST(Transfer, HalfFovTakesCenterColumns) {
    // source 46 px over 150 degrees; cropping to 75 degrees takes the middle
    // 23 columns, and resampling 23 -> 23 is exact
    std::mt19937 rng(53);
    Route route;
    route.params = RecordingParams{};
    route.params.image_width = 46;
    route.params.image_height = 8;
    route.params.patch_size = 8;
    route.params.fov = deg_to_rad(150.0);
    route.params.search_range = 30;
    for (int i = 0; i < 2; ++i) {
        Keyframe kf;
        kf.pose = Pose2(i * 0.4, 0, 0);
        kf.raw_image = oracles::random_raw(46, 8, rng);
        kf.processed = preprocess(kf.raw_image, 46, 8, 8);
        route.keyframes.push_back(std::move(kf));
    }

    Route narrow = transfer_route(route, deg_to_rad(75.0), 23);
    EXPECT_EQ(narrow.params.image_width, 23);
    EXPECT_NEAR(narrow.params.fov, deg_to_rad(75.0), 1e-12);
    for (std::size_t i = 0; i < route.size(); ++i)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 23; ++x)
                EXPECT_EQ(narrow.keyframes[i].raw_image.at(x, y),
                          route.keyframes[i].raw_image.at(x + 11, y))
                    << "kf " << i << " at " << x << "," << y;
}

TEST(Transfer, SearchRangeFollowsPixelsPerRadian) {
    std::mt19937 rng(59);
    Route route;
    route.params = RecordingParams{};
    route.params.image_width = 270;
    route.params.image_height = 8;
    route.params.patch_size = 8;
    route.params.fov = deg_to_rad(175.2);
    route.params.search_range = 75;
    for (int i = 0; i < 2; ++i) {
        Keyframe kf;
        kf.pose = Pose2(i * 0.4, 0, 0);
        kf.raw_image = oracles::random_raw(270, 8, rng);
        kf.processed = preprocess(kf.raw_image, 270, 8, 8);
        route.keyframes.push_back(std::move(kf));
    }
    Route narrow = transfer_route(route, deg_to_rad(75.0), 115);
    // pixels per radian: 270/175.2 deg vs 115/75 deg differ by ~0.5%
    EXPECT_EQ(narrow.params.search_range, 75);
    EXPECT_EQ(narrow.params.image_width, 115);
    EXPECT_EQ(narrow.keyframes[0].raw_image.width, 115);
}

TEST(Transfer, WideningIsRejected) {
    std::mt19937 rng(61);
    Route route = oracles::straight_route(2, 0.4, rng);
    EXPECT_THROW(transfer_route(route, route.params.fov * 1.5, 23), IncompatibleFov);
}
