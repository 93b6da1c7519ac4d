#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "tandem/config.hpp"
#include "tandem/errors.hpp"
#include "tandem/metrics.hpp"

using namespace tandem;
namespace fs = std::filesystem;

TEST(Project, StraightPathGivesSignedLateral) {
    const TeachPath path(std::vector<std::pair<double, double>>{{0, 0}, {4, 0}});
    auto [left, arc_left] = path.project(0.5, 0.2);
    EXPECT_NEAR(left, 0.2, 1e-12);
    EXPECT_NEAR(arc_left, 0.5, 1e-12);

    auto [right, arc_right] = path.project(1.0, -0.3);
    EXPECT_NEAR(right, -0.3, 1e-12);
    EXPECT_NEAR(arc_right, 1.0, 1e-12);

    auto [on, arc_on] = path.project(2.0, 0.0);
    EXPECT_DOUBLE_EQ(on, 0.0);
    EXPECT_NEAR(arc_on, 2.0, 1e-12);
}

TEST(Project, ClampsToPathEndpoints) {
    const TeachPath path(std::vector<std::pair<double, double>>{{0, 0}, {4, 0}});
    auto [lat, arc] = path.project(-1.0, 0.5);
    EXPECT_NEAR(std::abs(lat), std::sqrt(1.25), 1e-12);
    EXPECT_DOUBLE_EQ(arc, 0.0);

    auto [lat2, arc2] = path.project(5.0, 0.0);
    EXPECT_NEAR(std::abs(lat2), 1.0, 1e-12);
    EXPECT_NEAR(arc2, 4.0, 1e-12);
}

TEST(Project, PicksNearestSegmentAroundCorner) {
    const TeachPath path(
        std::vector<std::pair<double, double>>{{0, 0}, {4, 0}, {4, 4}});
    // 0.2 m west of the northbound leg: left of travel, arc past the corner
    auto [lat, arc] = path.project(3.8, 1.0);
    EXPECT_NEAR(lat, 0.2, 1e-12);
    EXPECT_NEAR(arc, 5.0, 1e-12);
}

TEST(AlongPath, OpenRouteIsPlainDifference) {
    const TeachPath path(
        std::vector<std::pair<double, double>>{{0, 0}, {4, 0}, {4, 4}});
    EXPECT_NEAR(path.along_path_error(3.0, 2.7), 0.3, 1e-12);
    EXPECT_NEAR(path.along_path_error(2.7, 3.0), -0.3, 1e-12);
    EXPECT_FALSE(path.closed());
}

TEST(AlongPath, ClosedLoopWrapsAtTheSeam) {
    const TeachPath path(std::vector<std::pair<double, double>>{
        {0, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 0}});
    ASSERT_TRUE(path.closed());
    EXPECT_DOUBLE_EQ(path.total_length(), 16.0);
    EXPECT_NEAR(path.along_path_error(15.9, 0.1), -0.2, 1e-12);
    EXPECT_NEAR(path.along_path_error(0.1, 15.9), 0.2, 1e-12);
}

TEST(AlongPath, BelievedArcInterpolatesTheGoalSegment) {
    const TeachPath path(
        std::vector<std::pair<double, double>>{{0, 0}, {0.4, 0}, {0.8, 0}, {1.3, 0}});
    EXPECT_NEAR(path.believed_arc(2, 0.5), 0.6, 1e-12);
    EXPECT_NEAR(path.believed_arc(3, 0.0), 0.8, 1e-12);
    // index and u are clamped to the path
    EXPECT_NEAR(path.believed_arc(99, 2.0), path.total_length(), 1e-12);
    EXPECT_NEAR(path.believed_arc(1, -3.0), 0.0, 1e-12);
}

TEST(Metrics, CombinesLateralAndProgress) {
    const TeachPath path(
        std::vector<std::pair<double, double>>{{0, 0}, {0.4, 0}, {0.8, 0}});
    const PathMetrics m = compute_metrics(Pose2(0.5, 0.2, 0.1), path, 2, 0.25);
    EXPECT_NEAR(m.lateral, 0.2, 1e-12);
    EXPECT_NEAR(m.along_path, 0.0, 1e-12);  // believed 0.5 matches projection
}

TEST(Metrics, PathFromRouteUsesKeyframePositions) {
    std::mt19937 rng(211);
    Route route = oracles::straight_route(6, 0.4, rng);
    const TeachPath path(route);
    EXPECT_NEAR(path.total_length(), 2.0, 1e-12);
    EXPECT_FALSE(path.closed());
}

TEST(Config, DefaultsMatchThePlatform) {
    const Config cfg;
    EXPECT_EQ(cfg.image_width, 115);
    EXPECT_EQ(cfg.image_height, 44);
    EXPECT_EQ(cfg.ncc_search_px, 75);
    EXPECT_EQ(cfg.patch_size, 8);
    EXPECT_DOUBLE_EQ(cfg.fov_deg, 75.0);
    EXPECT_DOUBLE_EQ(cfg.tau_d, 0.3);
    EXPECT_DOUBLE_EQ(cfg.tau_alpha, 15.0);
    EXPECT_DOUBLE_EQ(cfg.k_theta, 0.01);
    EXPECT_DOUBLE_EQ(cfg.k_p, 0.01);
    EXPECT_EQ(cfg.k_window, 3);
    EXPECT_DOUBLE_EQ(cfg.correction_rate_hz, 10.0);
    EXPECT_DOUBLE_EQ(cfg.crash_lateral_m, 1.0);
}

TEST(Config, LoadsKeyValueFileWithCommentsAndBlanks) {
    const fs::path file = fs::temp_directory_path() / "tandem_cfg_ok.cfg";
    std::ofstream(file) << "# trial configuration\n"
                           "image_width = 57\n"
                           "\n"
                           "  k_theta=0.002  \n"
                           "eq8_literal = true\n"
                           "tau_alpha = 10\n";
    const Config cfg = load_config(file);
    EXPECT_EQ(cfg.image_width, 57);
    EXPECT_DOUBLE_EQ(cfg.k_theta, 0.002);
    EXPECT_TRUE(cfg.eq8_literal);
    EXPECT_DOUBLE_EQ(cfg.tau_alpha, 10.0);
    EXPECT_EQ(cfg.image_height, 44);  // untouched keys keep defaults
    fs::remove(file);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    Config cfg;
    EXPECT_THROW(apply_config_entry(cfg, "mystery_knob", "1"), ConfigError);
    EXPECT_THROW(apply_config_entry(cfg, "k_theta", "abc"), ConfigError);
    EXPECT_THROW(apply_config_entry(cfg, "image_width", "12.7.3"), ConfigError);
    EXPECT_THROW(apply_config_entry(cfg, "eq8_literal", "yes"), ConfigError);
}

TEST(Config, BoolAcceptsCanonicalSpellings) {
    Config cfg;
    apply_config_entry(cfg, "eq8_literal", "1");
    EXPECT_TRUE(cfg.eq8_literal);
    apply_config_entry(cfg, "eq8_literal", "false");
    EXPECT_FALSE(cfg.eq8_literal);
}

TEST(Config, MalformedLineReportsLineNumber) {
    const fs::path file = fs::temp_directory_path() / "tandem_cfg_bad.cfg";
    std::ofstream(file) << "image_width = 57\nno equals sign here\n";
    try {
        load_config(file);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
    }
    fs::remove(file);
}

TEST(Config, MissingFileThrows) {
    EXPECT_THROW(load_config("/nonexistent/tandem.cfg"), ConfigError);
}

TEST(Config, ConvertersTranslateUnits) {
    Config cfg;
    cfg.tau_alpha = 10.0;
    cfg.fov_deg = 90.0;
    cfg.correction_rate_hz = 20.0;
    cfg.v_max = 0.7;

    const RecordingParams rp = cfg.recording_params();
    EXPECT_NEAR(rp.tau_alpha, deg_to_rad(10.0), 1e-12);
    EXPECT_NEAR(rp.fov, deg_to_rad(90.0), 1e-12);
    EXPECT_EQ(rp.search_range, cfg.ncc_search_px);

    EXPECT_NEAR(cfg.camera().fov, deg_to_rad(90.0), 1e-12);
    EXPECT_DOUBLE_EQ(cfg.controller_gains().v_max, 0.7);
    EXPECT_NEAR(cfg.correction_gains().correction_period, 0.05, 1e-12);
}
