#include <doctest.h>

#include <cmath>

#include "coopnav/world.hpp"

using namespace coopnav;

TEST_CASE("step_pose: straight line") {
    const Pose2D next = step_pose(Pose2D{0, 0, 0}, ControlMeasurement{50.0, 0.0}, 0.1);
    CHECK(next.x == doctest::Approx(5.0));
    CHECK(next.y == doctest::Approx(0.0));
    CHECK(next.theta == doctest::Approx(0.0));
}

TEST_CASE("step_pose: zero velocity only turns") {
    const Pose2D next = step_pose(Pose2D{3, 4, 0.2}, ControlMeasurement{0.0, 0.5}, 0.1);
    CHECK(next.x == 3.0);
    CHECK(next.y == 4.0);
    CHECK(next.theta == doctest::Approx(0.25));
}

TEST_CASE("step_pose: discrete circle closes") {
    Pose2D p{0, 0, 0};
    const ControlMeasurement u{10.0, kPi / 18.0};
    for (int i = 0; i < 360; ++i) p = step_pose(p, u, 1.0);
    const double circumference = 360.0 * 10.0;
    CHECK(std::hypot(p.x, p.y) / circumference < 1e-6);
}

TEST_CASE("reference_velocity: baseline profile") {
    ReferenceProfile prof;
    CHECK(reference_velocity(prof, 0.0) == doctest::Approx(50.0));
    prof.vel_phase = kPi / 2.0;
    CHECK(reference_velocity(prof, 0.0) == doctest::Approx(60.0));
    prof.vel_phase = 1.234;
    for (int i = 0; i < 500; ++i) {
        const double v = reference_velocity(prof, i * 7.3);
        CHECK(v >= 40.0 - 1e-12);
        CHECK(v <= 60.0 + 1e-12);
    }
}

TEST_CASE("track_control: zero-error fixed point and feedback sign") {
    ReferenceProfile prof; // track at y = 0, heading east
    ControllerConfig ctrl;
    const auto on_track = track_control(Pose2D{100.0, 0.0, 0.0}, prof, 3.0, ctrl);
    CHECK(on_track.yaw_rate == doctest::Approx(0.0));
    CHECK(on_track.velocity == doctest::Approx(reference_velocity(prof, 3.0)));

    // north of track, heading east: steer right (negative yaw rate)
    const auto north = track_control(Pose2D{100.0, 30.0, 0.0}, prof, 3.0, ctrl);
    CHECK(north.yaw_rate < 0.0);
    // south of track: steer left
    const auto south = track_control(Pose2D{100.0, -30.0, 0.0}, prof, 3.0, ctrl);
    CHECK(south.yaw_rate > 0.0);
}

TEST_CASE("track_control: closed loop pulls a 10 m offset under 1 m within 60 s") {
    ReferenceProfile prof;
    ControllerConfig ctrl;
    Pose2D truth{0.0, 10.0, 0.0};
    const double dt = 0.1;
    double settled_at = -1.0;
    for (int i = 0; i < 600; ++i) {
        const double t = i * dt;
        truth = step_pose(truth, track_control(truth, prof, t, ctrl), dt);
        if (settled_at < 0.0 && std::abs(truth.y) < 1.0) settled_at = t;
    }
    CHECK(std::abs(truth.y) < 1.0);
    CHECK(settled_at >= 0.0);
    CHECK(settled_at < 60.0);
}

TEST_CASE("track_control: with perfect feedback cross-track stays under 1 m after transient") {
    ReferenceProfile prof;
    prof.track_north = 2000.0;
    prof.vel_phase = 0.8;
    ControllerConfig ctrl;
    Pose2D truth{0.0, 2001.0, 0.0}; // 1 m initial jitter
    const double dt = 0.1;
    for (int i = 0; i < 6000; ++i) { // 10 minutes
        truth = step_pose(truth, track_control(truth, prof, i * dt, ctrl), dt);
        if (i > 300) CHECK(std::abs(truth.y - prof.track_north) < 1.0);
    }
}

TEST_CASE("odometry sensor: degenerate noise reproduces truth") {
    NoiseConfig noise;
    noise.sigma_v = 0.0;
    noise.sigma_g = 0.0;
    noise.bias_v_std = 0.0;
    noise.bias_g_std = 0.0;
    RandomStream rng(1);
    OdometrySensor sensor(noise, &rng);
    const auto m = sensor.measure(ControlMeasurement{48.5, 0.013});
    CHECK(m.velocity == 48.5);
    CHECK(m.yaw_rate == 0.013);
}

TEST_CASE("odometry sensor: turn-on bias constant within a trial, re-drawn across trials") {
    NoiseConfig noise;
    noise.sigma_v = 0.0;
    noise.sigma_g = 0.0;
    noise.bias_v_std = 0.03;
    noise.bias_g_std = 1e-5;
    RandomStream rng_a(11);
    OdometrySensor a(noise, &rng_a);
    const double b1 = a.measure(ControlMeasurement{50, 0}).velocity - 50.0;
    const double b2 = a.measure(ControlMeasurement{40, 0}).velocity - 40.0;
    CHECK(b1 == doctest::Approx(b2).epsilon(1e-12));
    CHECK(b1 == doctest::Approx(a.bias_v()).epsilon(1e-12));

    RandomStream rng_b(12);
    OdometrySensor b(noise, &rng_b);
    CHECK(a.bias_v() != b.bias_v());
}

TEST_CASE("ranging: 3-4-5 triangle and sample statistics") {
    RandomStream rng(77);
    CHECK(measure_range(Pose2D{0, 0, 0}, Pose2D{3, 4, 1.0}, 0.0, rng) == doctest::Approx(5.0));

    // sigma_r = 1 m: sample std of 10,000 errors within [0.97, 1.03]
    const int n = 10000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double err = measure_range(Pose2D{0, 0, 0}, Pose2D{100, 0, 0}, 1.0, rng) - 100.0;
        sum += err;
        sq += err * err;
    }
    const double mean = sum / n;
    const double stddev = std::sqrt(sq / n - mean * mean);
    CHECK(stddev > 0.97);
    CHECK(stddev < 1.03);
}
