#include <doctest.h>

#include <cmath>
#include <random>

#include "sensepath/sensor.hpp"

using namespace sensepath;

namespace {

Environment flat_env(int n = 10, double spacing = 1.0, double depth = 6.0) {
    Environment env;
    env.grid_rows = n;
    env.grid_cols = n;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) env.surface_vertices.emplace_back(c * spacing, r * spacing, 0.0);
    env.normals.assign(n * n, Vec3(0, 0, -1));
    env.bounds.min = Vec3(0, 0, -depth);
    env.bounds.max = Vec3((n - 1) * spacing, (n - 1) * spacing, 0.0);
    return env;
}

TargetBody sphere_target(const Vec3& center, double radius, int n_points, std::uint64_t seed) {
    TargetBody body;
    body.has_shape = true;
    body.center = center;
    body.radii = Vec3::Constant(radius);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (static_cast<int>(body.points.size()) < n_points) {
        Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
        if (dir.norm() < 1e-9) continue;
        body.points.push_back(center + radius * std::cbrt(unit(rng)) * dir.normalized());
    }
    return body;
}

// independent formulation of the membership predicate: explicit angle and
// distance comparison against the axis
bool cone_contains_reference(const SensorCone& cone, const Vec3& p) {
    const Vec3 d = p - cone.apex;
    const double dist = d.norm();
    if (dist < 1e-15) return true;
    const double along = d.dot(cone.axis);
    if (along < 0.0) return false;
    if (along > cone.depth) return false;
    const double angle = std::acos(std::min(1.0, along / dist));
    return angle <= cone.half_angle + 1e-9;
}

}  // namespace

TEST_CASE("cone membership: apex and axis boundary") {
    SensorCone cone{Vec3(0, 0, 0), Vec3(0, 0, -1), 15.0 * M_PI / 180.0, 5.0};
    CHECK(cone.contains(cone.apex));
    CHECK(cone.contains(cone.apex + cone.depth * cone.axis));
    CHECK_FALSE(cone.contains(cone.apex + (cone.depth + 1e-6) * cone.axis));
    CHECK_FALSE(cone.contains(cone.apex - 0.01 * cone.axis));
}

TEST_CASE("cone membership agrees with the brute-force predicate") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coord(-6.0, 6.0);
    std::uniform_real_distribution<double> ang(0.1, 1.2);
    for (int trial = 0; trial < 50; ++trial) {
        Vec3 axis(coord(rng), coord(rng), coord(rng));
        if (axis.norm() < 1e-6) continue;
        SensorCone cone{Vec3(coord(rng), coord(rng), coord(rng)), axis.normalized(), ang(rng),
                        1.0 + std::abs(coord(rng))};
        for (int i = 0; i < 200; ++i) {
            const Vec3 p(coord(rng), coord(rng), coord(rng));
            CHECK(cone.contains(p) == cone_contains_reference(cone, p));
        }
    }
}

TEST_CASE("sensing an empty region yields only free labels") {
    const Environment env = flat_env();
    SensorParams params;
    std::mt19937_64 rng(1);
    const SenseBatch batch = sense_at(env, SensingPose{Vec3(4, 4, 0), Vec3(0, 0, -1)}, params, rng);
    CHECK(!batch.samples.empty());
    for (const auto& s : batch.samples) CHECK(s.label == 0);
}

TEST_CASE("a cone fully containing a 500-point target senses all of it") {
    Environment env = flat_env();
    env.targets.push_back(sphere_target(Vec3(4.0, 4.0, -2.0), 0.5, 500, 7));
    SensorParams params;
    params.half_angle_rad = 30.0 * M_PI / 180.0;
    std::mt19937_64 rng(2);
    const SenseBatch batch = sense_at(env, SensingPose{Vec3(4, 4, 0), Vec3(0, 0, -1)}, params, rng);
    int positives = 0;
    for (const auto& s : batch.samples) positives += s.label;
    CHECK(positives == 500);
}

TEST_CASE("labels are noiseless and samples lie in the cone") {
    Environment env = flat_env();
    env.targets.push_back(sphere_target(Vec3(4.5, 4.5, -2.5), 0.8, 300, 11));
    SensorParams params;
    params.half_angle_rad = 25.0 * M_PI / 180.0;
    std::mt19937_64 rng(3);
    const SensingPose pose{Vec3(4, 4, 0), Vec3(0, 0, -1)};
    const SenseBatch batch = sense_at(env, pose, params, rng);
    const SensorCone cone = make_cone(pose, params, env.bounds);
    for (const auto& s : batch.samples) {
        CHECK(cone.contains(s.point));
        if (s.label == 1) {
            CHECK(occupied_by_target(env, s.point, params));
        } else {
            CHECK_FALSE(occupied_by_target(env, s.point, params));
        }
    }
}

TEST_CASE("free sample count tracks density * volume") {
    const Environment env = flat_env();
    SensorParams params;
    params.free_density = 10.0;
    const SensorCone cone =
        make_cone(SensingPose{Vec3(4, 4, 0), Vec3(0, 0, -1)}, params, env.bounds);
    // analytic volume cross-checked by Monte-Carlo integration over the bbox
    const double analytic = cone.volume();
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double r = cone.depth * std::tan(cone.half_angle);
        const double box_vol = (2 * r) * (2 * r) * cone.depth;
        int inside = 0;
        const int n = 400000;
        for (int i = 0; i < n; ++i) {
            const Vec3 p = cone.apex + Vec3(r * (2 * unit(rng) - 1), r * (2 * unit(rng) - 1),
                                            -cone.depth * unit(rng));
            if (cone.contains(p)) ++inside;
        }
        const double mc_vol = box_vol * inside / n;
        CHECK(analytic == doctest::Approx(mc_vol).epsilon(0.02));
    }

    const double expect = params.free_density * analytic;
    double total = 0.0;
    const int reps = 30;
    std::mt19937_64 rng(6);
    for (int i = 0; i < reps; ++i)
        total += static_cast<double>(
            sense_at(env, SensingPose{Vec3(4, 4, 0), Vec3(0, 0, -1)}, params, rng).samples.size());
    const double mean = total / reps;
    const double sigma = std::sqrt(expect / reps);  // Poisson, averaged
    CHECK(std::abs(mean - expect) < 3.0 * sigma + 1.0);
}

TEST_CASE("segment discretization: pose counts and spacing") {
    const SensingPose a{Vec3(0, 0, 0), Vec3(0, 0, -1)};
    const SensingPose b{Vec3(1, 0, 0), Vec3(0, 0, -1)};
    const auto poses = discretize_segment(a, b, 0.5);
    REQUIRE(poses.size() == 3);
    CHECK(poses[0].position.x() == doctest::Approx(0.0));
    CHECK(poses[1].position.x() == doctest::Approx(0.5));
    CHECK(poses[2].position.x() == doctest::Approx(1.0));

    CHECK(discretize_segment(a, a, 0.5).size() == 1);
}

TEST_CASE("orientation interpolation stays unit length") {
    const SensingPose a{Vec3(0, 0, 0), Vec3(0.3, 0, -1).normalized()};
    const SensingPose b{Vec3(1, 0, 0), Vec3(-0.3, 0.2, -1).normalized()};
    for (const auto& pose : discretize_segment(a, b, 0.1))
        CHECK(pose.orientation.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("path sensing covers exactly the swept membership (exhaustive oracle)") {
    Environment env = flat_env();
    env.targets.push_back(sphere_target(Vec3(4.0, 2.0, -2.0), 0.9, 200, 13));
    SensorParams params;
    params.half_angle_rad = 20.0 * M_PI / 180.0;
    const SensingPose a{Vec3(4, 0, 0), Vec3(0, 0, -1)};
    const SensingPose b{Vec3(4, 4, 0), Vec3(0, 0, -1)};
    std::mt19937_64 rng(17);
    const auto batches = sense_along(env, a, b, 0.25, params, rng);

    std::vector<SensorCone> cones;
    for (const auto& pose : discretize_segment(a, b, 0.25))
        cones.push_back(make_cone(pose, params, env.bounds));

    // oracle: brute-force point-in-any-cone over the discretized target
    std::size_t expected = 0;
    for (const auto& pt : env.targets[0].points)
        for (const auto& cone : cones)
            if (cone.contains(pt)) { ++expected; break; }

    std::vector<Vec3> positives;
    for (const auto& batch : batches)
        for (const auto& s : batch.samples)
            if (s.label == 1) positives.push_back(s.point);
    std::sort(positives.begin(), positives.end(), [](const Vec3& x, const Vec3& y) {
        return std::tie(x.x(), x.y(), x.z()) < std::tie(y.x(), y.y(), y.z());
    });
    positives.erase(std::unique(positives.begin(), positives.end(),
                                [](const Vec3& x, const Vec3& y) { return x.isApprox(y, 0.0); }),
                    positives.end());
    CHECK(positives.size() == expected);
    CHECK(expected > 0);
}

TEST_CASE("sensed fraction: empty, full, and monotone") {
    Environment env = flat_env();
    env.targets.push_back(sphere_target(Vec3(3.0, 3.0, -2.0), 0.5, 100, 19));
    env.targets.push_back(sphere_target(Vec3(6.0, 6.0, -2.0), 0.5, 100, 23));

    CHECK(sensed_fraction(env, {}) == 0.0);

    SensorCone everything{Vec3(4.5, 4.5, 3.0), Vec3(0, 0, -1), 1.4, 50.0};
    CHECK(sensed_fraction(env, {everything}) == 1.0);

    SensorParams params;
    params.half_angle_rad = 25.0 * M_PI / 180.0;
    std::vector<SensorCone> history;
    double prev = 0.0;
    CoverageTracker tracker(env);
    for (int c = 0; c < 10; ++c) {
        const SensorCone cone =
            make_cone(SensingPose{Vec3(c, 3, 0), Vec3(0, 0, -1)}, params, env.bounds);
        history.push_back(cone);
        tracker.add_cone(cone);
        const double frac = sensed_fraction(env, history);
        CHECK(frac >= prev);
        CHECK(tracker.fraction() == doctest::Approx(frac));
        prev = frac;
    }
    CHECK(prev > 0.0);
}

TEST_CASE("half-covered two-target scene gives fraction 0.5") {
    Environment env = flat_env();
    env.targets.push_back(sphere_target(Vec3(2.0, 2.0, -2.0), 0.4, 100, 29));
    env.targets.push_back(sphere_target(Vec3(7.0, 7.0, -2.0), 0.4, 100, 31));
    // one wide cone straight over the first target only
    SensorCone cone{Vec3(2.0, 2.0, 0.0), Vec3(0, 0, -1), 0.6, 6.0};
    int covered = 0;
    for (const auto& body : env.targets)
        for (const auto& pt : body.points)
            if (cone.contains(pt)) ++covered;
    REQUIRE(covered == 100);  // enumeration oracle: all of body 0, none of body 1
    CHECK(sensed_fraction(env, {cone}) == doctest::Approx(0.5));
}

TEST_CASE("auto cone depth reaches the bounds floor") {
    const Environment env = flat_env(10, 1.0, 6.0);
    SensorParams params;  // depth_cm = 0 -> auto
    const SensorCone cone =
        make_cone(SensingPose{Vec3(4, 4, 0), Vec3(0, 0, -1)}, params, env.bounds);
    CHECK(cone.depth == doctest::Approx(6.0));
}
