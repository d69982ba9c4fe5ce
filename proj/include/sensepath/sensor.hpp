#pragma once

#include <random>
#include <vector>

#include "sensepath/environment.hpp"
#include "sensepath/geometry.hpp"

namespace sensepath {

// Cone-shaped sensing volume: apex at the sensing position, axis along the
// pose orientation.
struct SensorCone {
    Vec3 apex{Vec3::Zero()};
    Vec3 axis{0.0, 0.0, -1.0};
    double half_angle = 0.0;  // radians
    double depth = 0.0;       // cm

    bool contains(const Vec3& p) const;
    double volume() const;  // pi * depth^3 * tan(half_angle)^2 / 3
};

struct LabeledSample {
    Vec3 point{Vec3::Zero()};
    int label = 0;  // 1 = occupied by target anatomy
};

struct SenseBatch {
    SensingPose pose;
    std::vector<LabeledSample> samples;
};

struct SensorParams {
    double half_angle_rad = 15.0 * M_PI / 180.0;
    double depth_cm = 0.0;             // 0 = full depth down to the bounds floor
    double free_density = 4.0;         // free-space samples per cm^3
    double exclusion_cm = 0.05;        // shell around target points kept sample-free
    double membership_radius_cm = 0.1; // fallback for point-set-only targets
};

SensorCone make_cone(const SensingPose& pose, const SensorParams& params, const Aabb& bounds);

inline bool cone_contains(const SensorCone& cone, const Vec3& p) { return cone.contains(p); }

// Ground-truth membership of a point in any target body.
bool occupied_by_target(const Environment& env, const Vec3& p, const SensorParams& params);

// Noiseless volumetric sensing at one pose: every target point inside the
// cone labeled 1, plus Poisson-count uniform free-space samples labeled 0.
SenseBatch sense_at(const Environment& env, const SensingPose& pose, const SensorParams& params,
                    std::mt19937_64& rng);

// Sensing at arc-length intervals <= step along the straight segment between
// two poses, endpoints included, orientations spherically interpolated.
std::vector<SenseBatch> sense_along(const Environment& env, const SensingPose& from,
                                    const SensingPose& to, double step,
                                    const SensorParams& params, std::mt19937_64& rng);

std::vector<SensingPose> discretize_segment(const SensingPose& from, const SensingPose& to,
                                            double step);

// Position lerp + orientation slerp, t in [0, 1].
SensingPose interpolate_pose(const SensingPose& from, const SensingPose& to, double t);

// Fraction of all target points contained in at least one cone of the history.
double sensed_fraction(const Environment& env, const std::vector<SensorCone>& history);

// Incremental coverage bookkeeping for a trial: one flag per target point.
class CoverageTracker {
public:
    explicit CoverageTracker(const Environment& env);
    void add_cone(const SensorCone& cone);
    double fraction() const;

private:
    std::vector<Vec3> points_;
    std::vector<char> covered_;
    int covered_count_ = 0;
};

}  // namespace sensepath
