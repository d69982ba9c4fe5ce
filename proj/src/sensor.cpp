#include "sensepath/sensor.hpp"

#include <cmath>
#include <stdexcept>

namespace sensepath {

bool SensorCone::contains(const Vec3& p) const {
    const Vec3 d = p - apex;
    const double axial = d.dot(axis);
    if (axial < 0.0 || axial > depth) return false;
    const double radial_sq = d.squaredNorm() - axial * axial;
    const double limit = axial * std::tan(half_angle);
    return radial_sq <= limit * limit + 1e-15;
}

double SensorCone::volume() const {
    const double t = std::tan(half_angle);
    return M_PI * depth * depth * depth * t * t / 3.0;
}

SensorCone make_cone(const SensingPose& pose, const SensorParams& params, const Aabb& bounds) {
    if (params.half_angle_rad <= 0.0 || params.half_angle_rad >= M_PI / 2.0)
        throw std::invalid_argument("sensor: half_angle must be in (0, pi/2)");
    SensorCone cone;
    cone.apex = pose.position;
    cone.axis = pose.orientation.normalized();
    cone.half_angle = params.half_angle_rad;
    if (params.depth_cm > 0.0) {
        cone.depth = params.depth_cm;
    } else {
        // full-depth insonification: extend along the axis to the bounds floor
        const double dz = cone.axis.z();
        cone.depth = (dz < -1e-6) ? (bounds.min.z() - cone.apex.z()) / dz
                                  : bounds.extent().z();
    }
    if (cone.depth <= 0.0) throw std::invalid_argument("sensor: cone depth must be positive");
    return cone;
}

bool occupied_by_target(const Environment& env, const Vec3& p, const SensorParams& params) {
    for (const auto& body : env.targets)
        if (body.contains(p, params.membership_radius_cm)) return true;
    return false;
}

namespace {

// true if p is inside a body or within the exclusion shell of a target point
bool blocked_for_free_sample(const Environment& env, const Vec3& p, const SensorParams& params) {
    const double shell = params.exclusion_cm;
    for (const auto& body : env.targets) {
        if (body.has_shape) {
            const Vec3 d = (p - body.center).cwiseQuotient(body.radii + Vec3::Constant(shell));
            if (d.squaredNorm() <= 1.0) return true;
            continue;
        }
        const double r = shell + params.membership_radius_cm;
        const double r2 = r * r;
        for (const auto& q : body.points)
            if ((p - q).squaredNorm() <= r2) return true;
    }
    return false;
}

}  // namespace

SenseBatch sense_at(const Environment& env, const SensingPose& pose, const SensorParams& params,
                    std::mt19937_64& rng) {
    const SensorCone cone = make_cone(pose, params, env.bounds);
    SenseBatch batch;
    batch.pose = pose;

    for (const auto& body : env.targets)
        for (const auto& pt : body.points)
            if (cone.contains(pt)) batch.samples.push_back(LabeledSample{pt, 1});

    // orthonormal frame for sampling inside the cone
    const Vec3 w = cone.axis;
    Vec3 u = std::abs(w.z()) < 0.9 ? Vec3(0, 0, 1).cross(w) : Vec3(1, 0, 0).cross(w);
    u.normalize();
    const Vec3 v = w.cross(u);

    std::poisson_distribution<int> count_dist(params.free_density * cone.volume());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double tan_a = std::tan(cone.half_angle);
    const int n_free = count_dist(rng);
    for (int i = 0; i < n_free; ++i) {
        // uniform in the cone: axial pdf ~ t^2, disc radius ~ sqrt
        const double t = cone.depth * std::cbrt(unit(rng));
        const double r = t * tan_a * std::sqrt(unit(rng));
        const double theta = 2.0 * M_PI * unit(rng);
        const Vec3 p = cone.apex + t * w + r * (std::cos(theta) * u + std::sin(theta) * v);
        if (blocked_for_free_sample(env, p, params)) continue;
        batch.samples.push_back(LabeledSample{p, 0});
    }
    return batch;
}

SensingPose interpolate_pose(const SensingPose& from, const SensingPose& to, double t) {
    const Vec3 a = from.orientation.normalized();
    const Vec3 b = to.orientation.normalized();
    const double omega = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
    SensingPose pose;
    pose.position = (1.0 - t) * from.position + t * to.position;
    if (omega < 1e-9) {
        pose.orientation = a;
    } else {
        pose.orientation =
            (std::sin((1.0 - t) * omega) * a + std::sin(t * omega) * b) / std::sin(omega);
        pose.orientation.normalize();
    }
    return pose;
}

std::vector<SensingPose> discretize_segment(const SensingPose& from, const SensingPose& to,
                                            double step) {
    if (step <= 0.0) throw std::invalid_argument("sensor: step must be positive");
    const double length = (to.position - from.position).norm();
    const int n_steps = (length < 1e-12) ? 0 : static_cast<int>(std::ceil(length / step - 1e-9));

    std::vector<SensingPose> poses;
    poses.reserve(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) {
        const double t = (n_steps == 0) ? 0.0 : static_cast<double>(i) / n_steps;
        poses.push_back(interpolate_pose(from, to, t));
    }
    return poses;
}

std::vector<SenseBatch> sense_along(const Environment& env, const SensingPose& from,
                                    const SensingPose& to, double step,
                                    const SensorParams& params, std::mt19937_64& rng) {
    std::vector<SenseBatch> batches;
    for (const auto& pose : discretize_segment(from, to, step))
        batches.push_back(sense_at(env, pose, params, rng));
    return batches;
}

double sensed_fraction(const Environment& env, const std::vector<SensorCone>& history) {
    const int total = env.total_target_points();
    if (total == 0) return 0.0;
    int covered = 0;
    for (const auto& body : env.targets)
        for (const auto& pt : body.points)
            for (const auto& cone : history)
                if (cone.contains(pt)) { ++covered; break; }
    return static_cast<double>(covered) / total;
}

CoverageTracker::CoverageTracker(const Environment& env) {
    for (const auto& body : env.targets)
        points_.insert(points_.end(), body.points.begin(), body.points.end());
    covered_.assign(points_.size(), 0);
}

void CoverageTracker::add_cone(const SensorCone& cone) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (covered_[i]) continue;
        if (cone.contains(points_[i])) {
            covered_[i] = 1;
            ++covered_count_;
        }
    }
}

double CoverageTracker::fraction() const {
    return points_.empty() ? 0.0 : static_cast<double>(covered_count_) / points_.size();
}

}  // namespace sensepath
