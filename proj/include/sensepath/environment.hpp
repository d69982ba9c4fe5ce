#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sensepath/geometry.hpp"

namespace sensepath {

// Position on the sensor workspace plus a unit direction pointing into the
// volume beneath it.
struct SensingPose {
    Vec3 position{Vec3::Zero()};
    Vec3 orientation{0.0, 0.0, -1.0};
};

// One subsurface body, discretized to a fixed number of points. Generated
// bodies also carry their analytic ellipsoid (center + per-axis radii) so
// membership tests do not depend on the discretization.
struct TargetBody {
    int id = 0;
    std::vector<Vec3> points;

    bool has_shape = false;
    Vec3 center{Vec3::Zero()};
    Vec3 radii{Vec3::Zero()};

    // Analytic membership when the shape is known, else within
    // fallback_radius of any discretized point.
    bool contains(const Vec3& p, double fallback_radius) const;
};

struct Environment {
    int grid_rows = 0;
    int grid_cols = 0;
    std::vector<Vec3> surface_vertices;  // row-major, grid_rows * grid_cols
    std::vector<Vec3> normals;           // unit, pointing into the volume
    std::vector<TargetBody> targets;
    Aabb bounds;

    int vertex_count() const { return static_cast<int>(surface_vertices.size()); }
    int vertex_index(int row, int col) const { return row * grid_cols + col; }
    int total_target_points() const;
};

struct GraphEdge {
    int a = 0;
    int b = 0;
    double length = 0.0;  // Euclidean, this is U_dist
};

// 8-connected grid graph over the sensing poses. vertex_values holds g(V_i),
// edge_costs the combined cost U, edge_u_ei the information sub-cost.
struct WorkspaceGraph {
    int rows = 0;
    int cols = 0;
    std::vector<SensingPose> vertices;
    std::vector<GraphEdge> edges;
    std::vector<std::vector<std::pair<int, int>>> adjacency;  // (neighbor, edge idx)
    std::vector<double> vertex_values;
    std::vector<double> edge_costs;
    std::vector<double> edge_u_ei;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
};

struct SyntheticParams {
    std::array<int, 2> grid_dims{60, 60};
    double extent_cm = 20.0;          // square surface patch, extent x extent
    double depth_cm = 5.0;            // bounds floor below the lowest surface point
    std::pair<int, int> num_targets{2, 4};
    std::pair<double, double> target_radius_cm{0.6, 1.4};
    int points_per_target = 500;
    int normal_k = 10;
    double surface_clearance_cm = 0.4;  // min gap between a body and the surface
    int max_place_attempts = 2000;
};

struct NormalEstimate {
    std::vector<Vec3> normals;
    std::vector<int> degenerate;  // vertex indices with rank-deficient neighborhoods
};

// Tangent-plane normals from the k nearest neighbors of each vertex,
// sign-flipped to point into the volume (negative z half-space).
NormalEstimate estimate_normals(const std::vector<Vec3>& surface_vertices, int k);

// Seeded synthetic scene: curved heightfield surface with ellipsoidal bodies
// placed below it. Deterministic for a fixed seed.
Environment generate_synthetic(std::uint64_t seed, const SyntheticParams& params = {});

WorkspaceGraph build_graph(const Environment& env);

void save_environment(const Environment& env, const std::string& path);
Environment load_environment(const std::string& path);

// Throws std::runtime_error when an invariant is violated.
void validate_environment(const Environment& env);

}  // namespace sensepath
