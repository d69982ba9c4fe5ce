#include "sensepath/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace sensepath {

namespace {

using nlohmann::json;

json vec3_list_to_json(const std::vector<Vec3>& pts) {
    json arr = json::array();
    for (const auto& p : pts) {
        arr.push_back(p.x());
        arr.push_back(p.y());
        arr.push_back(p.z());
    }
    return arr;
}

std::vector<Vec3> vec3_list_from_json(const json& arr) {
    if (!arr.is_array() || arr.size() % 3 != 0)
        throw std::runtime_error("expected flat float array with length divisible by 3");
    std::vector<Vec3> out;
    out.reserve(arr.size() / 3);
    for (std::size_t i = 0; i < arr.size(); i += 3)
        out.emplace_back(arr[i].get<double>(), arr[i + 1].get<double>(), arr[i + 2].get<double>());
    return out;
}

// Curved heightfield: seeded sum of 2-4 low-frequency sinusoids.
struct SurfaceWave {
    double amplitude, fx, fy, phase;
};

std::vector<SurfaceWave> make_waves(std::mt19937_64& rng, double extent) {
    std::uniform_int_distribution<int> n_dist(2, 4);
    std::uniform_real_distribution<double> amp(0.3, 0.8);
    std::uniform_int_distribution<int> freq(1, 3);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::vector<SurfaceWave> waves(n_dist(rng));
    for (auto& w : waves) {
        w.amplitude = amp(rng);
        w.fx = freq(rng) / extent;
        w.fy = freq(rng) / extent;
        w.phase = phase(rng);
    }
    return waves;
}

double surface_height(const std::vector<SurfaceWave>& waves, double x, double y) {
    double z = 0.0;
    for (const auto& w : waves)
        z += w.amplitude * std::sin(2.0 * M_PI * (w.fx * x + w.fy * y) + w.phase);
    return z;
}

double min_height_over_footprint(const std::vector<SurfaceWave>& waves, double cx, double cy,
                                 double rx, double ry) {
    double lo = std::numeric_limits<double>::infinity();
    constexpr int n = 7;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = cx + rx * (2.0 * i / (n - 1) - 1.0);
            const double y = cy + ry * (2.0 * j / (n - 1) - 1.0);
            lo = std::min(lo, surface_height(waves, x, y));
        }
    return lo;
}

}  // namespace

bool TargetBody::contains(const Vec3& p, double fallback_radius) const {
    if (has_shape) {
        const Vec3 d = (p - center).cwiseQuotient(radii);
        return d.squaredNorm() <= 1.0;
    }
    const double r2 = fallback_radius * fallback_radius;
    for (const auto& q : points)
        if ((p - q).squaredNorm() <= r2) return true;
    return false;
}

int Environment::total_target_points() const {
    int n = 0;
    for (const auto& t : targets) n += static_cast<int>(t.points.size());
    return n;
}

NormalEstimate estimate_normals(const std::vector<Vec3>& surface_vertices, int k) {
    const int n = static_cast<int>(surface_vertices.size());
    if (k < 3) throw std::invalid_argument("estimate_normals: k must be >= 3");
    if (n < k + 1) throw std::invalid_argument("estimate_normals: need at least k+1 vertices");

    NormalEstimate result;
    result.normals.resize(n);

    std::vector<std::pair<double, int>> dists(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            dists[j] = {(surface_vertices[j] - surface_vertices[i]).squaredNorm(), j};
        std::nth_element(dists.begin(), dists.begin() + k, dists.end());
        // dists[0..k] now holds self + k nearest; fit the tangent plane to the neighbors
        Vec3 mean = Vec3::Zero();
        for (int j = 0; j <= k; ++j) mean += surface_vertices[dists[j].second];
        mean /= (k + 1);
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (int j = 0; j <= k; ++j) {
            const Vec3 d = surface_vertices[dists[j].second] - mean;
            cov += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
        const Vec3 evals = eig.eigenvalues();  // ascending
        if (evals(1) <= 1e-12 * std::max(evals(2), 1e-300)) {
            result.degenerate.push_back(i);
            result.normals[i] = Vec3(0, 0, -1);
            continue;
        }
        Vec3 nrm = eig.eigenvectors().col(0);
        if (nrm.z() > 0) nrm = -nrm;  // point into the volume beneath the surface
        result.normals[i] = nrm.normalized();
    }
    return result;
}

Environment generate_synthetic(std::uint64_t seed, const SyntheticParams& p) {
    const int rows = p.grid_dims[0];
    const int cols = p.grid_dims[1];
    if (rows < 2 || cols < 2) throw std::invalid_argument("generate_synthetic: grid_dims must be >= 2x2");
    if (p.num_targets.first < 0 || p.num_targets.second < p.num_targets.first)
        throw std::invalid_argument("generate_synthetic: bad num_targets range");
    if (p.target_radius_cm.first <= 0 || p.target_radius_cm.second < p.target_radius_cm.first)
        throw std::invalid_argument("generate_synthetic: bad target_radius range");

    std::mt19937_64 rng(seed);
    const auto waves = make_waves(rng, p.extent_cm);

    Environment env;
    env.grid_rows = rows;
    env.grid_cols = cols;
    env.surface_vertices.reserve(rows * cols);
    double z_lo = std::numeric_limits<double>::infinity();
    double z_hi = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double x = p.extent_cm * c / (cols - 1);
            const double y = p.extent_cm * r / (rows - 1);
            const double z = surface_height(waves, x, y);
            env.surface_vertices.emplace_back(x, y, z);
            z_lo = std::min(z_lo, z);
            z_hi = std::max(z_hi, z);
        }
    env.bounds.min = Vec3(0.0, 0.0, z_lo - p.depth_cm);
    env.bounds.max = Vec3(p.extent_cm, p.extent_cm, z_hi);

    env.normals = estimate_normals(env.surface_vertices, p.normal_k).normals;

    std::uniform_int_distribution<int> count_dist(p.num_targets.first, p.num_targets.second);
    const int n_targets = count_dist(rng);
    std::uniform_real_distribution<double> radius_dist(p.target_radius_cm.first,
                                                       p.target_radius_cm.second);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int t = 0; t < n_targets; ++t) {
        bool placed = false;
        for (int attempt = 0; attempt < p.max_place_attempts && !placed; ++attempt) {
            const double r = radius_dist(rng);
            Vec3 radii(r, r, r);
            if (unit(rng) < 0.5) {
                // axis-aligned ellipsoid
                radii = Vec3(r * (0.7 + 0.6 * unit(rng)), r * (0.7 + 0.6 * unit(rng)),
                             r * (0.7 + 0.6 * unit(rng)));
            }
            const double margin_x = radii.x() + 0.5;
            const double margin_y = radii.y() + 0.5;
            if (p.extent_cm <= 2 * std::max(margin_x, margin_y)) continue;
            const double cx = margin_x + (p.extent_cm - 2 * margin_x) * unit(rng);
            const double cy = margin_y + (p.extent_cm - 2 * margin_y) * unit(rng);
            const double ceiling = min_height_over_footprint(waves, cx, cy, radii.x(), radii.y()) -
                                   p.surface_clearance_cm - radii.z();
            const double floor = env.bounds.min.z() + radii.z() + 0.2;
            if (ceiling <= floor) continue;
            const double cz = floor + (ceiling - floor) * unit(rng);
            const Vec3 center(cx, cy, cz);

            bool overlaps = false;
            for (const auto& other : env.targets) {
                const double gap = (other.center - center).norm() -
                                   other.radii.maxCoeff() - radii.maxCoeff();
                if (gap < 0.2) { overlaps = true; break; }
            }
            if (overlaps) continue;

            TargetBody body;
            body.id = t;
            body.has_shape = true;
            body.center = center;
            body.radii = radii;
            body.points.reserve(p.points_per_target);
            while (static_cast<int>(body.points.size()) < p.points_per_target) {
                // uniform in the unit ball, then scale by the radii
                Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
                const double len = dir.norm();
                if (len < 1e-12) continue;
                dir /= len;
                const double rad = std::cbrt(unit(rng));
                body.points.push_back(center + (rad * dir).cwiseProduct(radii));
            }
            env.targets.push_back(std::move(body));
            placed = true;
        }
        if (!placed)
            throw std::runtime_error("generate_synthetic: could not place target below the surface");
    }

    validate_environment(env);
    return env;
}

WorkspaceGraph build_graph(const Environment& env) {
    validate_environment(env);
    WorkspaceGraph g;
    g.rows = env.grid_rows;
    g.cols = env.grid_cols;
    g.vertices.resize(env.vertex_count());
    for (int i = 0; i < env.vertex_count(); ++i)
        g.vertices[i] = SensingPose{env.surface_vertices[i], env.normals[i]};

    g.adjacency.resize(g.vertex_count());
    // one undirected edge per neighbor pair; (dr,dc) below avoid duplicates
    constexpr int kOffsets[4][2] = {{0, 1}, {1, -1}, {1, 0}, {1, 1}};
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            const int a = r * g.cols + c;
            for (const auto& off : kOffsets) {
                const int nr = r + off[0];
                const int nc = c + off[1];
                if (nr < 0 || nr >= g.rows || nc < 0 || nc >= g.cols) continue;
                const int b = nr * g.cols + nc;
                const int e = static_cast<int>(g.edges.size());
                g.edges.push_back(GraphEdge{
                    a, b, (g.vertices[a].position - g.vertices[b].position).norm()});
                g.adjacency[a].emplace_back(b, e);
                g.adjacency[b].emplace_back(a, e);
            }
        }
    g.vertex_values.assign(g.vertex_count(), 0.0);
    g.edge_costs.resize(g.edges.size());
    g.edge_u_ei.assign(g.edges.size(), 0.0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) g.edge_costs[e] = g.edges[e].length;
    return g;
}

void validate_environment(const Environment& env) {
    const int n = env.vertex_count();
    if (env.grid_rows < 2 || env.grid_cols < 2 || n != env.grid_rows * env.grid_cols)
        throw std::runtime_error("environment: vertex count does not match grid_dims");
    if (static_cast<int>(env.normals.size()) != n)
        throw std::runtime_error("environment: normals count does not match vertices");
    for (const auto& v : env.surface_vertices)
        if (!v.allFinite()) throw std::runtime_error("environment: non-finite surface vertex");
    for (const auto& nrm : env.normals)
        if (std::abs(nrm.norm() - 1.0) > 1e-6)
            throw std::runtime_error("environment: normal is not unit length");

    for (const auto& body : env.targets) {
        for (const auto& pt : body.points) {
            if (!env.bounds.contains(pt))
                throw std::runtime_error("environment: target point outside bounds");
            // nearest surface vertex, then check the point lies on the interior
            // side of that vertex's tangent plane
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                const double d = (env.surface_vertices[i] - pt).squaredNorm();
                if (d < best_d) { best_d = d; best = i; }
            }
            const double depth = (pt - env.surface_vertices[best]).dot(env.normals[best]);
            if (depth <= 1e-6)
                throw std::runtime_error("environment: target point not below the surface");
        }
    }
}

void save_environment(const Environment& env, const std::string& path) {
    json j;
    j["grid_dims"] = {env.grid_rows, env.grid_cols};
    j["surface_vertices"] = vec3_list_to_json(env.surface_vertices);
    j["normals"] = vec3_list_to_json(env.normals);
    j["bounds"] = {{"min", {env.bounds.min.x(), env.bounds.min.y(), env.bounds.min.z()}},
                   {"max", {env.bounds.max.x(), env.bounds.max.y(), env.bounds.max.z()}}};
    json targets = json::array();
    for (const auto& t : env.targets) {
        json jt;
        jt["id"] = t.id;
        jt["points"] = vec3_list_to_json(t.points);
        if (t.has_shape) {
            jt["shape"] = {{"center", {t.center.x(), t.center.y(), t.center.z()}},
                           {"radii", {t.radii.x(), t.radii.y(), t.radii.z()}}};
        }
        targets.push_back(std::move(jt));
    }
    j["targets"] = std::move(targets);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

Environment load_environment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open environment file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed environment file: " + std::string(e.what()));
    }

    Environment env;
    try {
        env.grid_rows = j.at("grid_dims").at(0).get<int>();
        env.grid_cols = j.at("grid_dims").at(1).get<int>();
        env.surface_vertices = vec3_list_from_json(j.at("surface_vertices"));
        env.normals = vec3_list_from_json(j.at("normals"));
        const auto& b = j.at("bounds");
        env.bounds.min = Vec3(b.at("min").at(0), b.at("min").at(1), b.at("min").at(2));
        env.bounds.max = Vec3(b.at("max").at(0), b.at("max").at(1), b.at("max").at(2));
        for (const auto& jt : j.at("targets")) {
            TargetBody t;
            t.id = jt.at("id").get<int>();
            t.points = vec3_list_from_json(jt.at("points"));
            if (jt.contains("shape")) {
                const auto& s = jt.at("shape");
                t.has_shape = true;
                t.center = Vec3(s.at("center").at(0), s.at("center").at(1), s.at("center").at(2));
                t.radii = Vec3(s.at("radii").at(0), s.at("radii").at(1), s.at("radii").at(2));
            }
            env.targets.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed environment file: " + std::string(e.what()));
    }
    validate_environment(env);
    return env;
}

}  // namespace sensepath
