#include "sensepath/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sensepath {

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// query statistics in the configured space (latent by default)
void query_stats(const Vec3& x, const WeightPosterior& posterior, const HingeSet& hinges,
                 const AcquisitionParams& params, double& mean, double& std_out) {
    const OccupancyQuery q = query(x, posterior, hinges);
    if (params.use_prob_stats) {
        mean = q.prob;
        std_out = q.prob * (1.0 - q.prob) * q.std;  // delta-method spread
    } else {
        mean = q.mean;
        std_out = q.std;
    }
}

}  // namespace

double expected_improvement(double mean, double std, double f_plus, double xi) {
    if (std < 0.0) throw std::invalid_argument("expected_improvement: std must be >= 0");
    const double delta = mean - f_plus - xi;
    if (std == 0.0) return std::max(0.0, delta);
    const double z = delta / std;
    const double ei = delta * normal_cdf(z) + std * normal_pdf(z);
    return std::max(0.0, ei);
}

EIField update_ei_field(const WeightPosterior& posterior, const HingeSet& hinges,
                        const std::vector<Vec3>& query_points, const AcquisitionParams& params) {
    EIField field;
    field.query_points = &query_points;
    field.xi = params.xi;
    field.values.resize(query_points.size());

    std::vector<double> means(query_points.size());
    std::vector<double> stds(query_points.size());
    double f_plus = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < query_points.size(); ++i) {
        query_stats(query_points[i], posterior, hinges, params, means[i], stds[i]);
        f_plus = std::max(f_plus, means[i]);
    }
    field.f_plus = f_plus;
    for (std::size_t i = 0; i < query_points.size(); ++i)
        field.values[i] = expected_improvement(means[i], stds[i], f_plus, params.xi);
    return field;
}

ConeIndex build_cone_index(const WorkspaceGraph& graph, const std::vector<Vec3>& query_points,
                           const SensorParams& sensor, const Aabb& bounds, int edge_samples) {
    if (edge_samples < 2) throw std::invalid_argument("build_cone_index: edge_samples must be >= 2");
    ConeIndex index;
    index.edge_samples = edge_samples;

    const PointGridIndex spatial(query_points, 2.0);
    std::vector<int> candidates;
    auto members_of = [&](const SensingPose& pose) {
        const SensorCone cone = make_cone(pose, sensor, bounds);
        const Vec3 base = cone.apex + cone.depth * cone.axis;
        const double base_r = cone.depth * std::tan(cone.half_angle);
        const Vec3 lo = cone.apex.cwiseMin(base - Vec3::Constant(base_r));
        const Vec3 hi = cone.apex.cwiseMax(base + Vec3::Constant(base_r));
        spatial.query_box(lo, hi, candidates);
        std::vector<int> members;
        for (int i : candidates)
            if (cone.contains(query_points[i])) members.push_back(i);
        std::sort(members.begin(), members.end());
        return members;
    };

    index.vertex_members.reserve(graph.vertex_count());
    for (const auto& pose : graph.vertices) index.vertex_members.push_back(members_of(pose));

    index.edge_members.resize(graph.edges.size());
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto& edge = graph.edges[e];
        index.edge_members[e].reserve(edge_samples - 2);
        for (int k = 1; k < edge_samples - 1; ++k) {
            const double t = static_cast<double>(k) / (edge_samples - 1);
            index.edge_members[e].push_back(
                members_of(interpolate_pose(graph.vertices[edge.a], graph.vertices[edge.b], t)));
        }
    }
    return index;
}

void compute_vertex_values(const EIField& field, WorkspaceGraph& graph, const ConeIndex& index) {
    if (index.vertex_members.size() != static_cast<std::size_t>(graph.vertex_count()))
        throw std::invalid_argument("compute_vertex_values: index/graph mismatch");
    for (int v = 0; v < graph.vertex_count(); ++v) {
        double best = 0.0;
        for (int i : index.vertex_members[v]) best = std::max(best, field.values[i]);
        graph.vertex_values[v] = best;
    }
}

void compute_edge_costs(const EIField& field, WorkspaceGraph& graph, const ConeIndex& index,
                        const WeightPosterior& posterior, const HingeSet& hinges,
                        const AcquisitionParams& params) {
    if (params.lambda <= 0.0) throw std::invalid_argument("compute_edge_costs: lambda must be > 0");
    const int n_samples = index.edge_samples;

    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto& edge = graph.edges[e];
        double sum = 0.0;
        for (int k = 0; k < n_samples; ++k) {
            double value;
            if (params.integrate_surface_ei) {
                const double t = static_cast<double>(k) / (n_samples - 1);
                const SensingPose pose =
                    interpolate_pose(graph.vertices[edge.a], graph.vertices[edge.b], t);
                double mean, std_val;
                query_stats(pose.position, posterior, hinges, params, mean, std_val);
                value = expected_improvement(mean, std_val, field.f_plus, field.xi);
            } else if (k == 0) {
                value = graph.vertex_values[edge.a];
            } else if (k == n_samples - 1) {
                value = graph.vertex_values[edge.b];
            } else {
                value = 0.0;
                for (int i : index.edge_members[e][k - 1])
                    value = std::max(value, field.values[i]);
            }
            const double weight = (k == 0 || k == n_samples - 1) ? 0.5 : 1.0;
            sum += weight * value;
        }
        const double integral = edge.length * sum / (n_samples - 1);
        graph.edge_u_ei[e] = 1.0 / (integral + params.epsilon);
        graph.edge_costs[e] = edge.length + params.lambda * graph.edge_u_ei[e];
    }
}

int select_goal(const WorkspaceGraph& graph) {
    if (graph.vertex_values.empty()) throw std::invalid_argument("select_goal: empty graph");
    int best = 0;
    for (int v = 1; v < graph.vertex_count(); ++v)
        if (graph.vertex_values[v] > graph.vertex_values[best]) best = v;
    return best;
}

}  // namespace sensepath
