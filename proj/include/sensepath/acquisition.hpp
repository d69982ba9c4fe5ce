#pragma once

#include <vector>

#include "sensepath/environment.hpp"
#include "sensepath/occupancy.hpp"
#include "sensepath/sensor.hpp"

namespace sensepath {

struct AcquisitionParams {
    double xi = 0.01;          // exploration parameter
    double lambda = 70.0;      // edge-cost scaling factor
    int edge_samples = 5;      // quadrature points per edge (trapezoid rule)
    double epsilon = 1e-9;     // guard on the reciprocal line integral
    bool use_prob_stats = true;      // EI on (prob mean, prob std) instead of latent stats
    bool integrate_surface_ei = false;  // integrate EI at surface points, not max-over-cone
};

// Closed-form expected improvement E[max(0, g - f_plus - xi)], g ~ N(mean, std^2).
double expected_improvement(double mean, double std, double f_plus, double xi);

// EI values over a fixed set of query points, plus the running best f(x+).
struct EIField {
    const std::vector<Vec3>* query_points = nullptr;
    std::vector<double> values;
    double f_plus = 0.0;
    double xi = 0.0;
};

EIField update_ei_field(const WeightPosterior& posterior, const HingeSet& hinges,
                        const std::vector<Vec3>& query_points, const AcquisitionParams& params);

// Precomputed cone membership of the query points, per vertex pose and per
// interior edge-sample pose. Poses are fixed for a trial, so this is built
// once per environment + sensor configuration.
struct ConeIndex {
    int edge_samples = 5;
    std::vector<std::vector<int>> vertex_members;              // [vertex] -> point indices
    std::vector<std::vector<std::vector<int>>> edge_members;   // [edge][interior sample]
};

ConeIndex build_cone_index(const WorkspaceGraph& graph, const std::vector<Vec3>& query_points,
                           const SensorParams& sensor, const Aabb& bounds, int edge_samples = 5);

// g(V_i) = max EI over the query points inside the vertex's cone (0 when empty).
void compute_vertex_values(const EIField& field, WorkspaceGraph& graph, const ConeIndex& index);

// U = U_dist + lambda / (line integral of per-pose EI + epsilon), per edge.
// Vertex values must be up to date (they provide the endpoint integrand).
void compute_edge_costs(const EIField& field, WorkspaceGraph& graph, const ConeIndex& index,
                        const WeightPosterior& posterior, const HingeSet& hinges,
                        const AcquisitionParams& params);

// argmax of g(V_i), ties broken by lowest vertex index.
int select_goal(const WorkspaceGraph& graph);

}  // namespace sensepath
