#include "sensepath/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

namespace sensepath {

const char* planner_name(PlannerKind kind) {
    switch (kind) {
        case PlannerKind::Full: return "full";
        case PlannerKind::NoReplan: return "no_replan";
        case PlannerKind::StraightLine: return "sl";
        case PlannerKind::DistanceAstar: return "ad";
        case PlannerKind::DijkstraEi: return "de";
    }
    return "unknown";
}

std::optional<PlannerKind> planner_from_name(const std::string& name) {
    if (name == "full") return PlannerKind::Full;
    if (name == "no_replan") return PlannerKind::NoReplan;
    if (name == "sl") return PlannerKind::StraightLine;
    if (name == "ad") return PlannerKind::DistanceAstar;
    if (name == "de") return PlannerKind::DijkstraEi;
    return std::nullopt;
}

double path_arc_length(const WorkspaceGraph& graph, const std::vector<int>& vertices) {
    double len = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i)
        len += (graph.vertices[vertices[i]].position - graph.vertices[vertices[i - 1]].position)
                   .norm();
    return len;
}

double path_cost(const WorkspaceGraph& graph, const std::vector<int>& vertices, CostMode mode) {
    double cost = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i) {
        bool found = false;
        for (const auto& [nbr, e] : graph.adjacency[vertices[i - 1]]) {
            if (nbr == vertices[i]) {
                cost += (mode == CostMode::Full) ? graph.edge_costs[e] : graph.edges[e].length;
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("path_cost: non-adjacent consecutive vertices");
    }
    return cost;
}

namespace {

Trajectory backtrack(const WorkspaceGraph& graph, const std::vector<int>& parent, int goal) {
    Trajectory traj;
    for (int v = goal; v != -1; v = parent[v]) traj.vertices.push_back(v);
    std::reverse(traj.vertices.begin(), traj.vertices.end());
    traj.arc_length = path_arc_length(graph, traj.vertices);
    return traj;
}

void check_endpoints(const WorkspaceGraph& graph, int start, int goal) {
    if (start < 0 || start >= graph.vertex_count() || goal < 0 || goal >= graph.vertex_count())
        throw std::invalid_argument("planner: start/goal out of range");
}

}  // namespace

Trajectory astar(const WorkspaceGraph& graph, int start, int goal, CostMode mode) {
    check_endpoints(graph, start, goal);
    const Vec3 goal_pos = graph.vertices[goal].position;

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> g_cost(graph.vertex_count(), inf);
    std::vector<int> parent(graph.vertex_count(), -1);
    std::vector<char> closed(graph.vertex_count(), 0);

    // ties: lower f, then higher g (deeper), then lower vertex index
    struct Node {
        double f, g;
        int v;
        bool operator>(const Node& o) const {
            if (f != o.f) return f > o.f;
            if (g != o.g) return g < o.g;
            return v > o.v;
        }
    };
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

    g_cost[start] = 0.0;
    open.push({(graph.vertices[start].position - goal_pos).norm(), 0.0, start});
    while (!open.empty()) {
        const Node node = open.top();
        open.pop();
        if (closed[node.v]) continue;
        closed[node.v] = 1;
        if (node.v == goal) return backtrack(graph, parent, goal);
        for (const auto& [nbr, e] : graph.adjacency[node.v]) {
            if (closed[nbr]) continue;
            const double w =
                (mode == CostMode::Full) ? graph.edge_costs[e] : graph.edges[e].length;
            const double cand = g_cost[node.v] + w;
            if (cand < g_cost[nbr]) {
                g_cost[nbr] = cand;
                parent[nbr] = node.v;
                const double h = (graph.vertices[nbr].position - goal_pos).norm();
                open.push({cand + h, cand, nbr});
            }
        }
    }
    throw std::runtime_error("astar: goal unreachable");
}

Trajectory dijkstra_ei(const WorkspaceGraph& graph, int start, int goal) {
    check_endpoints(graph, start, goal);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(graph.vertex_count(), inf);
    std::vector<int> parent(graph.vertex_count(), -1);
    std::vector<char> done(graph.vertex_count(), 0);

    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    dist[start] = 0.0;
    open.push({0.0, start});
    while (!open.empty()) {
        const auto [d, v] = open.top();
        open.pop();
        if (done[v]) continue;
        done[v] = 1;
        if (v == goal) return backtrack(graph, parent, goal);
        for (const auto& [nbr, e] : graph.adjacency[v]) {
            if (done[nbr]) continue;
            const double cand = d + graph.edge_u_ei[e];
            if (cand < dist[nbr]) {
                dist[nbr] = cand;
                parent[nbr] = v;
                open.push({cand, nbr});
            }
        }
    }
    throw std::runtime_error("dijkstra_ei: goal unreachable");
}

Trajectory straight_line(const WorkspaceGraph& graph, int start, int goal) {
    check_endpoints(graph, start, goal);
    Trajectory traj;
    if (start == goal) {
        traj.vertices = {start};
        return traj;
    }

    const Vec3 a = graph.vertices[start].position;
    const Vec3 b = graph.vertices[goal].position;
    // rasterize: nearest surface vertex for finely sampled points on the segment
    double min_edge = std::numeric_limits<double>::infinity();
    for (const auto& e : graph.edges) min_edge = std::min(min_edge, e.length);
    const int n_samples = std::max(2, static_cast<int>(std::ceil((b - a).norm() / (0.5 * min_edge))));

    std::vector<int> raster;
    for (int i = 0; i <= n_samples; ++i) {
        const Vec3 p = a + (b - a) * (static_cast<double>(i) / n_samples);
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int v = 0; v < graph.vertex_count(); ++v) {
            const double d = (graph.vertices[v].position - p).squaredNorm();
            if (d < best_d) { best_d = d; best = v; }
        }
        if (raster.empty() || raster.back() != best) raster.push_back(best);
    }

    // stitch into an adjacent walk with king moves on the grid
    traj.vertices.push_back(raster.front());
    for (std::size_t i = 1; i < raster.size(); ++i) {
        int r = traj.vertices.back() / graph.cols;
        int c = traj.vertices.back() % graph.cols;
        const int tr = raster[i] / graph.cols;
        const int tc = raster[i] % graph.cols;
        while (r != tr || c != tc) {
            r += (tr > r) - (tr < r);
            c += (tc > c) - (tc < c);
            traj.vertices.push_back(r * graph.cols + c);
        }
    }
    traj.arc_length = path_arc_length(graph, traj.vertices);
    return traj;
}

Trajectory truncate_at_threshold(const Trajectory& traj, const WorkspaceGraph& graph,
                                 double threshold) {
    if (threshold <= 0.0) throw std::invalid_argument("truncate_at_threshold: threshold must be > 0");
    Trajectory out;
    out.iteration = traj.iteration;
    double cum = 0.0;
    for (std::size_t i = 0; i < traj.vertices.size(); ++i) {
        if (i > 0)
            cum += (graph.vertices[traj.vertices[i]].position -
                    graph.vertices[traj.vertices[i - 1]].position)
                       .norm();
        out.vertices.push_back(traj.vertices[i]);
        if (cum >= threshold) break;
    }
    out.arc_length = path_arc_length(graph, out.vertices);
    return out;
}

TrialContext make_trial_context(const Environment& env, const TrialConfig& config) {
    TrialContext ctx;
    ctx.graph = build_graph(env);
    ctx.hinges = make_hinge_lattice(env.bounds, config.hinge_count, config.hinge_gamma);
    ctx.cone_index = build_cone_index(ctx.graph, ctx.hinges.points, config.sensor, env.bounds,
                                      config.acquisition.edge_samples);
    return ctx;
}

TrialResult run_trial(const Environment& env, const TrialConfig& config, PlannerKind kind,
                      std::uint64_t seed) {
    return run_trial(env, config, kind, seed, make_trial_context(env, config));
}

TrialResult run_trial(const Environment& env, const TrialConfig& config, PlannerKind kind,
                      std::uint64_t seed, const TrialContext& context) {
    using Clock = std::chrono::steady_clock;

    WorkspaceGraph graph = context.graph;  // mutable values/costs for this trial
    const HingeSet& hinges = context.hinges;

    TrialResult result;
    result.posterior = init_posterior(hinges.size(), config.prior_var, config.bias_prior_var);

    std::mt19937_64 rng(seed);
    CoverageTracker coverage(env);

    double min_edge = std::numeric_limits<double>::infinity();
    for (const auto& e : graph.edges) min_edge = std::min(min_edge, e.length);
    const double step =
        (config.sense_step_cm > 0.0) ? config.sense_step_cm : 0.25 * min_edge;

    std::uniform_int_distribution<int> start_dist(0, graph.vertex_count() - 1);
    int current = start_dist(rng);

    Trajectory planned;  // path produced at the end of the previous iteration
    double total_len = 0.0;

    for (int r = 1; r <= config.max_iterations; ++r) {
        const auto t0 = Clock::now();
        IterationRecord rec;
        rec.iteration = r;
        rec.start_vertex = current;

        std::vector<SenseBatch> batches;
        Trajectory executed;
        executed.iteration = r;
        double executed_len = 0.0;
        bool reached_target = false;

        if (r == 1) {
            const SensingPose& pose = graph.vertices[current];
            batches.push_back(sense_at(env, pose, config.sensor, rng));
            coverage.add_cone(make_cone(pose, config.sensor, env.bounds));
            executed.vertices = {current};
            reached_target = coverage.fraction() >= config.coverage_target;
        } else {
            executed.vertices = {planned.vertices.front()};
            double cum = 0.0;
            for (std::size_t i = 1; i < planned.vertices.size() && !reached_target; ++i) {
                const SensingPose& from = graph.vertices[planned.vertices[i - 1]];
                const SensingPose& to = graph.vertices[planned.vertices[i]];
                const auto poses = discretize_segment(from, to, step);
                Vec3 prev_pos = from.position;
                for (std::size_t k = 1; k < poses.size(); ++k) {
                    cum += (poses[k].position - prev_pos).norm();
                    prev_pos = poses[k].position;
                    batches.push_back(sense_at(env, poses[k], config.sensor, rng));
                    coverage.add_cone(make_cone(poses[k], config.sensor, env.bounds));
                    if (coverage.fraction() >= config.coverage_target) {
                        reached_target = true;
                        break;
                    }
                }
                executed.vertices.push_back(planned.vertices[i]);
            }
            executed_len = cum;
        }
        executed.arc_length = executed_len;

        if (!batches.empty()) {
            learn_params(result.posterior, batches, hinges, config.learn_tol,
                         config.learn_max_iters);
        }

        total_len += executed_len;
        current = executed.vertices.back();
        rec.executed_length = executed_len;
        rec.sensed_fraction = coverage.fraction();
        result.trajectories.push_back(executed);
        result.iterations = r;

        if (reached_target) {
            result.success = true;
            result.arc_length_to_target = total_len;
            rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            result.records.push_back(rec);
            break;
        }
        if (total_len >= config.arc_length_budget_cm || r == config.max_iterations) {
            rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            result.records.push_back(rec);
            break;
        }

        // plan the next stretch with the updated map
        const EIField field =
            update_ei_field(result.posterior, hinges, hinges.points, config.acquisition);
        compute_vertex_values(field, graph, context.cone_index);
        int goal = select_goal(graph);
        if (goal == current) {
            // argmax sits under the sensor already; take the best other vertex
            int best = -1;
            for (int v = 0; v < graph.vertex_count(); ++v)
                if (v != current && (best == -1 || graph.vertex_values[v] > graph.vertex_values[best]))
                    best = v;
            goal = best;
        }
        compute_edge_costs(field, graph, context.cone_index, result.posterior, hinges,
                           config.acquisition);

        Trajectory path;
        switch (kind) {
            case PlannerKind::Full:
            case PlannerKind::NoReplan:
                path = astar(graph, current, goal, CostMode::Full);
                break;
            case PlannerKind::DistanceAstar:
                path = astar(graph, current, goal, CostMode::DistanceOnly);
                break;
            case PlannerKind::StraightLine:
                path = straight_line(graph, current, goal);
                break;
            case PlannerKind::DijkstraEi:
                path = dijkstra_ei(graph, current, goal);
                break;
        }
        rec.goal_vertex = goal;
        rec.planned_length = path.arc_length;

        planned = (kind == PlannerKind::NoReplan)
                      ? path
                      : truncate_at_threshold(path, graph, config.replan_threshold_cm);

        rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        result.records.push_back(rec);
    }

    result.total_arc_length = total_len;
    if (result.success) result.arc_length_to_target = total_len;
    return result;
}

}  // namespace sensepath
