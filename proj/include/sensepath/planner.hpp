#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sensepath/acquisition.hpp"
#include "sensepath/environment.hpp"
#include "sensepath/occupancy.hpp"
#include "sensepath/sensor.hpp"

namespace sensepath {

struct Trajectory {
    std::vector<int> vertices;  // consecutive entries are graph-adjacent
    double arc_length = 0.0;    // sum of Euclidean edge lengths, cm
    int iteration = 0;
};

enum class CostMode { Full, DistanceOnly };

enum class PlannerKind { Full, NoReplan, StraightLine, DistanceAstar, DijkstraEi };

const char* planner_name(PlannerKind kind);
std::optional<PlannerKind> planner_from_name(const std::string& name);

// A* over the workspace graph with straight-line Euclidean distance to the
// goal as the heuristic. Full mode uses the combined edge cost U, distance
// mode only U_dist. Both dominate the heuristic, so the result is optimal.
Trajectory astar(const WorkspaceGraph& graph, int start, int goal, CostMode mode);

// 3D segment from start to goal rasterized onto the surface grid and
// stitched into an adjacent-vertex walk.
Trajectory straight_line(const WorkspaceGraph& graph, int start, int goal);

// Dijkstra with only the EI sub-cost as edge weight.
Trajectory dijkstra_ei(const WorkspaceGraph& graph, int start, int goal);

// Longest prefix ending at the first vertex whose cumulative arc length
// reaches the threshold; unchanged when the whole path is shorter.
Trajectory truncate_at_threshold(const Trajectory& traj, const WorkspaceGraph& graph,
                                 double threshold);

double path_cost(const WorkspaceGraph& graph, const std::vector<int>& vertices, CostMode mode);
double path_arc_length(const WorkspaceGraph& graph, const std::vector<int>& vertices);

struct TrialConfig {
    SensorParams sensor;
    AcquisitionParams acquisition;
    int hinge_count = 3468;
    double hinge_gamma = 0.0;        // 0 = auto from lattice spacing
    double prior_var = 1e4;
    double bias_prior_var = 1e-6;    // anchored global offset; <= 0 for the common prior
    double learn_tol = 1e-4;
    int learn_max_iters = 100;
    double replan_threshold_cm = 6.0;
    double sense_step_cm = 0.0;      // 0 = quarter of the minimum edge length
    double coverage_target = 0.95;
    int max_iterations = 200;
    double arc_length_budget_cm = 500.0;
};

struct IterationRecord {
    int iteration = 0;
    int start_vertex = -1;
    int goal_vertex = -1;
    double planned_length = 0.0;
    double executed_length = 0.0;
    double sensed_fraction = 0.0;
    double wall_ms = 0.0;
};

struct TrialResult {
    bool success = false;       // reached the coverage target within budget
    double arc_length_to_target = 0.0;  // cumulative length at the crossing pose
    double total_arc_length = 0.0;
    int iterations = 0;
    std::vector<IterationRecord> records;
    std::vector<Trajectory> trajectories;  // executed portion per iteration
    WeightPosterior posterior;
};

// Shared per-environment precomputation, reusable across planners and trials.
struct TrialContext {
    WorkspaceGraph graph;
    HingeSet hinges;
    ConeIndex cone_index;
};

TrialContext make_trial_context(const Environment& env, const TrialConfig& config);

// One full run of the sensing loop: random start, sense, learn, update EI,
// select goal, plan, execute up to the replan threshold, repeat until the
// coverage target or the budget is hit. Deterministic for a fixed seed.
TrialResult run_trial(const Environment& env, const TrialConfig& config, PlannerKind kind,
                      std::uint64_t seed, const TrialContext& context);
TrialResult run_trial(const Environment& env, const TrialConfig& config, PlannerKind kind,
                      std::uint64_t seed);

}  // namespace sensepath
