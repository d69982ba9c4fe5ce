#include "sensepath/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace sensepath {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double mean_of(const std::vector<double>& xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / (xs.size() - 1));
}

}  // namespace

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("auprc: scores/labels size mismatch");
    const int total_pos = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
    const int total_neg = static_cast<int>(labels.size()) - total_pos;
    if (total_pos == 0 || total_neg == 0)
        throw std::invalid_argument("auprc: need at least one positive and one negative label");

    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });

    double area = 0.0;
    double prev_recall = 0.0;
    double prev_precision = 1.0;
    bool first_group = true;
    int tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        // one threshold group per distinct score
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) ++tp; else ++fp;
            ++j;
        }
        const double recall = static_cast<double>(tp) / total_pos;
        const double precision = static_cast<double>(tp) / (tp + fp);
        if (first_group) {
            prev_precision = precision;  // anchor the curve at recall 0
            first_group = false;
        }
        area += (recall - prev_recall) * 0.5 * (precision + prev_precision);
        prev_recall = recall;
        prev_precision = precision;
        i = j;
    }
    return area;
}

double evaluate_map(const WeightPosterior& posterior, const HingeSet& hinges,
                    const Environment& env, double resolution_cm) {
    if (resolution_cm <= 0.0) throw std::invalid_argument("evaluate_map: bad resolution");
    OccupancyGrid lattice;
    lattice.bounds = env.bounds;
    const Vec3 ext = env.bounds.extent();
    for (int a = 0; a < 3; ++a)
        lattice.dims(a) = std::max(1, static_cast<int>(std::ceil(ext(a) / resolution_cm - 1e-9)));

    std::vector<double> scores;
    std::vector<int> labels;
    const double fallback = 0.1;
    for (int iz = 0; iz < lattice.dims.z(); ++iz)
        for (int iy = 0; iy < lattice.dims.y(); ++iy)
            for (int ix = 0; ix < lattice.dims.x(); ++ix) {
                const Vec3 p = lattice.cell_center(ix, iy, iz);
                int label = 0;
                for (const auto& body : env.targets)
                    if (body.contains(p, fallback)) { label = 1; break; }
                labels.push_back(label);
                scores.push_back(query(p, posterior, hinges).prob);
            }
    if (std::count(labels.begin(), labels.end(), 1) == 0)
        throw std::runtime_error("evaluate_map: lattice contains no positive cells");
    return auprc(scores, labels);
}

void EvalReport::recompute_aggregates() {
    aggregates.clear();
    std::map<std::string, std::vector<double>> arcs, aucs;
    for (const auto& row : rows) {
        auto& st = aggregates[row.planner];
        ++st.trials;
        if (row.success) ++st.successes;
        arcs[row.planner].push_back(row.arc_length);
        aucs[row.planner].push_back(row.auprc);
    }
    for (auto& [name, st] : aggregates) {
        st.arc_length_mean = mean_of(arcs[name]);
        st.arc_length_std = sample_std(arcs[name]);
        st.auprc_mean = mean_of(aucs[name]);
        st.auprc_std = sample_std(aucs[name]);
    }
}

bool EvalReport::any_budget_exhausted() const {
    return std::any_of(rows.begin(), rows.end(), [](const TrialRow& r) { return !r.success; });
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string iterations_csv(const TrialResult& result) {
    std::ostringstream out;
    out << "iteration,start,goal,planned_length,executed_length,sensed_fraction\n";
    for (const auto& rec : result.records)
        out << rec.iteration << "," << rec.start_vertex << "," << rec.goal_vertex << ","
            << fmt(rec.planned_length) << "," << fmt(rec.executed_length) << ","
            << fmt(rec.sensed_fraction) << "\n";
    return out.str();
}

std::string timings_csv(const TrialResult& result) {
    std::ostringstream out;
    out << "iteration,wall_ms\n";
    for (const auto& rec : result.records)
        out << rec.iteration << "," << fmt(rec.wall_ms) << "\n";
    return out.str();
}

std::string trajectories_csv(const TrialResult& result, const WorkspaceGraph& graph) {
    std::ostringstream out;
    out << "iteration,seq,vertex,x,y,z\n";
    for (const auto& traj : result.trajectories) {
        for (std::size_t i = 0; i < traj.vertices.size(); ++i) {
            const Vec3& p = graph.vertices[traj.vertices[i]].position;
            out << traj.iteration << "," << i << "," << traj.vertices[i] << "," << fmt(p.x())
                << "," << fmt(p.y()) << "," << fmt(p.z()) << "\n";
        }
    }
    return out.str();
}

}  // namespace

void export_artifacts(const TrialResult& result, const Environment& env, const HingeSet& hinges,
                      const WorkspaceGraph& graph, double eval_resolution_cm,
                      const AcquisitionParams& acq, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    write_file_atomic(out_dir + "/iterations.csv", iterations_csv(result));
    write_file_atomic(out_dir + "/timings.csv", timings_csv(result));
    write_file_atomic(out_dir + "/trajectories.csv", trajectories_csv(result, graph));

    const OccupancyGrid occ = export_grid(result.posterior, hinges, env.bounds, eval_resolution_cm);
    save_grid(occ, out_dir + "/occupancy_grid.txt");

    // EI heat-map grid on the same lattice
    OccupancyGrid ei_grid;
    ei_grid.bounds = occ.bounds;
    ei_grid.dims = occ.dims;
    std::vector<Vec3> centers;
    centers.reserve(occ.values.size());
    for (int iz = 0; iz < occ.dims.z(); ++iz)
        for (int iy = 0; iy < occ.dims.y(); ++iy)
            for (int ix = 0; ix < occ.dims.x(); ++ix)
                centers.push_back(occ.cell_center(ix, iy, iz));
    const EIField field = update_ei_field(result.posterior, hinges, centers, acq);
    ei_grid.values = field.values;
    save_grid(ei_grid, out_dir + "/ei_grid.txt");
}

void save_report(const EvalReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::ostringstream csv;
    csv << "planner,seed,success,arc_length,auprc,iterations\n";
    for (const auto& row : report.rows)
        csv << row.planner << "," << row.seed << "," << (row.success ? 1 : 0) << ","
            << fmt(row.arc_length) << "," << fmt(row.auprc) << "," << row.iterations << "\n";
    write_file_atomic(out_dir + "/trials.csv", csv.str());

    json j;
    j["rows"] = json::array();
    for (const auto& row : report.rows)
        j["rows"].push_back({{"planner", row.planner},
                             {"seed", row.seed},
                             {"success", row.success},
                             {"arc_length", row.arc_length},
                             {"auprc", row.auprc},
                             {"iterations", row.iterations}});
    j["aggregates"] = json::object();
    for (const auto& [name, st] : report.aggregates)
        j["aggregates"][name] = {{"trials", st.trials},
                                 {"successes", st.successes},
                                 {"arc_length_mean", st.arc_length_mean},
                                 {"arc_length_std", st.arc_length_std},
                                 {"auprc_mean", st.auprc_mean},
                                 {"auprc_std", st.auprc_std}};
    write_file_atomic(out_dir + "/report.json", j.dump(2) + "\n");
}

EvalReport run_benchmark(const ExperimentConfig& config, const std::string& out_dir) {
    if (config.seeds.empty()) throw std::invalid_argument("run_benchmark: no seeds");
    if (config.planners.empty()) throw std::invalid_argument("run_benchmark: no planners");

    const int n_seeds = static_cast<int>(config.seeds.size());
    const int n_planners = static_cast<int>(config.planners.size());
    std::vector<TrialRow> rows(static_cast<std::size_t>(n_seeds) * n_planners);

    std::atomic<int> next_seed{0};
    auto worker = [&]() {
        for (;;) {
            const int si = next_seed.fetch_add(1);
            if (si >= n_seeds) return;
            const std::uint64_t seed = config.seeds[si];
            const Environment env = generate_synthetic(seed, config.synthetic);
            const TrialContext ctx = make_trial_context(env, config.trial);
            for (int pi = 0; pi < n_planners; ++pi) {
                const PlannerKind kind = config.planners[pi];
                TrialRow row;
                row.planner = planner_name(kind);
                row.seed = seed;
                try {
                    const TrialResult result = run_trial(env, config.trial, kind, seed, ctx);
                    row.success = result.success;
                    row.arc_length =
                        result.success ? result.arc_length_to_target : result.total_arc_length;
                    row.iterations = result.iterations;
                    row.auprc = evaluate_map(result.posterior, ctx.hinges, env,
                                             config.eval_resolution_cm);
                    if (!out_dir.empty()) {
                        const std::string dir = out_dir + "/trial_" + row.planner + "_seed" +
                                                std::to_string(seed);
                        export_artifacts(result, env, ctx.hinges, ctx.graph,
                                         config.eval_resolution_cm, config.trial.acquisition, dir);
                    }
                } catch (const std::exception&) {
                    row.success = false;
                    row.arc_length = 0.0;
                    row.auprc = 0.0;
                }
                rows[static_cast<std::size_t>(si) * n_planners + pi] = std::move(row);
            }
        }
    };

    const int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    EvalReport report;
    report.rows = std::move(rows);
    report.recompute_aggregates();
    if (!out_dir.empty()) save_report(report, out_dir);
    return report;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed config file: " + std::string(e.what()));
    }

    ExperimentConfig cfg;
    auto get = [&](const char* key, auto& target) {
        if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
    };

    get("lambda", cfg.trial.acquisition.lambda);
    get("xi", cfg.trial.acquisition.xi);
    get("edge_samples", cfg.trial.acquisition.edge_samples);
    get("epsilon", cfg.trial.acquisition.epsilon);
    get("use_prob_stats", cfg.trial.acquisition.use_prob_stats);
    get("integrate_surface_ei", cfg.trial.acquisition.integrate_surface_ei);
    get("hinge_count", cfg.trial.hinge_count);
    get("hinge_gamma", cfg.trial.hinge_gamma);
    get("prior_var", cfg.trial.prior_var);
    get("bias_prior_var", cfg.trial.bias_prior_var);
    get("learn_tol", cfg.trial.learn_tol);
    get("learn_max_iters", cfg.trial.learn_max_iters);
    get("replan_threshold_cm", cfg.trial.replan_threshold_cm);
    get("sense_step_cm", cfg.trial.sense_step_cm);
    get("coverage_target", cfg.trial.coverage_target);
    get("max_iterations", cfg.trial.max_iterations);
    get("arc_length_budget_cm", cfg.trial.arc_length_budget_cm);

    if (j.contains("cone_half_angle_deg"))
        cfg.trial.sensor.half_angle_rad = j.at("cone_half_angle_deg").get<double>() * M_PI / 180.0;
    get("cone_depth_cm", cfg.trial.sensor.depth_cm);
    get("free_density", cfg.trial.sensor.free_density);
    get("exclusion_cm", cfg.trial.sensor.exclusion_cm);
    get("membership_radius_cm", cfg.trial.sensor.membership_radius_cm);

    if (j.contains("grid_dims")) {
        cfg.synthetic.grid_dims[0] = j.at("grid_dims").at(0).get<int>();
        cfg.synthetic.grid_dims[1] = j.at("grid_dims").at(1).get<int>();
    }
    get("extent_cm", cfg.synthetic.extent_cm);
    get("depth_cm", cfg.synthetic.depth_cm);
    if (j.contains("num_targets")) {
        cfg.synthetic.num_targets.first = j.at("num_targets").at(0).get<int>();
        cfg.synthetic.num_targets.second = j.at("num_targets").at(1).get<int>();
    }
    if (j.contains("target_radius_cm")) {
        cfg.synthetic.target_radius_cm.first = j.at("target_radius_cm").at(0).get<double>();
        cfg.synthetic.target_radius_cm.second = j.at("target_radius_cm").at(1).get<double>();
    }
    get("points_per_target", cfg.synthetic.points_per_target);
    get("normal_k", cfg.synthetic.normal_k);

    get("eval_resolution_cm", cfg.eval_resolution_cm);
    get("seeds", cfg.seeds);
    get("jobs", cfg.jobs);

    if (j.contains("planners")) {
        cfg.planners.clear();
        for (const auto& name : j.at("planners")) {
            const auto kind = planner_from_name(name.get<std::string>());
            if (!kind) throw std::runtime_error("unknown planner: " + name.get<std::string>());
            cfg.planners.push_back(*kind);
        }
    }
    return cfg;
}

void ExperimentConfig::save_json(const std::string& path) const {
    json j;
    j["lambda"] = trial.acquisition.lambda;
    j["xi"] = trial.acquisition.xi;
    j["edge_samples"] = trial.acquisition.edge_samples;
    j["epsilon"] = trial.acquisition.epsilon;
    j["use_prob_stats"] = trial.acquisition.use_prob_stats;
    j["integrate_surface_ei"] = trial.acquisition.integrate_surface_ei;
    j["hinge_count"] = trial.hinge_count;
    j["hinge_gamma"] = trial.hinge_gamma;
    j["prior_var"] = trial.prior_var;
    j["bias_prior_var"] = trial.bias_prior_var;
    j["learn_tol"] = trial.learn_tol;
    j["learn_max_iters"] = trial.learn_max_iters;
    j["replan_threshold_cm"] = trial.replan_threshold_cm;
    j["sense_step_cm"] = trial.sense_step_cm;
    j["coverage_target"] = trial.coverage_target;
    j["max_iterations"] = trial.max_iterations;
    j["arc_length_budget_cm"] = trial.arc_length_budget_cm;
    j["cone_half_angle_deg"] = trial.sensor.half_angle_rad * 180.0 / M_PI;
    j["cone_depth_cm"] = trial.sensor.depth_cm;
    j["free_density"] = trial.sensor.free_density;
    j["exclusion_cm"] = trial.sensor.exclusion_cm;
    j["membership_radius_cm"] = trial.sensor.membership_radius_cm;
    j["grid_dims"] = {synthetic.grid_dims[0], synthetic.grid_dims[1]};
    j["extent_cm"] = synthetic.extent_cm;
    j["depth_cm"] = synthetic.depth_cm;
    j["num_targets"] = {synthetic.num_targets.first, synthetic.num_targets.second};
    j["target_radius_cm"] = {synthetic.target_radius_cm.first, synthetic.target_radius_cm.second};
    j["points_per_target"] = synthetic.points_per_target;
    j["normal_k"] = synthetic.normal_k;
    j["eval_resolution_cm"] = eval_resolution_cm;
    j["seeds"] = seeds;
    j["jobs"] = jobs;
    json names = json::array();
    for (const auto kind : planners) names.push_back(planner_name(kind));
    j["planners"] = names;
    write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace sensepath
