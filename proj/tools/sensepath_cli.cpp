#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sensepath/harness.hpp"

namespace {

using namespace sensepath;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitBudget = 2;

ExperimentConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return ExperimentConfig{};
    return ExperimentConfig::from_json_file(path);
}

int cmd_gen_env(std::uint64_t seed, const std::string& out, const std::string& config_path) {
    const ExperimentConfig cfg = load_config_or_default(config_path);
    const Environment env = generate_synthetic(seed, cfg.synthetic);
    save_environment(env, out);
    std::cout << "wrote " << out << " (" << env.vertex_count() << " vertices, "
              << env.targets.size() << " targets)\n";
    return kExitOk;
}

int cmd_run(const std::string& env_path, const std::string& planner, std::uint64_t seed,
            const std::string& config_path, const std::string& out_dir) {
    const ExperimentConfig cfg = load_config_or_default(config_path);
    const auto kind = planner_from_name(planner);
    if (!kind) {
        std::cerr << "unknown planner: " << planner << "\n";
        return kExitValidation;
    }
    const Environment env =
        env_path.empty() ? generate_synthetic(seed, cfg.synthetic) : load_environment(env_path);
    const TrialContext ctx = make_trial_context(env, cfg.trial);
    const TrialResult result = run_trial(env, cfg.trial, *kind, seed, ctx);

    const double auc = evaluate_map(result.posterior, ctx.hinges, env, cfg.eval_resolution_cm);
    if (!out_dir.empty())
        export_artifacts(result, env, ctx.hinges, ctx.graph, cfg.eval_resolution_cm,
                         cfg.trial.acquisition, out_dir);

    std::cout << "planner=" << planner << " seed=" << seed
              << " success=" << (result.success ? 1 : 0) << " iterations=" << result.iterations
              << " arc_length=" << result.total_arc_length << " auprc=" << auc << "\n";
    return result.success ? kExitOk : kExitBudget;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir) {
    const ExperimentConfig cfg = load_config_or_default(config_path);
    const EvalReport report = run_benchmark(cfg, out_dir);
    for (const auto& [name, st] : report.aggregates)
        std::cout << name << ": arc_length " << st.arc_length_mean << " +- " << st.arc_length_std
                  << ", auprc " << st.auprc_mean << " +- " << st.auprc_std << " ("
                  << st.successes << "/" << st.trials << " reached target)\n";
    return report.any_budget_exhausted() ? kExitBudget : kExitOk;
}

int cmd_eval(const std::string& grid_path, const std::string& env_path) {
    const OccupancyGrid grid = load_grid(grid_path);
    const Environment env = load_environment(env_path);

    std::vector<double> scores;
    std::vector<int> labels;
    for (int iz = 0; iz < grid.dims.z(); ++iz)
        for (int iy = 0; iy < grid.dims.y(); ++iy)
            for (int ix = 0; ix < grid.dims.x(); ++ix) {
                const Vec3 p = grid.cell_center(ix, iy, iz);
                int label = 0;
                for (const auto& body : env.targets)
                    if (body.contains(p, 0.1)) { label = 1; break; }
                labels.push_back(label);
                scores.push_back(
                    grid.values[(static_cast<std::size_t>(iz) * grid.dims.y() + iy) * grid.dims.x() +
                                ix]);
            }
    std::cout << "auprc=" << auprc(scores, labels) << "\n";
    return kExitOk;
}

// Re-emit a saved grid as per-z-slice CSV heat maps.
int cmd_export(const std::string& grid_path, const std::string& out_path) {
    const OccupancyGrid grid = load_grid(grid_path);
    std::ostringstream out;
    out << "z_slice,iy,ix,value\n";
    for (int iz = 0; iz < grid.dims.z(); ++iz)
        for (int iy = 0; iy < grid.dims.y(); ++iy)
            for (int ix = 0; ix < grid.dims.x(); ++ix) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.17g",
                              grid.values[(static_cast<std::size_t>(iz) * grid.dims.y() + iy) *
                                              grid.dims.x() +
                                          ix]);
                out << iz << "," << iy << "," << ix << "," << buf << "\n";
            }
    write_file_atomic(out_path, out.str());
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Informative sensing-path planning over subsurface occupancy maps"};
    app.require_subcommand(1);

    std::string config_path, env_path, out, planner = "full", grid_path;
    std::uint64_t seed = 1;

    auto* gen = app.add_subcommand("gen-env", "Generate a seeded synthetic environment");
    gen->add_option("--seed", seed, "RNG seed");
    gen->add_option("--out", out, "Output environment file")->required();
    gen->add_option("--config", config_path, "Config JSON");

    auto* run = app.add_subcommand("run", "Run a single trial");
    run->add_option("--env", env_path, "Environment file (default: synthetic from seed)");
    run->add_option("--planner", planner, "full|no_replan|sl|ad|de");
    run->add_option("--seed", seed, "RNG seed");
    run->add_option("--config", config_path, "Config JSON");
    run->add_option("--out", out, "Output directory for artifacts");

    auto* bench = app.add_subcommand("bench", "Planner sweep over seeded scenarios");
    bench->add_option("--config", config_path, "Config JSON");
    bench->add_option("--out", out, "Output directory");

    auto* eval = app.add_subcommand("eval", "AUPRC of a saved occupancy grid against an environment");
    eval->add_option("--grid", grid_path, "Occupancy grid file")->required();
    eval->add_option("--env", env_path, "Environment file")->required();

    auto* exp = app.add_subcommand("export", "Re-emit a saved grid as slice CSV");
    exp->add_option("--grid", grid_path, "Grid file")->required();
    exp->add_option("--out", out, "Output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_env(seed, out, config_path);
        if (run->parsed()) return cmd_run(env_path, planner, seed, config_path, out);
        if (bench->parsed()) return cmd_bench(config_path, out);
        if (eval->parsed()) return cmd_eval(grid_path, env_path);
        if (exp->parsed()) return cmd_export(grid_path, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
