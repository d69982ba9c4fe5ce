#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sensepath/harness.hpp"

using namespace sensepath;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(dir);
    return dir.string();
}

// small fast configuration for end-to-end checks
ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.synthetic.grid_dims = {20, 20};
    cfg.trial.hinge_count = 200;
    cfg.trial.max_iterations = 15;
    cfg.trial.arc_length_budget_cm = 40.0;
    cfg.eval_resolution_cm = 1.0;
    cfg.seeds = {4};
    cfg.planners = {PlannerKind::Full};
    return cfg;
}

}  // namespace

TEST_CASE("perfectly separated scores give area 1") {
    CHECK(auprc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("constant scores give exactly the positive fraction") {
    const std::vector<double> scores(10, 0.5);
    const std::vector<int> labels{1, 0, 0, 1, 0, 0, 0, 1, 0, 0};
    CHECK(auprc(scores, labels) == 0.3);
}

TEST_CASE("area under the PR curve matches brute-force threshold enumeration") {
    std::mt19937_64 rng(111);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::uniform_int_distribution<int> label(0, 1);
    std::uniform_int_distribution<int> quant(1, 8);
    for (int inst = 0; inst < 50; ++inst) {
        std::vector<double> scores;
        std::vector<int> labels;
        const int n = 20 + inst * 3;
        const int q = quant(rng);  // coarse quantization forces score ties
        bool has_pos = false, has_neg = false;
        for (int i = 0; i < n; ++i) {
            scores.push_back(std::round(score(rng) * q) / q);
            labels.push_back(label(rng));
            has_pos |= labels.back() == 1;
            has_neg |= labels.back() == 0;
        }
        if (!has_pos || !has_neg) continue;
        CHECK(std::abs(auprc(scores, labels) - oracles::auprc_bruteforce(scores, labels)) < 1e-12);
    }
}

TEST_CASE("degenerate label sets are rejected") {
    CHECK_THROWS_AS(auprc({0.5, 0.6}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(auprc({0.5, 0.6}, {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(auprc({0.5}, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(auprc({}, {}), std::invalid_argument);
}

TEST_CASE("map evaluation separates trained from untrained posteriors") {
    SyntheticParams sp;
    sp.grid_dims = {20, 20};
    sp.target_radius_cm = {1.2, 2.0};
    const Environment env = generate_synthetic(6, sp);
    const HingeSet hinges = make_hinge_lattice(env.bounds, 1536);

    const WeightPosterior blank = init_posterior(hinges.size(), 1e4);
    const double base = evaluate_map(blank, hinges, env, 1.0);
    CHECK(base > 0.0);
    CHECK(base < 0.3);

    // direct supervised fit on the evaluation lattice: ground-truth labels at
    // the cell centers, a restrained prior, and a few chained passes so the
    // variational updates reach a confident fit
    WeightPosterior trained = init_posterior(hinges.size(), 4.0);
    OccupancyGrid lattice;
    lattice.bounds = env.bounds;
    const Vec3 ext = env.bounds.extent();
    for (int a = 0; a < 3; ++a)
        lattice.dims(a) = std::max(1, static_cast<int>(std::ceil(ext(a))));
    std::vector<LabeledSample> batch;
    for (int iz = 0; iz < lattice.dims.z(); ++iz)
        for (int iy = 0; iy < lattice.dims.y(); ++iy)
            for (int ix = 0; ix < lattice.dims.x(); ++ix) {
                const Vec3 p = lattice.cell_center(ix, iy, iz);
                int label = 0;
                for (const auto& body : env.targets)
                    if (body.contains(p, 0.1)) { label = 1; break; }
                batch.push_back(LabeledSample{p, label});
            }
    for (int pass = 0; pass < 3; ++pass) learn_params(trained, batch, hinges);
    const double informed = evaluate_map(trained, hinges, env, 1.0);
    CHECK(informed > 0.9);
    CHECK(informed > 5.0 * base);

    CHECK_THROWS_AS(evaluate_map(blank, hinges, env, 0.0), std::invalid_argument);
}

TEST_CASE("aggregate statistics over hand-built rows") {
    EvalReport report;
    report.rows = {{"full", 1, true, 10.0, 0.8, 3},
                   {"full", 2, true, 14.0, 0.6, 4},
                   {"sl", 1, false, 30.0, 0.5, 9}};
    report.recompute_aggregates();
    REQUIRE(report.aggregates.count("full") == 1);
    const auto& full = report.aggregates.at("full");
    CHECK(full.trials == 2);
    CHECK(full.successes == 2);
    CHECK(full.arc_length_mean == doctest::Approx(12.0));
    CHECK(full.arc_length_std == doctest::Approx(std::sqrt(8.0)));
    CHECK(full.auprc_mean == doctest::Approx(0.7));
    CHECK(report.aggregates.at("sl").successes == 0);
    CHECK(report.any_budget_exhausted());
    report.rows[2].success = true;
    CHECK_FALSE(report.any_budget_exhausted());
}

TEST_CASE("experiment configuration survives a JSON round trip") {
    ExperimentConfig cfg = small_config();
    cfg.trial.acquisition.lambda = 42.5;
    cfg.trial.acquisition.xi = 0.02;
    cfg.trial.replan_threshold_cm = 4.5;
    cfg.trial.sensor.half_angle_rad = 0.3;
    cfg.synthetic.num_targets = {1, 3};
    cfg.seeds = {3, 9, 27};
    cfg.planners = {PlannerKind::NoReplan, PlannerKind::DijkstraEi};
    cfg.jobs = 3;

    const std::string path = temp_dir("sp_cfg") + "/config.json";
    cfg.save_json(path);
    const ExperimentConfig loaded = ExperimentConfig::from_json_file(path);
    CHECK(loaded.trial.acquisition.lambda == 42.5);
    CHECK(loaded.trial.acquisition.xi == 0.02);
    CHECK(loaded.trial.replan_threshold_cm == 4.5);
    CHECK(loaded.trial.sensor.half_angle_rad == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(loaded.trial.hinge_count == cfg.trial.hinge_count);
    CHECK(loaded.synthetic.grid_dims[0] == 20);
    CHECK(loaded.synthetic.num_targets == std::make_pair(1, 3));
    CHECK(loaded.seeds == std::vector<std::uint64_t>{3, 9, 27});
    CHECK(loaded.planners ==
          std::vector<PlannerKind>{PlannerKind::NoReplan, PlannerKind::DijkstraEi});
    CHECK(loaded.jobs == 3);

    CHECK_THROWS_AS(ExperimentConfig::from_json_file("/nonexistent/cfg.json"),
                    std::runtime_error);
}

TEST_CASE("benchmark rows agree with a direct trial run") {
    const ExperimentConfig cfg = small_config();
    const EvalReport report = run_benchmark(cfg);
    REQUIRE(report.rows.size() == 1);
    const TrialRow& row = report.rows[0];
    CHECK(row.planner == "full");
    CHECK(row.seed == 4);

    const Environment env = generate_synthetic(4, cfg.synthetic);
    const TrialContext ctx = make_trial_context(env, cfg.trial);
    const TrialResult direct = run_trial(env, cfg.trial, PlannerKind::Full, 4, ctx);
    CHECK(row.success == direct.success);
    CHECK(row.iterations == direct.iterations);
    CHECK(row.arc_length ==
          (direct.success ? direct.arc_length_to_target : direct.total_arc_length));
    CHECK(row.auprc ==
          evaluate_map(direct.posterior, ctx.hinges, env, cfg.eval_resolution_cm));
}

TEST_CASE("benchmark artifacts are byte-identical across repeated runs") {
    ExperimentConfig cfg = small_config();
    cfg.seeds = {4, 5};
    cfg.planners = {PlannerKind::Full, PlannerKind::DistanceAstar};
    const std::string dir_a = temp_dir("sp_bench_a");
    const std::string dir_b = temp_dir("sp_bench_b");
    run_benchmark(cfg, dir_a);
    run_benchmark(cfg, dir_b);

    for (const char* name : {"/trials.csv", "/report.json"}) {
        const std::string a = read_file(dir_a + name);
        CHECK(a == read_file(dir_b + name));
        CHECK(!a.empty());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
        if (!entry.is_directory()) continue;
        const std::string sub = entry.path().filename().string();
        for (const char* name :
             {"/iterations.csv", "/trajectories.csv", "/occupancy_grid.txt", "/ei_grid.txt"}) {
            CHECK(read_file(dir_a + "/" + sub + name) == read_file(dir_b + "/" + sub + name));
        }
    }
}

TEST_CASE("parallel benchmark matches the sequential row order") {
    ExperimentConfig cfg = small_config();
    cfg.seeds = {4, 5, 6};
    cfg.planners = {PlannerKind::Full, PlannerKind::StraightLine};
    const EvalReport serial = run_benchmark(cfg);
    cfg.jobs = 3;
    const EvalReport parallel = run_benchmark(cfg);
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].planner == parallel.rows[i].planner);
        CHECK(serial.rows[i].seed == parallel.rows[i].seed);
        CHECK(serial.rows[i].success == parallel.rows[i].success);
        CHECK(serial.rows[i].arc_length == parallel.rows[i].arc_length);
        CHECK(serial.rows[i].auprc == parallel.rows[i].auprc);
    }
}

TEST_CASE("atomic writes land with the full contents") {
    const std::string path = temp_dir("sp_atomic") + "/out.txt";
    write_file_atomic(path, "line one\nline two\n");
    CHECK(read_file(path) == "line one\nline two\n");
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST_CASE("empty seed or planner lists are rejected") {
    ExperimentConfig cfg = small_config();
    cfg.seeds.clear();
    CHECK_THROWS_AS(run_benchmark(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.planners.clear();
    CHECK_THROWS_AS(run_benchmark(cfg), std::invalid_argument);
}
