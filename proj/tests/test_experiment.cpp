#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "seal/experiment.hpp"

using namespace seal;

namespace {

std::string write_temp_config(const std::string& body, const std::string& name) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << body;
    return path.string();
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.dataset = DatasetKind::synthetic;
    cfg.k = 1;
    cfg.loop_budget = 1;
    cfg.controller.k = 1;
    cfg.controller.loop_budget = 1;
    cfg.baselines.k = 1;
    cfg.seed = 20250101;
    cfg.synthetic.seed = 20250101;
    cfg.synthetic.n_questions = 6;
    cfg.synthetic.question_type = SyntheticQuestionType::bridge;
    cfg.methods = {MethodKind::basic, MethodKind::seal};
    cfg.workers = 2;
    return cfg;
}

}  // namespace

TEST_CASE("config files load with defaults and named hyperparameters") {
    const auto path = write_temp_config(R"INI(
[experiment]
dataset = synthetic
k = 1
loop_budget = 3
methods = basic, seal, crag
seed = 20250101

[controller]
epsilon = 0.1

[weights]
lambda_gap = 0.6

[synthetic]
n_questions = 5
question_type = bridge
)INI",
                                        "seal_cfg_ok.ini");
    const auto cfg = load_experiment_config(path);
    CHECK(cfg.k == 1);
    CHECK(cfg.loop_budget == 3);
    CHECK(cfg.controller.loop_budget == 3);
    CHECK(cfg.controller.epsilon == 0.1);
    CHECK(cfg.controller.weights.lambda_gap == 0.6);
    CHECK(cfg.controller.weights.lambda_corr == 0.2);  // default retained
    CHECK(cfg.methods.size() == 3);
    CHECK(cfg.seed == 20250101);
    CHECK(cfg.synthetic.seed == 20250101);  // one global seed
    std::remove(path.c_str());
}

TEST_CASE("nonzero temperature is a config validation error") {
    const auto path = write_temp_config(R"INI(
[experiment]
dataset = synthetic

[provider]
temperature = 0.7
)INI",
                                        "seal_cfg_temp.ini");
    CHECK_THROWS_AS(load_experiment_config(path), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("benchmark datasets require a path") {
    const auto path = write_temp_config(R"INI(
[experiment]
dataset = hotpot
)INI",
                                        "seal_cfg_nopath.ini");
    CHECK_THROWS_AS(load_experiment_config(path), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("experiment reproduces the repair gap and emits aligned outputs") {
    const auto outputs = run_experiment_collect(tiny_config());
    REQUIRE(outputs.runs.size() == 2);
    const auto& basic = outputs.summaries[0];
    const auto& repair = outputs.summaries[1];
    CHECK(basic.method == MethodKind::basic);
    CHECK(repair.method == MethodKind::seal);
    CHECK(basic.judge_em == 0.0);
    CHECK(repair.judge_em == 1.0);
    // strict alignment across methods
    for (std::size_t i = 0; i < outputs.runs[0].outcomes.size(); ++i) {
        CHECK(outputs.runs[0].outcomes[i].question_id ==
              outputs.runs[1].outcomes[i].question_id);
    }
    REQUIRE_FALSE(outputs.stats.empty());
    CHECK(outputs.stats[0].metric == "judge_em");
    CHECK(outputs.exit_code == 0);
}

TEST_CASE("two runs with one config are byte-identical on disk") {
    const auto base = std::filesystem::temp_directory_path() / "seal_experiment_det";
    std::filesystem::remove_all(base);
    const auto cfg = tiny_config();
    run_experiment_collect(cfg, (base / "a").string());
    run_experiment_collect(cfg, (base / "b").string());

    std::vector<std::filesystem::path> files_a;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(base / "a")) {
        if (entry.is_regular_file()) files_a.push_back(entry.path());
    }
    REQUIRE_FALSE(files_a.empty());
    for (const auto& file_a : files_a) {
        const auto rel = std::filesystem::relative(file_a, base / "a");
        const auto file_b = base / "b" / rel;
        INFO("file " << rel);
        REQUIRE(std::filesystem::exists(file_b));
        CHECK(slurp(file_a) == slurp(file_b));
    }
    std::filesystem::remove_all(base);
}

TEST_CASE("every method in one experiment reports the same index fingerprint") {
    const auto base = std::filesystem::temp_directory_path() / "seal_experiment_fp";
    std::filesystem::remove_all(base);
    auto cfg = tiny_config();
    cfg.methods = {MethodKind::basic, MethodKind::seal, MethodKind::crag,
                   MethodKind::adaptive_k};
    const auto outputs = run_experiment_collect(cfg, base.string());
    std::set<std::string> fingerprints;
    for (const auto& run : outputs.runs) {
        for (const auto& outcome : run.outcomes) {
            REQUIRE_FALSE(outcome.trace_path.empty());
            const auto events = Trace::load(outcome.trace_path);
            fingerprints.insert(
                events.at(0).at("payload").at("index_fingerprint").get<std::string>());
        }
    }
    CHECK(fingerprints.size() == 1);
    std::filesystem::remove_all(base);
}

TEST_CASE("loop ablation renders one row per budget") {
    auto cfg = tiny_config();
    const auto table = ablate_loop_budget(cfg, {0, 1});
    CHECK(table.find("| 0 |") != std::string::npos);
    CHECK(table.find("| 1 |") != std::string::npos);
    // the repair column moves from floor to ceiling on bridge fixtures
    CHECK(table.find("| 0 | 0.0") != std::string::npos);
    CHECK(table.find("| 1 | 100.0") != std::string::npos);
}

TEST_CASE("trace rendering narrates swaps and rejects empty traces") {
    const auto base = std::filesystem::temp_directory_path() / "seal_trace_render";
    std::filesystem::remove_all(base);
    const auto cfg = tiny_config();
    const auto outputs = run_experiment_collect(cfg, base.string());
    const auto& outcome = outputs.runs[1].outcomes[0];
    const auto narrative = render_trace(Trace::load(outcome.trace_path));
    CHECK(narrative.find("swap: evicted") != std::string::npos);
    CHECK(narrative.find("generate on [") != std::string::npos);
    CHECK(narrative.find("final ledger") != std::string::npos);

    const auto empty_path = (base / "empty.jsonl").string();
    std::ofstream(empty_path).close();
    CHECK_THROWS(Trace::load(empty_path));
    std::filesystem::remove_all(base);
}

TEST_CASE("results tables carry the exclusion-count columns") {
    const auto outputs = run_experiment_collect(tiny_config());
    CHECK(outputs.results_csv.find("judge_excluded") != std::string::npos);
    CHECK(outputs.results_csv.find("flagged_excluded") != std::string::npos);
    CHECK(outputs.results_markdown.find("Excluded (judge)") != std::string::npos);
}
