// Experiment runner CLI: builds the shared environment once per invocation,
// runs controllers over a question slice, and emits result tables, traces and
// statistics reports.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "seal/config.hpp"
#include "seal/experiment.hpp"
#include "seal/synth.hpp"

namespace {

int cmd_synth_generate(const seal::SyntheticSpec& spec, const std::string& out_dir) {
    const auto corpus = seal::generate_synthetic(spec);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    seal::save_corpus_jsonl(corpus.documents, (dir / "corpus.jsonl").string());
    if (!corpus.external_documents.empty())
        seal::save_corpus_jsonl(corpus.external_documents, (dir / "external.jsonl").string());
    corpus.alias_map.save_tsv((dir / "aliases.tsv").string());

    std::ofstream items(dir / "questions.jsonl");
    for (const auto& item : corpus.items) {
        items << nlohmann::json{{"question_id", item.question_id},
                                {"question", item.question},
                                {"gold_answer", item.gold_answer},
                                {"gold_titles", item.gold_titles},
                                {"reasoning_type", seal::to_string(item.reasoning_type)}}
                     .dump()
              << '\n';
    }
    nlohmann::json keys = nlohmann::json::object();
    for (const auto& [qid, key] : corpus.answer_keys) {
        nlohmann::json facts = nlohmann::json::object();
        for (const auto& [doc, recs] : key.doc_facts) {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& r : recs) {
                list.push_back({{"head", r.head},
                                {"relation", r.relation},
                                {"tail", r.tail},
                                {"qualifiers", r.qualifiers}});
            }
            facts[doc] = list;
        }
        keys[qid] = {{"bridge_entity", key.bridge_entity},
                     {"expected_micro_query", key.expected_micro_query},
                     {"gap_chain", key.gap_chain},
                     {"doc_facts", facts}};
    }
    std::ofstream(dir / "answer_keys.json") << keys.dump(2) << '\n';
    std::cout << "wrote " << corpus.documents.size() << " primary documents, "
              << corpus.external_documents.size() << " external documents, "
              << corpus.items.size() << " questions to " << out_dir << "\n";
    return 0;
}

int cmd_index_build(const std::string& config_path) {
    const auto cfg = seal::load_experiment_config(config_path);
    auto data = seal::build_experiment_data(cfg);
    auto stack = seal::build_provider_stack(cfg, data);
    seal::build_indices(data, cfg, stack.embedder);
    std::cout << "index built: " << data.index->size() << " chunks, backend "
              << (cfg.retriever.backend == seal::RetrieverBackend::dense ? "dense" : "lexical")
              << "\nfingerprint: " << data.index->fingerprint() << "\n";
    if (data.external_index) {
        std::cout << "external index: " << data.external_index->size()
                  << " chunks\nfingerprint: " << data.external_index->fingerprint() << "\n";
    }
    if (!cfg.retriever.cache_dir.empty())
        std::cout << "embedding cache: " << cfg.retriever.cache_dir << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    auto cfg = seal::load_experiment_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const auto outputs = seal::run_experiment_collect(cfg, cfg.output_dir);
    std::cout << outputs.results_markdown << "\n" << outputs.stats_markdown;
    for (const auto& run : outputs.runs) {
        if (run.aborted)
            std::cerr << "method " << seal::to_string(run.method)
                      << " aborted: " << run.abort_error << "\n";
    }
    std::cout << "outputs written to " << cfg.output_dir << "\n";
    return outputs.exit_code;
}

int cmd_ablate(const std::string& config_path, const std::string& budgets_csv,
               const std::string& out_override) {
    auto cfg = seal::load_experiment_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    std::vector<int> budgets;
    std::stringstream ss(budgets_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) budgets.push_back(std::stoi(seal::trim(tok)));
    if (budgets.empty()) budgets = {0, 1, 3, 5};
    std::cout << seal::ablate_loop_budget(cfg, budgets, cfg.output_dir);
    return 0;
}

int cmd_stats(const std::string& file_a, const std::string& file_b, double alpha) {
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        std::vector<nlohmann::json> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (!seal::trim(line).empty()) rows.push_back(nlohmann::json::parse(line));
        }
        return rows;
    };
    const auto rows_a = load(file_a);
    const auto rows_b = load(file_b);
    std::vector<seal::JudgeVerdict> va, vb;
    std::vector<double> pa, pb;
    for (const auto& r : rows_a)
        va.push_back({r.at("question_id"), r.at("judged_correct"), "", r.at("judge_valid")});
    for (const auto& r : rows_b)
        vb.push_back({r.at("question_id"), r.at("judged_correct"), "", r.at("judge_valid")});
    const auto paired = seal::pair_outcomes(va, vb);
    const auto mc = seal::mcnemar(paired.records);
    std::cout << "mcnemar: b=" << mc.b_count << " c=" << mc.c_count
              << " statistic=" << mc.statistic << " p=" << (mc.p_value ? *mc.p_value : 1.0)
              << " (excluded pairs: " << paired.excluded << ")\n";
    for (std::size_t i = 0; i < std::min(rows_a.size(), rows_b.size()); ++i) {
        if (rows_a[i].contains("precision") && rows_b[i].contains("precision")) {
            pa.push_back(rows_a[i].at("precision").get<double>());
            pb.push_back(rows_b[i].at("precision").get<double>());
        }
    }
    if (pa.size() >= 2) {
        const auto t = seal::paired_t(pa, pb);
        if (t.degenerate) {
            std::cout << "paired t (precision): degenerate (all differences identical)\n";
        } else {
            std::cout << "paired t (precision): t=" << t.statistic << " p=" << *t.p_value
                      << " d_z=" << *t.effect_size << "\n";
        }
    }
    (void)alpha;
    return 0;
}

int cmd_trace_show(const std::string& path, const std::string& question_id) {
    std::string file = path;
    if (std::filesystem::is_directory(path)) {
        if (question_id.empty())
            throw std::runtime_error("a directory path requires --question");
        bool found = false;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
            if (entry.path().filename() == question_id + ".jsonl") {
                file = entry.path().string();
                found = true;
                break;
            }
        }
        if (!found) throw std::runtime_error("no trace for question " + question_id);
    }
    std::cout << seal::render_trace(seal::Trace::load(file));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fixed-budget evidence-repair experiments"};
    app.require_subcommand(1);

    // synth generate
    auto* synth = app.add_subcommand("synth", "synthetic corpus tools")->require_subcommand(1);
    auto* generate = synth->add_subcommand("generate", "emit a seeded synthetic corpus");
    seal::SyntheticSpec spec;
    std::string synth_out = "synth_out";
    std::string synth_type = "mixed";
    generate->add_option("--seed", spec.seed, "global random seed");
    generate->add_option("--questions", spec.n_questions, "number of questions");
    generate->add_option("--distractors", spec.n_distractors_per_question,
                         "distractors per question");
    generate->add_option("--hop-depth", spec.hop_depth, "bridge hop depth (2 or 3)");
    generate->add_option("--rank-floor", spec.bridge_rank_floor,
                         "minimum initial rank of the answer document");
    generate->add_option("--type", synth_type, "bridge | comparison | mixed");
    generate->add_option("--arity", spec.comparison_arity, "entities per comparison question");
    generate->add_option("--external-fraction", spec.external_fraction,
                         "fraction of distractors held out as the external partition");
    generate->add_option("--out", synth_out, "output directory");

    // index build
    auto* index = app.add_subcommand("index", "index tools")->require_subcommand(1);
    auto* build = index->add_subcommand("build", "build the experiment index");
    std::string index_config;
    build->add_option("--config", index_config, "experiment config file")->required();

    // run
    auto* run = app.add_subcommand("run", "run a configured experiment");
    std::string run_config, run_out;
    run->add_option("--config", run_config, "experiment config file")->required();
    run->add_option("--out", run_out, "override output directory");

    // ablate-loop
    auto* ablate = app.add_subcommand("ablate-loop", "loop-budget ablation for the repair controller");
    std::string ablate_config, ablate_budgets = "0,1,3,5", ablate_out;
    ablate->add_option("--config", ablate_config, "experiment config file")->required();
    ablate->add_option("--budgets", ablate_budgets, "comma-separated loop budgets");
    ablate->add_option("--out", ablate_out, "override output directory");

    // stats
    auto* stats = app.add_subcommand("stats", "paired statistics over two per-method result files");
    std::string stats_a, stats_b;
    double alpha = 0.05;
    stats->add_option("--a", stats_a, "method A results .jsonl")->required();
    stats->add_option("--b", stats_b, "method B results .jsonl")->required();
    stats->add_option("--alpha", alpha, "family-wise error rate");

    // trace show
    auto* trace = app.add_subcommand("trace", "trace tools")->require_subcommand(1);
    auto* show = trace->add_subcommand("show", "render a run trace as a narrative");
    std::string trace_path, trace_question;
    show->add_option("path", trace_path, "trace file or traces directory")->required();
    show->add_option("--question", trace_question, "question id (when path is a directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            if (synth_type == "bridge") spec.question_type = seal::SyntheticQuestionType::bridge;
            else if (synth_type == "comparison")
                spec.question_type = seal::SyntheticQuestionType::comparison;
            else spec.question_type = seal::SyntheticQuestionType::mixed;
            return cmd_synth_generate(spec, synth_out);
        }
        if (build->parsed()) return cmd_index_build(index_config);
        if (run->parsed()) return cmd_run(run_config, run_out);
        if (ablate->parsed()) return cmd_ablate(ablate_config, ablate_budgets, ablate_out);
        if (stats->parsed()) return cmd_stats(stats_a, stats_b, alpha);
        if (show->parsed()) return cmd_trace_show(trace_path, trace_question);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
