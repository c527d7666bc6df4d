#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "seal/baselines.hpp"
#include "seal/config.hpp"
#include "seal/controller.hpp"
#include "seal/eval.hpp"
#include "seal/http_provider.hpp"
#include "seal/index.hpp"
#include "seal/synth.hpp"
#include "seal/trace.hpp"

namespace seal {

// ---------------------------------------------------------------------------
// Shared environment construction

struct ExperimentData {
    std::vector<Document> documents;
    std::vector<Document> external_documents;
    std::vector<QAItem> items;  // seeded slice, the alignment order
    AliasMap alias_map;
    std::optional<Index> index;
    std::optional<Index> external_index;
    std::map<std::string, SyntheticAnswerKey> answer_keys;
    std::vector<std::string> warnings;
};

struct ProviderStack {
    std::shared_ptr<GeneratorPort> generator;
    std::shared_ptr<EmbeddingPort> embedder;
    std::shared_ptr<QueryAnalyzerPort> analyzer;
    std::shared_ptr<AssessorPort> assessor;
    std::shared_ptr<ExtractorPort> extractor;
    std::shared_ptr<JudgePort> judge;
    BaselinePorts baseline_ports;
};

inline ExperimentData build_experiment_data(const ExperimentConfig& cfg) {
    ExperimentData data;
    if (!cfg.alias_tsv.empty()) data.alias_map = AliasMap::load_tsv(cfg.alias_tsv);

    if (cfg.dataset == DatasetKind::synthetic) {
        auto corpus = generate_synthetic(cfg.synthetic);
        data.documents = std::move(corpus.documents);
        data.external_documents = std::move(corpus.external_documents);
        data.items = std::move(corpus.items);
        data.alias_map = std::move(corpus.alias_map);
        data.answer_keys = std::move(corpus.answer_keys);
    } else {
        auto loaded = load_benchmark(
            cfg.benchmark_path,
            cfg.dataset == DatasetKind::hotpot ? BenchmarkFormat::hotpot_json
                                               : BenchmarkFormat::two_wiki_json,
            data.alias_map);
        data.documents = std::move(loaded.documents);
        data.items = std::move(loaded.items);
        data.warnings = std::move(loaded.warnings);
    }
    if (cfg.slice_n > 0 && cfg.slice_n < data.items.size()) {
        data.items = sample_slice(data.items, cfg.slice_n, cfg.seed);
    }
    return data;
}

// One index per experiment; every method shares it (and its fingerprint).
inline void build_indices(ExperimentData& data, const ExperimentConfig& cfg,
                          const std::shared_ptr<EmbeddingPort>& embedder) {
    data.index.emplace(Index::build(segment_all(data.documents), cfg.retriever, embedder));
    if (!data.external_documents.empty()) {
        data.external_index.emplace(
            Index::build(segment_all(data.external_documents), cfg.retriever, embedder));
    }
}

inline ProviderStack build_provider_stack(const ExperimentConfig& cfg,
                                          const ExperimentData& data) {
    ProviderStack stack;
    PromptLibrary prompts(cfg.prompts_dir);

    if (cfg.provider.mode == ProviderMode::mock) {
        stack.generator = std::make_shared<DeterministicReader>();
        stack.embedder = std::make_shared<HashEmbedder>();
        stack.analyzer = std::make_shared<DeterministicAnalyzer>();
        stack.assessor = std::make_shared<DeterministicAssessor>(cfg.controller.thresholds);
        stack.extractor = std::make_shared<PatternExtractor>();
        stack.judge = std::make_shared<DeterministicJudge>();
    } else {
        std::shared_ptr<GeneratorPort> generator;
        std::shared_ptr<EmbeddingPort> embedder;
        if (cfg.provider.mode == ProviderMode::replay) {
            auto cassette = std::make_shared<Cassette>(Cassette::load(cfg.provider.cassette));
            generator = std::make_shared<ReplayGenerator>(cassette);
            embedder = std::make_shared<HashEmbedder>();
        } else {
            HttpProviderConfig http;
            http.base_url = cfg.provider.base_url;
            http.api_key_env = cfg.provider.api_key_env;
            http.max_retries = cfg.provider.max_retries;
            http.requests_per_second = cfg.provider.requests_per_second;
            auto provider = std::make_shared<HttpProvider>(http);
            embedder = provider;
            if (cfg.provider.mode == ProviderMode::record) {
                auto cassette = std::make_shared<Cassette>(Cassette::load(cfg.provider.cassette));
                generator = std::make_shared<RecordingGenerator>(provider, cassette);
            } else {
                generator = provider;
            }
        }
        // Unified backbone: the same generator port powers analyzer,
        // assessor, extractor and the final generation, under one model id.
        stack.generator = generator;
        stack.embedder = embedder;
        stack.analyzer = std::make_shared<ProviderAnalyzer>(generator, prompts.get("analyzer"),
                                                            cfg.provider.model_id);
        stack.assessor = std::make_shared<ProviderAssessor>(
            generator, prompts.get("assessor"), cfg.provider.model_id, cfg.controller.thresholds);
        stack.extractor = std::make_shared<ProviderExtractor>(generator, prompts.get("extractor"),
                                                              cfg.provider.model_id);
        stack.judge = std::make_shared<ProviderJudge>(generator, prompts.get("judge_system"),
                                                      prompts.get("judge_user_template"),
                                                      cfg.provider.model_id);
    }

    stack.baseline_ports.doc_grader = std::make_shared<LexicalDocGrader>();
    stack.baseline_ports.groundedness = std::make_shared<TokenGroundednessCheck>();
    stack.baseline_ports.answer_check = std::make_shared<UnknownAnswerCheck>();
    stack.baseline_ports.rewriter = std::make_shared<DeterministicRewrite>();
    stack.baseline_ports.external_index =
        data.external_index ? &*data.external_index : nullptr;
    return stack;
}

inline RunEnvironment make_run_environment(const ExperimentConfig& cfg, const ExperimentData& data,
                                           const ProviderStack& stack,
                                           const std::shared_ptr<ExtractionCache>& cache) {
    RunEnvironment env;
    env.index = &*data.index;
    env.alias_map = &data.alias_map;
    env.analyzer = stack.analyzer;
    env.assessor = stack.assessor;
    env.extractor = stack.extractor;
    env.generator = stack.generator;
    env.extraction_cache = cache;
    env.prompts = PromptLibrary(cfg.prompts_dir);
    env.model_id = cfg.provider.model_id;
    return env;
}

// ---------------------------------------------------------------------------
// Per-question execution

struct QuestionOutcome {
    std::string question_id;
    std::string answer;
    bool judged_correct = false;
    bool judge_valid = true;
    bool flagged = false;  // gold titles unresolved; excluded from P/R
    bool failed = false;
    std::optional<EvidenceScore> evidence;
    CostLedger cost;
    std::string halt_reason;
    std::string trace_path;
};

struct MethodRun {
    MethodKind method = MethodKind::seal;
    std::vector<QuestionOutcome> outcomes;  // slice order
    bool aborted = false;
    std::string abort_error;
};

namespace detail {

inline RunResult dispatch_method(MethodKind method, const QAItem& item,
                                 const RunEnvironment& env, const ExperimentConfig& cfg,
                                 const BaselinePorts& baseline_ports) {
    switch (method) {
        case MethodKind::seal:
            return run_controller(item.question_id, item.question, env, cfg.controller);
        case MethodKind::basic:
            return run_basic(item.question_id, item.question, env, cfg.k);
        case MethodKind::self_rag:
            return run_self_rag(item.question_id, item.question, env, baseline_ports,
                                cfg.baselines);
        case MethodKind::crag:
            return run_crag(item.question_id, item.question, env, baseline_ports, cfg.baselines);
        case MethodKind::adaptive_k: {
            BaselineConfig bc = cfg.baselines;
            bc.adaptive_buffer = std::nullopt;
            return run_adaptive_k(item.question_id, item.question, env, bc);
        }
        case MethodKind::adaptive_k_buffer: {
            BaselineConfig bc = cfg.baselines;
            if (!bc.adaptive_buffer) bc.adaptive_buffer = 5;
            return run_adaptive_k(item.question_id, item.question, env, bc);
        }
    }
    throw std::logic_error("unreachable method dispatch");
}

template <typename Fn>
inline void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, n == 0 ? std::size_t{1} : n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

// Runs one method over the question slice. Per-question failures are
// recorded, never dropped; results keep the slice order for strict pairing.
inline MethodRun run_method(MethodKind method, const ExperimentConfig& cfg,
                            const ExperimentData& data, const ProviderStack& stack,
                            const std::string& trace_dir) {
    MethodRun run;
    run.method = method;
    run.outcomes.resize(data.items.size());

    auto cache = std::make_shared<ExtractionCache>();
    const RunEnvironment env = make_run_environment(cfg, data, stack, cache);

    if (!trace_dir.empty())
        std::filesystem::create_directories(std::filesystem::path(trace_dir) /
                                            to_string(method));

    detail::parallel_for(data.items.size(), cfg.workers, [&](std::size_t i) {
        const QAItem& item = data.items[i];
        QuestionOutcome& outcome = run.outcomes[i];
        outcome.question_id = item.question_id;
        outcome.flagged = item.flagged;
        try {
            RunResult result = detail::dispatch_method(method, item, env, cfg,
                                                       stack.baseline_ports);
            outcome.answer = result.answer;
            outcome.cost = result.state.cost;
            outcome.halt_reason = result.halt_reason;
            outcome.failed = result.generator_failed;

            const auto judge_input =
                make_judge_input(item.question_id, item.question, result.answer,
                                 item.gold_answer, result.final_context, result.final_context);
            const auto verdict = stack.judge->judge(judge_input);
            outcome.judged_correct = verdict.correct;
            outcome.judge_valid = verdict.valid;

            if (!item.flagged) {
                std::vector<std::string> titles;
                for (const auto& c : result.final_context) titles.push_back(c.doc_id);
                outcome.evidence = evidence_score(titles, item.gold_titles, data.alias_map);
            }
            if (!trace_dir.empty()) {
                const auto path = std::filesystem::path(trace_dir) / to_string(method) /
                                  (item.question_id + ".jsonl");
                result.trace.save(path.string());
                outcome.trace_path = path.string();
            }
        } catch (const std::exception& e) {
            outcome.failed = true;
            outcome.answer.clear();
            outcome.judged_correct = false;
            outcome.halt_reason = std::string("error: ") + e.what();
        }
    });
    return run;
}

// ---------------------------------------------------------------------------
// Aggregation, tables, statistics report

struct MethodSummary {
    MethodKind method = MethodKind::seal;
    std::size_t n = 0;
    double judge_em = 0.0;  // fraction over judge-valid questions
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t judge_excluded = 0;
    std::size_t flagged_excluded = 0;
    double mean_retriever_calls = 0.0;
    double mean_generator_calls = 0.0;
};

inline MethodSummary summarize(const MethodRun& run) {
    MethodSummary s;
    s.method = run.method;
    s.n = run.outcomes.size();
    std::size_t correct = 0, judged = 0, scored = 0;
    double p = 0, r = 0, f = 0, retr = 0, gen = 0;
    for (const auto& o : run.outcomes) {
        if (o.judge_valid) {
            ++judged;
            correct += o.judged_correct ? 1 : 0;
        } else {
            ++s.judge_excluded;
        }
        if (o.flagged) ++s.flagged_excluded;
        if (o.evidence) {
            ++scored;
            p += o.evidence->precision;
            r += o.evidence->recall;
            f += o.evidence->f1;
        }
        retr += static_cast<double>(o.cost.retriever_calls);
        gen += static_cast<double>(o.cost.generator_calls);
    }
    s.judge_em = judged == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(judged);
    s.precision = scored == 0 ? 0.0 : p / static_cast<double>(scored);
    s.recall = scored == 0 ? 0.0 : r / static_cast<double>(scored);
    s.f1 = scored == 0 ? 0.0 : f / static_cast<double>(scored);
    s.mean_retriever_calls = s.n == 0 ? 0.0 : retr / static_cast<double>(s.n);
    s.mean_generator_calls = s.n == 0 ? 0.0 : gen / static_cast<double>(s.n);
    return s;
}

namespace detail {

inline std::string fmt_pct(double fraction) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << fraction * 100.0;
    return os.str();
}

inline std::string fmt_num(double value, int precision = 3) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << value;
    return os.str();
}

}  // namespace detail

// Comparison table, CSV form. Delta is Judge-EM versus the basic method when
// present.
inline std::string render_results_csv(const std::vector<MethodSummary>& summaries) {
    std::optional<double> basic_em;
    for (const auto& s : summaries) {
        if (s.method == MethodKind::basic) basic_em = s.judge_em;
    }
    std::string out =
        "method,n,judge_em_pct,precision_pct,recall_pct,f1_pct,delta_em_pp,judge_excluded,"
        "flagged_excluded,mean_retriever_calls,mean_generator_calls\n";
    for (const auto& s : summaries) {
        out += to_string(s.method);
        out += "," + std::to_string(s.n);
        out += "," + detail::fmt_pct(s.judge_em);
        out += "," + detail::fmt_pct(s.precision);
        out += "," + detail::fmt_pct(s.recall);
        out += "," + detail::fmt_pct(s.f1);
        out += ",";
        if (basic_em && s.method != MethodKind::basic)
            out += detail::fmt_num((s.judge_em - *basic_em) * 100.0, 1);
        out += "," + std::to_string(s.judge_excluded);
        out += "," + std::to_string(s.flagged_excluded);
        out += "," + detail::fmt_num(s.mean_retriever_calls, 2);
        out += "," + detail::fmt_num(s.mean_generator_calls, 2);
        out += "\n";
    }
    return out;
}

inline std::string render_results_markdown(const std::vector<MethodSummary>& summaries) {
    std::optional<double> basic_em;
    for (const auto& s : summaries) {
        if (s.method == MethodKind::basic) basic_em = s.judge_em;
    }
    std::string out =
        "| Method | n | Judge-EM (%) | Prec (%) | Rec (%) | F1 (%) | Delta EM (pp) | Excluded "
        "(judge) | Excluded (flagged) |\n"
        "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& s : summaries) {
        out += "| ";
        out += to_string(s.method);
        out += " | " + std::to_string(s.n);
        out += " | " + detail::fmt_pct(s.judge_em);
        out += " | " + detail::fmt_pct(s.precision);
        out += " | " + detail::fmt_pct(s.recall);
        out += " | " + detail::fmt_pct(s.f1);
        out += " | ";
        out += (basic_em && s.method != MethodKind::basic)
                   ? detail::fmt_num((s.judge_em - *basic_em) * 100.0, 1)
                   : std::string("-");
        out += " | " + std::to_string(s.judge_excluded);
        out += " | " + std::to_string(s.flagged_excluded);
        out += " |\n";
    }
    return out;
}

struct PairStat {
    std::string method_a;
    std::string method_b;
    std::string metric;  // judge_em | precision | recall | f1
    StatResult stat;
    bool reject = false;
};

// The full battery over every method pair: McNemar on Judge-EM, paired t on
// the evidence metrics, Holm-Bonferroni across the whole family.
inline std::vector<PairStat> compute_stats(const std::vector<MethodRun>& runs, double alpha = 0.05) {
    std::vector<PairStat> stats;
    for (std::size_t a = 0; a < runs.size(); ++a) {
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            const auto& ra = runs[a];
            const auto& rb = runs[b];
            std::vector<JudgeVerdict> va, vb;
            for (const auto& o : ra.outcomes)
                va.push_back({o.question_id, o.judged_correct, "", o.judge_valid});
            for (const auto& o : rb.outcomes)
                vb.push_back({o.question_id, o.judged_correct, "", o.judge_valid});
            const auto paired = pair_outcomes(va, vb);
            PairStat em;
            em.method_a = to_string(ra.method);
            em.method_b = to_string(rb.method);
            em.metric = "judge_em";
            em.stat = mcnemar(paired.records);
            stats.push_back(std::move(em));

            for (const char* metric : {"precision", "recall", "f1"}) {
                std::vector<double> xs, ys;
                for (std::size_t i = 0; i < ra.outcomes.size(); ++i) {
                    const auto& oa = ra.outcomes[i];
                    const auto& ob = rb.outcomes[i];
                    if (oa.question_id != ob.question_id)
                        throw EvalError("stats: method runs are not aligned");
                    if (!oa.evidence || !ob.evidence) continue;
                    auto pick = [&](const EvidenceScore& e) {
                        return std::string(metric) == "precision" ? e.precision
                               : std::string(metric) == "recall"  ? e.recall
                                                                  : e.f1;
                    };
                    xs.push_back(pick(*oa.evidence));
                    ys.push_back(pick(*ob.evidence));
                }
                if (xs.size() < 2) continue;
                PairStat ps;
                ps.method_a = to_string(ra.method);
                ps.method_b = to_string(rb.method);
                ps.metric = metric;
                ps.stat = paired_t(xs, ys);
                stats.push_back(std::move(ps));
            }
        }
    }
    // Family-wise correction over every p-value the battery produced.
    std::vector<double> ps;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        if (stats[i].stat.p_value) {
            ps.push_back(*stats[i].stat.p_value);
            idx.push_back(i);
        }
    }
    const auto adjusted = holm_bonferroni(ps, alpha);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        stats[idx[j]].stat.adjusted_p = adjusted[j].adjusted_p;
        stats[idx[j]].reject = adjusted[j].reject;
    }
    return stats;
}

inline nlohmann::json stats_to_json(const std::vector<PairStat>& stats) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : stats) {
        nlohmann::json j{{"method_a", s.method_a},
                         {"method_b", s.method_b},
                         {"metric", s.metric},
                         {"test", s.stat.test == StatTest::mcnemar ? "mcnemar" : "paired_t"},
                         {"statistic", s.stat.statistic},
                         {"degenerate", s.stat.degenerate},
                         {"reject_at_0_05", s.reject}};
        if (s.stat.p_value) j["p_value"] = *s.stat.p_value;
        if (s.stat.adjusted_p) j["adjusted_p"] = *s.stat.adjusted_p;
        if (s.stat.effect_size) j["cohens_dz"] = *s.stat.effect_size;
        if (s.stat.test == StatTest::mcnemar) {
            j["b"] = s.stat.b_count;
            j["c"] = s.stat.c_count;
        }
        out.push_back(std::move(j));
    }
    return out;
}

inline std::string render_stats_markdown(const std::vector<PairStat>& stats) {
    std::string out =
        "| Pair | Metric | Test | Statistic | p | adjusted p | Cohen's d_z | Reject (a=0.05) |\n"
        "|---|---|---|---|---|---|---|---|\n";
    for (const auto& s : stats) {
        out += "| " + s.method_a + " vs " + s.method_b;
        out += " | " + s.metric;
        out += std::string(" | ") + (s.stat.test == StatTest::mcnemar ? "mcnemar" : "paired_t");
        out += " | " + (s.stat.degenerate ? std::string("degenerate")
                                          : detail::fmt_num(s.stat.statistic, 4));
        out += " | " + (s.stat.p_value ? detail::fmt_num(*s.stat.p_value, 6) : std::string("-"));
        out += " | " +
               (s.stat.adjusted_p ? detail::fmt_num(*s.stat.adjusted_p, 6) : std::string("-"));
        out += " | " +
               (s.stat.effect_size ? detail::fmt_num(*s.stat.effect_size, 4) : std::string("-"));
        out += std::string(" | ") + (s.reject ? "yes" : "no");
        out += " |\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment driver

struct ExperimentOutputs {
    std::vector<MethodRun> runs;
    std::vector<MethodSummary> summaries;
    std::vector<PairStat> stats;
    std::string results_csv;
    std::string results_markdown;
    std::string stats_markdown;
    int exit_code = 0;
};

inline nlohmann::json outcome_to_json(const QuestionOutcome& o) {
    nlohmann::json j{{"question_id", o.question_id},
                     {"answer", o.answer},
                     {"judged_correct", o.judged_correct},
                     {"judge_valid", o.judge_valid},
                     {"flagged", o.flagged},
                     {"failed", o.failed},
                     {"halt_reason", o.halt_reason},
                     {"cost", o.cost.to_json()},
                     {"trace_path", o.trace_path}};
    if (o.evidence) {
        j["precision"] = o.evidence->precision;
        j["recall"] = o.evidence->recall;
        j["f1"] = o.evidence->f1;
    }
    return j;
}

inline ExperimentOutputs run_experiment_collect(const ExperimentConfig& cfg,
                                                const std::string& output_dir = "") {
    ExperimentOutputs outputs;
    ExperimentData data = build_experiment_data(cfg);
    ProviderStack stack = build_provider_stack(cfg, data);
    build_indices(data, cfg, stack.embedder);
    stack.baseline_ports.external_index = data.external_index ? &*data.external_index : nullptr;

    const std::string trace_dir =
        output_dir.empty() ? "" : (std::filesystem::path(output_dir) / "traces").string();

    for (const auto method : cfg.methods) {
        try {
            outputs.runs.push_back(run_method(method, cfg, data, stack, trace_dir));
        } catch (const std::exception& e) {
            MethodRun aborted;
            aborted.method = method;
            aborted.aborted = true;
            aborted.abort_error = e.what();
            outputs.runs.push_back(std::move(aborted));
            outputs.exit_code = 1;
        }
    }

    std::vector<MethodRun> completed;
    for (const auto& run : outputs.runs) {
        if (!run.aborted) completed.push_back(run);
        outputs.summaries.push_back(summarize(run));
    }
    if (completed.size() >= 2) outputs.stats = compute_stats(completed);
    outputs.results_csv = render_results_csv(outputs.summaries);
    outputs.results_markdown = render_results_markdown(outputs.summaries);
    outputs.stats_markdown = render_stats_markdown(outputs.stats);

    if (!output_dir.empty()) {
        std::filesystem::create_directories(output_dir);
        for (const auto& run : outputs.runs) {
            std::ofstream out(std::filesystem::path(output_dir) /
                              (std::string(to_string(run.method)) + ".jsonl"));
            for (const auto& o : run.outcomes) out << outcome_to_json(o).dump() << '\n';
        }
        std::ofstream(std::filesystem::path(output_dir) / "results.csv") << outputs.results_csv;
        std::ofstream(std::filesystem::path(output_dir) / "results.md")
            << outputs.results_markdown;
        std::ofstream(std::filesystem::path(output_dir) / "stats.json")
            << stats_to_json(outputs.stats).dump(2) << '\n';
        std::ofstream(std::filesystem::path(output_dir) / "stats.md") << outputs.stats_markdown;
    }
    return outputs;
}

inline int run_experiment(const ExperimentConfig& cfg) {
    const auto outputs = run_experiment_collect(cfg, cfg.output_dir);
    return outputs.exit_code;
}

// Loop-budget ablation: the repair controller at each L, one table.
inline std::string ablate_loop_budget(const ExperimentConfig& base_cfg,
                                      const std::vector<int>& budgets,
                                      const std::string& output_dir = "") {
    ExperimentConfig cfg = base_cfg;
    cfg.methods = {MethodKind::seal};
    ExperimentData data = build_experiment_data(cfg);
    ProviderStack stack = build_provider_stack(cfg, data);
    build_indices(data, cfg, stack.embedder);

    std::string csv = "loop_budget,judge_em_pct,precision_pct,mean_retriever_calls\n";
    std::string md = "| L | Judge-EM (%) | Prec (%) | Mean retriever calls |\n|---|---|---|---|\n";
    for (int L : budgets) {
        cfg.controller.loop_budget = L;
        const auto run = run_method(MethodKind::seal, cfg, data, stack, "");
        const auto s = summarize(run);
        csv += std::to_string(L) + "," + detail::fmt_pct(s.judge_em) + "," +
               detail::fmt_pct(s.precision) + "," + detail::fmt_num(s.mean_retriever_calls, 2) +
               "\n";
        md += "| " + std::to_string(L) + " | " + detail::fmt_pct(s.judge_em) + " | " +
              detail::fmt_pct(s.precision) + " | " + detail::fmt_num(s.mean_retriever_calls, 2) +
              " |\n";
    }
    if (!output_dir.empty()) {
        std::filesystem::create_directories(output_dir);
        std::ofstream(std::filesystem::path(output_dir) / "ablation_loop.csv") << csv;
        std::ofstream(std::filesystem::path(output_dir) / "ablation_loop.md") << md;
    }
    return md;
}

// ---------------------------------------------------------------------------
// Trace rendering (loop-by-loop narrative)

inline std::string render_trace(const std::vector<nlohmann::json>& events) {
    std::ostringstream os;
    for (const auto& e : events) {
        const std::string type = e.at("event_type").get<std::string>();
        const auto& p = e.at("payload");
        const int loop = e.at("loop_index").get<int>();
        if (type == "run_start") {
            os << "Run " << p.value("question_id", "") << " [" << p.value("method", "") << ", k="
               << p.value("k", 0) << "]\n";
            os << "  Q: " << p.value("question", "") << "\n";
        } else if (type == "initialize") {
            os << "  t=0 initial buffer:";
            for (const auto& s : p.at("buffer")) os << " " << s.value("doc_id", "");
            os << "\n";
        } else if (type == "assess") {
            os << "  t=" << loop << " assess: coverage=" << p.value("coverage", 0.0)
               << " corroboration=" << p.value("corroboration", 0.0)
               << " contradiction=" << (p.value("contradiction", false) ? "yes" : "no")
               << " answerability=" << p.value("answerability", 0.0)
               << (p.value("sufficient", false) ? " -> sufficient" : " -> repair") << "\n";
        } else if (type == "gaps") {
            os << "    gaps:";
            for (const auto& g : p.at("gaps"))
                os << " [" << g.value("gap_type", "") << ": " << g.value("missing_what", "")
                   << "]";
            os << "\n";
        } else if (type == "micro_queries") {
            os << "    micro-queries:";
            for (const auto& q : p.at("issued")) os << " \"" << q.get<std::string>() << "\"";
            if (!p.at("blocked").empty()) {
                os << " (blocked:";
                for (const auto& q : p.at("blocked")) os << " \"" << q.get<std::string>() << "\"";
                os << ")";
            }
            os << "\n";
        } else if (type == "swap") {
            os << "    swap: evicted \"" << p.value("victim", "") << "\" (S="
               << detail::fmt_num(p.value("victim_score", 0.0)) << ") for \""
               << p.value("candidate", "") << "\" (S="
               << detail::fmt_num(p.value("candidate_score", 0.0)) << ")\n";
        } else if (type == "no_swap") {
            os << "    no swap accepted\n";
        } else if (type == "generate") {
            os << "  generate on [";
            bool first = true;
            for (const auto& d : p.at("context_doc_ids")) {
                if (!first) os << ", ";
                os << d.get<std::string>();
                first = false;
            }
            os << "] -> \"" << p.value("answer", "") << "\"\n";
        } else if (type == "run_end") {
            os << "  end (" << p.value("halt_reason", "") << "), cost: "
               << p.at("cost").dump();
            if (p.contains("final_ledger")) {
                os << "\n  final ledger:\n";
                for (const auto& rel : p.at("final_ledger").at("relations")) {
                    os << "    (" << rel.value("head", "") << ") -" << rel.value("relation", "")
                       << "-> (" << rel.value("tail", "") << ")";
                    if (!rel.at("qualifiers").empty()) os << " " << rel.at("qualifiers").dump();
                    os << "\n";
                }
            }
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace seal
