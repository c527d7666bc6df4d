#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "seal/baselines.hpp"
#include "seal/controller.hpp"
#include "seal/corpus.hpp"
#include "seal/index.hpp"
#include "seal/synth.hpp"

namespace seal {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DatasetKind { synthetic, hotpot, two_wiki };

enum class ProviderMode { mock, http, record, replay };

enum class MethodKind { seal, basic, self_rag, crag, adaptive_k, adaptive_k_buffer };

inline const char* to_string(MethodKind m) {
    switch (m) {
        case MethodKind::seal: return "seal";
        case MethodKind::basic: return "basic";
        case MethodKind::self_rag: return "self_rag";
        case MethodKind::crag: return "crag";
        case MethodKind::adaptive_k: return "adaptive_k";
        case MethodKind::adaptive_k_buffer: return "adaptive_k_buffer";
    }
    return "seal";
}

inline MethodKind method_from_string(const std::string& s) {
    if (s == "seal") return MethodKind::seal;
    if (s == "basic") return MethodKind::basic;
    if (s == "self_rag") return MethodKind::self_rag;
    if (s == "crag") return MethodKind::crag;
    if (s == "adaptive_k") return MethodKind::adaptive_k;
    if (s == "adaptive_k_buffer") return MethodKind::adaptive_k_buffer;
    throw ConfigError("unknown method '" + s + "'");
}

struct ProviderConfig {
    ProviderMode mode = ProviderMode::mock;
    std::string model_id = "offline";
    double temperature = 0.0;
    std::string base_url;
    std::string api_key_env = "SEAL_API_KEY";
    double requests_per_second = 0.0;
    int max_retries = 3;
    std::string cassette;
};

// One flat INI file, sections per module; every global hyperparameter has a
// named key with its default value.
struct ExperimentConfig {
    DatasetKind dataset = DatasetKind::synthetic;
    std::size_t slice_n = 0;  // 0 = all
    std::uint64_t seed = 20250101;
    std::size_t k = 3;
    int loop_budget = 1;
    std::vector<MethodKind> methods = {MethodKind::basic, MethodKind::seal};
    std::string output_dir = "out";

    RetrieverConfig retriever;
    ControllerConfig controller;
    ProviderConfig provider;
    BaselineConfig baselines;
    SyntheticSpec synthetic;

    std::string benchmark_path;
    BenchmarkFormat benchmark_format = BenchmarkFormat::hotpot_json;
    std::string alias_tsv;
    std::string prompts_dir;
    std::size_t workers = 0;  // 0 = hardware concurrency

    void validate() const {
        if (provider.temperature != 0.0)
            throw ConfigError("experiment configs require temperature = 0.0");
        if (methods.empty()) throw ConfigError("no methods configured");
        if (k < 1) throw ConfigError("k must be >= 1");
        if (loop_budget < 0) throw ConfigError("loop_budget must be >= 0");
        controller.weights.validate();
        baselines.validate();
        if (dataset != DatasetKind::synthetic && benchmark_path.empty())
            throw ConfigError("benchmark datasets require paths.benchmark_path");
    }
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig load_experiment_config(const std::string& path) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(path, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config parse failure: " + std::string(e.what()));
    }
    ExperimentConfig cfg;

    const std::string dataset = pt.get("experiment.dataset", "synthetic");
    if (dataset == "synthetic") cfg.dataset = DatasetKind::synthetic;
    else if (dataset == "hotpot") cfg.dataset = DatasetKind::hotpot;
    else if (dataset == "two_wiki") cfg.dataset = DatasetKind::two_wiki;
    else throw ConfigError("unknown dataset '" + dataset + "'");

    cfg.slice_n = pt.get("experiment.slice_n", cfg.slice_n);
    cfg.seed = pt.get("experiment.seed", cfg.seed);
    cfg.k = pt.get("experiment.k", cfg.k);
    cfg.loop_budget = pt.get("experiment.loop_budget", cfg.loop_budget);
    cfg.output_dir = pt.get("experiment.output_dir", cfg.output_dir);
    if (auto methods = pt.get_optional<std::string>("experiment.methods")) {
        cfg.methods.clear();
        for (const auto& m : detail::split_csv(*methods)) cfg.methods.push_back(method_from_string(m));
    }

    const std::string backend = pt.get("retriever.backend", "lexical");
    if (backend == "lexical") cfg.retriever.backend = RetrieverBackend::lexical;
    else if (backend == "dense") cfg.retriever.backend = RetrieverBackend::dense;
    else throw ConfigError("unknown retriever backend '" + backend + "'");
    cfg.retriever.top_m = pt.get("retriever.top_m", cfg.retriever.top_m);
    cfg.retriever.rerank = pt.get("retriever.rerank", cfg.retriever.rerank);
    cfg.retriever.embedding_model = pt.get("retriever.embedding_model", cfg.retriever.embedding_model);
    cfg.retriever.cache_dir = pt.get("retriever.cache_dir", cfg.retriever.cache_dir);

    cfg.controller.k = cfg.k;
    cfg.controller.loop_budget = cfg.loop_budget;
    cfg.controller.candidate_pool = cfg.retriever.top_m;
    cfg.controller.epsilon = pt.get("controller.epsilon", cfg.controller.epsilon);
    cfg.controller.fan_out_cap = pt.get("controller.fan_out_cap", cfg.controller.fan_out_cap);
    cfg.controller.max_swaps_per_loop =
        pt.get("controller.max_swaps_per_loop", cfg.controller.max_swaps_per_loop);
    cfg.controller.thresholds.coverage =
        pt.get("controller.coverage_threshold", cfg.controller.thresholds.coverage);
    cfg.controller.thresholds.answerability =
        pt.get("controller.answerability_threshold", cfg.controller.thresholds.answerability);
    cfg.controller.weights.lambda_gap = pt.get("weights.lambda_gap", cfg.controller.weights.lambda_gap);
    cfg.controller.weights.lambda_corr = pt.get("weights.lambda_corr", cfg.controller.weights.lambda_corr);
    cfg.controller.weights.lambda_nov = pt.get("weights.lambda_nov", cfg.controller.weights.lambda_nov);
    cfg.controller.weights.lambda_red = pt.get("weights.lambda_red", cfg.controller.weights.lambda_red);

    const std::string mode = pt.get("provider.mode", "mock");
    if (mode == "mock") cfg.provider.mode = ProviderMode::mock;
    else if (mode == "http") cfg.provider.mode = ProviderMode::http;
    else if (mode == "record") cfg.provider.mode = ProviderMode::record;
    else if (mode == "replay") cfg.provider.mode = ProviderMode::replay;
    else throw ConfigError("unknown provider mode '" + mode + "'");
    cfg.provider.model_id = pt.get("provider.model_id", cfg.provider.model_id);
    cfg.provider.temperature = pt.get("provider.temperature", cfg.provider.temperature);
    cfg.provider.base_url = pt.get("provider.base_url", cfg.provider.base_url);
    cfg.provider.api_key_env = pt.get("provider.api_key_env", cfg.provider.api_key_env);
    cfg.provider.requests_per_second =
        pt.get("provider.requests_per_second", cfg.provider.requests_per_second);
    cfg.provider.max_retries = pt.get("provider.max_retries", cfg.provider.max_retries);
    cfg.provider.cassette = pt.get("provider.cassette", cfg.provider.cassette);

    cfg.baselines.k = cfg.k;
    cfg.baselines.self_rag_max_attempts =
        pt.get("baselines.self_rag_max_attempts", cfg.baselines.self_rag_max_attempts);
    cfg.baselines.crag_external_results_cap =
        pt.get("baselines.crag_external_results_cap", cfg.baselines.crag_external_results_cap);
    cfg.baselines.crag_force_external =
        pt.get("baselines.crag_force_external", cfg.baselines.crag_force_external);
    cfg.baselines.adaptive_pool = pt.get("baselines.adaptive_pool", cfg.baselines.adaptive_pool);
    if (auto buffer = pt.get_optional<std::size_t>("baselines.adaptive_buffer")) {
        cfg.baselines.adaptive_buffer = *buffer;
    } else {
        cfg.baselines.adaptive_buffer = 5;
    }

    cfg.synthetic.seed = cfg.seed;
    cfg.synthetic.n_questions = pt.get("synthetic.n_questions", cfg.synthetic.n_questions);
    cfg.synthetic.n_distractors_per_question =
        pt.get("synthetic.n_distractors_per_question", cfg.synthetic.n_distractors_per_question);
    cfg.synthetic.hop_depth = pt.get("synthetic.hop_depth", cfg.synthetic.hop_depth);
    cfg.synthetic.bridge_rank_floor =
        pt.get("synthetic.bridge_rank_floor", cfg.synthetic.bridge_rank_floor);
    const std::string qtype = pt.get("synthetic.question_type", "mixed");
    if (qtype == "bridge") cfg.synthetic.question_type = SyntheticQuestionType::bridge;
    else if (qtype == "comparison") cfg.synthetic.question_type = SyntheticQuestionType::comparison;
    else if (qtype == "mixed") cfg.synthetic.question_type = SyntheticQuestionType::mixed;
    else throw ConfigError("unknown synthetic question_type '" + qtype + "'");
    cfg.synthetic.comparison_arity =
        pt.get("synthetic.comparison_arity", cfg.synthetic.comparison_arity);
    cfg.synthetic.external_fraction =
        pt.get("synthetic.external_fraction", cfg.synthetic.external_fraction);

    cfg.benchmark_path = pt.get("paths.benchmark_path", cfg.benchmark_path);
    const std::string fmt = pt.get("paths.benchmark_format", "hotpot_json");
    if (fmt == "hotpot_json") cfg.benchmark_format = BenchmarkFormat::hotpot_json;
    else if (fmt == "two_wiki_json") cfg.benchmark_format = BenchmarkFormat::two_wiki_json;
    else throw ConfigError("unknown benchmark_format '" + fmt + "'");
    cfg.alias_tsv = pt.get("paths.alias_tsv", cfg.alias_tsv);
    cfg.prompts_dir = pt.get("paths.prompts_dir", cfg.prompts_dir);
    cfg.workers = pt.get("runtime.workers", cfg.workers);

    cfg.validate();
    return cfg;
}

}  // namespace seal
