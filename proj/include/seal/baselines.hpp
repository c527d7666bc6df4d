#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seal/assessors.hpp"
#include "seal/controller.hpp"
#include "seal/index.hpp"
#include "seal/state.hpp"
#include "seal/trace.hpp"

namespace seal {

enum class BaselineMethod { basic, self_rag, crag, adaptive_k };

inline const char* to_string(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::basic: return "basic";
        case BaselineMethod::self_rag: return "self_rag";
        case BaselineMethod::crag: return "crag";
        case BaselineMethod::adaptive_k: return "adaptive_k";
    }
    return "basic";
}

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::basic;
    std::size_t k = 3;
    int self_rag_max_attempts = 3;
    std::size_t crag_external_results_cap = 1;
    // Always take the corrective branch regardless of the grade; models the
    // add-only behavior in stress fixtures.
    bool crag_force_external = false;
    std::size_t adaptive_pool = 50;
    std::optional<std::size_t> adaptive_buffer;

    void validate() const {
        if (self_rag_max_attempts < 1)
            throw std::invalid_argument("self_rag_max_attempts must be >= 1");
        if (adaptive_pool < 2) throw std::invalid_argument("adaptive_pool must be >= 2");
    }
};

// Grader/rewriter ports plus the external retrieval source for the
// corrective branch. The external index stands in for a web search: it
// serves documents from outside the primary index.
struct BaselinePorts {
    std::shared_ptr<DocGraderPort> doc_grader;
    std::shared_ptr<GroundednessPort> groundedness;
    std::shared_ptr<AnswerCheckPort> answer_check;
    std::shared_ptr<QueryRewritePort> rewriter;
    const Index* external_index = nullptr;
};

namespace detail {

inline void trace_run_start(Trace& trace, const std::string& question_id,
                            const std::string& question, const char* method,
                            const RunEnvironment& env, std::size_t k) {
    trace.event("run_start", 0,
                {{"question_id", question_id},
                 {"question", question},
                 {"method", method},
                 {"k", k},
                 {"index_fingerprint", env.index->fingerprint()},
                 {"grounding_prompt_sha256", env.prompts.get("grounding").sha256},
                 {"model_id", env.model_id}});
}

inline void finish_run(RunResult& result, const std::string& question,
                       const RunEnvironment& env) {
    try {
        result.answer = grounded_generate(question, result.final_context, env, result.state.cost,
                                          result.trace, result.state.loop_index);
    } catch (const std::exception& e) {
        result.generator_failed = true;
        result.error = e.what();
        result.trace.event("generate_error", result.state.loop_index, {{"error", e.what()}});
    }
    result.trace.event("run_end", result.state.loop_index,
                       {{"halt_reason", result.halt_reason},
                        {"cost", result.state.cost.to_json()}});
}

}  // namespace detail

// Linear retrieve -> generate: one retrieval of the top-k, one generation.
// Definitionally equal to the repair controller at L=0.
inline RunResult run_basic(const std::string& question_id, const std::string& question,
                           const RunEnvironment& env, std::size_t k) {
    RunResult result;
    result.question_id = question_id;
    detail::trace_run_start(result.trace, question_id, question, "basic", env, k);
    const auto results = env.index->query(question, k);
    result.state.cost.retriever_calls = 1;
    for (const auto& r : results) result.final_context.push_back(r.chunk);
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& r : results) docs.push_back({{"doc_id", r.chunk.doc_id}, {"rank", r.rank}});
    result.trace.event("retrieval", 0, {{"query", question}, {"results", docs}});
    result.halt_reason = "single_pass";
    detail::finish_run(result, question, env);
    return result;
}

// Retrieve -> grade documents -> generate, with hallucination and
// answer-relevance checks; on failure the query is transformed and the cycle
// re-runs, hard-capped at max_attempts generations. When every attempt fails
// its checks the final attempt's answer is returned, flagged.
inline RunResult run_self_rag(const std::string& question_id, const std::string& question,
                              const RunEnvironment& env, const BaselinePorts& ports,
                              const BaselineConfig& config) {
    config.validate();
    RunResult result;
    result.question_id = question_id;
    detail::trace_run_start(result.trace, question_id, question, "self_rag", env, config.k);

    std::string query = question;
    std::string answer;
    std::vector<Chunk> context;
    bool passed = false;
    int attempt = 0;
    for (attempt = 1; attempt <= config.self_rag_max_attempts; ++attempt) {
        const auto results = env.index->query(query, config.k);
        result.state.cost.retriever_calls += 1;

        context.clear();
        nlohmann::json grades = nlohmann::json::array();
        for (const auto& r : results) {
            bool relevant = true;
            try {
                relevant = ports.doc_grader->relevant(question, r.chunk);
            } catch (const std::exception&) {
                relevant = true;  // grader failure keeps the document, flagged
                grades.push_back({{"doc_id", r.chunk.doc_id}, {"grader_error", true}});
            }
            grades.push_back({{"doc_id", r.chunk.doc_id}, {"relevant", relevant}});
            if (relevant) context.push_back(r.chunk);
        }
        result.trace.event("grade_documents", attempt, {{"query", query}, {"grades", grades}});

        answer = grounded_generate(question, context, env, result.state.cost, result.trace,
                                   attempt);
        const bool grounded = ports.groundedness->grounded(answer, context);
        const bool addresses = ports.answer_check->addresses(question, answer);
        result.trace.event("reflect", attempt,
                           {{"grounded", grounded}, {"addresses", addresses}});
        if (grounded && addresses) {
            passed = true;
            break;
        }
        if (attempt < config.self_rag_max_attempts) {
            query = ports.rewriter->rewrite(question, attempt + 1);
            result.trace.event("transform_query", attempt, {{"query", query}});
        }
    }
    result.answer = answer;
    result.final_context = context;
    result.state.loop_index = std::min(attempt, config.self_rag_max_attempts);
    result.halt_reason = passed ? "checks_passed" : "attempts_exhausted";
    if (!passed) result.error = "all generation attempts failed reflection checks";
    result.trace.event("run_end", result.state.loop_index,
                       {{"halt_reason", result.halt_reason},
                        {"flagged", !passed},
                        {"cost", result.state.cost.to_json()}});
    return result;
}

// Retrieve -> grade the set; if irrelevant (or forced), rewrite the query,
// pull up to `cap` results from the external source and append them. The
// context is add-only: it may exceed k and is never truncated.
inline RunResult run_crag(const std::string& question_id, const std::string& question,
                          const RunEnvironment& env, const BaselinePorts& ports,
                          const BaselineConfig& config) {
    config.validate();
    RunResult result;
    result.question_id = question_id;
    detail::trace_run_start(result.trace, question_id, question, "crag", env, config.k);

    const auto results = env.index->query(question, config.k);
    result.state.cost.retriever_calls = 1;
    for (const auto& r : results) result.final_context.push_back(r.chunk);

    bool any_relevant = false;
    for (const auto& r : results) {
        try {
            if (ports.doc_grader->relevant(question, r.chunk)) any_relevant = true;
        } catch (const std::exception&) {
            any_relevant = true;  // grader failure: no corrective branch, flagged
        }
    }
    const bool corrective = config.crag_force_external || !any_relevant;
    result.trace.event("grade_set", 0,
                       {{"any_relevant", any_relevant}, {"corrective", corrective}});

    if (corrective) {
        const std::string rewritten = ports.rewriter ? ports.rewriter->rewrite(question, 2)
                                                     : question;
        result.trace.event("transform_query", 0, {{"query", rewritten}});
        if (ports.external_index == nullptr) {
            result.trace.event("external_error", 0, {{"error", "no external source configured"}});
        } else {
            try {
                const auto external =
                    ports.external_index->query(rewritten, config.crag_external_results_cap);
                result.state.cost.retriever_calls += 1;
                nlohmann::json appended = nlohmann::json::array();
                for (const auto& r : external) {
                    bool duplicate = false;
                    for (const auto& c : result.final_context) {
                        if (c.doc_id == r.chunk.doc_id) duplicate = true;
                    }
                    if (duplicate) continue;
                    result.final_context.push_back(r.chunk);
                    appended.push_back(r.chunk.doc_id);
                }
                result.trace.event("external_append", 0, {{"doc_ids", appended}});
            } catch (const std::exception& e) {
                // proceed with the original context, flagged
                result.trace.event("external_error", 0, {{"error", e.what()}});
            }
        }
    }
    result.halt_reason = corrective ? "corrected" : "relevant";
    detail::finish_run(result, question, env);
    return result;
}

struct AdaptiveCut {
    std::size_t keep = 0;
    bool flagged = false;  // pool too small for a gap scan
};

// Largest-gap cut: keep the first i documents where score_i - score_{i+1} is
// maximal over consecutive pairs. The boundary after the last element is
// excluded (a cut must keep at least one document); ties go to the earliest
// gap. The buffer variant keeps min(i + buffer, pool) documents.
inline AdaptiveCut adaptive_k_cut(const std::vector<double>& scores,
                                  std::optional<std::size_t> buffer) {
    AdaptiveCut cut;
    if (scores.size() < 2) {
        cut.keep = scores.size();
        cut.flagged = true;
        return cut;
    }
    std::size_t best_i = 1;
    double best_gap = scores[0] - scores[1];
    for (std::size_t i = 2; i < scores.size(); ++i) {
        const double gap = scores[i - 1] - scores[i];
        if (gap > best_gap) {
            best_gap = gap;
            best_i = i;
        }
    }
    cut.keep = best_i;
    if (buffer) cut.keep = std::min(cut.keep + *buffer, scores.size());
    return cut;
}

// Retrieve a large pool, cut at the largest score gap, generate once.
inline RunResult run_adaptive_k(const std::string& question_id, const std::string& question,
                                const RunEnvironment& env, const BaselineConfig& config) {
    config.validate();
    RunResult result;
    result.question_id = question_id;
    detail::trace_run_start(result.trace, question_id, question, "adaptive_k", env,
                            config.adaptive_pool);

    const auto pool = env.index->query(question, config.adaptive_pool);
    result.state.cost.retriever_calls = 1;
    std::vector<double> scores;
    scores.reserve(pool.size());
    for (const auto& r : pool) scores.push_back(r.score);
    const auto cut = adaptive_k_cut(scores, config.adaptive_buffer);
    for (std::size_t i = 0; i < cut.keep; ++i) result.final_context.push_back(pool[i].chunk);
    result.trace.event("adaptive_cut", 0,
                       {{"pool", pool.size()},
                        {"keep", cut.keep},
                        {"buffer", config.adaptive_buffer ? nlohmann::json(*config.adaptive_buffer)
                                                          : nlohmann::json(nullptr)},
                        {"flagged", cut.flagged}});
    result.halt_reason = "cut";
    detail::finish_run(result, question, env);
    return result;
}

}  // namespace seal
