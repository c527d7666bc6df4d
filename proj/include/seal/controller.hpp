#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "seal/assessors.hpp"
#include "seal/corpus.hpp"
#include "seal/index.hpp"
#include "seal/ledger.hpp"
#include "seal/providers.hpp"
#include "seal/ranking.hpp"
#include "seal/state.hpp"
#include "seal/trace.hpp"

namespace seal {

struct ControllerConfig {
    std::size_t k = 3;
    int loop_budget = 1;              // L
    std::size_t candidate_pool = 20;  // M, per micro-query
    std::size_t fan_out_cap = 3;      // micro-queries per loop
    std::size_t max_swaps_per_loop = 1;
    double epsilon = 0.05;
    UtilityWeights weights;
    SufficiencyThresholds thresholds;
};

// Everything a controller run borrows from the shared experiment
// environment. All ports must be safe for concurrent use across runs.
struct RunEnvironment {
    const Index* index = nullptr;
    const AliasMap* alias_map = nullptr;
    std::shared_ptr<QueryAnalyzerPort> analyzer;
    std::shared_ptr<AssessorPort> assessor;
    std::shared_ptr<ExtractorPort> extractor;
    std::shared_ptr<GeneratorPort> generator;
    std::shared_ptr<ExtractionCache> extraction_cache;
    PromptLibrary prompts;
    std::string model_id = "offline";
};

enum class StepStatus { sufficient, swapped, no_swap, halted };

inline const char* to_string(StepStatus s) {
    switch (s) {
        case StepStatus::sufficient: return "sufficient";
        case StepStatus::swapped: return "swapped";
        case StepStatus::no_swap: return "no_swap";
        case StepStatus::halted: return "halted";
    }
    return "halted";
}

struct StepOutcome {
    StepStatus status = StepStatus::halted;
    SufficiencyReport report;
    std::size_t swaps = 0;
};

struct RunResult {
    std::string question_id;
    std::string answer;
    ControllerState state;
    NeedSet needs;
    Trace trace;
    std::vector<Chunk> final_context;
    std::string halt_reason;  // sufficient | budget_exhausted | queries_blocked | no_gaps
    bool generator_failed = false;
    std::string error;
};

// ---------------------------------------------------------------------------
// Micro-query policy

struct MicroQueryBatch {
    std::vector<std::string> issued;
    std::vector<std::string> blocked;
};

// One atomic query per gap via type-specific templates: resolved anchors
// first, then the missing-what terms. Blocklisted queries are excluded;
// fan-out is capped per loop.
inline MicroQueryBatch make_micro_queries(const GapSpec& gaps, const Blocklist& blocklist,
                                          std::size_t fan_out_cap) {
    MicroQueryBatch batch;
    std::set<std::string> seen;
    for (const auto& gap : gaps.gaps) {
        if (batch.issued.size() >= fan_out_cap) break;
        std::string query = join(gap.anchor_entities, " ");
        if (!gap.missing_what.empty()) {
            if (!query.empty()) query += ' ';
            query += gap.missing_what;
        }
        query = trim(query);
        if (query.empty()) continue;
        const std::string norm = normalize_query(query);
        if (norm.empty() || seen.count(norm)) continue;
        seen.insert(norm);
        if (blocklist.blocked(query)) {
            batch.blocked.push_back(query);
        } else {
            batch.issued.push_back(query);
        }
    }
    return batch;
}

// ---------------------------------------------------------------------------
// Controller operations

// E_0: top-k of a standard retrieval pass; ledger rebuilt as its projection.
inline ControllerState initialize(const std::string& question, const RunEnvironment& env,
                                  const ControllerConfig& config, Trace& trace) {
    ControllerState state;
    state.buffer = EvidenceBuffer(config.k);
    const auto results = env.index->query(question, config.k);
    state.cost.retriever_calls = 1;
    for (const auto& r : results) {
        state.buffer.push(r.chunk, 0, r.rank);
    }
    state.under_capacity = state.buffer.size() < config.k;
    state.ledger = rebuild_for_chunks(state.buffer.chunks(), *env.extractor,
                                      *env.extraction_cache, *env.alias_map,
                                      &state.cost.extractor_calls);
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : state.buffer.slots()) {
        slots.push_back({{"doc_id", s.chunk.doc_id}, {"rank", s.inserted_rank}});
    }
    trace.event("initialize", 0,
                {{"buffer", slots}, {"under_capacity", state.under_capacity}});
    return state;
}

namespace detail {

struct CandidateEntry {
    Chunk chunk;
    int best_rank = 0;
    std::vector<RelationRecord> facts;  // canonicalized
};

// Pool the micro-query results: dedupe by doc_id, skip buffer members,
// remember the best retrieval rank per candidate.
inline std::vector<CandidateEntry> pool_candidates(
    const std::vector<std::string>& queries, ControllerState& state, const RunEnvironment& env,
    const ControllerConfig& config, Trace& trace, int current_loop,
    std::vector<std::string>& failed_queries) {
    std::vector<CandidateEntry> pool;
    std::unordered_map<std::string, std::size_t> by_doc;
    for (const auto& query : queries) {
        std::vector<ScoredChunk> results;
        try {
            results = env.index->query(query, config.candidate_pool);
            state.cost.retriever_calls += 1;
        } catch (const std::exception& e) {
            failed_queries.push_back(query);
            trace.event("retrieval_error", current_loop, {{"query", query}, {"error", e.what()}});
            continue;
        }
        nlohmann::json logged = nlohmann::json::array();
        for (const auto& r : results) {
            logged.push_back({{"doc_id", r.chunk.doc_id}, {"score", r.score}, {"rank", r.rank}});
        }
        trace.event("retrieval", current_loop, {{"query", query}, {"results", logged}});
        for (const auto& r : results) {
            if (state.buffer.contains(r.chunk.doc_id)) continue;
            auto it = by_doc.find(r.chunk.doc_id);
            if (it != by_doc.end()) {
                pool[it->second].best_rank = std::min(pool[it->second].best_rank, r.rank);
                continue;
            }
            CandidateEntry entry;
            entry.chunk = r.chunk;
            entry.best_rank = r.rank;
            by_doc.emplace(r.chunk.doc_id, pool.size());
            pool.push_back(std::move(entry));
        }
    }
    for (auto& entry : pool) {
        bool was_miss = false;
        auto raw = env.extraction_cache->get_or_extract(entry.chunk, *env.extractor, was_miss);
        if (was_miss) state.cost.extractor_calls += 1;
        entry.facts = canonicalized_facts(raw, state.ledger, *env.alias_map);
    }
    return pool;
}

inline std::vector<RelationRecord> slot_facts(const BufferSlot& slot, ControllerState& state,
                                              const RunEnvironment& env) {
    bool was_miss = false;
    auto raw = env.extraction_cache->get_or_extract(slot.chunk, *env.extractor, was_miss);
    if (was_miss) state.cost.extractor_calls += 1;
    return canonicalized_facts(raw, state.ledger, *env.alias_map);
}

}  // namespace detail

// One pass of the repair loop. Ordering: assess -> gap diagnosis ->
// micro-queries -> candidate pooling -> utility scoring -> at most
// max_swaps_per_loop replacements -> ledger rebuild. A step that accepts no
// swap blocklists the queries it issued: the ledger gained nothing, so
// re-running them could only repeat the same contest.
inline StepOutcome step(const std::string& question, ControllerState& state, const NeedSet& needs,
                        const RunEnvironment& env, const ControllerConfig& config, Trace& trace) {
    if (state.loop_index >= config.loop_budget)
        throw std::logic_error("step: loop budget exhausted");
    const int current = state.loop_index + 1;

    StepOutcome outcome;
    outcome.report = env.assessor->assess(question, needs, state.ledger);
    {
        nlohmann::json payload = outcome.report.to_json();
        payload["buffer"] = state.buffer.doc_ids();
        trace.event("assess", state.loop_index, payload);
    }
    if (outcome.report.sufficient) {
        outcome.status = StepStatus::sufficient;
        return outcome;
    }

    GapSpec gaps = compute_gaps(needs, state.ledger);
    {
        nlohmann::json logged = nlohmann::json::array();
        for (const auto& g : gaps.gaps) {
            logged.push_back({{"need_id", g.need_id},
                              {"gap_type", to_string(g.gap_type)},
                              {"anchor_entities", g.anchor_entities},
                              {"missing_what", g.missing_what}});
        }
        trace.event("gaps", current, {{"gaps", logged}});
    }
    if (gaps.empty()) {
        outcome.status = StepStatus::halted;
        state.loop_index = current;
        return outcome;
    }

    const auto batch = make_micro_queries(gaps, state.blocklist, config.fan_out_cap);
    trace.event("micro_queries", current, {{"issued", batch.issued}, {"blocked", batch.blocked}});
    if (batch.issued.empty()) {
        outcome.status = StepStatus::halted;
        state.loop_index = current;
        return outcome;
    }

    std::vector<std::string> failed_queries;
    auto pool =
        detail::pool_candidates(batch.issued, state, env, config, trace, current, failed_queries);
    for (const auto& q : failed_queries) state.blocklist.block(q, BlockReason::repeat);

    for (std::size_t swap_round = 0; swap_round < config.max_swaps_per_loop; ++swap_round) {
        if (pool.empty()) break;
        if (swap_round > 0) gaps = compute_gaps(needs, state.ledger);

        std::vector<RankedCandidate> candidates;
        candidates.reserve(pool.size());
        for (auto& entry : pool) {
            candidates.push_back({entry.chunk,
                                  score_candidate(entry.chunk, entry.facts, state.ledger, gaps,
                                                  state.buffer.chunks(), config.weights)});
        }

        std::vector<ScoredSlot> slots;
        std::set<std::size_t> dwell_protected;
        const auto& buffer_slots = state.buffer.slots();
        for (std::size_t i = 0; i < buffer_slots.size(); ++i) {
            const auto& slot = buffer_slots[i];
            // Swap-inserted slots are shielded for one iteration; initial
            // retrieval placements (loop 0) are not.
            if (slot.inserted_at_loop >= current - 1 && slot.inserted_at_loop >= 1) {
                dwell_protected.insert(i);
            }
            std::vector<Chunk> others;
            for (std::size_t j = 0; j < buffer_slots.size(); ++j) {
                if (j != i) others.push_back(buffer_slots[j].chunk);
            }
            EntityLedger ledger_minus = rebuild_for_chunks(
                others, *env.extractor, *env.extraction_cache, *env.alias_map, nullptr);
            slots.push_back({i, slot.chunk.doc_id, slot.inserted_at_loop, slot.inserted_rank,
                             score_slot(slot.chunk, detail::slot_facts(slot, state, env),
                                        ledger_minus, gaps, others, config.weights)});
        }

        {
            nlohmann::json logged_c = nlohmann::json::array();
            for (const auto& c : candidates) {
                logged_c.push_back({{"doc_id", c.chunk.doc_id}, {"utility", c.utility.to_json()}});
            }
            nlohmann::json logged_s = nlohmann::json::array();
            for (const auto& s : slots) {
                logged_s.push_back({{"doc_id", s.doc_id},
                                    {"utility", s.utility.to_json()},
                                    {"dwell_protected", dwell_protected.count(s.slot_index) > 0}});
            }
            trace.event("candidates_scored", current,
                        {{"candidates", logged_c}, {"slots", logged_s}});
        }

        auto decision = select_swap(slots, candidates, config.epsilon, dwell_protected);
        if (!decision) {
            trace.event("no_swap", current, {{"pool_size", pool.size()}});
            break;
        }

        const auto& chosen = pool[decision->candidate_index];
        const std::string victim_doc = buffer_slots[decision->victim_slot].chunk.doc_id;
        state.buffer.replace(decision->victim_slot, chosen.chunk, current, chosen.best_rank);
        state.ledger = rebuild_for_chunks(state.buffer.chunks(), *env.extractor,
                                          *env.extraction_cache, *env.alias_map,
                                          &state.cost.extractor_calls);
        trace.event("swap", current,
                    {{"victim", victim_doc},
                     {"candidate", chosen.chunk.doc_id},
                     {"victim_score", decision->victim_score},
                     {"candidate_score", decision->candidate_score}});
        outcome.swaps += 1;
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(decision->candidate_index));
    }

    if (outcome.swaps == 0) {
        // No progress: the ledger is unchanged, so these queries are
        // unproductive patterns for the rest of this run.
        for (const auto& q : batch.issued) state.blocklist.block(q, BlockReason::no_novel_info);
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [q, reason] : state.blocklist.entries()) {
            entries.push_back({{"query", q}, {"reason", to_string(reason)}});
        }
        trace.event("blocklist_update", current, {{"entries", entries}});
        outcome.status = StepStatus::no_swap;
    } else {
        outcome.status = StepStatus::swapped;
    }
    state.loop_index = current;
    return outcome;
}

// The one generator invocation every controller shares: same grounding
// prompt asset, same user-prompt layout, same port. Throws on port failure.
inline std::string grounded_generate(const std::string& question,
                                     const std::vector<Chunk>& context, const RunEnvironment& env,
                                     CostLedger& cost, Trace& trace, int loop_index) {
    const auto grounding = env.prompts.get("grounding");
    GenerationRequest request;
    request.system_prompt = grounding.text;
    request.user_prompt = build_grounded_user_prompt(question, context);
    request.model_id = env.model_id;
    request.temperature = 0.0;
    const std::string answer = env.generator->generate(request);
    cost.generator_calls += 1;
    std::size_t tokens = 0;
    for (const auto& c : context) tokens += c.token_count;
    cost.generator_context_tokens = tokens;
    std::vector<std::string> doc_ids;
    doc_ids.reserve(context.size());
    for (const auto& c : context) doc_ids.push_back(c.doc_id);
    trace.event("generate", loop_index,
                {{"prompt_sha256", sha256_hex(request.user_prompt)},
                 {"grounding_prompt_sha256", grounding.sha256},
                 {"context_doc_ids", doc_ids},
                 {"context_tokens", tokens},
                 {"answer", answer}});
    return answer;
}

// Full question run: analyze, initialize, repair up to L loops, generate
// exactly once on the final buffer.
inline RunResult run_controller(const std::string& question_id, const std::string& question,
                                const RunEnvironment& env, const ControllerConfig& config) {
    RunResult result;
    result.question_id = question_id;
    const auto grounding = env.prompts.get("grounding");
    result.trace.event("run_start", 0,
                       {{"question_id", question_id},
                        {"question", question},
                        {"method", "seal"},
                        {"k", config.k},
                        {"loop_budget", config.loop_budget},
                        {"index_fingerprint", env.index->fingerprint()},
                        {"grounding_prompt_sha256", grounding.sha256},
                        {"model_id", env.model_id}});

    result.needs = env.analyzer->analyze(question);
    {
        nlohmann::json logged = nlohmann::json::array();
        for (const auto& n : result.needs.needs) {
            logged.push_back({{"need_id", n.need_id},
                              {"kind", to_string(n.kind)},
                              {"description", n.description},
                              {"anchors", n.anchors}});
        }
        result.trace.event("needs", 0, {{"needs", logged}});
    }

    result.state = initialize(question, env, config, result.trace);
    result.halt_reason = "budget_exhausted";
    while (result.state.loop_index < config.loop_budget) {
        const auto outcome = step(question, result.state, result.needs, env, config, result.trace);
        if (outcome.status == StepStatus::sufficient) {
            result.halt_reason = "sufficient";
            break;
        }
        if (outcome.status == StepStatus::halted) {
            result.halt_reason = "queries_blocked";
            break;
        }
    }

    result.final_context = result.state.buffer.chunks();
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
                        {"cost", result.state.cost.to_json()},
                        {"final_ledger", result.state.ledger.to_json()}});
    return result;
}

}  // namespace seal
