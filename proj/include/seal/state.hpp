#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seal/corpus.hpp"
#include "seal/ledger.hpp"
#include "seal/text.hpp"

namespace seal {

// ---------------------------------------------------------------------------
// Information needs and gaps

enum class NeedKind { entity, relation, qualifier };

inline const char* to_string(NeedKind k) {
    switch (k) {
        case NeedKind::entity: return "entity";
        case NeedKind::relation: return "relation";
        case NeedKind::qualifier: return "qualifier";
    }
    return "entity";
}

// One required piece of information, derived once per question and stable
// across loops. `anchors` are the entity surface forms the need is pinned to;
// `depends_on` names a prior need whose resolved value (e.g. a year) is
// prepended to this need's anchors when forming micro-queries.
struct NeedSpec {
    std::string need_id;
    NeedKind kind = NeedKind::entity;
    std::string description;
    std::vector<std::string> anchors;
    std::string qualifier_key;  // qualifier needs: which key must be present
    std::string relation_hint;  // expected relation label, empty = any
    std::string query_hint;     // trailing terms of the micro-query template
    std::optional<std::string> depends_on;
};

struct NeedSet {
    std::vector<NeedSpec> needs;
};

enum class GapType { missing_entity, missing_relation, missing_qualifier };

inline const char* to_string(GapType t) {
    switch (t) {
        case GapType::missing_entity: return "missing_entity";
        case GapType::missing_relation: return "missing_relation";
        case GapType::missing_qualifier: return "missing_qualifier";
    }
    return "missing_entity";
}

struct GapRecord {
    std::string need_id;
    GapType gap_type = GapType::missing_entity;
    std::vector<std::string> anchor_entities;
    std::string missing_what;
    // Matching hints carried over from the need so candidate facts can be
    // checked against the gap without re-deriving the need.
    std::string relation_hint;
    std::string qualifier_key;
};

struct GapSpec {
    std::vector<GapRecord> gaps;

    bool empty() const { return gaps.empty(); }
    std::size_t size() const { return gaps.size(); }
};

// ---------------------------------------------------------------------------
// Need satisfaction against a ledger

namespace detail {

inline bool anchors_hit_relation(const std::vector<std::string>& anchors,
                                 const RelationRecord& rel, const EntityLedger& ledger) {
    auto endpoint_matches = [&](const std::string& endpoint, const std::string& anchor) {
        auto it = ledger.entities().find(endpoint);
        if (it != ledger.entities().end() && entity_matches_anchor(it->second, anchor)) return true;
        return anchor_matches(anchor, content_tokens(endpoint));
    };
    for (const auto& anchor : anchors) {
        if (!endpoint_matches(rel.head, anchor) && !endpoint_matches(rel.tail, anchor))
            return false;
    }
    return true;
}

}  // namespace detail

// Finds a relation satisfying the need, if any. Qualifier needs additionally
// require the qualifier key; entity needs with a relation hint require the
// anchored entity to participate in such a relation.
inline std::optional<RelationRecord> find_supporting_relation(const NeedSpec& need,
                                                              const EntityLedger& ledger) {
    for (const auto& [key, rel] : ledger.relations()) {
        if (!need.relation_hint.empty() && rel.relation != need.relation_hint) continue;
        if (need.kind == NeedKind::qualifier && !rel.qualifiers.count(need.qualifier_key)) continue;
        if (!detail::anchors_hit_relation(need.anchors, rel, ledger)) continue;
        return rel;
    }
    return std::nullopt;
}

inline bool need_met(const NeedSpec& need, const EntityLedger& ledger) {
    if (need.kind == NeedKind::entity && need.relation_hint.empty()) {
        for (const auto& [name, ent] : ledger.entities()) {
            bool all = !need.anchors.empty();
            for (const auto& anchor : need.anchors) {
                if (!entity_matches_anchor(ent, anchor)) {
                    all = false;
                    break;
                }
            }
            if (all) return true;
        }
        return false;
    }
    return find_supporting_relation(need, ledger).has_value();
}

// Resolved value a dependent need can anchor on: the qualifier value for
// qualifier needs, the non-anchored endpoint for entity/relation needs.
inline std::optional<std::string> resolve_need_value(const NeedSpec& need,
                                                     const EntityLedger& ledger) {
    auto rel = find_supporting_relation(need, ledger);
    if (!rel) return std::nullopt;
    if (need.kind == NeedKind::qualifier) {
        auto it = rel->qualifiers.find(need.qualifier_key);
        if (it != rel->qualifiers.end()) return it->second;
        return std::nullopt;
    }
    // Prefer the endpoint the anchors do not point at.
    bool head_anchored = false;
    for (const auto& anchor : need.anchors) {
        if (anchor_matches(anchor, content_tokens(rel->head))) head_anchored = true;
    }
    return head_anchored ? rel->tail : rel->head;
}

// G_t: one typed gap per unmet need; met needs produce no gap. Resolved
// dependency values are prepended to the gap's anchors so micro-queries can
// use them (e.g. a release year discovered in an earlier loop).
inline GapSpec compute_gaps(const NeedSet& needs, const EntityLedger& ledger) {
    GapSpec spec;
    for (const auto& need : needs.needs) {
        if (need_met(need, ledger)) continue;
        GapRecord gap;
        gap.need_id = need.need_id;
        switch (need.kind) {
            case NeedKind::entity: gap.gap_type = GapType::missing_entity; break;
            case NeedKind::relation: gap.gap_type = GapType::missing_relation; break;
            case NeedKind::qualifier: gap.gap_type = GapType::missing_qualifier; break;
        }
        if (need.depends_on) {
            for (const auto& other : needs.needs) {
                if (other.need_id != *need.depends_on) continue;
                if (auto value = resolve_need_value(other, ledger)) {
                    gap.anchor_entities.push_back(*value);
                }
            }
        }
        for (const auto& anchor : need.anchors) gap.anchor_entities.push_back(anchor);
        gap.missing_what = need.query_hint.empty() ? need.description : need.query_hint;
        gap.relation_hint = need.relation_hint;
        gap.qualifier_key = need.qualifier_key;
        spec.gaps.push_back(std::move(gap));
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Sufficiency

struct SufficiencyThresholds {
    double coverage = 0.99;
    double answerability = 0.5;
};

struct SufficiencyReport {
    double coverage = 0.0;
    double corroboration = 0.0;
    bool contradiction = false;
    double answerability = 0.0;
    bool sufficient = false;

    nlohmann::json to_json() const {
        return nlohmann::json{{"coverage", coverage},
                              {"corroboration", corroboration},
                              {"contradiction", contradiction},
                              {"answerability", answerability},
                              {"sufficient", sufficient}};
    }
};

// Conflicting qualifier values for the same (head, relation) pair.
inline bool ledger_has_contradiction(const EntityLedger& ledger) {
    std::map<std::string, std::map<std::string, std::set<std::string>>> by_pair;
    for (const auto& [key, rel] : ledger.relations()) {
        auto& quals = by_pair[rel.head + '\x1f' + rel.relation];
        for (const auto& [q, v] : rel.qualifiers) quals[q].insert(v);
    }
    for (const auto& [pair, quals] : by_pair) {
        for (const auto& [q, values] : quals) {
            if (values.size() > 1) return true;
        }
    }
    return false;
}

// Deterministic sufficiency gate:
//   coverage      = met-needs fraction
//   corroboration = fraction of need-supporting relations with
//                   corroboration_count >= 2
//   contradiction = conflicting qualifier values for one (h, r) pair
//   answerability = 1 if all needs met, else coverage
//   sufficient    = coverage >= threshold AND no contradiction AND
//                   answerability >= threshold
inline SufficiencyReport compute_sufficiency(const NeedSet& needs, const EntityLedger& ledger,
                                             const SufficiencyThresholds& thresholds = {}) {
    SufficiencyReport report;
    std::size_t met = 0;
    std::size_t critical = 0;
    std::size_t corroborated = 0;
    for (const auto& need : needs.needs) {
        if (auto rel = find_supporting_relation(need, ledger)) {
            ++met;
            ++critical;
            if (rel->corroboration_count >= 2) ++corroborated;
        } else if (need_met(need, ledger)) {
            ++met;
        }
    }
    const std::size_t total = needs.needs.size();
    report.coverage = total == 0 ? 1.0 : static_cast<double>(met) / static_cast<double>(total);
    report.corroboration =
        critical == 0 ? 0.0 : static_cast<double>(corroborated) / static_cast<double>(critical);
    report.contradiction = ledger_has_contradiction(ledger);
    report.answerability = met == total ? 1.0 : report.coverage;
    report.sufficient = report.coverage >= thresholds.coverage && !report.contradiction &&
                        report.answerability >= thresholds.answerability;
    return report;
}

// ---------------------------------------------------------------------------
// Evidence buffer, blocklist, cost ledger, controller state

struct BufferSlot {
    Chunk chunk;
    int inserted_at_loop = 0;  // 0 = placed by initial retrieval
    int inserted_rank = 0;     // rank in the retrieval pass that produced it
};

// The fixed-capacity ordered evidence set E_t. After initialization on a
// corpus with >= k chunks, |slots| == k at every observable state; smaller
// corpora run under capacity (never padded).
class EvidenceBuffer {
public:
    EvidenceBuffer() = default;
    explicit EvidenceBuffer(std::size_t capacity) : capacity_(capacity) {}

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return slots_.size(); }
    bool under_capacity() const { return slots_.size() < capacity_; }
    const std::vector<BufferSlot>& slots() const { return slots_; }

    bool contains(const std::string& doc_id) const {
        for (const auto& s : slots_) {
            if (s.chunk.doc_id == doc_id) return true;
        }
        return false;
    }

    void push(Chunk chunk, int loop, int rank) {
        if (slots_.size() >= capacity_) throw LedgerError("EvidenceBuffer: capacity exceeded");
        if (contains(chunk.doc_id)) throw LedgerError("EvidenceBuffer: duplicate doc_id");
        slots_.push_back({std::move(chunk), loop, rank});
    }

    void replace(std::size_t slot_index, Chunk chunk, int loop, int rank) {
        if (slot_index >= slots_.size()) throw LedgerError("EvidenceBuffer: bad slot index");
        if (contains(chunk.doc_id)) throw LedgerError("EvidenceBuffer: duplicate doc_id");
        slots_[slot_index] = {std::move(chunk), loop, rank};
    }

    std::vector<Chunk> chunks() const {
        std::vector<Chunk> out;
        out.reserve(slots_.size());
        for (const auto& s : slots_) out.push_back(s.chunk);
        return out;
    }

    std::vector<std::string> doc_ids() const {
        std::vector<std::string> out;
        out.reserve(slots_.size());
        for (const auto& s : slots_) out.push_back(s.chunk.doc_id);
        return out;
    }

    std::size_t total_tokens() const {
        std::size_t n = 0;
        for (const auto& s : slots_) n += s.chunk.token_count;
        return n;
    }

private:
    std::vector<BufferSlot> slots_;
    std::size_t capacity_ = 0;
};

enum class BlockReason { no_novel_info, repeat };

inline const char* to_string(BlockReason r) {
    return r == BlockReason::no_novel_info ? "no_novel_info" : "repeat";
}

// B_t: normalized query strings barred from re-issue within one question run.
class Blocklist {
public:
    bool blocked(const std::string& query) const {
        return entries_.count(normalize_query(query)) > 0;
    }

    void block(const std::string& query, BlockReason reason) {
        entries_.emplace(normalize_query(query), reason);
    }

    std::size_t size() const { return entries_.size(); }

    const std::map<std::string, BlockReason>& entries() const { return entries_; }

private:
    std::map<std::string, BlockReason> entries_;
};

// Monotone counters for the cost envelope: over one run,
// generator_calls ∈ {0, 1} and retriever_calls <= 1 + L * fan_out_cap.
struct CostLedger {
    std::size_t retriever_calls = 0;
    std::size_t extractor_calls = 0;
    std::size_t generator_calls = 0;
    std::size_t generator_context_tokens = 0;

    nlohmann::json to_json() const {
        return nlohmann::json{{"retriever_calls", retriever_calls},
                              {"extractor_calls", extractor_calls},
                              {"generator_calls", generator_calls},
                              {"generator_context_tokens", generator_context_tokens}};
    }
};

// S_t plus loop counter and accounting; transitions happen only inside the
// controller's step/run operations.
struct ControllerState {
    EvidenceBuffer buffer;
    EntityLedger ledger;
    Blocklist blocklist;
    int loop_index = 0;
    CostLedger cost;
    bool under_capacity = false;
};

// ---------------------------------------------------------------------------
// Assessment-side ports

class QueryAnalyzerPort {
public:
    virtual ~QueryAnalyzerPort() = default;
    // Must yield at least one need; analyzer failure degrades to a single
    // catch-all need rather than throwing.
    virtual NeedSet analyze(const std::string& question) = 0;
    virtual std::string id() const = 0;
};

class AssessorPort {
public:
    virtual ~AssessorPort() = default;
    // Provider-backed implementations treat their own failures as
    // insufficient (repair-biased).
    virtual SufficiencyReport assess(const std::string& question, const NeedSet& needs,
                                     const EntityLedger& ledger) = 0;
    virtual std::string id() const = 0;
};

}  // namespace seal
