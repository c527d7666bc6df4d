#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "seal/corpus.hpp"
#include "seal/ledger.hpp"
#include "seal/state.hpp"
#include "seal/text.hpp"

namespace seal {

// Entity-first utility
//   S(c) = l_gap * GapCov(c, G_t) + l_corr * Corr(c, U_t)
//        + l_nov * Nov(c, U_t)    - l_red * Red(c, E_t)
// All four components live in [0, 1]; the total is evaluated in exactly this
// order (left to right, doubles) so it can be recomputed bit-exactly.
struct UtilityWeights {
    double lambda_gap = 0.5;
    double lambda_corr = 0.2;
    double lambda_nov = 0.2;
    double lambda_red = 0.1;

    void validate() const {
        if (lambda_gap < 0 || lambda_corr < 0 || lambda_nov < 0 || lambda_red < 0)
            throw std::invalid_argument("utility weights must be non-negative");
        if (lambda_gap == 0 && lambda_corr == 0 && lambda_nov == 0 && lambda_red == 0)
            throw std::invalid_argument("at least one utility weight must be positive");
    }
};

struct UtilityBreakdown {
    double gap_cov = 0.0;
    double corr = 0.0;
    double nov = 0.0;
    double red = 0.0;
    double total = 0.0;

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"gap_cov", gap_cov}, {"corr", corr}, {"nov", nov}, {"red", red}, {"total", total}};
    }
};

inline double combine_utility(const UtilityWeights& w, double gap_cov, double corr, double nov,
                              double red) {
    return ((w.lambda_gap * gap_cov + w.lambda_corr * corr) + w.lambda_nov * nov) -
           w.lambda_red * red;
}

// ---------------------------------------------------------------------------
// Components

namespace detail {

inline std::vector<std::string> gap_anchor_union_tokens(const GapRecord& gap) {
    return content_tokens(join(gap.anchor_entities, " "));
}

inline double cover_fraction(const std::vector<std::string>& anchor_tokens,
                             const std::vector<std::string>& target_tokens) {
    if (anchor_tokens.empty()) return 0.0;
    std::unordered_set<std::string> target(target_tokens.begin(), target_tokens.end());
    std::size_t hit = 0;
    for (const auto& t : anchor_tokens) hit += target.count(t);
    return static_cast<double>(hit) / static_cast<double>(anchor_tokens.size());
}

inline bool anchors_hit_endpoints(const std::vector<std::string>& anchors,
                                  const RelationRecord& rel) {
    for (const auto& anchor : anchors) {
        if (!anchor_matches(anchor, content_tokens(rel.head)) &&
            !anchor_matches(anchor, content_tokens(rel.tail)))
            return false;
    }
    return true;
}

inline bool gap_matched_by_fact(const GapRecord& gap, const RelationRecord& fact) {
    switch (gap.gap_type) {
        case GapType::missing_entity: {
            const auto anchor_tokens = gap_anchor_union_tokens(gap);
            if (cover_fraction(anchor_tokens, content_tokens(fact.head)) >= 0.5) {
                if (gap.relation_hint.empty() || fact.relation == gap.relation_hint) return true;
            }
            if (cover_fraction(anchor_tokens, content_tokens(fact.tail)) >= 0.5) {
                if (gap.relation_hint.empty() || fact.relation == gap.relation_hint) return true;
            }
            return false;
        }
        case GapType::missing_relation:
            if (!gap.relation_hint.empty() && fact.relation != gap.relation_hint) return false;
            return anchors_hit_endpoints(gap.anchor_entities, fact);
        case GapType::missing_qualifier:
            if (!fact.qualifiers.count(gap.qualifier_key)) return false;
            if (!gap.relation_hint.empty() && fact.relation != gap.relation_hint) return false;
            return anchors_hit_endpoints(gap.anchor_entities, fact);
    }
    return false;
}

}  // namespace detail

// Fraction of gaps matched by at least one candidate fact. Empty gap set
// yields 0: no gap bonus is available.
inline double gap_coverage(const std::vector<RelationRecord>& candidate_facts,
                           const GapSpec& gaps) {
    if (gaps.empty()) return 0.0;
    std::size_t matched = 0;
    for (const auto& gap : gaps.gaps) {
        for (const auto& fact : candidate_facts) {
            if (detail::gap_matched_by_fact(gap, fact)) {
                ++matched;
                break;
            }
        }
    }
    return static_cast<double>(matched) / static_cast<double>(gaps.size());
}

// Fraction of the ledger's uncertain facts (corroboration_count == 1) that
// the candidate re-asserts; 0 when nothing is uncertain.
inline double corroboration(const std::vector<RelationRecord>& candidate_facts,
                            const EntityLedger& ledger) {
    std::vector<std::string> uncertain;
    for (const auto& [key, rel] : ledger.relations()) {
        if (rel.corroboration_count == 1) uncertain.push_back(key);
    }
    if (uncertain.empty()) return 0.0;
    std::unordered_set<std::string> candidate_keys;
    for (const auto& fact : candidate_facts) candidate_keys.insert(fact.key());
    std::size_t confirmed = 0;
    for (const auto& key : uncertain) confirmed += candidate_keys.count(key);
    return static_cast<double>(confirmed) / static_cast<double>(uncertain.size());
}

// Fraction of candidate items (entities + relations) absent from the ledger.
inline double novelty(const std::vector<RelationRecord>& candidate_facts,
                      const EntityLedger& ledger) {
    std::set<std::string> entity_items;
    std::set<std::string> relation_items;
    for (const auto& fact : candidate_facts) {
        entity_items.insert(fact.head);
        entity_items.insert(fact.tail);
        relation_items.insert(fact.key());
    }
    const std::size_t total = entity_items.size() + relation_items.size();
    if (total == 0) return 0.0;
    std::size_t fresh = 0;
    for (const auto& e : entity_items) {
        if (!ledger.has_entity(e)) ++fresh;
    }
    for (const auto& r : relation_items) {
        if (!ledger.has_relation_key(r)) ++fresh;
    }
    return static_cast<double>(fresh) / static_cast<double>(total);
}

// Max token-set Jaccard similarity against the buffer's passages.
inline double redundancy(const Chunk& candidate, const std::vector<Chunk>& buffer_chunks) {
    double worst = 0.0;
    for (const auto& other : buffer_chunks) {
        worst = std::max(worst, jaccard_similarity(candidate.text, other.text));
    }
    return worst;
}

inline UtilityBreakdown score_components(double gap_cov, double corr, double nov, double red,
                                         const UtilityWeights& weights) {
    UtilityBreakdown b{gap_cov, corr, nov, red, 0.0};
    b.total = combine_utility(weights, gap_cov, corr, nov, red);
    return b;
}

// Utility of a candidate against the current state.
inline UtilityBreakdown score_candidate(const Chunk& candidate,
                                        const std::vector<RelationRecord>& candidate_facts,
                                        const EntityLedger& ledger, const GapSpec& gaps,
                                        const std::vector<Chunk>& buffer_chunks,
                                        const UtilityWeights& weights) {
    return score_components(gap_coverage(candidate_facts, gaps),
                            corroboration(candidate_facts, ledger),
                            novelty(candidate_facts, ledger),
                            redundancy(candidate, buffer_chunks), weights);
}

// Utility of an existing buffer slot, judged by marginal contribution:
// gap_cov is computed against the *current* gap set (a slot's merged facts
// cannot match an open gap, so consumed gaps contribute 0 by construction),
// corr/nov against a ledger rebuilt without this slot, red against the other
// slots. This conditioning is an interpretation; the swap rule only fixes
// S(c*) > S(v) + epsilon.
inline UtilityBreakdown score_slot(const Chunk& slot_chunk,
                                   const std::vector<RelationRecord>& slot_facts,
                                   const EntityLedger& ledger_without_slot, const GapSpec& gaps,
                                   const std::vector<Chunk>& other_slot_chunks,
                                   const UtilityWeights& weights) {
    return score_components(gap_coverage(slot_facts, gaps),
                            corroboration(slot_facts, ledger_without_slot),
                            novelty(slot_facts, ledger_without_slot),
                            redundancy(slot_chunk, other_slot_chunks), weights);
}

// ---------------------------------------------------------------------------
// Swap selection

struct ScoredSlot {
    std::size_t slot_index = 0;
    std::string doc_id;
    int inserted_at_loop = 0;
    int inserted_rank = 0;
    UtilityBreakdown utility;
};

struct RankedCandidate {
    Chunk chunk;
    UtilityBreakdown utility;
};

struct SwapDecision {
    std::size_t victim_slot = 0;
    std::size_t candidate_index = 0;
    double victim_score = 0.0;
    double candidate_score = 0.0;
};

// Picks the highest-scoring candidate and the lowest-scoring non-protected
// victim; swaps only if S(c*) > S(v) + epsilon (strict). Ties: candidates by
// higher score then lower doc_id; victims by lower score, then oldest slot
// (smallest inserted_at_loop, then lowest insertion rank, then doc_id).
inline std::optional<SwapDecision> select_swap(const std::vector<ScoredSlot>& slots,
                                               const std::vector<RankedCandidate>& candidates,
                                               double epsilon,
                                               const std::set<std::size_t>& dwell_protected) {
    if (slots.empty() || candidates.empty()) return std::nullopt;

    const ScoredSlot* victim = nullptr;
    for (const auto& slot : slots) {
        if (dwell_protected.count(slot.slot_index)) continue;
        if (victim == nullptr) {
            victim = &slot;
            continue;
        }
        const auto lhs = std::make_tuple(slot.utility.total, slot.inserted_at_loop,
                                         slot.inserted_rank, std::cref(slot.doc_id));
        const auto rhs = std::make_tuple(victim->utility.total, victim->inserted_at_loop,
                                         victim->inserted_rank, std::cref(victim->doc_id));
        if (lhs < rhs) victim = &slot;
    }
    if (victim == nullptr) return std::nullopt;  // every slot is dwell-protected

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const auto& b = candidates[best];
        if (c.utility.total > b.utility.total ||
            (c.utility.total == b.utility.total && c.chunk.doc_id < b.chunk.doc_id)) {
            best = i;
        }
    }

    const double cand_score = candidates[best].utility.total;
    if (!(cand_score > victim->utility.total + epsilon)) return std::nullopt;
    return SwapDecision{victim->slot_index, best, victim->utility.total, cand_score};
}

}  // namespace seal
