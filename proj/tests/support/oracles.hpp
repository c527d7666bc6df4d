// Test-only oracles, deliberately independent of the library implementations
// they check.
#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "seal/ranking.hpp"
#include "seal/rng.hpp"

namespace seal::testing {

// ---------------------------------------------------------------------------
// Exhaustive swap oracle: enumerate every (victim, candidate) pair under the
// eligibility rules and pick the argmax of S(c) - S(v) with the documented
// tie-breaks.
inline std::optional<SwapDecision> swap_oracle(const std::vector<ScoredSlot>& slots,
                                               const std::vector<RankedCandidate>& candidates,
                                               double epsilon,
                                               const std::set<std::size_t>& dwell_protected) {
    std::optional<SwapDecision> best;
    auto victim_key = [](const ScoredSlot& s) {
        return std::make_tuple(s.utility.total, s.inserted_at_loop, s.inserted_rank, s.doc_id);
    };
    for (std::size_t vi = 0; vi < slots.size(); ++vi) {
        if (dwell_protected.count(slots[vi].slot_index)) continue;
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            if (!(candidates[ci].utility.total > slots[vi].utility.total + epsilon)) continue;
            if (!best) {
                best = SwapDecision{slots[vi].slot_index, ci, slots[vi].utility.total,
                                    candidates[ci].utility.total};
                continue;
            }
            const double gain = candidates[ci].utility.total - slots[vi].utility.total;
            const double best_gain = best->candidate_score - best->victim_score;
            bool better = gain > best_gain;
            if (gain == best_gain) {
                // candidate tie-break: higher score, then lower doc_id
                const auto& c = candidates[ci];
                const RankedCandidate* bc = nullptr;
                for (std::size_t j = 0; j < candidates.size(); ++j) {
                    if (j == best->candidate_index) bc = &candidates[j];
                }
                if (c.utility.total != bc->utility.total) {
                    better = c.utility.total > bc->utility.total;
                } else if (c.chunk.doc_id != bc->chunk.doc_id) {
                    better = c.chunk.doc_id < bc->chunk.doc_id;
                } else {
                    // victim tie-break: lower score, then oldest slot
                    const ScoredSlot* bv = nullptr;
                    for (const auto& s : slots) {
                        if (s.slot_index == best->victim_slot) bv = &s;
                    }
                    better = victim_key(slots[vi]) < victim_key(*bv);
                }
            }
            if (better) {
                best = SwapDecision{slots[vi].slot_index, ci, slots[vi].utility.total,
                                    candidates[ci].utility.total};
            }
        }
    }
    return best;
}

// Random swap instance generator shared by the unit and acceptance suites.
struct SwapInstance {
    std::vector<ScoredSlot> slots;
    std::vector<RankedCandidate> candidates;
    double epsilon = 0.05;
    std::set<std::size_t> dwell_protected;
};

inline SwapInstance random_swap_instance(Rng& rng, std::size_t max_k = 5,
                                         std::size_t max_pool = 20) {
    SwapInstance inst;
    const std::size_t k = 1 + rng.index(max_k);
    const std::size_t pool = 1 + rng.index(max_pool);
    UtilityWeights weights;
    auto random_breakdown = [&]() {
        // quantized components make score ties actually happen
        const double gap = static_cast<double>(rng.index(5)) / 4.0;
        const double corr = static_cast<double>(rng.index(5)) / 4.0;
        const double nov = static_cast<double>(rng.index(5)) / 4.0;
        const double red = static_cast<double>(rng.index(5)) / 4.0;
        return score_components(gap, corr, nov, red, weights);
    };
    for (std::size_t i = 0; i < k; ++i) {
        ScoredSlot slot;
        slot.slot_index = i;
        slot.doc_id = "slot-" + std::to_string(i);
        slot.inserted_at_loop = static_cast<int>(rng.index(3));
        slot.inserted_rank = static_cast<int>(1 + rng.index(5));
        slot.utility = random_breakdown();
        if (rng.index(4) == 0) inst.dwell_protected.insert(i);
        inst.slots.push_back(std::move(slot));
    }
    for (std::size_t i = 0; i < pool; ++i) {
        RankedCandidate cand;
        cand.chunk.doc_id = "cand-" + std::to_string(i);
        cand.chunk.text = "text " + std::to_string(i);
        cand.chunk.token_count = 2;
        cand.utility = random_breakdown();
        inst.candidates.push_back(std::move(cand));
    }
    inst.epsilon = static_cast<double>(rng.index(4)) * 0.05;
    return inst;
}

// ---------------------------------------------------------------------------
// Reference statistics, hand-rolled (series + continued fractions), no Boost.

inline double ref_chi2_sf_1df(double x) {
    // chi-squared survival with 1 dof: erfc(sqrt(x/2))
    return std::erfc(std::sqrt(x / 2.0));
}

namespace detail {

// Regularized incomplete beta via the Lentz continued fraction.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p-value for a Student-t statistic with nu degrees of freedom:
// I_{nu/(nu+t^2)}(nu/2, 1/2).
inline double ref_t_two_sided_p(double t, double nu) {
    return detail::incbeta(nu / 2.0, 0.5, nu / (nu + t * t));
}

}  // namespace seal::testing
