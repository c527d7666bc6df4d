#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "seal/assessors.hpp"
#include "seal/corpus.hpp"
#include "seal/providers.hpp"
#include "seal/text.hpp"

namespace seal {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Judging

struct JudgeVerdict {
    std::string question_id;
    bool correct = false;
    std::string reasoning;
    // Unparseable provider output invalidates the verdict; invalid verdicts
    // are excluded from pairs and counted.
    bool valid = true;
};

struct JudgeInput {
    std::string question_id;
    std::string question;
    std::string agent_answer;
    std::string ground_truth;
    std::vector<std::string> context_texts;
};

// Leakage guard: the judge sees only passages from the run's final context.
// Anything else is a hard error.
inline JudgeInput make_judge_input(const std::string& question_id, const std::string& question,
                                   const std::string& agent_answer,
                                   const std::string& ground_truth,
                                   const std::vector<Chunk>& judged_context,
                                   const std::vector<Chunk>& final_context) {
    std::set<std::string> allowed;
    for (const auto& c : final_context) allowed.insert(c.doc_id);
    JudgeInput input{question_id, question, agent_answer, ground_truth, {}};
    for (const auto& c : judged_context) {
        if (!allowed.count(c.doc_id))
            throw EvalError("judge leakage guard: document '" + c.doc_id +
                            "' is not part of the final context for question " + question_id);
        input.context_texts.push_back(c.text);
    }
    return input;
}

class JudgePort {
public:
    virtual ~JudgePort() = default;
    virtual JudgeVerdict judge(const JudgeInput& input) = 0;
    virtual std::string id() const = 0;
};

// Normalized-answer match: lowercase, strip punctuation and articles, then
// exact equality or contiguous token-subsequence containment in either
// direction.
class DeterministicJudge : public JudgePort {
public:
    JudgeVerdict judge(const JudgeInput& input) override {
        JudgeVerdict verdict;
        verdict.question_id = input.question_id;
        const auto answer = normalize_answer_tokens(input.agent_answer);
        const auto gold = normalize_answer_tokens(input.ground_truth);
        if (answer.empty() || gold.empty()) {
            verdict.correct = false;
            verdict.reasoning = "empty answer or ground truth";
            return verdict;
        }
        verdict.correct = answer == gold || token_subsequence_contains(answer, gold) ||
                          token_subsequence_contains(gold, answer);
        verdict.reasoning = verdict.correct ? "normalized match" : "no normalized match";
        return verdict;
    }

    std::string id() const override { return "deterministic-judge"; }
};

// Provider judge: rubric prompt, strict JSON verdict. Unparseable output is
// an excluded (invalid) verdict, never a guess.
class ProviderJudge : public JudgePort {
public:
    ProviderJudge(std::shared_ptr<GeneratorPort> port, PromptAsset system_prompt,
                  PromptAsset user_template, std::string model_id)
        : port_(std::move(port)),
          system_(std::move(system_prompt)),
          template_(std::move(user_template)),
          model_id_(std::move(model_id)) {}

    JudgeVerdict judge(const JudgeInput& input) override {
        JudgeVerdict verdict;
        verdict.question_id = input.question_id;
        std::string user = template_.text;
        replace_all(user, "{question}", input.question);
        replace_all(user, "{agent_answer}", input.agent_answer);
        replace_all(user, "{ground_truth}", input.ground_truth);
        if (!input.context_texts.empty()) {
            user += "\n\nRetrieved passages:\n";
            for (const auto& t : input.context_texts) user += "- " + t + "\n";
        }
        GenerationRequest request;
        request.system_prompt = system_.text;
        request.user_prompt = user;
        request.model_id = model_id_;
        try {
            const auto parsed = nlohmann::json::parse(port_->generate(request));
            verdict.correct = parsed.at("correct").get<bool>();
            verdict.reasoning = parsed.value("reasoning", "");
        } catch (const std::exception& e) {
            verdict.valid = false;
            verdict.reasoning = std::string("judge output unparseable: ") + e.what();
        }
        return verdict;
    }

    std::string id() const override { return "provider-judge"; }

private:
    static void replace_all(std::string& text, const std::string& needle,
                            const std::string& value) {
        std::size_t pos = 0;
        while ((pos = text.find(needle, pos)) != std::string::npos) {
            text.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }

    std::shared_ptr<GeneratorPort> port_;
    PromptAsset system_;
    PromptAsset template_;
    std::string model_id_;
};

// ---------------------------------------------------------------------------
// Evidence metrics

struct EvidenceScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::set<std::string> matched_titles;
};

// Alias-normalized gold-title precision/recall/F1; duplicates in the
// retrieved list are counted once.
inline EvidenceScore evidence_score(const std::vector<std::string>& retrieved_titles,
                                    const std::set<std::string>& gold_titles,
                                    const AliasMap& alias_map) {
    std::set<std::string> retrieved;
    for (const auto& t : retrieved_titles) retrieved.insert(alias_map.resolve(t));
    std::set<std::string> gold;
    for (const auto& t : gold_titles) gold.insert(alias_map.resolve(t));

    EvidenceScore score;
    for (const auto& t : retrieved) {
        if (gold.count(t)) score.matched_titles.insert(t);
    }
    const double matched = static_cast<double>(score.matched_titles.size());
    score.precision = retrieved.empty() ? 0.0 : matched / static_cast<double>(retrieved.size());
    score.recall = gold.empty() ? 0.0 : matched / static_cast<double>(gold.size());
    score.f1 = (score.precision + score.recall) == 0.0
                   ? 0.0
                   : 2.0 * score.precision * score.recall / (score.precision + score.recall);
    return score;
}

// ---------------------------------------------------------------------------
// Paired statistics

struct PairedRunRecord {
    std::string question_id;
    bool outcome_a = false;
    bool outcome_b = false;
    std::optional<double> metric_a;
    std::optional<double> metric_b;
};

struct PairingResult {
    std::vector<PairedRunRecord> records;
    std::size_t excluded = 0;  // judge-failure pairs, excluded symmetrically
};

// Strict alignment: both verdict lists must carry the exact same sequence of
// question ids; anything else is a hard error.
inline PairingResult pair_outcomes(const std::vector<JudgeVerdict>& a,
                                   const std::vector<JudgeVerdict>& b) {
    if (a.size() != b.size())
        throw EvalError("pair_outcomes: verdict sequences differ in length");
    PairingResult out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].question_id != b[i].question_id)
            throw EvalError("pair_outcomes: question id mismatch at position " +
                            std::to_string(i) + " ('" + a[i].question_id + "' vs '" +
                            b[i].question_id + "')");
        if (!a[i].valid || !b[i].valid) {
            ++out.excluded;
            continue;
        }
        out.records.push_back({a[i].question_id, a[i].correct, b[i].correct, std::nullopt,
                               std::nullopt});
    }
    return out;
}

enum class StatTest { mcnemar, paired_t };

struct StatResult {
    StatTest test = StatTest::mcnemar;
    double statistic = 0.0;
    std::optional<double> p_value;
    std::optional<double> effect_size;  // Cohen's d_z for paired t
    std::optional<double> adjusted_p;
    bool degenerate = false;
    // discordant counts for McNemar
    std::size_t b_count = 0;
    std::size_t c_count = 0;
};

// McNemar's test over discordant pairs with the chi-squared approximation,
// continuity-corrected by default:
//   b = #(a correct, b wrong), c = #(a wrong, b correct)
//   statistic = (|b - c| - 1)^2 / (b + c)
// No discordance (b + c = 0) pins p = 1, statistic = 0.
inline StatResult mcnemar(const std::vector<PairedRunRecord>& records, bool corrected = true) {
    StatResult result;
    result.test = StatTest::mcnemar;
    for (const auto& r : records) {
        if (r.outcome_a && !r.outcome_b) ++result.b_count;
        if (!r.outcome_a && r.outcome_b) ++result.c_count;
    }
    const double b = static_cast<double>(result.b_count);
    const double c = static_cast<double>(result.c_count);
    if (result.b_count + result.c_count == 0) {
        result.statistic = 0.0;
        result.p_value = 1.0;
        return result;
    }
    const double diff = corrected ? std::abs(b - c) - 1.0 : b - c;
    result.statistic = diff * diff / (b + c);
    boost::math::chi_squared dist(1.0);
    result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
    return result;
}

// Paired two-sided t-test with Cohen's d_z (mean of differences over standard
// deviation of differences, n-1 denominator). All-identical differences set
// the degenerate flag and claim no p-value.
inline StatResult paired_t(const std::vector<double>& values_a,
                           const std::vector<double>& values_b) {
    if (values_a.size() != values_b.size())
        throw EvalError("paired_t: unaligned value lists");
    const std::size_t n = values_a.size();
    if (n < 2) throw EvalError("paired_t: need at least 2 pairs");
    StatResult result;
    result.test = StatTest::paired_t;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = values_a[i] - values_b[i];
    double mean = 0.0;
    for (double x : d) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
        result.degenerate = true;
        result.statistic = 0.0;
        return result;
    }
    result.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
    result.effect_size = mean / sd;
    boost::math::students_t dist(static_cast<double>(n - 1));
    result.p_value =
        2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.statistic)));
    return result;
}

struct HolmAdjusted {
    double adjusted_p = 0.0;
    bool reject = false;
};

// Holm-Bonferroni step-down correction. adjusted_p_(i) = max over j <= i of
// min(1, (m - j + 1) * p_(j)) on the ascending order; output follows the
// input order.
inline std::vector<HolmAdjusted> holm_bonferroni(const std::vector<double>& p_values,
                                                 double alpha = 0.05) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<HolmAdjusted> out(m);
    double running_max = 0.0;
    for (std::size_t rank = 0; rank < m; ++rank) {
        const std::size_t idx = order[rank];
        const double scaled =
            std::min(1.0, static_cast<double>(m - rank) * p_values[idx]);
        running_max = std::max(running_max, scaled);
        out[idx].adjusted_p = running_max;
        out[idx].reject = running_max <= alpha;
    }
    return out;
}

}  // namespace seal
