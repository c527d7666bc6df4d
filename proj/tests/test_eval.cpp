#include <catch2/catch_amalgamated.hpp>

#include "seal/eval.hpp"
#include "seal/rng.hpp"
#include "support/oracles.hpp"

using namespace seal;

namespace {

Chunk make_chunk(const std::string& id, const std::string& text) {
    return Chunk{id, text, count_whitespace_tokens(text)};
}

JudgeInput plain_input(const std::string& answer, const std::string& gold) {
    return JudgeInput{"q", "question?", answer, gold, {}};
}

}  // namespace

TEST_CASE("deterministic judge accepts exact and containing answers") {
    DeterministicJudge judge;
    CHECK(judge.judge(plain_input("Lillehammer", "Lillehammer")).correct);
    CHECK(judge.judge(plain_input("The city was Lillehammer", "Lillehammer")).correct);
    CHECK(judge.judge(plain_input("margaret atwood.", "Margaret Atwood")).correct);
}

TEST_CASE("deterministic judge rejects refusals when the gold answer is clear") {
    DeterministicJudge judge;
    CHECK_FALSE(judge.judge(plain_input("I don't know", "Lillehammer")).correct);
    CHECK_FALSE(judge.judge(plain_input("Oslo", "Lillehammer")).correct);
}

TEST_CASE("judge input construction rejects out-of-context passages") {
    const auto in_buffer = make_chunk("a", "text a");
    const auto foreign = make_chunk("b", "text b");
    CHECK_THROWS_AS(
        make_judge_input("q", "?", "ans", "gold", {in_buffer, foreign}, {in_buffer}),
        EvalError);
    const auto ok = make_judge_input("q", "?", "ans", "gold", {in_buffer}, {in_buffer});
    CHECK(ok.context_texts.size() == 1);
}

TEST_CASE("provider judge excludes unparseable verdicts") {
    auto mock = std::make_shared<MockGenerator>();
    mock->set_fallback([](const GenerationRequest&) { return "not json at all"; });
    PromptLibrary prompts;
    ProviderJudge judge(mock, prompts.get("judge_system"), prompts.get("judge_user_template"),
                        "m");
    const auto verdict = judge.judge(plain_input("a", "b"));
    CHECK_FALSE(verdict.valid);
}

TEST_CASE("provider judge parses strict JSON verdicts") {
    auto mock = std::make_shared<MockGenerator>();
    mock->set_fallback(
        [](const GenerationRequest&) { return R"({"reasoning": "fine", "correct": true})"; });
    PromptLibrary prompts;
    ProviderJudge judge(mock, prompts.get("judge_system"), prompts.get("judge_user_template"),
                        "m");
    const auto verdict = judge.judge(plain_input("a", "a"));
    CHECK(verdict.valid);
    CHECK(verdict.correct);
}

TEST_CASE("evidence score fixture: P=1/3, R=1/2, F1=0.4") {
    const auto score = evidence_score({"A", "B", "C"}, {"A", "D"}, AliasMap{});
    CHECK(score.precision == Catch::Approx(1.0 / 3.0));
    CHECK(score.recall == Catch::Approx(0.5));
    CHECK(score.f1 == Catch::Approx(0.4));
    CHECK(score.matched_titles == std::set<std::string>{"A"});
}

TEST_CASE("evidence score matches aliases after canonicalization") {
    AliasMap aliases;
    aliases.add("JFK", "John F. Kennedy");
    const auto score = evidence_score({"JFK"}, {"John F. Kennedy"}, aliases);
    CHECK(score.precision == 1.0);
    CHECK(score.recall == 1.0);
}

TEST_CASE("evidence score counts duplicates once and degrades to zero") {
    const auto dup = evidence_score({"A", "A", "B"}, {"A"}, AliasMap{});
    CHECK(dup.precision == 0.5);  // retrieved set {A, B}
    CHECK(dup.recall == 1.0);
    const auto empty = evidence_score({}, {"A"}, AliasMap{});
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);
}

TEST_CASE("mcnemar on the b=10, c=2 fixture") {
    std::vector<PairedRunRecord> records;
    for (int i = 0; i < 10; ++i) records.push_back({"a" + std::to_string(i), true, false, {}, {}});
    for (int i = 0; i < 2; ++i) records.push_back({"b" + std::to_string(i), false, true, {}, {}});
    for (int i = 0; i < 5; ++i) records.push_back({"c" + std::to_string(i), true, true, {}, {}});
    const auto result = mcnemar(records);
    CHECK(result.b_count == 10);
    CHECK(result.c_count == 2);
    CHECK(result.statistic == Catch::Approx(49.0 / 12.0).margin(1e-12));
    REQUIRE(result.p_value.has_value());
    CHECK(*result.p_value == Catch::Approx(0.0433).margin(5e-5));
    // cross-check against the independent reference survival function
    CHECK(std::abs(*result.p_value - seal::testing::ref_chi2_sf_1df(result.statistic)) <= 1e-9);
}

TEST_CASE("mcnemar with no discordance pins p to 1") {
    std::vector<PairedRunRecord> records = {{"q1", true, true, {}, {}},
                                            {"q2", false, false, {}, {}}};
    const auto result = mcnemar(records);
    CHECK(result.statistic == 0.0);
    CHECK(result.p_value == 1.0);
}

TEST_CASE("mcnemar agrees with the reference implementation on random tables") {
    Rng rng(8888);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PairedRunRecord> records;
        const std::size_t b = rng.index(30);
        const std::size_t c = rng.index(30);
        if (b + c == 0) continue;
        for (std::size_t i = 0; i < b; ++i) records.push_back({"b", true, false, {}, {}});
        for (std::size_t i = 0; i < c; ++i) records.push_back({"c", false, true, {}, {}});
        const auto result = mcnemar(records);
        REQUIRE(result.p_value.has_value());
        CHECK(std::abs(*result.p_value - seal::testing::ref_chi2_sf_1df(result.statistic)) <=
              1e-9);
    }
}

TEST_CASE("paired t on the d=[1,2,3,4] fixture") {
    const auto result = paired_t({1, 2, 3, 4}, {0, 0, 0, 0});
    CHECK(result.statistic == Catch::Approx(3.872983346).margin(1e-9));
    REQUIRE(result.effect_size.has_value());
    CHECK(*result.effect_size == Catch::Approx(1.936491673).margin(1e-9));
    REQUIRE(result.p_value.has_value());
    CHECK(std::abs(*result.p_value -
                   seal::testing::ref_t_two_sided_p(result.statistic, 3.0)) <= 1e-9);
}

TEST_CASE("degenerate difference vectors claim no p-value") {
    const auto zeros = paired_t({1, 1, 1}, {1, 1, 1});
    CHECK(zeros.degenerate);
    CHECK_FALSE(zeros.p_value.has_value());
    const auto constant = paired_t({2, 3, 4}, {1, 2, 3});
    CHECK(constant.degenerate);  // all differences identical
}

TEST_CASE("paired t rejects unaligned and undersized inputs") {
    CHECK_THROWS_AS(paired_t({1, 2}, {1}), EvalError);
    CHECK_THROWS_AS(paired_t({1}, {1}), EvalError);
}

TEST_CASE("paired t agrees with the reference implementation on random vectors") {
    Rng rng(13579);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.index(40);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.next_double();
            b[i] = rng.next_double();
        }
        const auto result = paired_t(a, b);
        if (result.degenerate) continue;
        REQUIRE(result.p_value.has_value());
        const double ref = seal::testing::ref_t_two_sided_p(result.statistic,
                                                            static_cast<double>(n - 1));
        CHECK(std::abs(*result.p_value - ref) <= 1e-9);
    }
}

TEST_CASE("holm-bonferroni fixture rejects only the smallest p") {
    const auto out = holm_bonferroni({0.01, 0.04, 0.03}, 0.05);
    REQUIRE(out.size() == 3);
    CHECK(out[0].adjusted_p == Catch::Approx(0.03));
    CHECK(out[1].adjusted_p == Catch::Approx(0.06));
    CHECK(out[2].adjusted_p == Catch::Approx(0.06));
    CHECK(out[0].reject);
    CHECK_FALSE(out[1].reject);
    CHECK_FALSE(out[2].reject);
}

TEST_CASE("holm-bonferroni degenerate families") {
    const auto single = holm_bonferroni({0.03}, 0.05);
    REQUIRE(single.size() == 1);
    CHECK(single[0].adjusted_p == Catch::Approx(0.03));
    CHECK(single[0].reject);
    const auto all_ones = holm_bonferroni({1.0, 1.0, 1.0}, 0.05);
    for (const auto& h : all_ones) {
        CHECK(h.adjusted_p == 1.0);
        CHECK_FALSE(h.reject);
    }
}

TEST_CASE("holm-bonferroni output order matches the input order") {
    const auto out = holm_bonferroni({0.04, 0.01, 0.03}, 0.05);
    CHECK(out[1].adjusted_p == Catch::Approx(0.03));  // the smallest p sits at index 1
    CHECK(out[1].reject);
    CHECK_FALSE(out[0].reject);
}

TEST_CASE("pairing requires the exact same question id sequence") {
    std::vector<JudgeVerdict> a = {{"q1", true, "", true}, {"q2", false, "", true}};
    std::vector<JudgeVerdict> b = {{"q1", true, "", true}, {"q3", false, "", true}};
    CHECK_THROWS_AS(pair_outcomes(a, b), EvalError);
    std::vector<JudgeVerdict> short_b = {{"q1", true, "", true}};
    CHECK_THROWS_AS(pair_outcomes(a, short_b), EvalError);
}

TEST_CASE("judge-failure pairs are excluded symmetrically and counted") {
    std::vector<JudgeVerdict> a = {{"q1", true, "", true}, {"q2", true, "", false},
                                   {"q3", true, "", true}};
    std::vector<JudgeVerdict> b = {{"q1", false, "", true}, {"q2", true, "", true},
                                   {"q3", false, "", false}};
    const auto paired = pair_outcomes(a, b);
    CHECK(paired.records.size() == 1);
    CHECK(paired.excluded == 2);
    CHECK(paired.records[0].question_id == "q1");
}
