#include <catch2/catch_amalgamated.hpp>

#include "seal/baselines.hpp"
#include "seal/controller.hpp"
#include "seal/synth.hpp"

using namespace seal;

namespace {

struct Fixture {
    std::vector<Document> docs;
    AliasMap aliases;
    std::optional<Index> index;
    std::shared_ptr<ExtractionCache> cache = std::make_shared<ExtractionCache>();
    RunEnvironment env;

    explicit Fixture(std::vector<Document> documents, AliasMap alias_map = {})
        : docs(std::move(documents)), aliases(std::move(alias_map)) {
        index.emplace(Index::build(segment_all(docs), RetrieverConfig{}));
        env.index = &*index;
        env.alias_map = &aliases;
        env.analyzer = std::make_shared<DeterministicAnalyzer>();
        env.assessor = std::make_shared<DeterministicAssessor>();
        env.extractor = std::make_shared<PatternExtractor>();
        env.generator = std::make_shared<DeterministicReader>();
        env.extraction_cache = cache;
    }
};

Document doc(const std::string& title, std::vector<std::string> sentences) {
    Document d;
    d.doc_id = title;
    d.title = title;
    d.canonical_title = title;
    d.sentences = std::move(sentences);
    return d;
}

// Bridge fixture in the shape of the album-to-games walkthrough.
std::vector<Document> case_a_docs() {
    return {
        doc("Parklife (album)", {"Parklife was released in 1994 by Blur.",
                                 "The album topped the charts for weeks."}),
        doc("1994 Winter Olympics",
            {"The 1994 Winter Olympics was held in Lillehammer.",
             "The games featured many new events."}),
        doc("Olympic Games guide",
            {"The Olympic Games is a famous international event.",
             "A different city has hosted the Olympic Games each year."}),
        doc("Blur discography", {"Blur is a popular touring band.",
                                 "Blur has released many albums and singles."}),
    };
}

std::vector<Document> case_b_docs() {
    return {
        doc("The Handmaid's Tale", {"Margaret Atwood wrote The Handmaid's Tale.",
                                    "The novel is set in Gilead."}),
        doc("Lost in Translation", {"Sofia Coppola directed Lost in Translation.",
                                    "The film is set in Tokyo."}),
        doc("Margaret Atwood", {"Margaret Atwood was born on November 18, 1939.",
                                "Margaret Atwood is a novelist."}),
        doc("Sofia Coppola", {"Sofia Coppola was born on May 14, 1971.",
                              "Sofia Coppola is a director."}),
    };
}

}  // namespace

TEST_CASE("analyze: comparison questions yield one qualifier need per entity") {
    DeterministicAnalyzer analyzer;
    const auto needs = analyzer.analyze("Who is older, Margaret Atwood or Sofia Coppola?");
    REQUIRE(needs.needs.size() == 2);
    for (const auto& n : needs.needs) {
        CHECK(n.kind == NeedKind::qualifier);
        CHECK(n.qualifier_key == "date");
    }
    CHECK(needs.needs[0].anchors == std::vector<std::string>{"Margaret Atwood"});
    CHECK(needs.needs[1].anchors == std::vector<std::string>{"Sofia Coppola"});
}

TEST_CASE("analyze: bridge questions yield a date need and a dependent entity need") {
    DeterministicAnalyzer analyzer;
    const auto needs = analyzer.analyze(
        "Which city hosted the Olympic Games in the same year that the band Blur released the "
        "album Parklife?");
    REQUIRE(needs.needs.size() == 2);
    CHECK(needs.needs[0].kind == NeedKind::qualifier);
    CHECK(needs.needs[0].qualifier_key == "date");
    CHECK(needs.needs[1].kind == NeedKind::entity);
    REQUIRE(needs.needs[1].depends_on.has_value());
    CHECK(*needs.needs[1].depends_on == needs.needs[0].need_id);
}

TEST_CASE("analyze: unknown question forms degrade to one catch-all need") {
    DeterministicAnalyzer analyzer;
    const auto needs = analyzer.analyze("What is the airspeed velocity of an unladen swallow?");
    CHECK(needs.needs.size() == 1);
}

TEST_CASE("initialize fills the buffer from the top-k and flags under-capacity") {
    Fixture fx({doc("Only A", {"Only sentence one."}), doc("Only B", {"Only sentence two."})});
    ControllerConfig cfg;
    cfg.k = 3;
    Trace trace;
    const auto state = initialize("only sentence", fx.env, cfg, trace);
    CHECK(state.buffer.size() == 2);
    CHECK(state.under_capacity);
    CHECK(state.cost.retriever_calls == 1);
}

TEST_CASE("compute_gaps types gaps per the unmet need kind") {
    DeterministicAnalyzer analyzer;
    const auto needs = analyzer.analyze(
        "Which city hosted the Olympic Games in the same year that the band Blur released the "
        "album Parklife?");
    PatternExtractor extractor;
    ExtractionCache cache;
    AliasMap aliases;
    const auto hop1 = segment(case_a_docs()[0]);
    const auto ledger = rebuild_for_chunks({hop1}, extractor, cache, aliases);

    const auto gaps = compute_gaps(needs, ledger);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps.gaps[0].gap_type == GapType::missing_entity);
    // the resolved release year is prepended as an anchor
    REQUIRE(gaps.gaps[0].anchor_entities.size() == 2);
    CHECK(gaps.gaps[0].anchor_entities[0] == "1994");
    CHECK(gaps.gaps[0].anchor_entities[1] == "Olympic Games");
}

TEST_CASE("compute_gaps is empty when every need is met") {
    DeterministicAnalyzer analyzer;
    const auto needs = analyzer.analyze("Who is older, Margaret Atwood or Sofia Coppola?");
    PatternExtractor extractor;
    ExtractionCache cache;
    AliasMap aliases;
    const auto docs = case_b_docs();
    const auto ledger = rebuild_for_chunks({segment(docs[2]), segment(docs[3])}, extractor, cache,
                                           aliases);
    CHECK(compute_gaps(needs, ledger).empty());
    const auto report = compute_sufficiency(needs, ledger);
    CHECK(report.coverage == 1.0);
    CHECK(report.sufficient);
}

TEST_CASE("contradictions block sufficiency") {
    DeterministicAnalyzer analyzer;
    const auto needs = analyzer.analyze(
        "Which city hosted the Olympic Games in the same year that the band Blur released the "
        "album Parklife?");
    PatternExtractor extractor;
    ExtractionCache cache;
    AliasMap aliases;
    const auto a = Chunk{"a", "A: Blur released Parklife in 1994.", 6};
    const auto b = Chunk{"b", "B: Blur released Parklife in 1995.", 6};
    const auto host = Chunk{"h", "H: The 1994 Olympic Games was held in Lillehammer.", 9};
    const auto ledger = rebuild_for_chunks({a, b, host}, extractor, cache, aliases);
    const auto report = compute_sufficiency(needs, ledger);
    CHECK(report.contradiction);
    CHECK_FALSE(report.sufficient);
}

TEST_CASE("coverage is the met-needs fraction") {
    DeterministicAnalyzer analyzer;
    const auto needs = analyzer.analyze("Who is older, Margaret Atwood or Sofia Coppola?");
    PatternExtractor extractor;
    ExtractionCache cache;
    AliasMap aliases;
    const auto ledger =
        rebuild_for_chunks({segment(case_b_docs()[2])}, extractor, cache, aliases);
    const auto report = compute_sufficiency(needs, ledger);
    CHECK(report.coverage == 0.5);
    CHECK(report.answerability == 0.5);
    CHECK_FALSE(report.sufficient);
}

TEST_CASE("micro-query templates render anchors then the missing term") {
    GapSpec gaps;
    GapRecord g;
    g.need_id = "n1";
    g.gap_type = GapType::missing_qualifier;
    g.anchor_entities = {"Sofia Coppola"};
    g.missing_what = "date of birth";
    gaps.gaps.push_back(g);
    GapRecord h;
    h.need_id = "n2";
    h.gap_type = GapType::missing_entity;
    h.anchor_entities = {"1994", "Olympic Games"};
    h.missing_what = "host city";
    gaps.gaps.push_back(h);

    Blocklist blocklist;
    const auto batch = make_micro_queries(gaps, blocklist, 3);
    REQUIRE(batch.issued.size() == 2);
    CHECK(batch.issued[0] == "Sofia Coppola date of birth");
    CHECK(batch.issued[1] == "1994 Olympic Games host city");

    blocklist.block("Sofia Coppola date of birth", BlockReason::no_novel_info);
    const auto filtered = make_micro_queries(gaps, blocklist, 3);
    REQUIRE(filtered.issued.size() == 1);
    CHECK(filtered.issued[0] == "1994 Olympic Games host city");
    REQUIRE(filtered.blocked.size() == 1);
}

TEST_CASE("fan-out is capped per loop") {
    GapSpec gaps;
    for (int i = 0; i < 6; ++i) {
        GapRecord g;
        g.need_id = "n" + std::to_string(i);
        g.gap_type = GapType::missing_entity;
        g.anchor_entities = {"Entity" + std::to_string(i)};
        g.missing_what = "detail";
        gaps.gaps.push_back(g);
    }
    Blocklist blocklist;
    CHECK(make_micro_queries(gaps, blocklist, 3).issued.size() == 3);
}

TEST_CASE("bridge repair: one swap at t=1 lands the answer document") {
    Fixture fx(case_a_docs());
    ControllerConfig cfg;
    cfg.k = 1;
    cfg.loop_budget = 1;
    const auto result = run_controller(
        "case-a",
        "Which city hosted the Olympic Games in the same year that the band Blur released the "
        "album Parklife?",
        fx.env, cfg);
    CHECK(result.answer == "Lillehammer");
    const auto swaps = result.trace.events_of_type("swap");
    REQUIRE(swaps.size() == 1);
    CHECK(swaps[0].at("loop_index") == 1);
    CHECK(swaps[0].at("payload").at("candidate") == "1994 Winter Olympics");
    // the issued micro-query carries the resolved year
    const auto queries = result.trace.events_of_type("micro_queries");
    REQUIRE_FALSE(queries.empty());
    CHECK(queries[0].at("payload").at("issued")[0] == "1994 Olympic Games host city");
    // final ledger holds the bridge relation
    bool found = false;
    for (const auto& [key, rel] : result.state.ledger.relations()) {
        if (rel.relation == "held_in" && rel.tail == "Lillehammer") found = true;
    }
    CHECK(found);
}

TEST_CASE("attribute alignment: the missing bio displaces a redundant plot page") {
    Fixture fx(case_b_docs());
    ControllerConfig cfg;
    cfg.k = 3;
    cfg.loop_budget = 2;
    const auto result = run_controller(
        "case-b", "Who is older, Margaret Atwood or Sofia Coppola?", fx.env, cfg);
    CHECK(result.answer == "Margaret Atwood");
    bool coppola_in_context = false;
    for (const auto& c : result.final_context) {
        if (c.doc_id == "Sofia Coppola") coppola_in_context = true;
    }
    CHECK(coppola_in_context);
}

TEST_CASE("alias mismatch: an incomplete redirect map stalls the run") {
    // Retrieval must surface the alias-titled page; the fruit page is the
    // lexical face of the question.
    std::vector<Document> docs = {
        doc("Apple", {"Apple is a sweet fruit grown on trees.",
                      "The apple company of the orchard world."}),
        doc("Apple Computer", {"Apple Computer created the iPhone.",
                               "Tim Cook leads the firm today."}),
    };

    SECTION("without the redirect the company entity stays unlinked") {
        Fixture fx(docs);
        ControllerConfig cfg;
        cfg.k = 1;
        cfg.loop_budget = 3;
        const auto result = run_controller(
            "case-c", "Who is the CEO of the company that created the iPhone?", fx.env, cfg);
        CHECK(result.halt_reason != "sufficient");
        CHECK_FALSE(result.state.ledger.has_entity("Apple Inc."));
    }

    SECTION("with the redirect the merge canonicalizes the company") {
        AliasMap aliases;
        aliases.add("Apple Computer", "Apple Inc.");
        Fixture fx(docs, aliases);
        PatternExtractor extractor;
        bool miss = false;
        const auto facts = fx.cache->get_or_extract(segment(docs[1]), extractor, miss);
        const auto ledger = merge(EntityLedger{}, facts, aliases);
        CHECK(ledger.has_entity("Apple Inc."));
    }
}

TEST_CASE("sufficient at t=0 issues zero micro-queries") {
    // both bios rank at the top for the comparison question: tiny corpus
    std::vector<Document> docs = {
        doc("Ada Vale", {"Ada Vale was born on March 2, 1930.", "Ada Vale is a novelist."}),
        doc("Bo Crane", {"Bo Crane was born on May 4, 1950.", "Bo Crane is a novelist."}),
    };
    Fixture fx(docs);
    ControllerConfig cfg;
    cfg.k = 2;
    cfg.loop_budget = 3;
    const auto result =
        run_controller("t0", "Who is older, Ada Vale or Bo Crane?", fx.env, cfg);
    CHECK(result.answer == "Ada Vale");
    CHECK(result.halt_reason == "sufficient");
    CHECK(result.trace.events_of_type("micro_queries").empty());
    CHECK(result.trace.events_of_type("retrieval").empty());
    CHECK(result.state.cost.retriever_calls == 1);
}

TEST_CASE("dwell guard: a slot inserted at loop t survives loop t+1") {
    Fixture fx(case_a_docs());
    ControllerConfig cfg;
    cfg.k = 1;
    cfg.loop_budget = 3;
    const auto result = run_controller(
        "dwell",
        "Which city hosted the Olympic Games in the same year that the band Blur released the "
        "album Parklife?",
        fx.env, cfg);
    // the answer doc swapped in at loop 1 must still be the final context
    REQUIRE(result.final_context.size() == 1);
    CHECK(result.final_context[0].doc_id == "1994 Winter Olympics");
    CHECK(result.answer == "Lillehammer");
    // at loop 2 the slot was dwell-protected
    for (const auto& e : result.trace.events_of_type("candidates_scored")) {
        if (e.at("loop_index") != 2) continue;
        for (const auto& slot : e.at("payload").at("slots")) {
            CHECK(slot.at("dwell_protected") == true);
        }
    }
    // and no swap happened after loop 1
    for (const auto& e : result.trace.events_of_type("swap")) {
        CHECK(e.at("loop_index") == 1);
    }
}

TEST_CASE("unproductive queries are blocklisted and never re-issued") {
    Fixture fx(case_a_docs());
    ControllerConfig cfg;
    cfg.k = 1;
    cfg.loop_budget = 5;
    const auto result = run_controller(
        "blocklist",
        "Which city hosted the Olympic Games in the same year that the band Blur released the "
        "album Parklife?",
        fx.env, cfg);
    std::set<std::string> issued;
    for (const auto& e : result.trace.events_of_type("micro_queries")) {
        for (const auto& q : e.at("payload").at("issued")) {
            const std::string norm = normalize_query(q.get<std::string>());
            INFO("re-issued query: " << q.get<std::string>());
            CHECK(issued.insert(norm).second);
        }
    }
    CHECK(result.state.blocklist.size() > 0);
}

TEST_CASE("run under L=0 matches the basic controller byte for byte") {
    SyntheticSpec spec;
    spec.seed = 23;
    spec.n_questions = 6;
    spec.question_type = SyntheticQuestionType::mixed;
    const auto corpus = generate_synthetic(spec);
    Fixture fx(corpus.documents);
    for (const auto& item : corpus.items) {
        ControllerConfig cfg;
        cfg.k = 3;
        cfg.loop_budget = 0;
        const auto seal_run = run_controller(item.question_id, item.question, fx.env, cfg);
        const auto basic_run = run_basic(item.question_id, item.question, fx.env, 3);
        CHECK(seal_run.answer == basic_run.answer);
        REQUIRE(seal_run.final_context.size() == basic_run.final_context.size());
        for (std::size_t i = 0; i < seal_run.final_context.size(); ++i) {
            CHECK(seal_run.final_context[i].doc_id == basic_run.final_context[i].doc_id);
            CHECK(seal_run.final_context[i].text == basic_run.final_context[i].text);
        }
        CHECK(seal_run.state.cost.generator_calls == 1);
        CHECK(seal_run.state.cost.retriever_calls == 1);
    }
}

TEST_CASE("cost ledger stays within the loop envelope") {
    SyntheticSpec spec;
    spec.seed = 29;
    spec.n_questions = 8;
    spec.question_type = SyntheticQuestionType::mixed;
    spec.comparison_arity = 4;
    const auto corpus = generate_synthetic(spec);
    Fixture fx(corpus.documents);
    for (int L : {0, 1, 3}) {
        for (const auto& item : corpus.items) {
            ControllerConfig cfg;
            cfg.k = 3;
            cfg.loop_budget = L;
            const auto result = run_controller(item.question_id, item.question, fx.env, cfg);
            CHECK(result.state.cost.generator_calls == 1);
            CHECK(result.state.cost.retriever_calls <=
                  1 + static_cast<std::size_t>(L) * cfg.fan_out_cap);
        }
    }
}

TEST_CASE("generator failure surfaces an error result with the trace intact") {
    Fixture fx(case_a_docs());
    fx.env.generator = std::make_shared<MockGenerator>();  // no canned responses: throws
    ControllerConfig cfg;
    cfg.k = 1;
    cfg.loop_budget = 0;
    const auto result = run_controller("fail", "Who is older, A or B?", fx.env, cfg);
    CHECK(result.generator_failed);
    CHECK_FALSE(result.error.empty());
    CHECK(result.state.cost.generator_calls == 0);
    CHECK_FALSE(result.trace.events().empty());
}

TEST_CASE("coverage never decreases across loops on generator-built corpora") {
    SyntheticSpec spec;
    spec.seed = 37;
    spec.n_questions = 10;
    spec.question_type = SyntheticQuestionType::mixed;
    spec.comparison_arity = 3;
    const auto corpus = generate_synthetic(spec);
    Fixture fx(corpus.documents);
    for (const auto& item : corpus.items) {
        ControllerConfig cfg;
        cfg.k = 2;
        cfg.loop_budget = 5;
        const auto result = run_controller(item.question_id, item.question, fx.env, cfg);
        double last = -1.0;
        for (const auto& e : result.trace.events_of_type("assess")) {
            const double coverage = e.at("payload").at("coverage").get<double>();
            CHECK(coverage >= last);
            last = coverage;
        }
    }
}
