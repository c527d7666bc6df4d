#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <unordered_map>
#include <unordered_set>

#include "seal/index.hpp"
#include "seal/rng.hpp"

using namespace seal;

namespace {

Chunk make_chunk(const std::string& id, const std::string& text) {
    return Chunk{id, text, count_whitespace_tokens(text)};
}

std::vector<Chunk> fixture_chunks() {
    return {
        make_chunk("d0", "Alpha: the quick brown fox jumps over the lazy dog"),
        make_chunk("d1", "Beta: a fast auburn fox vaulted a sleepy hound"),
        make_chunk("d2", "Gamma: rivers flow from mountains to the sea"),
        make_chunk("d3", "Delta: the sea is salty and the rivers are fresh"),
        make_chunk("d4", "Epsilon: foxes and hounds share the meadow"),
        make_chunk("d5", "Zeta: mountain trails wind through quiet forests"),
        make_chunk("d6", "Eta: the dog sleeps beside the fire"),
        make_chunk("d7", "Theta: quick reflexes help the fox escape"),
        make_chunk("d8", "Iota: a meadow full of flowers and bees"),
        make_chunk("d9", "Kappa: bees make honey in the old oak"),
    };
}

// Independent re-implementation of the documented lexical formula.
double oracle_score(const std::string& query, const Chunk& chunk,
                    const std::vector<Chunk>& corpus) {
    auto token_set = [](const std::string& t) {
        auto toks = tokenize(t);
        return std::unordered_set<std::string>(toks.begin(), toks.end());
    };
    std::unordered_map<std::string, int> df;
    for (const auto& c : corpus) {
        for (const auto& t : token_set(c.text)) df[t] += 1;
    }
    const auto qset = token_set(query);
    const auto dset = token_set(chunk.text);
    double s = 0.0;
    for (const auto& t : qset) {
        if (dset.count(t))
            s += std::log(1.0 + static_cast<double>(corpus.size()) / df.at(t));
    }
    return s / std::sqrt(static_cast<double>(dset.size()));
}

class IdentityScorer : public PairwiseScorerPort {
public:
    double score(const std::string&, const Chunk& chunk) override {
        return 1000.0 - static_cast<double>(order_.emplace(chunk.doc_id, order_.size()).first->second);
    }

private:
    std::map<std::string, std::size_t> order_;
};

// Returns each candidate's original retrieval score unchanged but negated.
class NegatingScorer : public PairwiseScorerPort {
public:
    explicit NegatingScorer(const std::vector<ScoredChunk>& original) {
        for (const auto& r : original) scores_[r.chunk.doc_id] = -r.score;
    }
    double score(const std::string&, const Chunk& chunk) override {
        return scores_.at(chunk.doc_id);
    }

private:
    std::map<std::string, double> scores_;
};

class ShortestTextScorer : public PairwiseScorerPort {
public:
    double score(const std::string&, const Chunk& chunk) override {
        return -static_cast<double>(chunk.text.size());
    }
};

class ThrowingScorer : public PairwiseScorerPort {
public:
    double score(const std::string&, const Chunk&) override {
        throw std::runtime_error("scorer offline");
    }
};

// Basis-vector embedder: text "basis-i" maps to unit vector e_i.
class BasisEmbedder : public EmbeddingPort {
public:
    explicit BasisEmbedder(std::size_t dim) : dim_(dim) {}
    std::vector<std::vector<double>> embed(const EmbeddingRequest& request) override {
        std::vector<std::vector<double>> out;
        for (const auto& text : request.texts) {
            std::vector<double> v(dim_, 0.0);
            const auto pos = text.find_last_of('-');
            v[std::stoul(text.substr(pos + 1)) % dim_] = 1.0;
            out.push_back(std::move(v));
        }
        return out;
    }
    std::string id() const override { return "basis-embedder"; }

private:
    std::size_t dim_;
};

class CountingEmbedder : public EmbeddingPort {
public:
    std::vector<std::vector<double>> embed(const EmbeddingRequest& request) override {
        calls += 1;
        HashEmbedder inner(16);
        return inner.embed(request);
    }
    std::string id() const override { return "hash-embedder"; }  // cache-compatible with HashEmbedder
    int calls = 0;
};

class FailingEmbedder : public EmbeddingPort {
public:
    std::vector<std::vector<double>> embed(const EmbeddingRequest&) override {
        throw ProviderError("embedding service down");
    }
    std::string id() const override { return "failing-embedder"; }
};

}  // namespace

TEST_CASE("lexical index answers queries within corpus bounds") {
    const auto chunks = fixture_chunks();
    const auto index = Index::build(chunks, RetrieverConfig{});
    const auto results = index.query("fox", 25);
    CHECK(results.size() == 10);  // top_m larger than corpus returns the full corpus
    CHECK(index.query("fox", 3).size() == 3);
}

TEST_CASE("duplicate doc ids are rejected at build") {
    auto chunks = fixture_chunks();
    chunks.push_back(make_chunk("d0", "duplicate id"));
    CHECK_THROWS_AS(Index::build(chunks, RetrieverConfig{}), IndexError);
}

TEST_CASE("empty queries are rejected") {
    const auto index = Index::build(fixture_chunks(), RetrieverConfig{});
    CHECK_THROWS_AS(index.query("  ", 3), IndexError);
}

TEST_CASE("a chunk's own text ranks it first") {
    const auto chunks = fixture_chunks();
    const auto index = Index::build(chunks, RetrieverConfig{});
    for (const auto& probe : {chunks[2], chunks[7]}) {
        const auto results = index.query(probe.text, 3);
        REQUIRE_FALSE(results.empty());
        CHECK(results[0].chunk.doc_id == probe.doc_id);
    }
}

TEST_CASE("lexical scores equal the brute-force oracle") {
    const auto chunks = fixture_chunks();
    const auto index = Index::build(chunks, RetrieverConfig{});
    for (const std::string query :
         {"the quick fox", "rivers and sea water", "bees in the meadow"}) {
        const auto results = index.query(query, chunks.size());
        REQUIRE(results.size() == chunks.size());
        for (const auto& r : results) {
            const double expected = oracle_score(query, r.chunk, chunks);
            CHECK(std::abs(r.score - expected) <= 1e-12);
        }
    }
}

TEST_CASE("results are rank-contiguous with non-increasing scores and doc_id tie-break") {
    std::vector<Chunk> chunks = {
        make_chunk("b", "same words here"),
        make_chunk("a", "same words here"),
        make_chunk("c", "same words here"),
        make_chunk("d", "totally different content"),
    };
    const auto index = Index::build(chunks, RetrieverConfig{});
    const auto results = index.query("same words", 10);
    REQUIRE(results.size() == 4);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].rank == static_cast<int>(i + 1));
        if (i > 0) CHECK(results[i - 1].score >= results[i].score);
    }
    CHECK(results[0].chunk.doc_id == "a");
    CHECK(results[1].chunk.doc_id == "b");
    CHECK(results[2].chunk.doc_id == "c");
}

TEST_CASE("identical queries yield identical ranked lists") {
    const auto index = Index::build(fixture_chunks(), RetrieverConfig{});
    const auto a = index.query("fox in the meadow", 10);
    const auto b = index.query("fox in the meadow", 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].chunk.doc_id == b[i].chunk.doc_id);
        CHECK(a[i].score == b[i].score);
    }
}

TEST_CASE("dense backend with basis vectors returns exact cosine hits") {
    std::vector<Chunk> chunks;
    for (int i = 0; i < 5; ++i) chunks.push_back(make_chunk("doc-" + std::to_string(i), "basis-" + std::to_string(i)));
    RetrieverConfig cfg;
    cfg.backend = RetrieverBackend::dense;
    const auto index = Index::build(chunks, cfg, std::make_shared<BasisEmbedder>(8));
    const auto results = index.query("basis-3", 2);
    REQUIRE_FALSE(results.empty());
    CHECK(results[0].chunk.doc_id == "doc-3");
    CHECK(results[0].score == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(results[0].rank == 1);
}

TEST_CASE("dense vectors are cached to disk and reused") {
    const auto cache_dir =
        (std::filesystem::temp_directory_path() / "seal_embed_cache_test").string();
    std::filesystem::remove_all(cache_dir);
    RetrieverConfig cfg;
    cfg.backend = RetrieverBackend::dense;
    cfg.cache_dir = cache_dir;
    auto counting = std::make_shared<CountingEmbedder>();
    (void)Index::build(fixture_chunks(), cfg, counting);
    const int calls_first = counting->calls;
    CHECK(calls_first > 0);
    (void)Index::build(fixture_chunks(), cfg, counting);
    CHECK(counting->calls == calls_first);  // all vectors served from cache
    std::filesystem::remove_all(cache_dir);
}

TEST_CASE("embedding failures surface as build errors") {
    RetrieverConfig cfg;
    cfg.backend = RetrieverBackend::dense;
    CHECK_THROWS_AS(Index::build(fixture_chunks(), cfg, std::make_shared<FailingEmbedder>()),
                    IndexError);
}

TEST_CASE("rerank with an identity scorer keeps the order") {
    const auto index = Index::build(fixture_chunks(), RetrieverConfig{});
    const auto results = index.query("fox", 5);
    IdentityScorer scorer;
    const auto outcome = rerank(results, "fox", scorer);
    REQUIRE_FALSE(outcome.fell_back);
    REQUIRE(outcome.results.size() == results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(outcome.results[i].chunk.doc_id == results[i].chunk.doc_id);
        CHECK(outcome.results[i].rank == static_cast<int>(i + 1));
        CHECK(outcome.results[i].prior_score == results[i].score);
    }
}

TEST_CASE("rerank with negated scores reverses the list") {
    const auto index = Index::build(fixture_chunks(), RetrieverConfig{});
    auto results = index.query("fox jumps over the lazy dog", 4);
    // force strictly distinct scores for a clean reversal
    for (std::size_t i = 0; i < results.size(); ++i) results[i].score = 10.0 - static_cast<double>(i);
    NegatingScorer scorer(results);
    const auto outcome = rerank(results, "q", scorer);
    REQUIRE(outcome.results.size() == results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(outcome.results[i].chunk.doc_id == results[results.size() - 1 - i].chunk.doc_id);
    }
}

TEST_CASE("rerank by shortest text matches a brute-force sort") {
    const auto index = Index::build(fixture_chunks(), RetrieverConfig{});
    const auto results = index.query("the fox and the sea", 6);
    ShortestTextScorer scorer;
    const auto outcome = rerank(results, "q", scorer);
    auto expected = results;
    std::sort(expected.begin(), expected.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.chunk.text.size() != b.chunk.text.size())
            return a.chunk.text.size() < b.chunk.text.size();
        return a.chunk.doc_id < b.chunk.doc_id;
    });
    REQUIRE(outcome.results.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(outcome.results[i].chunk.doc_id == expected[i].chunk.doc_id);
    }
}

TEST_CASE("scorer failure falls back to the input order, flagged") {
    const auto index = Index::build(fixture_chunks(), RetrieverConfig{});
    const auto results = index.query("fox", 5);
    ThrowingScorer scorer;
    const auto outcome = rerank(results, "fox", scorer);
    CHECK(outcome.fell_back);
    REQUIRE(outcome.results.size() == results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(outcome.results[i].chunk.doc_id == results[i].chunk.doc_id);
    }
}

TEST_CASE("index fingerprint is stable and content-sensitive") {
    const auto a = Index::build(fixture_chunks(), RetrieverConfig{});
    const auto b = Index::build(fixture_chunks(), RetrieverConfig{});
    CHECK(a.fingerprint() == b.fingerprint());
    auto chunks = fixture_chunks();
    chunks[0].text += " extra";
    const auto c = Index::build(chunks, RetrieverConfig{});
    CHECK(a.fingerprint() != c.fingerprint());
}
