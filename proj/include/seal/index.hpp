#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "seal/corpus.hpp"
#include "seal/providers.hpp"
#include "seal/text.hpp"

namespace seal {

class IndexError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;
    int rank = 0;
    // Provenance for re-ranked lists: the retrieval-time score/rank.
    std::optional<double> prior_score;
    std::optional<int> prior_rank;
};

enum class RetrieverBackend { lexical, dense };

struct RetrieverConfig {
    RetrieverBackend backend = RetrieverBackend::lexical;
    std::size_t top_m = 20;  // candidate pool size M
    bool rerank = false;
    std::string embedding_model = "hash-64";
    std::string cache_dir;  // dense vector cache, optional
};

// On-disk dense-vector cache keyed by (provider id, model id, chunk hash):
// one binary file per chunk hash plus a manifest JSON per (provider, model).
class EmbeddingCache {
public:
    EmbeddingCache(std::string root, std::string provider_id, std::string model_id)
        : provider_id_(std::move(provider_id)), model_id_(std::move(model_id)) {
        dir_ = std::filesystem::path(root) / sanitize(provider_id_ + "__" + model_id_);
        std::filesystem::create_directories(dir_);
        const auto manifest = dir_ / "manifest.json";
        if (std::filesystem::exists(manifest)) {
            std::ifstream in(manifest);
            nlohmann::json j = nlohmann::json::parse(in);
            if (j.value("provider_id", "") != provider_id_ || j.value("model_id", "") != model_id_)
                throw IndexError("embedding cache manifest mismatch in " + dir_.string());
        } else {
            std::ofstream out(manifest);
            out << nlohmann::json{{"provider_id", provider_id_}, {"model_id", model_id_}}.dump(2)
                << '\n';
        }
    }

    std::optional<std::vector<double>> get(const std::string& chunk_hash) const {
        const auto file = dir_ / (chunk_hash + ".vec");
        std::ifstream in(file, std::ios::binary);
        if (!in) return std::nullopt;
        in.seekg(0, std::ios::end);
        const auto bytes = static_cast<std::size_t>(in.tellg());
        in.seekg(0);
        std::vector<double> v(bytes / sizeof(double));
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
        return v;
    }

    void put(const std::string& chunk_hash, const std::vector<double>& v) const {
        const auto file = dir_ / (chunk_hash + ".vec");
        std::ofstream out(file, std::ios::binary);
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }

private:
    static std::string sanitize(std::string s) {
        for (char& c : s) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
        }
        return s;
    }

    std::string provider_id_;
    std::string model_id_;
    std::filesystem::path dir_;
};

// Immutable retrieval index over segmented chunks.
//
// Lexical backend scoring (deterministic, dependency-free; the test suite
// re-implements this formula independently as a brute-force oracle):
//   tokens(x)   = lowercased maximal alphanumeric runs of x
//   df(t)       = number of chunks whose token set contains t
//   idf(t)      = ln(1 + N / df(t)),  N = number of chunks
//   score(q, d) = [ sum of idf(t) for t in set(tokens(q)) ∩ set(tokens(d)) ]
//                 / sqrt(|set(tokens(d))|)
// Ties are broken by ascending doc_id.
//
// Dense backend: cosine similarity over provider embeddings; vectors are
// unit-normalized at the port, so cosine is a dot product.
class Index {
public:
    static Index build(const std::vector<Chunk>& chunks, const RetrieverConfig& config,
                       std::shared_ptr<EmbeddingPort> embedder = nullptr) {
        if (chunks.empty()) throw IndexError("build_index: no chunks");
        Index index;
        index.config_ = config;
        index.chunks_ = chunks;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            if (!index.by_doc_id_.emplace(chunks[i].doc_id, i).second)
                throw IndexError("build_index: duplicate doc_id '" + chunks[i].doc_id + "'");
        }
        index.build_lexical();
        if (config.backend == RetrieverBackend::dense) {
            if (!embedder) throw IndexError("build_index: dense backend requires an embedding port");
            index.build_dense(embedder);
            index.embedder_ = std::move(embedder);
        }
        index.fingerprint_ = index.compute_fingerprint();
        return index;
    }

    std::size_t size() const { return chunks_.size(); }

    bool contains(const std::string& doc_id) const { return by_doc_id_.count(doc_id) > 0; }

    const Chunk& chunk(const std::string& doc_id) const {
        auto it = by_doc_id_.find(doc_id);
        if (it == by_doc_id_.end()) throw IndexError("index: unknown doc_id '" + doc_id + "'");
        return chunks_[it->second];
    }

    const std::vector<Chunk>& chunks() const { return chunks_; }

    const std::string& fingerprint() const { return fingerprint_; }

    std::size_t max_chunk_tokens() const {
        std::size_t m = 0;
        for (const auto& c : chunks_) m = std::max(m, c.token_count);
        return m;
    }

    std::vector<ScoredChunk> query(const std::string& text, std::size_t top_m) const {
        if (trim(text).empty()) throw IndexError("query: empty query");
        if (top_m < 1) throw IndexError("query: top_m must be >= 1");
        std::vector<double> scores = config_.backend == RetrieverBackend::dense
                                         ? score_dense(text)
                                         : score_lexical(text);
        std::vector<std::size_t> order(chunks_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return chunks_[a].doc_id < chunks_[b].doc_id;
        });
        const std::size_t n = std::min(top_m, order.size());
        std::vector<ScoredChunk> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back({chunks_[order[i]], scores[order[i]], static_cast<int>(i + 1),
                           std::nullopt, std::nullopt});
        }
        return out;
    }

    // Rank of a document under a query over the full corpus; used by the
    // synthetic generator's hardness checks.
    int rank_of(const std::string& text, const std::string& doc_id) const {
        auto results = query(text, chunks_.size());
        for (const auto& r : results) {
            if (r.chunk.doc_id == doc_id) return r.rank;
        }
        return -1;
    }

private:
    Index() = default;

    void build_lexical() {
        doc_token_sets_.resize(chunks_.size());
        for (std::size_t i = 0; i < chunks_.size(); ++i) {
            auto toks = tokenize(chunks_[i].text);
            doc_token_sets_[i] = std::unordered_set<std::string>(toks.begin(), toks.end());
            for (const auto& t : doc_token_sets_[i]) df_[t] += 1;
        }
    }

    void build_dense(const std::shared_ptr<EmbeddingPort>& embedder) {
        std::optional<EmbeddingCache> cache;
        if (!config_.cache_dir.empty())
            cache.emplace(config_.cache_dir, embedder->id(), config_.embedding_model);
        vectors_.resize(chunks_.size());
        std::vector<std::size_t> missing;
        for (std::size_t i = 0; i < chunks_.size(); ++i) {
            const std::string h = sha256_hex(chunks_[i].text);
            if (cache) {
                if (auto hit = cache->get(h)) {
                    vectors_[i] = std::move(*hit);
                    continue;
                }
            }
            missing.push_back(i);
        }
        std::vector<std::string> failures;
        constexpr std::size_t kBatch = 32;
        for (std::size_t start = 0; start < missing.size(); start += kBatch) {
            const std::size_t end = std::min(missing.size(), start + kBatch);
            EmbeddingRequest request;
            request.model_id = config_.embedding_model;
            for (std::size_t j = start; j < end; ++j)
                request.texts.push_back(chunks_[missing[j]].text);
            try {
                auto vecs = embedder->embed(request);
                for (std::size_t j = start; j < end; ++j) {
                    vectors_[missing[j]] = std::move(vecs[j - start]);
                    if (cache)
                        cache->put(sha256_hex(chunks_[missing[j]].text), vectors_[missing[j]]);
                }
            } catch (const ProviderError& e) {
                for (std::size_t j = start; j < end; ++j)
                    failures.push_back(chunks_[missing[j]].doc_id);
            }
        }
        if (!failures.empty())
            throw IndexError("build_index: embedding failed for " +
                             std::to_string(failures.size()) + " chunk(s), first: " + failures[0]);
    }

    std::vector<double> score_lexical(const std::string& text) const {
        auto qtoks = tokenize(text);
        std::unordered_set<std::string> qset(qtoks.begin(), qtoks.end());
        const double n_docs = static_cast<double>(chunks_.size());
        std::vector<double> scores(chunks_.size(), 0.0);
        for (std::size_t i = 0; i < chunks_.size(); ++i) {
            double s = 0.0;
            for (const auto& t : qset) {
                if (!doc_token_sets_[i].count(t)) continue;
                const auto it = df_.find(t);
                s += std::log(1.0 + n_docs / static_cast<double>(it->second));
            }
            scores[i] = s / std::sqrt(static_cast<double>(doc_token_sets_[i].size()));
        }
        return scores;
    }

    std::vector<double> score_dense(const std::string& text) const {
        EmbeddingRequest request;
        request.texts = {text};
        request.model_id = config_.embedding_model;
        const auto qv = embedder_->embed(request).front();
        std::vector<double> scores(chunks_.size(), 0.0);
        for (std::size_t i = 0; i < chunks_.size(); ++i) {
            const auto& dv = vectors_[i];
            if (dv.size() != qv.size())
                throw IndexError("query: embedding dimension mismatch");
            double dot = 0.0;
            for (std::size_t j = 0; j < dv.size(); ++j) dot += dv[j] * qv[j];
            scores[i] = dot;
        }
        return scores;
    }

    std::string compute_fingerprint() const {
        std::vector<std::size_t> order(chunks_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return chunks_[a].doc_id < chunks_[b].doc_id;
        });
        std::string acc = config_.backend == RetrieverBackend::dense ? "dense" : "lexical";
        for (std::size_t i : order) {
            acc += '\x1e';
            acc += chunks_[i].doc_id;
            acc += '\x1f';
            acc += sha256_hex(chunks_[i].text);
        }
        return sha256_hex(acc);
    }

    RetrieverConfig config_;
    std::vector<Chunk> chunks_;
    std::unordered_map<std::string, std::size_t> by_doc_id_;
    std::vector<std::unordered_set<std::string>> doc_token_sets_;
    std::unordered_map<std::string, std::size_t> df_;
    std::vector<std::vector<double>> vectors_;
    std::shared_ptr<EmbeddingPort> embedder_;
    std::string fingerprint_;
};

// Pluggable pairwise scorer for the optional re-rank pass.
class PairwiseScorerPort {
public:
    virtual ~PairwiseScorerPort() = default;
    virtual double score(const std::string& query, const Chunk& chunk) = 0;
};

struct RerankOutcome {
    std::vector<ScoredChunk> results;
    bool fell_back = false;  // scorer failed; input order kept
};

// Permutes candidates by the pairwise scorer; retrieval scores/ranks are
// preserved in the provenance fields. Scorer failure keeps the input order
// and flags the outcome for the run log.
inline RerankOutcome rerank(const std::vector<ScoredChunk>& candidates, const std::string& query,
                            PairwiseScorerPort& scorer) {
    if (candidates.empty()) throw IndexError("rerank: empty candidate list");
    RerankOutcome out;
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(candidates.size());
    try {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            scored.emplace_back(scorer.score(query, candidates[i].chunk), i);
        }
    } catch (const std::exception&) {
        out.fell_back = true;
        out.results = candidates;
        for (std::size_t i = 0; i < out.results.size(); ++i) {
            out.results[i].prior_score = candidates[i].score;
            out.results[i].prior_rank = candidates[i].rank;
        }
        return out;
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return candidates[a.second].chunk.doc_id < candidates[b.second].chunk.doc_id;
    });
    for (std::size_t i = 0; i < scored.size(); ++i) {
        ScoredChunk sc = candidates[scored[i].second];
        sc.prior_score = sc.score;
        sc.prior_rank = sc.rank;
        sc.score = scored[i].first;
        sc.rank = static_cast<int>(i + 1);
        out.results.push_back(std::move(sc));
    }
    return out;
}

}  // namespace seal
