#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "seal/text.hpp"

namespace seal {

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GenerationRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    std::string model_id;
    std::optional<int> max_tokens;

    nlohmann::json to_json() const {
        nlohmann::json j{{"system_prompt", system_prompt},
                         {"user_prompt", user_prompt},
                         {"temperature", temperature},
                         {"model_id", model_id}};
        if (max_tokens) j["max_tokens"] = *max_tokens;
        return j;
    }

    std::string hash() const { return sha256_hex(to_json().dump()); }
};

struct EmbeddingRequest {
    std::vector<std::string> texts;
    std::string model_id;

    nlohmann::json to_json() const {
        return nlohmann::json{{"texts", texts}, {"model_id", model_id}};
    }

    std::string hash() const { return sha256_hex(to_json().dump()); }
};

class GeneratorPort {
public:
    virtual ~GeneratorPort() = default;
    virtual std::string generate(const GenerationRequest& request) = 0;
    virtual std::string id() const = 0;
};

// Embedding vectors leave this port L2-normalized, so cosine similarity is a
// plain dot product downstream.
class EmbeddingPort {
public:
    virtual ~EmbeddingPort() = default;
    virtual std::vector<std::vector<double>> embed(const EmbeddingRequest& request) = 0;
    virtual std::string id() const = 0;
};

inline void normalize_l2(std::vector<double>& v) {
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) throw ProviderError("embedding: zero vector cannot be normalized");
    for (double& x : v) x /= norm;
}

// ---------------------------------------------------------------------------
// Deterministic mocks

// Canned responses keyed by request hash; optionally a fallback function.
class MockGenerator : public GeneratorPort {
public:
    MockGenerator() = default;

    void add_response(const GenerationRequest& request, std::string response) {
        responses_[request.hash()] = std::move(response);
    }

    void set_fallback(std::function<std::string(const GenerationRequest&)> fn) {
        fallback_ = std::move(fn);
    }

    std::string generate(const GenerationRequest& request) override {
        auto it = responses_.find(request.hash());
        if (it != responses_.end()) return it->second;
        if (fallback_) return fallback_(request);
        throw ProviderError("mock generator: no canned response for request " + request.hash());
    }

    std::string id() const override { return "mock-generator"; }

private:
    std::map<std::string, std::string> responses_;
    std::function<std::string(const GenerationRequest&)> fallback_;
};

// Hash-derived unit vectors: a pure function of (model_id, text), stable
// across runs and platforms.
class HashEmbedder : public EmbeddingPort {
public:
    explicit HashEmbedder(std::size_t dim = 64) : dim_(dim) {}

    std::vector<std::vector<double>> embed(const EmbeddingRequest& request) override {
        if (request.texts.empty()) throw ProviderError("embed: empty text batch");
        std::vector<std::vector<double>> out;
        out.reserve(request.texts.size());
        for (const auto& text : request.texts) {
            out.push_back(vector_for(request.model_id + "\x1f" + text));
        }
        return out;
    }

    std::string id() const override { return "hash-embedder"; }

private:
    std::vector<double> vector_for(const std::string& key) const {
        std::uint64_t state = fnv1a(key);
        std::vector<double> v(dim_);
        for (auto& x : v) {
            state = splitmix(state);
            // map to [-1, 1)
            x = static_cast<double>(state >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        }
        normalize_l2(v);
        return v;
    }

    static std::uint64_t fnv1a(const std::string& s) {
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }

    static std::uint64_t splitmix(std::uint64_t& state) {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::size_t dim_;
};

// ---------------------------------------------------------------------------
// Record / replay

// Cassette: JSON Lines of (request_hash, request, response, timestamp).
class Cassette {
public:
    Cassette() = default;

    static Cassette load(const std::string& path) {
        Cassette c;
        c.path_ = path;
        std::ifstream in(path);
        if (!in) return c;  // new cassette
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto j = nlohmann::json::parse(line);
            c.entries_[j.at("request_hash").get<std::string>()] = j.at("response");
        }
        return c;
    }

    void record(const std::string& request_hash, const nlohmann::json& request,
                const nlohmann::json& response) {
        entries_[request_hash] = response;
        if (path_.empty()) return;
        std::ofstream out(path_, std::ios::app);
        if (!out) throw ProviderError("cassette: cannot append to '" + path_ + "'");
        nlohmann::json j{{"request_hash", request_hash},
                         {"request", request},
                         {"response", response},
                         {"timestamp", now_iso()}};
        out << j.dump() << '\n';
    }

    std::optional<nlohmann::json> lookup(const std::string& request_hash) const {
        auto it = entries_.find(request_hash);
        if (it == entries_.end()) return std::nullopt;
        return std::make_optional<nlohmann::json>(it->second);
    }

    std::size_t size() const { return entries_.size(); }

private:
    static std::string now_iso() {
        const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::string path_;
    std::map<std::string, nlohmann::json> entries_;
};

class ReplayGenerator : public GeneratorPort {
public:
    explicit ReplayGenerator(std::shared_ptr<Cassette> cassette) : cassette_(std::move(cassette)) {}

    std::string generate(const GenerationRequest& request) override {
        auto hit = cassette_->lookup(request.hash());
        if (!hit) throw ProviderError("replay: cassette miss for request " + request.hash());
        return hit->at("text").get<std::string>();
    }

    std::string id() const override { return "replay-generator"; }

private:
    std::shared_ptr<Cassette> cassette_;
};

class RecordingGenerator : public GeneratorPort {
public:
    RecordingGenerator(std::shared_ptr<GeneratorPort> inner, std::shared_ptr<Cassette> cassette)
        : inner_(std::move(inner)), cassette_(std::move(cassette)) {}

    std::string generate(const GenerationRequest& request) override {
        const std::string h = request.hash();
        if (auto hit = cassette_->lookup(h)) return hit->at("text").get<std::string>();
        std::string text = inner_->generate(request);
        cassette_->record(h, request.to_json(), nlohmann::json{{"text", text}});
        return text;
    }

    std::string id() const override { return inner_->id() + "+record"; }

private:
    std::shared_ptr<GeneratorPort> inner_;
    std::shared_ptr<Cassette> cassette_;
};

// ---------------------------------------------------------------------------
// HTTP backend (chat-completions / embeddings wire protocol)

struct HttpProviderConfig {
    std::string base_url = "http://localhost:8080";
    std::string api_key_env = "SEAL_API_KEY";
    int max_retries = 3;
    int backoff_initial_ms = 200;
    double requests_per_second = 0.0;  // 0 = unlimited
};

// Serializes bursts when a requests/second limit is configured.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second) {
        if (requests_per_second > 0.0) {
            min_interval_ = std::chrono::duration<double>(1.0 / requests_per_second);
        }
    }

    void acquire() {
        if (min_interval_.count() == 0.0) return;
        std::unique_lock<std::mutex> lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        const auto earliest = last_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                          min_interval_);
        if (now < earliest) std::this_thread::sleep_until(earliest);
        last_ = std::chrono::steady_clock::now();
    }

private:
    std::mutex mutex_;
    std::chrono::steady_clock::time_point last_{};
    std::chrono::duration<double> min_interval_{0.0};
};

namespace detail {

// Retries fn up to max_retries times with exponential backoff; only
// transport-level failures (thrown ProviderError with retryable=true
// semantics handled by caller) trigger retries.
template <typename Fn>
auto with_retries(Fn&& fn, int max_retries, int backoff_initial_ms) {
    int attempt = 0;
    for (;;) {
        try {
            return fn();
        } catch (const ProviderError&) {
            ++attempt;
            if (attempt >= max_retries) throw;
            std::this_thread::sleep_for(
                std::chrono::milliseconds(backoff_initial_ms * (1 << (attempt - 1))));
        }
    }
}

}  // namespace detail

}  // namespace seal
