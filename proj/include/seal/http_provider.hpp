#pragma once

#include <memory>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "seal/providers.hpp"

namespace seal {

// Chat-completions + embeddings JSON wire protocol over HTTP. The endpoint
// is configuration: any server speaking the widely adopted schema works.
class HttpProvider : public GeneratorPort, public EmbeddingPort {
public:
    explicit HttpProvider(HttpProviderConfig config)
        : config_(std::move(config)), limiter_(config_.requests_per_second) {}

    std::string generate(const GenerationRequest& request) override {
        nlohmann::json body{
            {"model", request.model_id},
            {"temperature", request.temperature},
            {"messages",
             nlohmann::json::array({{{"role", "system"}, {"content", request.system_prompt}},
                                    {{"role", "user"}, {"content", request.user_prompt}}})}};
        if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
        const auto response = post_json("/chat/completions", body);
        try {
            return response.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(std::string("chat response schema mismatch: ") + e.what());
        }
    }

    std::vector<std::vector<double>> embed(const EmbeddingRequest& request) override {
        if (request.texts.empty()) throw ProviderError("embed: empty text batch");
        nlohmann::json body{{"model", request.model_id}, {"input", request.texts}};
        const auto response = post_json("/embeddings", body);
        std::vector<std::vector<double>> out;
        try {
            for (const auto& item : response.at("data")) {
                out.push_back(item.at("embedding").get<std::vector<double>>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(std::string("embeddings response schema mismatch: ") + e.what());
        }
        if (out.size() != request.texts.size())
            throw ProviderError("embeddings: response count mismatch");
        const std::size_t dim = out.empty() ? 0 : out.front().size();
        for (auto& v : out) {
            if (v.size() != dim) throw ProviderError("embeddings: dimension mismatch across batch");
            normalize_l2(v);
        }
        return out;
    }

    std::string id() const override { return "http:" + config_.base_url; }

private:
    nlohmann::json post_json(const std::string& route, const nlohmann::json& body) {
        return detail::with_retries(
            [&]() {
                limiter_.acquire();
                httplib::Client client(config_.base_url);
                client.set_connection_timeout(10, 0);
                client.set_read_timeout(60, 0);
                httplib::Headers headers;
                if (const char* key = std::getenv(config_.api_key_env.c_str())) {
                    headers.emplace("Authorization", std::string("Bearer ") + key);
                }
                auto res = client.Post(route, headers, body.dump(), "application/json");
                if (!res) throw ProviderError("transport failure on " + route);
                if (res->status >= 500)
                    throw ProviderError("server error " + std::to_string(res->status) + " on " + route);
                if (res->status != 200)
                    throw ProviderError("request rejected with status " + std::to_string(res->status) +
                                        ": " + res->body);
                try {
                    return nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::parse_error& e) {
                    throw ProviderError(std::string("response is not JSON: ") + e.what());
                }
            },
            config_.max_retries, config_.backoff_initial_ms);
    }

    HttpProviderConfig config_;
    RateLimiter limiter_;
};

}  // namespace seal
