#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <openssl/evp.h>

namespace seal {

// Tokenization used by the lexical index and all need/gap matching:
// lowercased maximal runs of alphanumeric characters.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Whitespace tokens, lowercased. Redundancy (Jaccard) works on these so that
// punctuation-bearing tokens still count as distinct surface units.
inline std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::size_t count_whitespace_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_tok = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_tok = false;
        } else if (!in_tok) {
            in_tok = true;
            ++n;
        }
    }
    return n;
}

inline const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",    "an",   "and",  "are", "as",   "at",   "be",   "by",   "did",
        "do",   "does", "for",  "has", "have", "in",   "is",   "it",   "its",
        "of",   "on",   "or",   "same", "that", "the",  "this", "to",  "was",
        "were", "which", "who",  "whom", "with", "year", "among"};
    return words;
}

inline bool is_stopword(const std::string& token) {
    return stopwords().count(token) > 0;
}

// Stem-lite normalization for entity/anchor matching: plural 's' strip on
// tokens longer than 3 chars ("olympics" -> "olympic", but "was" stays).
inline std::string stem_token(std::string token) {
    if (token.size() > 3 && token.back() == 's') token.pop_back();
    return token;
}

inline std::vector<std::string> content_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) {
        if (!is_stopword(t)) out.push_back(stem_token(std::move(t)));
    }
    return out;
}

// Blocklist / query normalization: lowercase, whitespace-collapse,
// stopword-strip.
inline std::string normalize_query(std::string_view query) {
    std::string out;
    for (const auto& t : tokenize(query)) {
        if (is_stopword(t)) continue;
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

// Answer normalization for the deterministic judge: lowercase, strip
// punctuation and articles, collapse whitespace.
inline std::vector<std::string> normalize_answer_tokens(std::string_view text) {
    static const std::unordered_set<std::string> articles = {"a", "an", "the"};
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) {
        if (articles.count(t)) continue;
        out.push_back(std::move(t));
    }
    return out;
}

// token-set Jaccard over lowercased whitespace tokens
inline double jaccard_similarity(std::string_view a, std::string_view b) {
    auto ta = whitespace_tokens(a);
    auto tb = whitespace_tokens(b);
    std::unordered_set<std::string> sa(ta.begin(), ta.end());
    std::unordered_set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Contiguous token-subsequence containment (needle inside haystack).
inline bool token_subsequence_contains(const std::vector<std::string>& haystack,
                                       const std::vector<std::string>& needle) {
    if (needle.empty()) return false;
    if (needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool all = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (haystack[i + j] != needle[j]) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw std::runtime_error("sha256: EVP_MD_CTX_new failed");
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest.data(), &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest computation failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace seal
