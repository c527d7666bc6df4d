#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "seal/rng.hpp"
#include "seal/text.hpp"

namespace seal {

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One retrieval unit source: a page title plus its sentences.
struct Document {
    std::string doc_id;
    std::string title;
    std::vector<std::string> sentences;
    std::string canonical_title;
};

// Title-prefixed concatenation of a document; the unit that gets indexed,
// buffered and counted against the token budget.
struct Chunk {
    std::string doc_id;
    std::string text;
    std::size_t token_count = 0;

    bool operator==(const Chunk& other) const {
        return doc_id == other.doc_id && text == other.text;
    }
};

// chunk_text = title + ": " + sentences joined by single spaces. The format
// is bit-exact: it feeds both indexing and token accounting.
inline Chunk segment(const Document& doc) {
    if (doc.title.empty()) throw CorpusError("segment: document '" + doc.doc_id + "' has empty title");
    if (doc.sentences.empty())
        throw CorpusError("segment: document '" + doc.doc_id + "' has no sentences");
    std::string text = doc.title + ": ";
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
        if (i) text += ' ';
        text += doc.sentences[i];
    }
    Chunk chunk{doc.doc_id, std::move(text), 0};
    chunk.token_count = count_whitespace_tokens(chunk.text);
    return chunk;
}

// Surface title -> canonical title redirect map. Canonical titles are fixed
// points, so resolution is idempotent. Transitive chains are collapsed at
// insert time; cycles are rejected.
class AliasMap {
public:
    AliasMap() = default;

    void add(const std::string& surface, const std::string& canonical) {
        if (surface == canonical) return;
        std::string target = resolve(canonical);
        if (target == surface)
            throw CorpusError("AliasMap: redirect cycle through '" + surface + "'");
        redirects_[surface] = target;
        // Re-point any existing entries that resolved to `surface`.
        for (auto& [s, c] : redirects_) {
            if (c == surface) c = target;
        }
    }

    const std::string& resolve(const std::string& title) const {
        auto it = redirects_.find(title);
        return it == redirects_.end() ? title : it->second;
    }

    std::size_t size() const { return redirects_.size(); }

    const std::map<std::string, std::string>& redirects() const { return redirects_; }

    // Two-column TSV: surface <TAB> canonical.
    static AliasMap load_tsv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw CorpusError("AliasMap: cannot open '" + path + "'");
        AliasMap map;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw CorpusError("AliasMap: line " + std::to_string(lineno) + " of '" + path +
                                  "' has no tab separator");
            map.add(trim(line.substr(0, tab)), trim(line.substr(tab + 1)));
        }
        return map;
    }

    void save_tsv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw CorpusError("AliasMap: cannot write '" + path + "'");
        for (const auto& [surface, canonical] : redirects_) {
            out << surface << '\t' << canonical << '\n';
        }
    }

private:
    std::map<std::string, std::string> redirects_;
};

enum class ReasoningType { bridge, comparison, compositional };

inline const char* to_string(ReasoningType t) {
    switch (t) {
        case ReasoningType::bridge: return "bridge";
        case ReasoningType::comparison: return "comparison";
        case ReasoningType::compositional: return "compositional";
    }
    return "compositional";
}

struct QAItem {
    std::string question_id;
    std::string question;
    std::string gold_answer;
    std::set<std::string> gold_titles;  // canonicalized
    ReasoningType reasoning_type = ReasoningType::bridge;
    // Set when a gold title failed to resolve to a loaded document; flagged
    // items are excluded from evidence-metric denominators, never dropped.
    bool flagged = false;
};

enum class BenchmarkFormat { hotpot_json, two_wiki_json };

struct LoadResult {
    std::vector<Document> documents;
    std::vector<QAItem> items;
    std::vector<std::string> warnings;
    std::size_t flagged_count = 0;
};

namespace detail {

inline ReasoningType reasoning_from_string(const std::string& s) {
    if (s == "bridge") return ReasoningType::bridge;
    if (s == "comparison") return ReasoningType::comparison;
    return ReasoningType::compositional;
}

}  // namespace detail

// Loads HotpotQA distractor-setting JSON or 2WikiMultiHopQA JSON (same
// top-level layout: question, answer, context as [title, [sentences]] pairs,
// supporting_facts as [title, sent_idx] pairs). Documents are deduplicated by
// canonical title in first-seen order; doc_id is the canonical title.
inline LoadResult load_benchmark(const std::string& path, BenchmarkFormat format,
                                 const AliasMap& alias_map) {
    std::ifstream in(path);
    if (!in) throw CorpusError("load_benchmark: cannot open '" + path + "'");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorpusError("load_benchmark: malformed JSON in '" + path + "' at byte " +
                          std::to_string(e.byte) + ": " + e.what());
    }
    if (!root.is_array()) throw CorpusError("load_benchmark: expected a top-level array");

    LoadResult result;
    std::unordered_map<std::string, std::size_t> doc_index;

    auto add_document = [&](const std::string& title, const std::vector<std::string>& sentences) {
        const std::string canonical = alias_map.resolve(title);
        if (doc_index.count(canonical)) return;
        Document doc;
        doc.doc_id = canonical;
        doc.title = title;
        doc.canonical_title = canonical;
        doc.sentences = sentences;
        doc_index.emplace(canonical, result.documents.size());
        result.documents.push_back(std::move(doc));
    };

    for (const auto& entry : root) {
        QAItem item;
        item.question_id = entry.value("_id", entry.value("id", ""));
        item.question = entry.at("question").get<std::string>();
        item.gold_answer = entry.value("answer", "");
        item.reasoning_type = detail::reasoning_from_string(entry.value("type", ""));

        if (entry.contains("context")) {
            for (const auto& ctx : entry.at("context")) {
                const auto title = ctx.at(0).get<std::string>();
                std::vector<std::string> sentences;
                for (const auto& s : ctx.at(1)) sentences.push_back(s.get<std::string>());
                if (sentences.empty()) continue;
                add_document(title, sentences);
            }
        }

        if (entry.contains("supporting_facts")) {
            for (const auto& fact : entry.at("supporting_facts")) {
                const auto title = fact.at(0).get<std::string>();
                const std::string canonical = alias_map.resolve(title);
                item.gold_titles.insert(canonical);
                if (!doc_index.count(canonical)) {
                    item.flagged = true;
                    result.warnings.push_back("question " + item.question_id + ": gold title '" +
                                              title + "' does not resolve to a loaded document");
                }
            }
        }
        if (item.flagged) ++result.flagged_count;
        result.items.push_back(std::move(item));
    }
    (void)format;  // both published layouts parse identically
    return result;
}

// JSON Lines corpus serialization: one Document per line, UTF-8.
inline void save_corpus_jsonl(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("save_corpus_jsonl: cannot write '" + path + "'");
    for (const auto& d : docs) {
        nlohmann::json j{{"doc_id", d.doc_id},
                         {"title", d.title},
                         {"sentences", d.sentences},
                         {"canonical_title", d.canonical_title}};
        out << j.dump() << '\n';
    }
}

inline std::vector<Document> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("load_corpus_jsonl: cannot open '" + path + "'");
    std::vector<Document> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw CorpusError("load_corpus_jsonl: line " + std::to_string(lineno) + " byte " +
                              std::to_string(e.byte) + ": " + e.what());
        }
        Document d;
        d.doc_id = j.at("doc_id").get<std::string>();
        d.title = j.at("title").get<std::string>();
        d.sentences = j.at("sentences").get<std::vector<std::string>>();
        d.canonical_title = j.value("canonical_title", d.title);
        docs.push_back(std::move(d));
    }
    return docs;
}

// Seed-deterministic slice: same (items, n, seed) → identical output across
// runs and platforms.
inline std::vector<QAItem> sample_slice(const std::vector<QAItem>& items, std::size_t n,
                                        std::uint64_t seed) {
    if (n > items.size())
        throw CorpusError("sample_slice: n=" + std::to_string(n) + " exceeds population " +
                          std::to_string(items.size()));
    Rng rng(seed);
    return rng.sample(items, n);
}

inline std::vector<Chunk> segment_all(const std::vector<Document>& docs) {
    std::vector<Chunk> chunks;
    chunks.reserve(docs.size());
    for (const auto& d : docs) chunks.push_back(segment(d));
    return chunks;
}

}  // namespace seal
