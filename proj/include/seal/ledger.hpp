#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "seal/corpus.hpp"
#include "seal/text.hpp"

namespace seal {

enum class EntityType { person, org, work, location, event, date, other };

inline const char* to_string(EntityType t) {
    switch (t) {
        case EntityType::person: return "person";
        case EntityType::org: return "org";
        case EntityType::work: return "work";
        case EntityType::location: return "location";
        case EntityType::event: return "event";
        case EntityType::date: return "date";
        case EntityType::other: return "other";
    }
    return "other";
}

struct EntityRecord {
    std::string canonical_name;
    std::set<std::string> aliases;  // always contains canonical_name
    EntityType entity_type = EntityType::other;
};

struct ProvenanceSpan {
    std::string doc_id;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator<(const ProvenanceSpan& o) const {
        return std::tie(doc_id, begin, end) < std::tie(o.doc_id, o.begin, o.end);
    }
    bool operator==(const ProvenanceSpan& o) const {
        return doc_id == o.doc_id && begin == o.begin && end == o.end;
    }
};

// A typed (head, relation, tail) fact with qualifier metadata and the text
// spans that support it. Every record must be verbatim-supported: at least
// one provenance span, sliced from its source chunk, contains the tail
// surface form or a qualifier value.
struct RelationRecord {
    std::string head;
    std::string relation;
    std::string tail;
    std::map<std::string, std::string> qualifiers;  // {date, location, role, other:<label>}
    std::vector<ProvenanceSpan> provenance;
    int corroboration_count = 1;  // distinct doc_ids in provenance
    EntityType head_type = EntityType::other;
    EntityType tail_type = EntityType::other;

    // Identity under merge: canonical endpoints + relation + qualifiers.
    std::string key() const {
        std::string k = head + '\x1f' + relation + '\x1f' + tail;
        for (const auto& [q, v] : qualifiers) {
            k += '\x1e';
            k += q;
            k += '=';
            k += v;
        }
        return k;
    }
};

inline bool verbatim_supported(const RelationRecord& record, const std::string& chunk_text) {
    for (const auto& span : record.provenance) {
        if (span.end > chunk_text.size() || span.begin >= span.end) continue;
        const std::string slice = chunk_text.substr(span.begin, span.end - span.begin);
        if (slice.find(record.tail) != std::string::npos) return true;
        for (const auto& [q, v] : record.qualifiers) {
            if (slice.find(v) != std::string::npos) return true;
        }
    }
    return false;
}

class ExtractorPort {
public:
    virtual ~ExtractorPort() = default;
    // Every returned record satisfies the verbatim constraint against this
    // chunk and carries this chunk's doc_id in provenance. Backend failures
    // surface as an empty list plus a logged error; the caller's loop
    // continues.
    virtual std::vector<RelationRecord> extract(const Chunk& chunk) = 0;
    virtual std::string id() const = 0;
};

// ---------------------------------------------------------------------------
// Entity ledger

class LedgerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Immutable value type; merge operations return new ledgers.
class EntityLedger {
public:
    EntityLedger() = default;

    const std::map<std::string, EntityRecord>& entities() const { return entities_; }
    const std::map<std::string, RelationRecord>& relations() const { return relations_; }
    const std::set<std::string>& source_docs() const { return source_docs_; }

    bool empty() const { return relations_.empty() && entities_.empty(); }

    bool has_relation_key(const std::string& key) const { return relations_.count(key) > 0; }

    bool has_entity(const std::string& canonical) const { return entities_.count(canonical) > 0; }

    // Resolves a surface form through the external alias map first, then the
    // ledger-internal alias sets.
    std::string canonical_for(const std::string& surface, const AliasMap& alias_map) const {
        const std::string resolved = alias_map.resolve(surface);
        auto it = alias_index_.find(resolved);
        if (it != alias_index_.end()) return it->second;
        return resolved;
    }

    void register_source_doc(const std::string& doc_id) { source_docs_.insert(doc_id); }

    // Canonicalizes endpoints, deduplicates relations by (h, r, t,
    // qualifiers), merges provenance and recounts corroboration as the number
    // of distinct provenance doc_ids. Total: never fails.
    void merge_records(const std::vector<RelationRecord>& records, const AliasMap& alias_map) {
        for (const auto& raw : records) {
            RelationRecord rec = raw;
            rec.head = intern_entity(raw.head, raw.head_type, alias_map);
            rec.tail = intern_entity(raw.tail, raw.tail_type, alias_map);
            for (const auto& span : rec.provenance) source_docs_.insert(span.doc_id);
            const std::string key = rec.key();
            auto it = relations_.find(key);
            if (it == relations_.end()) {
                rec.corroboration_count = distinct_docs(rec.provenance);
                relations_.emplace(key, std::move(rec));
            } else {
                auto& existing = it->second;
                for (const auto& span : rec.provenance) {
                    if (std::find(existing.provenance.begin(), existing.provenance.end(), span) ==
                        existing.provenance.end()) {
                        existing.provenance.push_back(span);
                    }
                }
                existing.corroboration_count = distinct_docs(existing.provenance);
            }
        }
    }

    // Referential integrity + provenance-containment check, used by tests.
    bool invariants_hold() const {
        for (const auto& [key, rel] : relations_) {
            if (!entities_.count(rel.head) || !entities_.count(rel.tail)) return false;
            if (rel.provenance.empty()) return false;
            for (const auto& span : rel.provenance) {
                if (!source_docs_.count(span.doc_id)) return false;
            }
            if (rel.corroboration_count != distinct_docs(rel.provenance)) return false;
        }
        for (const auto& [name, ent] : entities_) {
            if (!ent.aliases.count(ent.canonical_name)) return false;
        }
        return true;
    }

    bool operator==(const EntityLedger& other) const {
        if (source_docs_ != other.source_docs_) return false;
        if (entities_.size() != other.entities_.size()) return false;
        for (const auto& [name, ent] : entities_) {
            auto it = other.entities_.find(name);
            if (it == other.entities_.end() || it->second.aliases != ent.aliases) return false;
        }
        if (relations_.size() != other.relations_.size()) return false;
        for (const auto& [key, rel] : relations_) {
            auto it = other.relations_.find(key);
            if (it == other.relations_.end()) return false;
            if (it->second.corroboration_count != rel.corroboration_count) return false;
        }
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json entities = nlohmann::json::array();
        for (const auto& [name, ent] : entities_) {
            entities.push_back({{"canonical_name", ent.canonical_name},
                                {"aliases", ent.aliases},
                                {"entity_type", to_string(ent.entity_type)}});
        }
        nlohmann::json relations = nlohmann::json::array();
        for (const auto& [key, rel] : relations_) {
            nlohmann::json prov = nlohmann::json::array();
            for (const auto& span : rel.provenance) {
                prov.push_back({{"doc_id", span.doc_id}, {"begin", span.begin}, {"end", span.end}});
            }
            relations.push_back({{"head", rel.head},
                                 {"relation", rel.relation},
                                 {"tail", rel.tail},
                                 {"qualifiers", rel.qualifiers},
                                 {"provenance", prov},
                                 {"corroboration_count", rel.corroboration_count}});
        }
        return nlohmann::json{{"entities", entities},
                              {"relations", relations},
                              {"source_docs", source_docs_}};
    }

private:
    static int distinct_docs(const std::vector<ProvenanceSpan>& provenance) {
        std::set<std::string> docs;
        for (const auto& span : provenance) docs.insert(span.doc_id);
        return static_cast<int>(docs.size());
    }

    std::string intern_entity(const std::string& surface, EntityType type,
                              const AliasMap& alias_map) {
        const std::string canonical = canonical_for(surface, alias_map);
        auto it = entities_.find(canonical);
        if (it == entities_.end()) {
            EntityRecord rec;
            rec.canonical_name = canonical;
            rec.aliases = {canonical};
            if (surface != canonical) rec.aliases.insert(surface);
            rec.entity_type = type;
            entities_.emplace(canonical, std::move(rec));
        } else {
            if (surface != canonical) it->second.aliases.insert(surface);
            if (it->second.entity_type == EntityType::other) it->second.entity_type = type;
        }
        alias_index_[canonical] = canonical;
        if (surface != canonical) alias_index_[surface] = canonical;
        return canonical;
    }

    std::map<std::string, EntityRecord> entities_;
    std::map<std::string, RelationRecord> relations_;
    std::set<std::string> source_docs_;
    std::map<std::string, std::string> alias_index_;
};

inline EntityLedger merge(EntityLedger ledger, const std::vector<RelationRecord>& records,
                          const AliasMap& alias_map) {
    ledger.merge_records(records, alias_map);
    return ledger;
}

// ---------------------------------------------------------------------------
// Pattern extraction backend

// Recognizes the synthetic generator's sentence templates plus a small set of
// generic patterns. Pronoun endpoints are skipped; coreference is left to the
// provider backend.
class PatternExtractor : public ExtractorPort {
public:
    std::vector<RelationRecord> extract(const Chunk& chunk) override {
        std::vector<RelationRecord> out;
        for (const auto& sentence : split_sentences(chunk.text)) {
            match_sentence(chunk, sentence, out);
        }
        return out;
    }

    std::string id() const override { return "pattern-extractor"; }

private:
    struct Sentence {
        std::string text;
        std::size_t begin;
        std::size_t end;
    };

    // Sentences start after the "Title: " prefix and end at periods.
    static std::vector<Sentence> split_sentences(const std::string& text) {
        std::vector<Sentence> out;
        std::size_t start = 0;
        const auto colon = text.find(": ");
        if (colon != std::string::npos) start = colon + 2;
        std::size_t sent_begin = start;
        for (std::size_t i = start; i < text.size(); ++i) {
            if (text[i] == '.' && (i + 1 == text.size() || text[i + 1] == ' ')) {
                const std::size_t sent_end = i + 1;
                std::string s = text.substr(sent_begin, sent_end - sent_begin);
                if (!trim(s).empty()) out.push_back({trim(s), sent_begin, sent_end});
                sent_begin = (i + 2 <= text.size()) ? i + 2 : text.size();
            }
        }
        return out;
    }

    static bool is_pronoun(const std::string& s) {
        static const std::set<std::string> pronouns = {"he",  "she", "it",   "they",
                                                       "him", "her", "them", "this"};
        return pronouns.count(to_lower(trim(s))) > 0;
    }

    void match_sentence(const Chunk& chunk, const Sentence& sentence,
                        std::vector<RelationRecord>& out) const {
        struct Template {
            std::regex pattern;
            // head group, tail group, date group (0 = none), location-from-tail
            int head_group;
            int tail_group;
            int date_group;
            const char* relation;
            EntityType head_type;
            EntityType tail_type;
            bool location_qualifier;
        };
        static const std::vector<Template> templates = {
            {std::regex(R"(^(.+) was released in (\d{3,4}) by (.+)\.$)"), 3, 1, 2, "released",
             EntityType::org, EntityType::work, false},
            {std::regex(R"(^(.+) released (.+) in (\d{3,4})\.$)"), 1, 2, 3, "released",
             EntityType::org, EntityType::work, false},
            {std::regex(R"(^(.+) is an? (?:studio )?album by (.+)\.$)"), 1, 2, 0, "album_by",
             EntityType::work, EntityType::org, false},
            {std::regex(R"(^The (.+) was held in (.+)\.$)"), 1, 2, 0, "held_in",
             EntityType::event, EntityType::location, true},
            {std::regex(R"(^(.+) was born on (.+?, \d{3,4})\.$)"), 1, 2, 2, "born_on",
             EntityType::person, EntityType::date, false},
            {std::regex(R"(^(.+) was born in (\d{3,4})\.$)"), 1, 2, 2, "born_on",
             EntityType::person, EntityType::date, false},
            {std::regex(R"(^(.+) directed (.+)\.$)"), 1, 2, 0, "directed", EntityType::person,
             EntityType::work, false},
            {std::regex(R"(^(.+) wrote (.+)\.$)"), 1, 2, 0, "wrote", EntityType::person,
             EntityType::work, false},
            {std::regex(R"(^(.+) is the leader of (.+)\.$)"), 1, 2, 0, "leader_of",
             EntityType::person, EntityType::org, false},
            {std::regex(R"(^(.+) created (.+)\.$)"), 1, 2, 0, "created", EntityType::org,
             EntityType::work, false},
            {std::regex(R"(^The chief executive of (.+) is (.+)\.$)"), 1, 2, 0, "ceo",
             EntityType::org, EntityType::person, false},
        };

        for (const auto& tpl : templates) {
            std::smatch m;
            if (!std::regex_match(sentence.text, m, tpl.pattern)) continue;
            const std::string head = trim(m[tpl.head_group].str());
            const std::string tail = trim(m[tpl.tail_group].str());
            if (head.empty() || tail.empty()) continue;
            if (is_pronoun(head) || is_pronoun(tail)) continue;
            RelationRecord rec;
            rec.head = head;
            rec.relation = tpl.relation;
            rec.tail = tail;
            rec.head_type = tpl.head_type;
            rec.tail_type = tpl.tail_type;
            if (tpl.date_group > 0) rec.qualifiers["date"] = trim(m[tpl.date_group].str());
            if (tpl.location_qualifier) rec.qualifiers["location"] = tail;
            rec.provenance.push_back({chunk.doc_id, sentence.begin, sentence.end});
            rec.corroboration_count = 1;
            out.push_back(std::move(rec));
            return;  // one template per sentence; qualifiers attach to it
        }
    }
};

// ---------------------------------------------------------------------------
// Per-document extraction cache (concurrent-read, exclusive-write)

class ExtractionCache {
public:
    // Returns the cached records for the chunk, extracting on miss.
    // `was_miss` reports whether the backend was actually invoked (for cost
    // accounting).
    std::vector<RelationRecord> get_or_extract(const Chunk& chunk, ExtractorPort& port,
                                               bool& was_miss) {
        {
            std::shared_lock lock(mutex_);
            auto it = cache_.find(chunk.doc_id);
            if (it != cache_.end()) {
                was_miss = false;
                return it->second;
            }
        }
        was_miss = true;
        std::vector<RelationRecord> records;
        try {
            records = port.extract(chunk);
        } catch (const std::exception&) {
            records.clear();  // backend failure degrades to an empty extraction
        }
        // Enforce the verbatim constraint at the boundary. Records that do
        // not slice back into this chunk's text are dropped.
        std::vector<RelationRecord> kept;
        for (auto& rec : records) {
            bool local = !rec.provenance.empty();
            for (const auto& span : rec.provenance) {
                if (span.doc_id != chunk.doc_id) local = false;
            }
            if (local && verbatim_supported(rec, chunk.text)) kept.push_back(std::move(rec));
        }
        std::unique_lock lock(mutex_);
        auto [it, inserted] = cache_.emplace(chunk.doc_id, std::move(kept));
        if (!inserted) was_miss = false;
        return it->second;
    }

    void clear() {
        std::unique_lock lock(mutex_);
        cache_.clear();
    }

private:
    std::shared_mutex mutex_;
    std::unordered_map<std::string, std::vector<RelationRecord>> cache_;
};

// Rebuilds the ledger as a projection of the given evidence chunks: its
// source_docs equal exactly the chunks' doc_ids, so facts whose only support
// was evicted drop out.
inline EntityLedger rebuild_for_chunks(const std::vector<Chunk>& chunks, ExtractorPort& port,
                                       ExtractionCache& cache, const AliasMap& alias_map,
                                       std::size_t* extractor_calls = nullptr) {
    EntityLedger ledger;
    for (const auto& chunk : chunks) {
        bool was_miss = false;
        auto records = cache.get_or_extract(chunk, port, was_miss);
        if (was_miss && extractor_calls) ++*extractor_calls;
        ledger.register_source_doc(chunk.doc_id);
        ledger.merge_records(records, alias_map);
    }
    return ledger;
}

// Endpoint canonicalization for facts that are scored before being merged:
// external alias map first, then the ledger's internal alias sets.
inline std::vector<RelationRecord> canonicalized_facts(const std::vector<RelationRecord>& records,
                                                       const EntityLedger& ledger,
                                                       const AliasMap& alias_map) {
    auto out = records;
    for (auto& rec : out) {
        rec.head = ledger.canonical_for(rec.head, alias_map);
        rec.tail = ledger.canonical_for(rec.tail, alias_map);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Anchor matching (shared by need satisfaction and gap closure)

// Fraction of the anchor's content tokens present in the candidate token set
// (stem-lite normalized). A fraction >= 0.5 counts as a match, which absorbs
// morphology drift like "Olympic Games" vs "1994 Winter Olympics".
inline double anchor_cover_fraction(const std::string& anchor,
                                    const std::vector<std::string>& target_tokens) {
    const auto anchor_tokens = content_tokens(anchor);
    if (anchor_tokens.empty()) return 0.0;
    std::unordered_set<std::string> target(target_tokens.begin(), target_tokens.end());
    std::size_t hit = 0;
    for (const auto& t : anchor_tokens) hit += target.count(t);
    return static_cast<double>(hit) / static_cast<double>(anchor_tokens.size());
}

inline bool anchor_matches(const std::string& anchor, const std::vector<std::string>& target_tokens) {
    return anchor_cover_fraction(anchor, target_tokens) >= 0.5;
}

inline bool entity_matches_anchor(const EntityRecord& entity, const std::string& anchor) {
    for (const auto& alias : entity.aliases) {
        if (anchor_matches(anchor, content_tokens(alias))) return true;
    }
    return false;
}

}  // namespace seal
