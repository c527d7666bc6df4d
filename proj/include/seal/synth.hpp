#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "seal/corpus.hpp"
#include "seal/index.hpp"
#include "seal/ledger.hpp"
#include "seal/rng.hpp"

namespace seal {

enum class SyntheticQuestionType { bridge, comparison, mixed };

// Seeded generator spec. Hardness is structural: for every bridge item the
// answer document's rank under the raw question is at least
// bridge_rank_floor (> 1), so repair is necessary by construction, while the
// gap-targeted micro-query ranks it first.
struct SyntheticSpec {
    std::uint64_t seed = 20250101;
    std::size_t n_questions = 10;
    std::size_t n_distractors_per_question = 6;
    int hop_depth = 2;  // bridge questions: 2 or 3
    int bridge_rank_floor = 2;
    SyntheticQuestionType question_type = SyntheticQuestionType::mixed;
    std::size_t comparison_arity = 2;
    // Fraction of each question's distractors held out as a second corpus
    // partition (serves as the external retrieval source in tests).
    double external_fraction = 0.0;

    void validate() const {
        if (n_questions == 0) throw CorpusError("synthetic spec: n_questions must be > 0");
        if (hop_depth != 2 && hop_depth != 3)
            throw CorpusError("synthetic spec: hop_depth must be 2 or 3");
        if (bridge_rank_floor <= 1)
            throw CorpusError("synthetic spec: bridge_rank_floor must be > 1");
        if (comparison_arity < 2)
            throw CorpusError("synthetic spec: comparison_arity must be >= 2");
        if (external_fraction < 0.0 || external_fraction > 0.9)
            throw CorpusError("synthetic spec: external_fraction must be in [0, 0.9]");
    }
};

// Machine-readable expectations per question: the gap chain the controller
// should walk, the micro-query that resolves the final hop, and the facts the
// extractor should recover per gold document.
struct SyntheticAnswerKey {
    std::string question_id;
    std::string bridge_entity;
    std::string expected_micro_query;
    std::vector<std::string> gap_chain;
    std::map<std::string, std::vector<RelationRecord>> doc_facts;
};

struct SyntheticCorpus {
    std::vector<Document> documents;           // primary partition
    std::vector<Document> external_documents;  // held-out partition
    std::vector<QAItem> items;
    AliasMap alias_map;
    std::map<std::string, SyntheticAnswerKey> answer_keys;
};

namespace detail {

class NameForge {
public:
    explicit NameForge(Rng& rng) : rng_(rng) {}

    // One unique capitalized token; uniqueness is corpus-wide so IDF
    // assumptions about name tokens hold.
    std::string token() {
        static const std::vector<std::string> syllables = {
            "bra", "vel", "dor", "mi",  "tha", "quin", "zel", "nor", "fay", "lum",
            "ost", "ger", "wyn", "cal", "dra", "ves",  "mar", "tol", "bri", "sen"};
        for (int attempt = 0; attempt < 1000; ++attempt) {
            std::string word;
            for (int s = 0; s < 3; ++s) word += syllables[rng_.index(syllables.size())];
            word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
            if (used_.insert(to_lower(word)).second) return word;
        }
        throw CorpusError("generate_synthetic: name space exhausted");
    }

    std::string person() { return token() + " " + token(); }

private:
    Rng& rng_;
    std::set<std::string> used_;
};

}  // namespace detail

// Deterministic multi-hop corpus with an answer key. Bridge items mirror the
// entity -> date -> entity pattern; comparison items ask for the oldest of
// `comparison_arity` people. Distractors are lexically close to the raw
// question so that initial retrieval needs repair.
inline SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    detail::NameForge forge(rng);
    SyntheticCorpus corpus;

    int next_year = 1901;
    auto unique_year = [&]() { return next_year++; };

    const std::size_t external_per_question = static_cast<std::size_t>(
        spec.external_fraction * static_cast<double>(spec.n_distractors_per_question));

    for (std::size_t qi = 0; qi < spec.n_questions; ++qi) {
        const std::string question_id = "synth-" + std::to_string(1000 + qi);
        const bool make_bridge = spec.question_type == SyntheticQuestionType::bridge ||
                                 (spec.question_type == SyntheticQuestionType::mixed && qi % 2 == 0);

        QAItem item;
        item.question_id = question_id;
        SyntheticAnswerKey key;
        key.question_id = question_id;
        std::vector<Document> distractors;

        if (make_bridge) {
            const std::string band = forge.token();
            const std::string album = forge.token();
            const std::string festival = forge.token();
            const std::string city = forge.token();
            const int year = unique_year();
            const std::string year_str = std::to_string(year);
            const std::string event = year_str + " " + festival + " Festival";

            Document hop1;
            hop1.title = album;
            hop1.sentences = {album + " is a studio album by " + band + ".",
                              band + " released " + album + " in " + year_str + "."};

            Document hop2;
            hop2.title = event;
            hop2.sentences = {"The " + event + " was held in " + city + ".",
                              "The festival program featured music and dance."};

            std::optional<Document> hop0;
            std::string leader;
            if (spec.hop_depth == 3) {
                leader = forge.person();
                hop0.emplace();
                hop0->title = leader;
                hop0->sentences = {leader + " is the leader of " + band + ".",
                                   leader + " performs on several recordings."};
                item.question = "Which city hosted the " + festival +
                                " Festival in the year that the band led by " + leader +
                                " released " + album + "?";
            } else {
                item.question = "Which city hosted the " + festival + " Festival in the year that " +
                                band + " released " + album + "?";
            }
            item.gold_answer = city;
            item.reasoning_type = ReasoningType::bridge;
            item.gold_titles = {album, event};
            if (hop0) item.gold_titles.insert(hop0->title);

            key.bridge_entity = event;
            key.expected_micro_query = year_str + " " + festival + " Festival host city";
            if (spec.hop_depth == 3) key.gap_chain.push_back("band led by " + leader);
            key.gap_chain.push_back("year " + band + " released " + album);
            key.gap_chain.push_back("host city of the " + festival + " Festival in that year");

            {
                RelationRecord released;
                released.head = band;
                released.relation = "released";
                released.tail = album;
                released.qualifiers["date"] = year_str;
                RelationRecord album_by;
                album_by.head = album;
                album_by.relation = "album_by";
                album_by.tail = band;
                key.doc_facts[album] = {released, album_by};

                RelationRecord held;
                held.head = event;
                held.relation = "held_in";
                held.tail = city;
                held.qualifiers["location"] = city;
                key.doc_facts[event] = {held};

                if (hop0) {
                    RelationRecord leads;
                    leads.head = leader;
                    leads.relation = "leader_of";
                    leads.tail = band;
                    key.doc_facts[hop0->title] = {leads};
                }
            }

            for (std::size_t d = 0; d < spec.n_distractors_per_question; ++d) {
                Document doc;
                if (d % 2 == 0) {
                    doc.title = band + " discography volume " + std::to_string(d / 2 + 1);
                    doc.sentences = {band + " is a popular touring band.",
                                     band + " has released many albums and singles."};
                } else {
                    doc.title = festival + " Festival guide volume " + std::to_string(d / 2 + 1);
                    doc.sentences = {"The " + festival + " Festival is a famous annual festival.",
                                     "A different city has hosted the " + festival +
                                         " Festival each year."};
                }
                distractors.push_back(std::move(doc));
            }

            corpus.documents.push_back(std::move(hop1));
            corpus.documents.push_back(std::move(hop2));
            if (hop0) corpus.documents.push_back(std::move(*hop0));
        } else {
            const std::size_t arity = spec.comparison_arity;
            std::vector<std::string> people;
            std::vector<int> offsets(60);
            for (int i = 0; i < 60; ++i) offsets[i] = i;
            auto birth_offsets = rng.sample(offsets, arity);
            static const char* months[] = {"January", "March",  "May",     "June",
                                           "August",  "October", "November", "December"};
            std::vector<std::pair<std::string, int>> birth;  // (date text, year)
            for (std::size_t p = 0; p < arity; ++p) {
                people.push_back(forge.person());
                const int year = 1930 + birth_offsets[p];
                const std::string date = std::string(months[rng.index(8)]) + " " +
                                         std::to_string(1 + static_cast<int>(rng.index(28))) +
                                         ", " + std::to_string(year);
                birth.emplace_back(date, year);
            }

            std::size_t oldest = 0;
            for (std::size_t p = 1; p < arity; ++p) {
                if (birth[p].second < birth[oldest].second) oldest = p;
            }

            if (arity == 2) {
                item.question = "Who is older, " + people[0] + " or " + people[1] + "?";
            } else {
                std::string list;
                for (std::size_t p = 0; p + 1 < arity; ++p) {
                    if (p) list += ", ";
                    list += people[p];
                }
                item.question = "Who is the oldest among " + list + " and " + people.back() + "?";
            }
            item.gold_answer = people[oldest];
            item.reasoning_type = ReasoningType::comparison;

            for (std::size_t p = 0; p < arity; ++p) {
                Document bio;
                bio.title = people[p];
                bio.sentences = {people[p] + " was born on " + birth[p].first + ".",
                                 people[p] + " is a novelist."};
                item.gold_titles.insert(bio.title);

                RelationRecord born;
                born.head = people[p];
                born.relation = "born_on";
                born.tail = birth[p].first;
                born.qualifiers["date"] = birth[p].first;
                key.doc_facts[bio.title] = {born};
                key.gap_chain.push_back("date of birth of " + people[p]);
                corpus.documents.push_back(std::move(bio));
            }
            key.expected_micro_query = people[0] + " date of birth";

            std::string roster;
            for (std::size_t p = 0; p + 1 < arity; ++p) {
                if (p) roster += ", ";
                roster += people[p];
            }
            roster += " and " + people.back();
            for (std::size_t d = 0; d < spec.n_distractors_per_question; ++d) {
                Document doc;
                doc.title = "Gala coverage " + forge.token();
                doc.sentences = {"The novelists " + roster + " attended the annual gala.",
                                 "The gala program listed readings, interviews and music."};
                distractors.push_back(std::move(doc));
            }
        }

        for (std::size_t d = 0; d < distractors.size(); ++d) {
            if (d < external_per_question) {
                corpus.external_documents.push_back(std::move(distractors[d]));
            } else {
                corpus.documents.push_back(std::move(distractors[d]));
            }
        }
        corpus.answer_keys.emplace(question_id, std::move(key));
        corpus.items.push_back(std::move(item));
    }

    for (auto& doc : corpus.documents) {
        doc.doc_id = doc.title;
        doc.canonical_title = doc.title;
    }
    for (auto& doc : corpus.external_documents) {
        doc.doc_id = doc.title;
        doc.canonical_title = doc.title;
    }

    // Structural hardness, verified by exhaustive scoring over the primary
    // partition exactly as the experiment will see it.
    RetrieverConfig rc;
    rc.backend = RetrieverBackend::lexical;
    const Index probe = Index::build(segment_all(corpus.documents), rc);
    for (const auto& item : corpus.items) {
        const auto& key = corpus.answer_keys.at(item.question_id);
        if (item.reasoning_type == ReasoningType::bridge) {
            const std::string hop2 = key.bridge_entity;
            std::string hop1;
            for (const auto& title : item.gold_titles) {
                if (title != hop2 && key.doc_facts.count(title) &&
                    key.doc_facts.at(title).front().relation == "released")
                    hop1 = title;
            }
            if (probe.rank_of(item.question, hop1) != 1)
                throw CorpusError("generate_synthetic: unsatisfiable spec, hop-1 doc '" + hop1 +
                                  "' is not rank 1 for question " + item.question_id);
            const int hop2_rank = probe.rank_of(item.question, hop2);
            if (hop2_rank < spec.bridge_rank_floor)
                throw CorpusError("generate_synthetic: unsatisfiable spec, answer doc rank " +
                                  std::to_string(hop2_rank) + " is above the floor for question " +
                                  item.question_id + " (distractor pool too small)");
            if (probe.rank_of(key.expected_micro_query, hop2) != 1)
                throw CorpusError(
                    "generate_synthetic: unsatisfiable spec, micro-query does not rank the "
                    "answer doc first for question " +
                    item.question_id);
        } else {
            for (const auto& title : item.gold_titles) {
                const int rank = probe.rank_of(item.question, title);
                if (rank != -1 && rank <= static_cast<int>(item.gold_titles.size()))
                    throw CorpusError(
                        "generate_synthetic: unsatisfiable spec, bio '" + title +
                        "' ranks inside the initial window for question " + item.question_id);
                if (probe.rank_of(title + " date of birth", title) != 1)
                    throw CorpusError(
                        "generate_synthetic: unsatisfiable spec, micro-query does not rank bio '" +
                        title + "' first for question " + item.question_id);
            }
        }
    }
    return corpus;
}

}  // namespace seal
