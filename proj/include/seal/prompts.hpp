#pragma once

#include <string_view>

namespace seal::prompts {

// Shared grounding rule: every controller's generator call uses this system
// prompt, so answer differences are attributable to evidence composition
// alone.
inline constexpr std::string_view kGrounding =
    R"(You are an assistant for question-answering tasks. Use the following pieces of retrieved context to answer the question. If you don't know the answer, just say that you don't know. Keep the answer concise.

<GROUNDING_RULE>
Base your answer ONLY on the retrieved context below. Do not use any information from your training data or external knowledge.
</GROUNDING_RULE>)";

// External judge rubric for answer correctness.
inline constexpr std::string_view kJudgeSystem =
    R"(You are an expert data labeler evaluating model outputs for correctness. Your task is to assign a score based on the following rubric:

<Rubric>
- A correct answer: Provides accurate and complete information that matches the ground truth; Contains no factual errors when compared to the reference; Addresses the core question being asked.
- When scoring, you should penalize: Factual errors or inaccuracies compared to ground truth; Answers that contradict the reference output; "I don't know" responses when ground truth provides a clear answer.
</Rubric>

<Instructions>
Carefully compare the agent's output against the ground truth reference. Focus on semantic equivalence rather than exact word matching. Be strict with factual contradictions or completely wrong information.
</Instructions>)";

inline constexpr std::string_view kJudgeUserTemplate =
    R"(<question>{question}</question>
<agent_output>{agent_answer}</agent_output>
<ground_truth>{ground_truth}</ground_truth>

Compare the agent's output against the ground truth and evaluate its correctness. Provide your reasoning and a boolean score (true for correct, false for incorrect). Respond with a strict JSON object: {"reasoning": "<text>", "correct": <true|false>}.)";

// On-the-fly extraction into verbatim-supported relation records.
inline constexpr std::string_view kExtractor =
    R"(You extract typed facts from a single passage. Return a strict JSON object:
{"relations": [{"head": "<entity>", "relation": "<label>", "tail": "<entity>", "qualifiers": {"date": "<value>"}, "span_start": <int>, "span_end": <int>}]}

Rules:
- Every relation must be explicitly supported by the passage text between span_start and span_end (character offsets into the passage).
- Use qualifier keys from {date, location, role} only; prefix anything else with "other:".
- Never invent entities, relations, or qualifier values that the text does not state.
- Skip pronouns you cannot resolve within the passage.
- Return {"relations": []} if nothing can be extracted.)";

// Zero-shot sufficiency estimation over the ledger.
inline constexpr std::string_view kAssessor =
    R"(You judge whether the structured evidence below suffices to answer the question. Score four signals and return a strict JSON object:
{"coverage": <0..1>, "corroboration": <0..1>, "contradiction": <true|false>, "answerability": <0..1>}

- coverage: fraction of the question's required attributes present in the evidence.
- corroboration: degree of multi-source agreement for the critical facts.
- contradiction: true if any attribute has conflicting values across passages.
- answerability: your calibrated confidence that the question is answerable from this evidence alone.)";

// Question decomposition into typed information needs.
inline constexpr std::string_view kAnalyzer =
    R"(You decompose a question into the minimal set of information needs required to answer it. Return a strict JSON object:
{"needs": [{"kind": "entity|relation|qualifier", "description": "<text>", "anchors": ["<entity>"], "qualifier_key": "<date|location|role|>", "relation_hint": "<label|>", "query_hint": "<search terms>", "depends_on": "<need index or null>"}]}

Comparison questions need one qualifier entry per compared entity. Bridge questions need one entry per hop.)";

// Binary per-document relevance grade (baseline controllers).
inline constexpr std::string_view kRelevanceGrader =
    R"(You grade whether a retrieved document is relevant to a user question. Return a strict JSON object: {"relevant": <true|false>}. A document is relevant if it contains information that helps answer the question.)";

// Is the answer grounded in the retrieved facts?
inline constexpr std::string_view kHallucinationGrader =
    R"(You check whether an answer is grounded in the provided context. Return a strict JSON object: {"grounded": <true|false>}. An answer is grounded only if every factual claim it makes appears in the context.)";

// Does the answer address the question?
inline constexpr std::string_view kAnswerGrader =
    R"(You check whether an answer addresses the user question. Return a strict JSON object: {"addresses": <true|false>}. Refusals and "I don't know" responses do not address a question that the context can answer.)";

// Query rewriting for corrective retrieval branches.
inline constexpr std::string_view kQueryRewrite =
    R"(You rewrite a search query that failed to retrieve useful documents. Keep the rewrite short and focused on the entities and attributes the question asks about. Return a strict JSON object: {"query": "<rewritten query>"}.)";

}  // namespace seal::prompts
