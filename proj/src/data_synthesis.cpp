#include "hoprag/data_synthesis.hpp"

#include <algorithm>
#include <charconv>
#include <functional>

#include "hoprag/error.hpp"
#include "hoprag/parallel.hpp"
#include "hoprag/prompt_registry.hpp"

namespace hoprag {

namespace {

std::optional<std::size_t> parse_position(std::string_view s) {
    if (!s.empty() && s.front() == '#') s.remove_prefix(1);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

// Numeric ids sort numerically, others after them lexicographically.
bool id_less(const std::string& a, const std::string& b) {
    auto na = parse_position(a);
    auto nb = parse_position(b);
    if (na && nb) return *na != *nb ? *na < *nb : a < b;
    if (na != nb) return na.has_value();
    return a < b;
}

std::string as_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

std::vector<DecomposedQuestion> parse_decomposition(const Json& decomposed_questions, std::span<const Chunk> docs) {
    if (!decomposed_questions.is_object() || decomposed_questions.empty()) {
        throw Error(Errc::LlmParseFailure, "'decomposed_questions' must be a non-empty object");
    }
    std::vector<DecomposedQuestion> subs;
    for (const auto& [key, value] : decomposed_questions.items()) {
        if (!value.is_object() || !value.contains("sub_question") || !value.contains("document")) {
            throw Error(Errc::LlmParseFailure, "sub-question '" + key + "' lacks 'sub_question' or 'document'");
        }
        DecomposedQuestion q;
        q.id = key;
        q.sub_question = as_text(value.at("sub_question"));
        q.answer = value.contains("answer") ? as_text(value.at("answer")) : std::string{};
        if (auto it = value.find("dependency"); it != value.end() && !it->is_null()) {
            if (!it->is_array()) throw Error(Errc::LlmParseFailure, "dependency of '" + key + "' is not a list");
            for (const auto& d : *it) q.dependency.push_back(as_text(d));
        }
        if (q.sub_question.empty()) throw Error(Errc::LlmParseFailure, "sub-question '" + key + "' is empty");

        std::string doc = as_text(value.at("document"));
        auto by_id = std::find_if(docs.begin(), docs.end(), [&](const Chunk& c) { return c.id == doc; });
        if (by_id != docs.end()) {
            q.document = by_id->id;
        } else if (auto pos = parse_position(doc); pos && *pos >= 1 && *pos <= docs.size()) {
            q.document = docs[*pos - 1].id;
        } else {
            throw Error(Errc::InvalidDependencyGraph, "sub-question '" + key + "' names unknown document '" + doc + "'");
        }
        subs.push_back(std::move(q));
    }

    std::sort(subs.begin(), subs.end(), [](const auto& a, const auto& b) { return id_less(a.id, b.id); });
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < subs.size(); ++i) position[subs[i].id] = i;
    for (const auto& q : subs) {
        for (const auto& d : q.dependency) {
            if (!position.contains(d)) {
                throw Error(Errc::InvalidDependencyGraph, "sub-question '" + q.id + "' depends on missing '" + d + "'");
            }
        }
    }

    // Kahn's algorithm; among ready nodes the smallest id goes first.
    std::vector<int> indegree(subs.size(), 0);
    std::vector<std::vector<std::size_t>> children(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) {
        for (const auto& d : subs[i].dependency) {
            children[position[d]].push_back(i);
            ++indegree[i];
        }
    }
    std::vector<DecomposedQuestion> ordered;
    std::vector<bool> done(subs.size(), false);
    while (ordered.size() < subs.size()) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < subs.size() && !pick; ++i) {
            if (!done[i] && indegree[i] == 0) pick = i;
        }
        if (!pick) throw Error(Errc::InvalidDependencyGraph, "cyclic sub-question dependencies");
        done[*pick] = true;
        for (auto c : children[*pick]) --indegree[c];
        ordered.push_back(subs[*pick]);
    }
    return ordered;
}

std::string decomposition_prompt(std::string_view question, std::span<const Chunk> docs) {
    std::string input = "Question: " + std::string(question) + "\nDocuments:\n";
    for (std::size_t i = 0; i < docs.size(); ++i) {
        input += "#" + std::to_string(i + 1) + " (id: " + docs[i].id + "): " + docs[i].text + "\n";
    }
    return PromptRegistry::builtin().get("synthesis.decompose").body + "\n\n" + input;
}

std::vector<DecomposedQuestion> decompose(LlmGateway& gateway, std::string_view question,
                                          std::span<const Chunk> docs, const LlmRequest& base) {
    if (docs.empty()) throw Error(Errc::InvalidArgument, "decomposition needs at least one document");
    LlmRequest req = base;
    req.prompt = decomposition_prompt(question, docs);
    auto response = gateway.complete(req);
    Json obj;
    try {
        obj = parse_json_object(response, {"decomposed_questions"});
    } catch (const Error& e) {
        throw Error(Errc::LlmParseFailure, e.what());
    }
    return parse_decomposition(obj.at("decomposed_questions"), docs);
}

std::vector<std::size_t> match_in_order(const std::vector<std::string>& extracted,
                                        const std::vector<WordToken>& chunk_words) {
    std::vector<std::size_t> indices;
    indices.reserve(extracted.size());
    std::size_t j = 0;
    for (const auto& w : extracted) {
        while (j < chunk_words.size() && chunk_words[j].surface != w) ++j;
        if (j == chunk_words.size()) {
            throw Error(Errc::ExtractionNotInChunk, "extracted word '" + w + "' is not in the chunk at that position");
        }
        indices.push_back(j++);
    }
    return indices;
}

std::string token_label_prompt(const DecomposedQuestion& sub_q, const Chunk& chunk) {
    return PromptRegistry::builtin().get("synthesis.token_label").body + "\n\nQuestion: " + sub_q.sub_question +
           "\nAnswer: " + sub_q.answer + "\nParagraph: " + chunk.text + "\n";
}

std::vector<std::size_t> extract_tokens(LlmGateway& gateway, const DecomposedQuestion& sub_q, const Chunk& chunk,
                                        const LlmRequest& base) {
    if (sub_q.document != chunk.id) {
        throw Error(Errc::InvalidArgument, "chunk '" + chunk.id + "' is not the document of sub-question " + sub_q.id);
    }
    LlmRequest req = base;
    req.prompt = token_label_prompt(sub_q, chunk);
    auto response = gateway.complete(req);
    Json obj;
    try {
        obj = parse_json_object(response, {"extracted_words"});
    } catch (const Error& e) {
        throw Error(Errc::LlmParseFailure, e.what());
    }
    auto words = word_surfaces(as_text(obj.at("extracted_words")));
    if (words.empty()) throw Error(Errc::ExtractionNotInChunk, "empty extraction");
    return match_in_order(words, tokenize_words(chunk.text));
}

std::string query_filter_prompt(const DecomposedQuestion& sub_q, const std::vector<std::string>& parent_infos) {
    std::string input = "Question: " + sub_q.sub_question + "\n";
    for (const auto& info : parent_infos) input += "Info: " + info + "\n";
    return PromptRegistry::builtin().get("synthesis.query_filter").body + "\n\n" + input;
}

std::string build_filtered_query(LlmGateway& gateway, const DecomposedQuestion& sub_q,
                                 const std::vector<std::string>& parent_infos, const LlmRequest& base) {
    if (parent_infos.empty()) return sub_q.sub_question;
    LlmRequest req = base;
    req.prompt = query_filter_prompt(sub_q, parent_infos);
    auto response = gateway.complete(req);
    Json obj;
    try {
        obj = parse_json_object(response, {"filtered_query"});
    } catch (const Error& e) {
        throw Error(Errc::LlmParseFailure, e.what());
    }
    auto filtered = as_text(obj.at("filtered_query"));
    if (word_surfaces(filtered).empty()) throw Error(Errc::FilteredQueryInvalid, "empty filtered query");
    if (!is_drawn_from(filtered, FilterInput{sub_q.sub_question, parent_infos})) {
        throw Error(Errc::FilteredQueryInvalid, "filtered query '" + filtered + "' adds words");
    }
    return filtered;
}

const Chunk& sample_hard_negative(std::string_view next_query, const std::unordered_set<std::string>& oracle_ids,
                                  const DenseIndex& index) {
    auto hits = index.search_excluding(next_query, 1, oracle_ids);
    if (hits.empty()) throw Error(Errc::NoNegativeAvailable, "every chunk is an oracle chunk");
    return index.store().at(hits.front().chunk_id);
}

std::vector<std::size_t> LabelerRecord::labeled_words() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < word_labels.size(); ++i) {
        if (word_labels[i]) out.push_back(i);
    }
    return out;
}

std::vector<bool> filter_target_words(const FilterInput& input, std::string_view filtered_query) {
    auto tokens = input.role_tokens();
    std::vector<bool> target(tokens.size(), false);
    for (const auto& w : word_surfaces(filtered_query)) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!target[i] && tokens[i].role != FilterInput::Role::Marker && tokens[i].surface == w) {
                target[i] = true;
                break;
            }
        }
    }
    return target;
}

OrderedJson SynthesisReport::to_json() const {
    OrderedJson f = OrderedJson::object();
    for (const auto& [k, v] : failures) f[k] = v;
    return {{"questions", questions},
            {"questions_decomposed", questions_decomposed},
            {"sub_questions", sub_questions},
            {"positive_records", positive_records},
            {"negative_records", negative_records},
            {"filter_records", filter_records},
            {"passthrough_filter_records", passthrough_filter_records},
            {"failures", f}};
}

OrderedJson to_json(const LabelerRecord& r) {
    return {{"question_id", r.question_id},
            {"sub_question_id", r.sub_question_id},
            {"query", r.query},
            {"chunk_id", r.chunk_id},
            {"tag", to_string(r.tag)},
            {"labeled_words", r.labeled_words()},
            {"chunk_text", r.chunk_text},
            {"word_labels", r.word_labels}};
}

OrderedJson to_json(const FilterRecord& r) {
    return {{"question_id", r.question_id},
            {"sub_question_id", r.sub_question_id},
            {"query", r.query},
            {"info", r.info},
            {"filtered_query", r.filtered_query},
            {"rendered_input", r.rendered_input},
            {"target_words", r.target_words},
            {"passthrough", r.passthrough}};
}

namespace {

struct RowOutput {
    std::vector<LabelerRecord> labeler;
    std::vector<FilterRecord> filter;
    SynthesisReport report;
};

RowOutput synthesize_row(LlmGateway& gateway, const QaPair& row, const DenseIndex& index, const LlmRequest& base) {
    RowOutput out;
    auto& report = out.report;
    report.questions = 1;

    std::vector<Chunk> docs;
    for (const auto& id : row.oracle_chunk_ids) {
        const Chunk* c = index.store().find(id);
        if (c == nullptr) {
            ++report.failures["missing_chunk"];
            return out;
        }
        docs.push_back(*c);
    }
    if (docs.empty()) {
        ++report.failures["missing_chunk"];
        return out;
    }

    std::vector<DecomposedQuestion> subs;
    try {
        subs = row.decomposition ? parse_decomposition(*row.decomposition, docs) : decompose(gateway, row.question, docs, base);
    } catch (const Error&) {
        ++report.failures["decompose"];
        return out;
    }
    ++report.questions_decomposed;
    report.sub_questions = subs.size();

    std::unordered_set<std::string> oracle(row.oracle_chunk_ids.begin(), row.oracle_chunk_ids.end());
    for (const auto& s : subs) oracle.insert(s.document);

    std::map<std::string, std::string> spans;  // sub-question id -> extracted span
    for (const auto& sub : subs) {
        std::vector<std::string> parent_infos;
        bool parents_ok = true;
        for (const auto& d : sub.dependency) {
            auto it = spans.find(d);
            if (it == spans.end()) {
                parents_ok = false;
                break;
            }
            parent_infos.push_back(it->second);
        }
        const Chunk& chunk = index.store().at(sub.document);
        auto tokens = tokenize_words(chunk.text);

        std::vector<bool> labels(tokens.size(), false);
        try {
            for (auto i : extract_tokens(gateway, sub, chunk, base)) labels[i] = true;
        } catch (const Error&) {
            ++report.failures["extract"];
            continue;
        }
        spans[sub.id] = span_from_mask(chunk.text, tokens, labels);

        if (!parents_ok) {
            ++report.failures["dependency_skipped"];
            continue;
        }
        std::string filtered;
        try {
            filtered = build_filtered_query(gateway, sub, parent_infos, base);
        } catch (const Error&) {
            ++report.failures["filter"];
            continue;
        }
        const Chunk* negative = nullptr;
        try {
            negative = &sample_hard_negative(filtered, oracle, index);
        } catch (const Error&) {
            ++report.failures["negative"];
            continue;
        }

        out.labeler.push_back({row.id, sub.id, filtered, chunk.id, chunk.text, labels, ChunkTag::Continue});
        out.labeler.push_back({row.id, sub.id, filtered, negative->id, negative->text,
                               std::vector<bool>(tokenize_words(negative->text).size(), false), ChunkTag::Terminate});
        FilterInput input{sub.sub_question, parent_infos};
        out.filter.push_back({row.id, sub.id, sub.sub_question, parent_infos, input.render(),
                              filter_target_words(input, filtered), filtered, parent_infos.empty()});
        ++report.positive_records;
        ++report.negative_records;
        ++report.filter_records;
        if (parent_infos.empty()) ++report.passthrough_filter_records;
    }
    return out;
}

}  // namespace

SynthesisOutput build_records(LlmGateway& gateway, std::span<const QaPair> dataset, const DenseIndex& index,
                              const SynthesisOptions& options) {
    std::vector<RowOutput> rows(dataset.size());
    parallel_for(dataset.size(), options.parallel,
                 [&](std::size_t i) { rows[i] = synthesize_row(gateway, dataset[i], index, options.request); });

    SynthesisOutput out;
    for (auto& r : rows) {
        for (auto& rec : r.labeler) out.labeler.push_back(std::move(rec));
        for (auto& rec : r.filter) out.filter.push_back(std::move(rec));
        auto& a = out.report;
        const auto& b = r.report;
        a.questions += b.questions;
        a.questions_decomposed += b.questions_decomposed;
        a.sub_questions += b.sub_questions;
        a.positive_records += b.positive_records;
        a.negative_records += b.negative_records;
        a.filter_records += b.filter_records;
        a.passthrough_filter_records += b.passthrough_filter_records;
        for (const auto& [k, v] : b.failures) a.failures[k] += v;
    }
    return out;
}

}  // namespace hoprag
