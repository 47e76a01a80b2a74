#include "hoprag/token_model.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "hoprag/error.hpp"
#include "hoprag/jsonl.hpp"
#include "http_post.hpp"

namespace hoprag {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool attaches_left(const std::string& w) {
    static const std::string closing = ",.?!;:)]}%";
    return w.size() == 1 && closing.find(w[0]) != std::string::npos;
}

}  // namespace

std::vector<WordToken> tokenize_words(std::string_view text) {
    std::vector<WordToken> out;
    auto emit = [&](std::size_t b, std::size_t e) {
        out.push_back({std::string(text.substr(b, e - b)), b, e, out.size()});
    };
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        if (i >= n) break;
        std::size_t piece_end = i;
        while (piece_end < n && !is_space(text[piece_end])) ++piece_end;

        std::size_t b = i;
        std::size_t e = piece_end;
        while (b < e && is_punct(text[b])) {
            emit(b, b + 1);
            ++b;
        }
        std::size_t core_end = e;
        while (core_end > b && is_punct(text[core_end - 1])) --core_end;
        if (b < core_end) emit(b, core_end);
        for (std::size_t p = core_end; p < e; ++p) emit(p, p + 1);
        i = piece_end;
    }
    return out;
}

std::vector<std::string> word_surfaces(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize_words(text)) out.push_back(std::move(t.surface));
    return out;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty() && !attaches_left(w)) out.push_back(' ');
        out += w;
    }
    return out;
}

const char* to_string(ChunkTag tag) noexcept { return tag == ChunkTag::Continue ? "continue" : "terminate"; }

ChunkTag parse_chunk_tag(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "continue") return ChunkTag::Continue;
    if (lower == "terminate") return ChunkTag::Terminate;
    throw Error(Errc::Format, "unknown chunk tag '" + std::string(text) + "'");
}

std::string span_from_mask(std::string_view text, const std::vector<WordToken>& tokens,
                           const std::vector<bool>& mask) {
    if (mask.size() != tokens.size()) throw Error(Errc::InvalidArgument, "mask length differs from word count");
    std::string out;
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!mask[i]) continue;
        if (prev) {
            if (*prev + 1 == i) {
                out.append(text.substr(tokens[*prev].end, tokens[i].start - tokens[*prev].end));
            } else {
                out.push_back(' ');
            }
        }
        out += tokens[i].surface;
        prev = i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// FilterInput

std::string FilterInput::render() const {
    std::string out = "Q: " + query + " Info: ";
    for (std::size_t i = 0; i < info_spans.size(); ++i) {
        if (i > 0) out += ", ";
        out += info_spans[i];
    }
    return out;
}

std::vector<FilterInput::RoleToken> FilterInput::role_tokens() const {
    std::vector<RoleToken> out;
    auto push = [&](std::string_view text, Role role) {
        for (auto& t : tokenize_words(text)) out.push_back({std::move(t.surface), role});
    };
    push("Q:", Role::Marker);
    push(query, Role::Query);
    push("Info:", Role::Marker);
    for (std::size_t i = 0; i < info_spans.size(); ++i) {
        if (i > 0) out.push_back({",", Role::Marker});
        push(info_spans[i], Role::Info);
    }
    return out;
}

bool is_drawn_from(std::string_view output, const FilterInput& input) {
    std::map<std::string, int> available;
    for (auto& w : word_surfaces(input.query)) ++available[w];
    for (const auto& span : input.info_spans) {
        for (auto& w : word_surfaces(span)) ++available[w];
    }
    for (auto& w : word_surfaces(output)) {
        auto it = available.find(w);
        if (it == available.end() || it->second == 0) return false;
        --it->second;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Oracles

std::string OracleLabeler::key(std::string_view query, std::string_view chunk_id) {
    std::string k(query);
    k.push_back('\x1f');
    k.append(chunk_id);
    return k;
}

void OracleLabeler::add(std::string query, std::string chunk_id, Annotation annotation) {
    table_[key(query, chunk_id)] = std::move(annotation);
}

OracleLabeler OracleLabeler::from_jsonl(const std::filesystem::path& path, Unlisted unlisted) {
    OracleLabeler oracle(unlisted);
    for_each_jsonl(path, [&](const Json& obj, std::size_t) {
        Annotation a;
        a.tag = parse_chunk_tag(obj.at("tag").get<std::string>());
        a.labeled_words = obj.value("labeled_words", std::vector<std::size_t>{});
        oracle.add(obj.at("query").get<std::string>(), obj.at("chunk_id").get<std::string>(), std::move(a));
    });
    return oracle;
}

LabelOutcome OracleLabeler::label_and_tag(std::string_view query, const Chunk& chunk) const {
    auto tokens = tokenize_words(chunk.text);
    LabelOutcome out;
    out.word_mask.assign(tokens.size(), false);
    auto it = table_.find(key(query, chunk.id));
    if (it == table_.end()) {
        if (unlisted_ == Unlisted::Error) {
            throw Error(Errc::AnnotationMissing,
                        "no annotation for chunk '" + chunk.id + "' under query '" + std::string(query) + "'");
        }
        out.tag = ChunkTag::Terminate;
        return out;
    }
    out.tag = it->second.tag;
    for (std::size_t idx : it->second.labeled_words) {
        if (idx >= tokens.size()) {
            throw Error(Errc::Format, "labeled word " + std::to_string(idx) + " outside chunk '" + chunk.id + "'");
        }
        out.word_mask[idx] = true;
    }
    out.span_text = span_from_mask(chunk.text, tokens, out.word_mask);
    return out;
}

std::string OracleFilter::key(const FilterInput& input) {
    std::string k = input.query;
    for (const auto& s : input.info_spans) {
        k.push_back('\x1e');
        k += s;
    }
    return k;
}

void OracleFilter::add(std::string query, std::vector<std::string> info, std::string filtered_query) {
    table_[key(FilterInput{std::move(query), std::move(info)})] = std::move(filtered_query);
}

OracleFilter OracleFilter::from_jsonl(const std::filesystem::path& path, Unlisted unlisted) {
    OracleFilter oracle(unlisted);
    for_each_jsonl(path, [&](const Json& obj, std::size_t) {
        oracle.add(obj.at("query").get<std::string>(), obj.value("info", std::vector<std::string>{}),
                   obj.at("filtered_query").get<std::string>());
    });
    return oracle;
}

std::string OracleFilter::next_query(const FilterInput& input) const {
    auto it = table_.find(key(input));
    if (it != table_.end()) return it->second;
    if (unlisted_ == Unlisted::PassThrough) return input.query;
    throw Error(Errc::AnnotationMissing, "no filter annotation for '" + input.render() + "'");
}

// ---------------------------------------------------------------------------
// Model adapters

HttpTokenClassifier::HttpTokenClassifier(std::string url, double timeout_s, int retries)
    : url_(std::move(url)), timeout_s_(timeout_s), retries_(retries) {}

TokenClassification HttpTokenClassifier::classify(std::string_view task, const std::vector<std::string>& query_words,
                                                  const std::vector<std::string>& words) const {
    Json body = {{"task", std::string(task)}, {"query_words", query_words}, {"words", words}};
    std::string last_error;
    for (int attempt = 0; attempt <= retries_; ++attempt) {
        auto res = detail::http_post_json(url_, body.dump(), {}, timeout_s_);
        if (res.status != 200) {
            last_error = res.status == 0 ? res.transport_error : "HTTP " + std::to_string(res.status);
            continue;
        }
        try {
            auto parsed = Json::parse(res.body);
            TokenClassification out;
            out.token_logits = parsed.at("token_logits").get<std::vector<std::array<double, 2>>>();
            if (auto it = parsed.find("tag_logits"); it != parsed.end() && !it->is_null()) {
                out.tag_logits = it->get<std::array<double, 2>>();
            }
            return out;
        } catch (const Json::exception& e) {
            throw Error(Errc::InferenceFailure, std::string("malformed classifier response: ") + e.what());
        }
    }
    throw Error(Errc::InferenceFailure, "classifier endpoint failed: " + last_error);
}

ModelLabeler::ModelLabeler(std::shared_ptr<const TokenClassifierBackend> backend) : backend_(std::move(backend)) {
    if (!backend_) throw Error(Errc::InvalidArgument, "null classifier backend");
}

LabelOutcome ModelLabeler::label_and_tag(std::string_view query, const Chunk& chunk) const {
    auto tokens = tokenize_words(chunk.text);
    std::vector<std::string> words;
    words.reserve(tokens.size());
    for (const auto& t : tokens) words.push_back(t.surface);

    auto cls = backend_->classify("labeler", word_surfaces(query), words);
    if (cls.token_logits.size() != words.size()) {
        throw Error(Errc::InferenceFailure, "classifier returned " + std::to_string(cls.token_logits.size()) +
                                                " token logits for " + std::to_string(words.size()) + " words");
    }
    if (!cls.tag_logits) throw Error(Errc::InferenceFailure, "classifier returned no tag logits");

    LabelOutcome out;
    out.tag = (*cls.tag_logits)[0] > (*cls.tag_logits)[1] ? ChunkTag::Continue : ChunkTag::Terminate;
    out.word_mask.resize(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) out.word_mask[i] = cls.token_logits[i][1] > cls.token_logits[i][0];
    out.span_text = span_from_mask(chunk.text, tokens, out.word_mask);
    return out;
}

ModelFilter::ModelFilter(std::shared_ptr<const TokenClassifierBackend> backend) : backend_(std::move(backend)) {
    if (!backend_) throw Error(Errc::InvalidArgument, "null classifier backend");
}

std::string ModelFilter::next_query(const FilterInput& input) const {
    auto role_tokens = input.role_tokens();
    std::vector<std::string> words;
    words.reserve(role_tokens.size());
    for (const auto& t : role_tokens) words.push_back(t.surface);

    auto cls = backend_->classify("filter", word_surfaces(input.query), words);
    if (cls.token_logits.size() != words.size()) {
        throw Error(Errc::InferenceFailure, "classifier returned " + std::to_string(cls.token_logits.size()) +
                                                " token logits for " + std::to_string(words.size()) + " words");
    }
    std::vector<std::string> picked;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (role_tokens[i].role == FilterInput::Role::Marker) continue;
        if (cls.token_logits[i][1] > cls.token_logits[i][0]) picked.push_back(words[i]);
    }
    return join_words(picked);
}

}  // namespace hoprag
