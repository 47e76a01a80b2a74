#include "hoprag/hop_engine.hpp"

#include <chrono>

#include "hoprag/error.hpp"

namespace hoprag {

void EngineConfig::validate() const {
    if (k_per_hop < 1) throw Error(Errc::InvalidArgument, "k_per_hop must be positive");
    if (max_iterations < 1) throw Error(Errc::InvalidArgument, "max_iterations must be positive");
}

bool CandidatePool::admit(PoolEntry entry) {
    if (!seen_.insert(entry.chunk_id).second) return false;
    entries_.push_back(std::move(entry));
    return true;
}

std::vector<std::string> CandidatePool::chunk_ids() const {
    std::vector<std::string> ids;
    ids.reserve(entries_.size());
    for (const auto& e : entries_) ids.push_back(e.chunk_id);
    return ids;
}

std::vector<std::string> HopTrace::tagged_chunk_ids() const {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& it : iterations) {
        for (const auto& q : it.queries) {
            for (const auto& c : q.chunks) {
                if (seen.insert(c.chunk_id).second) ids.push_back(c.chunk_id);
            }
        }
    }
    return ids;
}

namespace {

template <typename F>
auto guarded(const char* component, int iteration, const std::string& query, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw Error(Errc::ComponentFailure, std::string(component) + " failed in iteration " +
                                                std::to_string(iteration) + " for query '" + query + "': " + e.what());
    }
}

}  // namespace

RunResult run(std::string_view question, const Retriever& retriever, const Labeler& labeler,
              const QueryFilter& filter, const EngineConfig& config) {
    config.validate();
    if (question.empty()) throw Error(Errc::InvalidArgument, "empty question");
    const auto t0 = std::chrono::steady_clock::now();

    RunResult result;
    auto& pool = result.pool;
    auto& trace = result.trace;

    std::vector<QueryNode> frontier{QueryNode{std::string(question), 0, std::nullopt, std::nullopt}};
    std::unordered_set<std::string> seen_queries{std::string(question)};
    std::unordered_set<std::string> tagged;
    trace.frontier_nodes = 1;

    while (!frontier.empty() && trace.iterations_run < config.max_iterations) {
        const int iteration = ++trace.iterations_run;
        IterationRecord record{iteration, {}};
        std::vector<QueryNode> next_frontier;

        for (const auto& node : frontier) {
            QueryRecord qrec{node, {}};
            auto hits = guarded("retriever", iteration, node.text, [&] {
                return retriever.retrieve(node.text, static_cast<std::size_t>(config.k_per_hop), pool.seen());
            });
            ++trace.retrieval_calls;

            for (const auto& hit : hits) {
                if (pool.contains(hit.chunk_id)) continue;
                const Chunk& chunk = guarded("retriever", iteration, node.text,
                                             [&]() -> const Chunk& { return retriever.chunk(hit.chunk_id); });
                auto outcome = guarded("labeler", iteration, node.text,
                                       [&] { return labeler.label_and_tag(node.text, chunk); });
                const auto word_count = tokenize_words(chunk.text).size();
                if (outcome.word_mask.size() != word_count) {
                    throw Error(Errc::ComponentFailure, "labeler returned a mask of " +
                                                            std::to_string(outcome.word_mask.size()) + " for " +
                                                            std::to_string(word_count) + " words of '" + chunk.id + "'");
                }
                tagged.insert(hit.chunk_id);

                TaggedChunk tc;
                tc.chunk_id = hit.chunk_id;
                tc.score = hit.score;
                tc.rank = hit.rank;
                tc.tag = outcome.tag;
                tc.span_text = outcome.span_text;
                if (tc.tag == ChunkTag::Continue && tc.span_text.empty()) {
                    tc.tag = ChunkTag::Terminate;
                    tc.downgraded = true;
                }

                if (tc.tag == ChunkTag::Continue) {
                    pool.admit({hit.chunk_id, hit.score, node.depth});
                    FilterInput input{node.text, {tc.span_text}};
                    auto next = guarded("filter", iteration, node.text, [&] { return filter.next_query(input); });
                    if (config.check_filter_output && !is_drawn_from(next, input)) {
                        throw Error(Errc::ComponentFailure,
                                    "filter output '" + next + "' uses words not in '" + input.render() + "'");
                    }
                    tc.next_query = next;
                    if (!next.empty() && (!config.dedupe_queries || seen_queries.insert(next).second)) {
                        next_frontier.push_back(QueryNode{next, node.depth + 1, node.text, hit.chunk_id});
                        ++trace.frontier_nodes;
                        tc.spawned = true;
                    }
                }
                qrec.chunks.push_back(std::move(tc));
            }
            record.queries.push_back(std::move(qrec));
        }
        trace.iterations.push_back(std::move(record));
        frontier = std::move(next_frontier);
    }

    trace.chunks_tagged = tagged.size();
    trace.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::string pool_knowledge(const CandidatePool& pool, const Retriever& retriever) {
    std::string knowledge;
    for (const auto& entry : pool.entries()) {
        if (!knowledge.empty()) knowledge.push_back('\n');
        knowledge += retriever.chunk(entry.chunk_id).text;
    }
    return knowledge;
}

std::string parse_answer(std::string_view response) {
    try {
        auto obj = parse_json_object(response, {"answer"});
        const auto& v = obj.at("answer");
        return v.is_string() ? v.get<std::string>() : v.dump();
    } catch (const Error& e) {
        throw Error(Errc::AnswerParseFailure, e.what());
    }
}

std::string answer(std::string_view question, const CandidatePool& pool, const Retriever& retriever,
                   LlmGateway& generator, const AnswerOptions& options, HopTrace* trace) {
    LlmRequest req = options.request;
    if (pool.empty()) {
        req.prompt = render_prompt(qa_prompt_id("qa.direct", options.dataset), {{"question", std::string(question)}});
    } else {
        req.prompt = render_prompt(qa_prompt_id("qa.retrieval", options.dataset),
                                   {{"knowledge", pool_knowledge(pool, retriever)}, {"question", std::string(question)}});
    }
    if (trace != nullptr) ++trace->generator_llm_calls;
    std::string response;
    try {
        response = generator.complete(req);
    } catch (const Error& e) {
        throw Error(Errc::GeneratorFailure, e.what());
    }
    return parse_answer(response);
}

OrderedJson to_json(const CandidatePool& pool) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& e : pool.entries()) {
        arr.push_back({{"chunk_id", e.chunk_id}, {"score", e.score}, {"depth", e.depth}});
    }
    return arr;
}

OrderedJson to_json(const HopTrace& trace) {
    OrderedJson iterations = OrderedJson::array();
    for (const auto& it : trace.iterations) {
        OrderedJson queries = OrderedJson::array();
        for (const auto& q : it.queries) {
            OrderedJson chunks = OrderedJson::array();
            for (const auto& c : q.chunks) {
                OrderedJson jc = {{"chunk_id", c.chunk_id},
                                  {"rank", c.rank},
                                  {"score", c.score},
                                  {"tag", to_string(c.tag)},
                                  {"downgraded", c.downgraded},
                                  {"span", c.span_text}};
                jc["next_query"] = c.next_query ? OrderedJson(*c.next_query) : OrderedJson(nullptr);
                jc["spawned"] = c.spawned;
                chunks.push_back(std::move(jc));
            }
            OrderedJson jq = {{"query", q.node.text}, {"depth", q.node.depth}};
            jq["parent_query"] = q.node.parent_query ? OrderedJson(*q.node.parent_query) : OrderedJson(nullptr);
            jq["origin_chunk"] = q.node.origin_chunk ? OrderedJson(*q.node.origin_chunk) : OrderedJson(nullptr);
            jq["chunks"] = std::move(chunks);
            queries.push_back(std::move(jq));
        }
        iterations.push_back({{"iteration", it.iteration}, {"queries", std::move(queries)}});
    }
    OrderedJson out;
    out["iterations"] = std::move(iterations);
    out["counters"] = {{"generator_llm_calls", trace.generator_llm_calls},
                       {"iterations_run", trace.iterations_run},
                       {"retrieval_calls", trace.retrieval_calls},
                       {"frontier_nodes", trace.frontier_nodes},
                       {"chunks_tagged", trace.chunks_tagged},
                       {"wall_time_s", trace.wall_time_s}};
    return out;
}

}  // namespace hoprag
