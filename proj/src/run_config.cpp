#include "hoprag/run_config.hpp"

#include <cstdlib>
#include <random>
#include <set>

#include "hoprag/error.hpp"

namespace hoprag {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(Errc::Config, msg); }

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
}

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.contains(it.key())) config_error("unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const std::exception&) {
        config_error(where + "." + key + " has the wrong type");
    }
}

std::size_t get_count(const Json& j, const char* key, std::size_t fallback, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_number_integer() || it->get<long long>() < 1) config_error(where + "." + key + " must be a positive integer");
    return it->get<std::size_t>();
}

const std::string& kind_of(const OrderedJson& spec, const std::string& where) {
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
        config_error(where + " needs a string 'kind'");
    }
    return spec["kind"].get_ref<const std::string&>();
}

// Rewrites the path-valued fields of a component spec against the config dir.
OrderedJson resolve_component(const Json& j, const fs::path& base, const std::string& where,
                              std::initializer_list<const char*> path_keys) {
    if (j.is_null()) return nullptr;
    if (!j.is_object()) config_error(where + " must be an object");
    OrderedJson out = OrderedJson::parse(j.dump());
    for (const char* key : path_keys) {
        if (out.contains(key)) {
            if (!out[key].is_string()) config_error(where + "." + key + " must be a path string");
            out[key] = resolve(base, out[key].get<std::string>()).string();
        }
    }
    return out;
}

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::is_regular_file(path)) config_error(what + " not found: " + path.string());
}

std::string required_string(const OrderedJson& spec, const char* key, const std::string& where) {
    if (!spec.contains(key) || !spec[key].is_string() || spec[key].get<std::string>().empty()) {
        config_error(where + "." + key + " is required");
    }
    return spec[key].get<std::string>();
}

void validate_llm(const OrderedJson& spec, const std::string& where) {
    if (spec.is_null()) config_error("config has no '" + where + "' section");
    const auto& kind = kind_of(spec, where);
    if (kind == "mock") {
        require_file(required_string(spec, "script", where), where + " script");
    } else if (kind == "openai") {
        required_string(spec, "url", where);
        required_string(spec, "model", where);
        if (interpolate_env(required_string(spec, "api_key", where)).empty()) {
            config_error(where + ".api_key resolves to an empty credential");
        }
    } else {
        config_error(where + ".kind must be 'mock' or 'openai'");
    }
}

}  // namespace

std::string interpolate_env(const std::string& text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, 2, "${") == 0) {
            auto close = text.find('}', i + 2);
            if (close == std::string::npos) config_error("unterminated ${ in '" + text + "'");
            std::string name = text.substr(i + 2, close - i - 2);
            const char* value = std::getenv(name.c_str());
            if (value == nullptr) config_error("environment variable " + name + " is not set");
            out += value;
            i = close + 1;
        } else {
            out.push_back(text[i++]);
        }
    }
    return out;
}

RunConfig parse_run_config(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) config_error("config must be a JSON object");
    check_keys(j, "config",
               {"dataset", "dataset_name", "corpus", "index", "embedder", "classifier", "llm", "judge", "engine",
                "strategy", "direct_k", "decompose_k", "request", "output_dir", "seed", "parallel", "limit"});
    RunConfig c;
    if (auto p = get_or<std::string>(j, "dataset", "", "config"); !p.empty()) c.dataset = resolve(base_dir, p);
    if (auto p = get_or<std::string>(j, "corpus", "", "config"); !p.empty()) c.corpus = resolve(base_dir, p);
    if (auto p = get_or<std::string>(j, "index", "", "config"); !p.empty()) c.index = resolve(base_dir, p);
    try {
        c.dataset_name = parse_dataset_id(get_or<std::string>(j, "dataset_name", "hotpotqa", "config"));
        c.strategy = parse_strategy(get_or<std::string>(j, "strategy", "efficient_iterative", "config"));
    } catch (const Error& e) {
        config_error(e.what());
    }

    if (auto it = j.find("embedder"); it != j.end() && !it->is_null()) {
        if (it->is_string()) {
            c.embedder = it->get<std::string>();
        } else {
            c.embedder = resolve_component(*it, base_dir, "embedder", {});
        }
    }
    c.classifier = resolve_component(j.value("classifier", Json()), base_dir, "classifier", {"labels", "filters"});
    c.llm = resolve_component(j.value("llm", Json()), base_dir, "llm", {"script"});
    c.judge = resolve_component(j.value("judge", Json()), base_dir, "judge", {"script"});

    if (auto it = j.find("engine"); it != j.end() && !it->is_null()) {
        check_keys(*it, "engine", {"k_per_hop", "max_iterations", "dedupe_queries", "check_filter_output"});
        c.engine.k_per_hop = static_cast<int>(get_count(*it, "k_per_hop", 4, "engine"));
        c.engine.max_iterations = static_cast<int>(get_count(*it, "max_iterations", 4, "engine"));
        c.engine.dedupe_queries = get_or<bool>(*it, "dedupe_queries", true, "engine");
        c.engine.check_filter_output = get_or<bool>(*it, "check_filter_output", true, "engine");
    }
    if (auto it = j.find("request"); it != j.end() && !it->is_null()) {
        check_keys(*it, "request", {"temperature", "max_tokens", "timeout_s", "retries", "backoff_s"});
        c.request.temperature = get_or<double>(*it, "temperature", 0.0, "request");
        c.request.max_tokens = static_cast<int>(get_count(*it, "max_tokens", 512, "request"));
        c.request.timeout_s = get_or<double>(*it, "timeout_s", 60.0, "request");
        c.request.retries = get_or<int>(*it, "retries", 3, "request");
        c.request.backoff_s = get_or<double>(*it, "backoff_s", 0.5, "request");
        if (c.request.retries < 0 || c.request.timeout_s <= 0 || c.request.backoff_s < 0) {
            config_error("request has a negative retry count, delay or timeout");
        }
    }
    c.direct_k = get_count(j, "direct_k", 10, "config");
    c.decompose_k = get_count(j, "decompose_k", 4, "config");
    c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "runs", "config"));
    c.seed = get_or<std::uint64_t>(j, "seed", 0, "config");
    c.parallel = get_count(j, "parallel", 1, "config");
    if (auto it = j.find("limit"); it != j.end() && !it->is_null()) c.limit = get_count(j, "limit", 1, "config");
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    if (!fs::is_regular_file(path)) config_error("config not found: " + path.string());
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        config_error(path.string() + ": " + e.what());
    }
    RunConfig c = parse_run_config(j, fs::absolute(path).parent_path());
    c.source = fs::absolute(path).lexically_normal();
    return c;
}

OrderedJson RunConfig::to_json() const {
    OrderedJson j;
    j["dataset"] = dataset ? OrderedJson(dataset->string()) : OrderedJson(nullptr);
    j["dataset_name"] = dataset_key(dataset_name);
    j["corpus"] = corpus ? OrderedJson(corpus->string()) : OrderedJson(nullptr);
    j["index"] = index ? OrderedJson(index->string()) : OrderedJson(nullptr);
    j["embedder"] = embedder;
    j["classifier"] = classifier;
    j["llm"] = llm;
    j["judge"] = judge;
    j["engine"] = {{"k_per_hop", engine.k_per_hop},
                   {"max_iterations", engine.max_iterations},
                   {"dedupe_queries", engine.dedupe_queries},
                   {"check_filter_output", engine.check_filter_output}};
    j["strategy"] = to_string(strategy);
    j["direct_k"] = direct_k;
    j["decompose_k"] = decompose_k;
    j["request"] = {{"temperature", request.temperature},
                    {"max_tokens", request.max_tokens},
                    {"timeout_s", request.timeout_s},
                    {"retries", request.retries},
                    {"backoff_s", request.backoff_s}};
    j["output_dir"] = output_dir.string();
    j["seed"] = seed;
    j["parallel"] = parallel;
    j["limit"] = limit ? OrderedJson(*limit) : OrderedJson(nullptr);
    return j;
}

void validate(const RunConfig& config, const Needs& needs) {
    if (needs.dataset) {
        if (!config.dataset) config_error("config has no 'dataset'");
        require_file(*config.dataset, "dataset");
    }
    if (needs.retrieval) {
        bool have_index = config.index && fs::is_regular_file(*config.index);
        if (!have_index) {
            if (!config.corpus) config_error("config needs a 'corpus' (or an existing 'index')");
            require_file(*config.corpus, "corpus");
        }
        if (config.embedder.is_string()) {
            try {
                make_embedder_from_spec(config.embedder.get<std::string>());
            } catch (const Error& e) {
                config_error(e.what());
            }
        } else if (kind_of(config.embedder, "embedder") == "http") {
            required_string(config.embedder, "url", "embedder");
            required_string(config.embedder, "model", "embedder");
            if (!config.embedder.contains("dimension") || !config.embedder["dimension"].is_number_unsigned() ||
                config.embedder["dimension"].get<std::size_t>() == 0) {
                config_error("embedder.dimension must be a positive integer");
            }
            if (config.embedder.contains("api_key")) interpolate_env(config.embedder["api_key"].get<std::string>());
        } else {
            config_error("embedder.kind must be 'http' (or use a 'hashed:<dim>' string)");
        }
    }
    if (needs.llm) validate_llm(config.llm, "llm");
    if (needs.judge && !config.judge.is_null()) validate_llm(config.judge, "judge");
    if (needs.classifier) {
        if (config.classifier.is_null()) config_error("config has no 'classifier' section");
        const auto& kind = kind_of(config.classifier, "classifier");
        if (kind == "oracle") {
            require_file(required_string(config.classifier, "labels", "classifier"), "classifier labels");
            require_file(required_string(config.classifier, "filters", "classifier"), "classifier filters");
            auto u = config.classifier.value("unlisted", std::string("error"));
            if (u != "error" && u != "terminate") config_error("classifier.unlisted must be 'error' or 'terminate'");
            auto f = config.classifier.value("filter_unlisted", std::string("error"));
            if (f != "error" && f != "passthrough") {
                config_error("classifier.filter_unlisted must be 'error' or 'passthrough'");
            }
        } else if (kind == "endpoint") {
            required_string(config.classifier, "url", "classifier");
        } else {
            config_error("classifier.kind must be 'oracle' or 'endpoint'");
        }
    }
}

std::shared_ptr<const Embedder> build_embedder(const OrderedJson& spec) {
    if (spec.is_string()) return make_embedder_from_spec(spec.get<std::string>());
    HttpEmbedder::Options o;
    o.url = interpolate_env(spec.at("url").get<std::string>());
    o.model = spec.at("model").get<std::string>();
    o.dimension = spec.at("dimension").get<std::size_t>();
    if (spec.contains("api_key")) o.api_key = interpolate_env(spec["api_key"].get<std::string>());
    o.retries = spec.value("retries", 3);
    o.timeout_s = spec.value("timeout_s", 30.0);
    return std::make_shared<HttpEmbedder>(std::move(o));
}

std::shared_ptr<LlmClient> build_llm_client(const OrderedJson& spec) {
    const auto& kind = kind_of(spec, "llm");
    if (kind == "mock") {
        return ScriptedMockClient::from_jsonl(spec.at("script").get<std::string>(), spec.value("echo", false));
    }
    OpenAiChatClient::Options o;
    o.url = interpolate_env(spec.at("url").get<std::string>());
    o.model = spec.at("model").get<std::string>();
    o.api_key = interpolate_env(spec.at("api_key").get<std::string>());
    return std::make_shared<OpenAiChatClient>(std::move(o));
}

ClassifierPair build_classifier(const OrderedJson& spec) {
    const auto& kind = kind_of(spec, "classifier");
    if (kind == "oracle") {
        auto lu = spec.value("unlisted", std::string("error")) == "terminate" ? OracleLabeler::Unlisted::Terminate
                                                                             : OracleLabeler::Unlisted::Error;
        auto fu = spec.value("filter_unlisted", std::string("error")) == "passthrough"
                      ? OracleFilter::Unlisted::PassThrough
                      : OracleFilter::Unlisted::Error;
        return {std::make_shared<OracleLabeler>(OracleLabeler::from_jsonl(spec.at("labels").get<std::string>(), lu)),
                std::make_shared<OracleFilter>(OracleFilter::from_jsonl(spec.at("filters").get<std::string>(), fu))};
    }
    auto backend = std::make_shared<HttpTokenClassifier>(interpolate_env(spec.at("url").get<std::string>()),
                                                         spec.value("timeout_s", 30.0), spec.value("retries", 2));
    return {std::make_shared<ModelLabeler>(backend), std::make_shared<ModelFilter>(backend)};
}

DenseIndex load_or_build_index(const RunConfig& config) {
    auto embedder = build_embedder(config.embedder);
    if (config.index && fs::is_regular_file(*config.index)) return DenseIndex::load(*config.index, embedder);
    auto chunks = load_corpus_jsonl(*config.corpus);
    return DenseIndex::build(ChunkStore::ingest(chunks), embedder);
}

std::vector<QaPair> load_rows(const RunConfig& config) {
    auto rows = load_dataset_jsonl(*config.dataset);
    if (!config.limit || *config.limit >= rows.size()) return rows;
    // Partial Fisher-Yates over positions; mt19937_64 output is fixed by the
    // standard, the distribution classes are not, so reduce by hand.
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> pos(rows.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
    for (std::size_t i = 0; i < *config.limit; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng() % (pos.size() - i));
        std::swap(pos[i], pos[j]);
    }
    pos.resize(*config.limit);
    std::sort(pos.begin(), pos.end());
    std::vector<QaPair> out;
    out.reserve(pos.size());
    for (auto p : pos) out.push_back(std::move(rows[p]));
    return out;
}

StrategyConfig to_strategy_config(const RunConfig& c) {
    StrategyConfig s;
    s.engine = c.engine;
    s.direct_k = c.direct_k;
    s.decompose_k = c.decompose_k;
    s.dataset = c.dataset_name;
    s.request = c.request;
    s.parallel = c.parallel;
    return s;
}

}  // namespace hoprag
