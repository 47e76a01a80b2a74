#include "hoprag/llm_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <thread>

#include "hoprag/error.hpp"
#include "hoprag/prompt_registry.hpp"
#include "http_post.hpp"

namespace hoprag {

// ---------------------------------------------------------------------------
// ScriptedMockClient

std::unique_ptr<ScriptedMockClient> ScriptedMockClient::from_jsonl(const std::filesystem::path& path,
                                                                   bool echo_unmatched) {
    auto client = std::make_unique<ScriptedMockClient>(echo_unmatched);
    for_each_jsonl(path, [&](const Json& obj, std::size_t line_no) {
        Entry e;
        e.prompt = obj.value("prompt", std::string{});
        e.match = obj.value("match", std::string{});
        if (!obj.contains("response")) {
            throw Error(Errc::Format, path.string() + ":" + std::to_string(line_no) + ": entry without 'response'");
        }
        const auto& r = obj.at("response");
        e.response = r.is_string() ? r.get<std::string>() : r.dump();
        e.fail_times = obj.value("fail_times", 0);
        e.fail_with_timeout = obj.value("fail_with", std::string("transient")) == "timeout";
        client->add(std::move(e));
    });
    return client;
}

void ScriptedMockClient::add(Entry entry) {
    std::lock_guard lock(mu_);
    failures_left_.push_back(entry.fail_times);
    entries_.push_back(std::move(entry));
}

void ScriptedMockClient::add_exact(std::string prompt, std::string response) {
    add(Entry{std::move(prompt), {}, std::move(response), 0, false});
}

void ScriptedMockClient::add_match(std::string substring, std::string response) {
    add(Entry{{}, std::move(substring), std::move(response), 0, false});
}

std::string ScriptedMockClient::send(const LlmRequest& request) {
    std::lock_guard lock(mu_);
    prompts_.push_back(request.prompt);

    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < entries_.size() && !hit; ++i) {
        if (!entries_[i].prompt.empty() && entries_[i].prompt == request.prompt) hit = i;
    }
    for (std::size_t i = 0; i < entries_.size() && !hit; ++i) {
        if (entries_[i].prompt.empty() && request.prompt.find(entries_[i].match) != std::string::npos) hit = i;
    }
    if (!hit) {
        if (echo_) return request.prompt;
        throw Error(Errc::InvalidArgument, "mock client has no scripted response for prompt");
    }
    if (failures_left_[*hit] > 0) {
        --failures_left_[*hit];
        if (entries_[*hit].fail_with_timeout) throw Error(Errc::Timeout, "scripted timeout");
        throw Error(Errc::Transient, "scripted failure");
    }
    return entries_[*hit].response;
}

std::size_t ScriptedMockClient::sent() const {
    std::lock_guard lock(mu_);
    return prompts_.size();
}

std::vector<std::string> ScriptedMockClient::prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
}

// ---------------------------------------------------------------------------
// OpenAiChatClient

OpenAiChatClient::OpenAiChatClient(Options options) : options_(std::move(options)) {
    if (options_.url.empty()) throw Error(Errc::Config, "LLM endpoint URL is empty");
}

std::string OpenAiChatClient::send(const LlmRequest& request) {
    Json body = {
        {"model", options_.model},
        {"messages", Json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    std::vector<std::pair<std::string, std::string>> headers;
    if (!options_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + options_.api_key);

    auto res = detail::http_post_json(options_.url, body.dump(), headers, request.timeout_s);
    if (res.status == 0) {
        throw Error(res.timed_out ? Errc::Timeout : Errc::Transient, "LLM transport: " + res.transport_error);
    }
    if (res.status == 429 || res.status >= 500) {
        throw Error(Errc::Transient, "LLM endpoint returned HTTP " + std::to_string(res.status));
    }
    if (res.status != 200) {
        throw Error(Errc::ProviderFailure, "LLM endpoint returned HTTP " + std::to_string(res.status) + ": " + res.body);
    }
    try {
        auto parsed = Json::parse(res.body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
        throw Error(Errc::ProviderFailure, std::string("malformed chat completion: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// LlmGateway

LlmGateway::LlmGateway(std::shared_ptr<LlmClient> client) : LlmGateway(std::move(client), Options{}) {}

LlmGateway::LlmGateway(std::shared_ptr<LlmClient> client, Options options)
    : client_(std::move(client)), options_(std::move(options)) {
    if (!client_) throw Error(Errc::InvalidArgument, "null LLM client");
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
    if (!options_.sleep) {
        options_.sleep = [](double s) {
            if (s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
        };
    }
    if (!options_.log_path.empty()) {
        log_.open(options_.log_path, std::ios::app);
        if (!log_) throw Error(Errc::Io, "cannot open LLM log " + options_.log_path.string());
    }
}

void LlmGateway::log(std::size_t call, int attempt, const std::string& prompt, const std::string& response,
                     const std::string& error, double latency_s) {
    if (!log_.is_open()) return;
    OrderedJson line = {{"call", call},       {"attempt", attempt}, {"prompt", prompt},
                        {"response", response}, {"error", error},     {"latency_s", latency_s}};
    std::lock_guard lock(log_mu_);
    log_ << line.dump() << '\n';
    log_.flush();
}

std::string LlmGateway::complete(const LlmRequest& request) {
    if (request.prompt.empty()) throw Error(Errc::InvalidArgument, "empty prompt");
    if (request.retries < 0) throw Error(Errc::InvalidArgument, "retries must be >= 0");
    if (request.temperature < 0) throw Error(Errc::InvalidArgument, "temperature must be >= 0");

    std::size_t call_no;
    {
        std::lock_guard lock(stats_mu_);
        call_no = ++stats_.logical_calls;
    }
    {
        std::unique_lock lock(slot_mu_);
        slot_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
        ++in_flight_;
    }
    struct SlotRelease {
        LlmGateway* g;
        ~SlotRelease() {
            {
                std::lock_guard lock(g->slot_mu_);
                --g->in_flight_;
            }
            g->slot_cv_.notify_one();
        }
    } release{this};

    Errc last = Errc::Exhausted;
    std::string last_message;
    for (int attempt = 0; attempt <= request.retries; ++attempt) {
        if (attempt > 0) options_.sleep(request.backoff_s * std::pow(2.0, attempt - 1));
        auto t0 = std::chrono::steady_clock::now();
        auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
        try {
            std::string response = client_->send(request);
            double dt = elapsed();
            {
                std::lock_guard lock(stats_mu_);
                ++stats_.attempts;
                stats_.total_latency_s += dt;
            }
            log(call_no, attempt, request.prompt, response, "", dt);
            return response;
        } catch (const Error& e) {
            double dt = elapsed();
            {
                std::lock_guard lock(stats_mu_);
                ++stats_.attempts;
                ++stats_.failed_attempts;
                stats_.total_latency_s += dt;
            }
            log(call_no, attempt, request.prompt, "", e.what(), dt);
            if (e.code() != Errc::Transient && e.code() != Errc::Timeout) throw;
            last = e.code();
            last_message = e.what();
        }
    }
    const std::string summary = std::to_string(request.retries + 1) + " attempts failed; last: " + last_message;
    if (last == Errc::Timeout) throw Error(Errc::Timeout, summary);
    throw Error(Errc::Exhausted, summary);
}

CallStats LlmGateway::stats() const {
    std::lock_guard lock(stats_mu_);
    return stats_;
}

std::string complete(LlmGateway& gateway, const LlmRequest& request) { return gateway.complete(request); }

// ---------------------------------------------------------------------------
// Structured output

namespace {

constexpr int kMaxParseAttempts = 16;
constexpr int kMaxDepth = 256;

}  // namespace

Json parse_json_object(std::string_view text, std::span<const std::string> required_keys) {
    std::size_t pos = 0;
    for (int attempt = 0; attempt < kMaxParseAttempts; ++attempt) {
        std::size_t start = text.find('{', pos);
        if (start == std::string_view::npos) break;
        pos = start + 1;

        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        std::size_t end = std::string_view::npos;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                if (++depth > kMaxDepth) break;
            } else if (c == '}') {
                if (--depth == 0) {
                    end = i;
                    break;
                }
            }
        }
        if (end == std::string_view::npos) continue;

        Json obj = Json::parse(text.substr(start, end - start + 1), nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded() || !obj.is_object()) continue;
        for (const auto& key : required_keys) {
            if (!obj.contains(key)) throw Error(Errc::MissingKey, "JSON object lacks key '" + key + "'");
        }
        return obj;
    }
    throw Error(Errc::NoObjectFound, "no JSON object in response");
}

Json parse_json_object(std::string_view text, std::initializer_list<std::string> required_keys) {
    return parse_json_object(text, std::span<const std::string>(required_keys.begin(), required_keys.size()));
}

JudgeVerdict judge(LlmGateway& gateway, std::string_view question, std::string_view prediction,
                   std::string_view gold, const LlmRequest& base) {
    if (question.empty() || prediction.empty() || gold.empty()) {
        throw Error(Errc::InvalidArgument, "judge needs non-empty question, prediction and answer");
    }
    LlmRequest req = base;
    req.prompt = render_prompt("judge.accuracy", {{"question", std::string(question)},
                                                  {"prediction", std::string(prediction)},
                                                  {"answer", std::string(gold)}});
    JudgeVerdict verdict;
    verdict.raw = gateway.complete(req);
    auto obj = parse_json_object(verdict.raw, {"response"});
    const auto& value = obj.at("response");
    std::string s = value.is_string() ? value.get<std::string>() : value.dump();
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    verdict.correct = s == "yes";
    return verdict;
}

}  // namespace hoprag
