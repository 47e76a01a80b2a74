#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hoprag/jsonl.hpp"

namespace hoprag {

struct LlmRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 512;
    double timeout_s = 60.0;
    int retries = 3;
    double backoff_s = 0.5;  // first retry delay; doubles per retry
};

/// One attempt against a model. Implementations signal retryable failures
/// with Errc::Transient or Errc::Timeout; anything else is final.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string send(const LlmRequest& request) = 0;
};

/// Offline client driven by a script of canned responses.
///
/// Script JSONL lines:
///   {"prompt": "<exact prompt>", "response": "..."}
///   {"match": "<substring>", "response": "...", "fail_times": 2, "fail_with": "transient"|"timeout"}
/// Exact entries win over substring entries; substring entries are tried in
/// file order. An entry with "fail_times": N fails its first N matching
/// attempts. In echo mode an unmatched prompt is returned verbatim; otherwise
/// it is an error.
class ScriptedMockClient final : public LlmClient {
public:
    struct Entry {
        std::string prompt;  // exact, if non-empty
        std::string match;   // substring, used when prompt is empty
        std::string response;
        int fail_times = 0;
        bool fail_with_timeout = false;
    };

    explicit ScriptedMockClient(bool echo_unmatched = false) : echo_(echo_unmatched) {}
    static std::unique_ptr<ScriptedMockClient> from_jsonl(const std::filesystem::path& path, bool echo_unmatched = false);

    void add(Entry entry);
    void add_exact(std::string prompt, std::string response);
    void add_match(std::string substring, std::string response);

    std::string send(const LlmRequest& request) override;

    std::size_t sent() const;
    std::vector<std::string> prompts() const;

private:
    bool echo_;
    mutable std::mutex mu_;
    std::vector<Entry> entries_;
    std::vector<int> failures_left_;
    std::vector<std::string> prompts_;
};

/// OpenAI-compatible chat-completions endpoint.
class OpenAiChatClient final : public LlmClient {
public:
    struct Options {
        std::string url;  // e.g. https://api.openai.com/v1/chat/completions
        std::string model;
        std::string api_key;
    };

    explicit OpenAiChatClient(Options options);
    std::string send(const LlmRequest& request) override;

private:
    Options options_;
};

struct CallStats {
    std::size_t logical_calls = 0;  // complete() invocations
    std::size_t attempts = 0;       // client sends, retries included
    std::size_t failed_attempts = 0;
    double total_latency_s = 0.0;
};

/// Wraps a client with retries, exponential backoff, call accounting, a
/// max-in-flight bound and an optional JSONL request log. Thread-safe when
/// the wrapped client is.
class LlmGateway {
public:
    struct Options {
        std::size_t max_in_flight = 4;
        std::filesystem::path log_path;  // empty: no log
        std::function<void(double)> sleep;  // defaults to sleeping the thread
    };

    explicit LlmGateway(std::shared_ptr<LlmClient> client);
    LlmGateway(std::shared_ptr<LlmClient> client, Options options);

    /// Returns the response text. Throws Exhausted when every attempt failed
    /// transiently, Timeout when the last failure was a timeout, and passes
    /// non-retryable errors through after one attempt.
    std::string complete(const LlmRequest& request);

    CallStats stats() const;
    LlmClient& client() { return *client_; }

private:
    void log(std::size_t call, int attempt, const std::string& prompt, const std::string& response,
             const std::string& error, double latency_s);

    std::shared_ptr<LlmClient> client_;
    Options options_;

    mutable std::mutex stats_mu_;
    CallStats stats_;

    std::mutex slot_mu_;
    std::condition_variable slot_cv_;
    std::size_t in_flight_ = 0;

    std::mutex log_mu_;
    std::ofstream log_;
};

/// Free-function form of LlmGateway::complete.
std::string complete(LlmGateway& gateway, const LlmRequest& request);

/// Extracts the first balanced JSON object in `text`, tolerating ``` fences
/// and surrounding prose, and checks that `required_keys` are present.
/// Throws NoObjectFound / MissingKey. Bounded work for any input.
Json parse_json_object(std::string_view text, std::span<const std::string> required_keys = {});
Json parse_json_object(std::string_view text, std::initializer_list<std::string> required_keys);

struct JudgeVerdict {
    bool correct = false;
    std::string raw;
};

/// Renders judge.accuracy, makes one completion, and maps "response" == "yes"
/// (case-insensitive) to correct.
JudgeVerdict judge(LlmGateway& gateway, std::string_view question, std::string_view prediction,
                   std::string_view gold, const LlmRequest& base = {});

}  // namespace hoprag
