#pragma once

/// Experiment configuration for the command-line tools. A config is one JSON
/// object; relative paths resolve against the config file's directory and
/// `${VAR}` in any string is replaced from the environment when a component
/// is built (the copy saved with a run keeps the placeholders).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hoprag/corpus_index.hpp"
#include "hoprag/dataset.hpp"
#include "hoprag/evaluation.hpp"
#include "hoprag/hop_engine.hpp"
#include "hoprag/jsonl.hpp"
#include "hoprag/llm_gateway.hpp"
#include "hoprag/prompt_registry.hpp"
#include "hoprag/token_model.hpp"

namespace hoprag {

struct RunConfig {
    std::filesystem::path source;  // config file, empty when built from flags
    std::optional<std::filesystem::path> dataset;
    DatasetId dataset_name = DatasetId::HotpotQA;
    std::optional<std::filesystem::path> corpus;
    std::optional<std::filesystem::path> index;
    OrderedJson embedder = "hashed:256";
    OrderedJson classifier;  // null when absent
    OrderedJson llm;
    OrderedJson judge;
    EngineConfig engine;
    StrategyId strategy = StrategyId::EfficientIterative;
    std::size_t direct_k = 10;
    std::size_t decompose_k = 4;
    LlmRequest request;
    std::filesystem::path output_dir = "runs";
    std::uint64_t seed = 0;
    std::size_t parallel = 1;
    std::optional<std::size_t> limit;

    /// The config as it will be written into a run directory.
    OrderedJson to_json() const;
};

/// Parses and resolves a config file. Throws Config or Io.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir);

/// Replaces every `${NAME}` with the environment value. Throws Config naming
/// the variable when it is unset.
std::string interpolate_env(const std::string& text);

/// What a command needs from the config; validate() checks exactly these.
struct Needs {
    bool dataset = false;
    bool retrieval = false;  // corpus or index
    bool llm = false;
    bool classifier = false;
    bool judge = false;
};

/// Throws Config for missing sections, absent files or unset credentials.
/// Has no side effects.
void validate(const RunConfig& config, const Needs& needs);

std::shared_ptr<const Embedder> build_embedder(const OrderedJson& spec);
std::shared_ptr<LlmClient> build_llm_client(const OrderedJson& spec);

struct ClassifierPair {
    std::shared_ptr<const Labeler> labeler;
    std::shared_ptr<const QueryFilter> filter;
};
ClassifierPair build_classifier(const OrderedJson& spec);

/// Loads `index` when that file exists, otherwise builds from `corpus`.
DenseIndex load_or_build_index(const RunConfig& config);

/// Dataset rows, optionally reduced to `limit` rows drawn with `seed`
/// (kept in file order).
std::vector<QaPair> load_rows(const RunConfig& config);

StrategyConfig to_strategy_config(const RunConfig& config);

}  // namespace hoprag
