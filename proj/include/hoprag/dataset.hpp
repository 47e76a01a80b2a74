#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hoprag/jsonl.hpp"

namespace hoprag {

/// One question of a QA dataset.
struct QaPair {
    std::string id;
    std::string question;
    std::string gold_answer;
    std::vector<std::string> oracle_chunk_ids;  // distinct, in file order
    /// Optional gold decomposition in the same shape the decomposition prompt
    /// asks for: {"1": {"sub_question", "answer", "dependency", "document"}, ...}
    std::optional<Json> decomposition;
};

/// Dataset JSONL: `id`, `question`, `answer`, `oracle_chunk_ids`, optional
/// `decomposition`. Throws Format with the line number on bad rows.
std::vector<QaPair> load_dataset_jsonl(const std::filesystem::path& path);

}  // namespace hoprag
