#include "hoprag/dataset.hpp"

#include <algorithm>

#include "hoprag/error.hpp"

namespace hoprag {

std::vector<QaPair> load_dataset_jsonl(const std::filesystem::path& path) {
    std::vector<QaPair> rows;
    for_each_jsonl(path, [&](const Json& obj, std::size_t line_no) {
        auto where = path.string() + ":" + std::to_string(line_no);
        if (!obj.contains("id") || !obj.contains("question")) {
            throw Error(Errc::Format, where + ": dataset row needs 'id' and 'question'");
        }
        QaPair row;
        const auto& id = obj.at("id");
        row.id = id.is_string() ? id.get<std::string>() : id.dump();
        row.question = obj.at("question").get<std::string>();
        row.gold_answer = obj.value("answer", std::string{});
        for (const auto& cid : obj.value("oracle_chunk_ids", std::vector<std::string>{})) {
            if (std::find(row.oracle_chunk_ids.begin(), row.oracle_chunk_ids.end(), cid) == row.oracle_chunk_ids.end()) {
                row.oracle_chunk_ids.push_back(cid);
            }
        }
        if (auto it = obj.find("decomposition"); it != obj.end() && !it->is_null()) row.decomposition = *it;
        if (row.question.empty()) throw Error(Errc::Format, where + ": empty question");
        rows.push_back(std::move(row));
    });
    return rows;
}

}  // namespace hoprag
