#include "hoprag/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "hoprag/error.hpp"

namespace hoprag {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json obj;
        try {
            obj = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(Errc::Format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.is_object()) {
            throw Error(Errc::Format,
                        path.string() + ":" + std::to_string(line_no) + ": expected a JSON object");
        }
        try {
            fn(obj, line_no);
        } catch (const Json::exception& e) {
            throw Error(Errc::Format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::vector<Json> rows;
    for_each_jsonl(path, [&](const Json& obj, std::size_t) { rows.push_back(obj); });
    return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<OrderedJson>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    for (const auto& row : rows) out << row.dump() << '\n';
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << text;
}

}  // namespace hoprag
