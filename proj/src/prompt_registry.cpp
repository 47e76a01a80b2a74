#include "hoprag/prompt_registry.hpp"

#include <algorithm>
#include <cctype>

#include "hoprag/error.hpp"

namespace hoprag {

namespace {

// Template bodies live in a generated table; see prompt_templates.inc.
const PromptTemplate kBuiltinTemplates[] = {
#include "prompt_templates.inc"
};

}  // namespace

std::string render_template(std::string_view body, const PromptVars& vars) {
    std::string out;
    out.reserve(body.size() + 256);
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '{') {
            if (i + 1 < body.size() && body[i + 1] == '{') {
                out.push_back('{');
                ++i;
                continue;
            }
            auto close = body.find('}', i + 1);
            if (close == std::string_view::npos) throw Error(Errc::Format, "unterminated placeholder");
            std::string name(body.substr(i + 1, close - i - 1));
            auto it = vars.find(name);
            if (it == vars.end()) throw Error(Errc::MissingVariable, "missing prompt variable '" + name + "'");
            out += it->second;
            i = close;
        } else if (c == '}') {
            if (i + 1 < body.size() && body[i + 1] == '}') {
                out.push_back('}');
                ++i;
                continue;
            }
            throw Error(Errc::Format, "single '}' in template");
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<std::string> placeholders(std::string_view body) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '{') {
            if (i + 1 < body.size() && body[i + 1] == '{') {
                ++i;
                continue;
            }
            auto close = body.find('}', i + 1);
            if (close == std::string_view::npos) break;
            std::string name(body.substr(i + 1, close - i - 1));
            if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
            i = close;
        } else if (body[i] == '}' && i + 1 < body.size() && body[i + 1] == '}') {
            ++i;
        }
    }
    return names;
}

const PromptRegistry& PromptRegistry::builtin() {
    static const PromptRegistry registry = [] {
        PromptRegistry r;
        for (const auto& t : kBuiltinTemplates) r.add(t);
        return r;
    }();
    return registry;
}

void PromptRegistry::add(PromptTemplate tmpl) {
    auto found = placeholders(tmpl.body);
    for (const auto& name : tmpl.required_vars) {
        if (std::find(found.begin(), found.end(), name) == found.end()) {
            throw Error(Errc::Format, "template '" + tmpl.id + "' lacks placeholder {" + name + "}");
        }
    }
    auto id = tmpl.id;
    templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

bool PromptRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

const PromptTemplate& PromptRegistry::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw Error(Errc::UnknownTemplate, "no prompt template '" + std::string(id) + "'");
    return it->second;
}

std::vector<std::string> PromptRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

std::string PromptRegistry::render(std::string_view id, const PromptVars& vars) const {
    const auto& tmpl = get(id);
    for (const auto& name : tmpl.required_vars) {
        if (!vars.contains(name)) throw Error(Errc::MissingVariable, "missing prompt variable '" + name + "'");
    }
    return render_template(tmpl.body, vars);
}

std::string render_prompt(std::string_view id, const PromptVars& vars) {
    return PromptRegistry::builtin().render(id, vars);
}

DatasetId parse_dataset_id(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "hotpotqa") return DatasetId::HotpotQA;
    if (lower == "musique") return DatasetId::MuSiQue;
    if (lower == "2wikimqa" || lower == "2wikimultihopqa") return DatasetId::TwoWikiMQA;
    throw Error(Errc::Config, "unknown dataset '" + std::string(name) + "' (hotpotqa|musique|2wikimqa)");
}

const char* dataset_key(DatasetId id) noexcept {
    switch (id) {
        case DatasetId::HotpotQA: return "hotpotqa";
        case DatasetId::MuSiQue: return "musique";
        case DatasetId::TwoWikiMQA: return "2wikimqa";
    }
    return "hotpotqa";
}

std::string qa_prompt_id(std::string_view family, DatasetId dataset) {
    return std::string(family) + "." + dataset_key(dataset);
}

}  // namespace hoprag
