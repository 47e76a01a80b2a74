#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hoprag {

/// A prompt body with `{name}` placeholders. `{{` and `}}` render as literal
/// braces, which is how the few-shot JSON examples are written.
struct PromptTemplate {
    std::string id;
    std::vector<std::string> required_vars;
    std::string body;
};

using PromptVars = std::map<std::string, std::string>;

/// Substitutes placeholders. Throws MissingVariable for an unbound name and
/// Format for a stray brace. Unused vars are ignored.
std::string render_template(std::string_view body, const PromptVars& vars);

/// Placeholder names in order of first appearance.
std::vector<std::string> placeholders(std::string_view body);

class PromptRegistry {
public:
    /// Every prompt used by the pipeline: generator QA (direct, CoT,
    /// retrieval, per dataset), one-shot decomposition, the accuracy judge,
    /// the three synthesis instructions, and the Iter-RetGen / Self-ask
    /// baseline prompts.
    static const PromptRegistry& builtin();

    void add(PromptTemplate tmpl);
    bool contains(std::string_view id) const;
    /// Throws UnknownTemplate.
    const PromptTemplate& get(std::string_view id) const;
    std::vector<std::string> ids() const;

    std::string render(std::string_view id, const PromptVars& vars) const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// render() against the builtin registry.
std::string render_prompt(std::string_view id, const PromptVars& vars);

enum class DatasetId { HotpotQA, MuSiQue, TwoWikiMQA };

/// Accepts "hotpotqa", "musique", "2wikimqa" (also "2wikimultihopqa"), any case.
DatasetId parse_dataset_id(std::string_view name);
const char* dataset_key(DatasetId id) noexcept;

/// e.g. qa_prompt_id("qa.retrieval", DatasetId::MuSiQue) == "qa.retrieval.musique"
std::string qa_prompt_id(std::string_view family, DatasetId dataset);

}  // namespace hoprag
