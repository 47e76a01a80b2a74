#pragma once

#include <stdexcept>
#include <string>

namespace hoprag {

enum class Errc {
    // corpus_index
    DuplicateId,
    EmptyText,
    EmptyStore,
    EmptyQuery,
    ProviderFailure,
    // token_model
    AnnotationMissing,
    InferenceFailure,
    // hop_engine
    ComponentFailure,
    GeneratorFailure,
    AnswerParseFailure,
    // llm_gateway
    UnknownTemplate,
    MissingVariable,
    Transient,
    Exhausted,
    Timeout,
    NoObjectFound,
    MissingKey,
    // data_synthesis
    LlmParseFailure,
    InvalidDependencyGraph,
    ExtractionNotInChunk,
    FilteredQueryInvalid,
    NoNegativeAvailable,
    // evaluation
    EmptyOracle,
    EmptyRows,
    // shared
    InvalidArgument,
    Format,
    Io,
    Config,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace hoprag
