#include "hoprag/error.hpp"

namespace hoprag {

const char* to_string(Errc code) noexcept {
    switch (code) {
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::EmptyText: return "EmptyText";
        case Errc::EmptyStore: return "EmptyStore";
        case Errc::EmptyQuery: return "EmptyQuery";
        case Errc::ProviderFailure: return "ProviderFailure";
        case Errc::AnnotationMissing: return "AnnotationMissing";
        case Errc::InferenceFailure: return "InferenceFailure";
        case Errc::ComponentFailure: return "ComponentFailure";
        case Errc::GeneratorFailure: return "GeneratorFailure";
        case Errc::AnswerParseFailure: return "AnswerParseFailure";
        case Errc::UnknownTemplate: return "UnknownTemplate";
        case Errc::MissingVariable: return "MissingVariable";
        case Errc::Transient: return "Transient";
        case Errc::Exhausted: return "Exhausted";
        case Errc::Timeout: return "Timeout";
        case Errc::NoObjectFound: return "NoObjectFound";
        case Errc::MissingKey: return "MissingKey";
        case Errc::LlmParseFailure: return "LlmParseFailure";
        case Errc::InvalidDependencyGraph: return "InvalidDependencyGraph";
        case Errc::ExtractionNotInChunk: return "ExtractionNotInChunk";
        case Errc::FilteredQueryInvalid: return "FilteredQueryInvalid";
        case Errc::NoNegativeAvailable: return "NoNegativeAvailable";
        case Errc::EmptyOracle: return "EmptyOracle";
        case Errc::EmptyRows: return "EmptyRows";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::Format: return "Format";
        case Errc::Io: return "Io";
        case Errc::Config: return "Config";
    }
    return "Unknown";
}

}  // namespace hoprag
