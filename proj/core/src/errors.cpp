#include "depfix/errors.hpp"

namespace depfix {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedManifest: return "MALFORMED_MANIFEST";
    case ErrorCode::DuplicateCaseId: return "DUPLICATE_CASE_ID";
    case ErrorCode::InvalidCommitId: return "INVALID_COMMIT_ID";
    case ErrorCode::EmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::SpawnFailure: return "SPAWN_FAILURE";
    case ErrorCode::BuildTimeout: return "BUILD_TIMEOUT";
    case ErrorCode::FileNotFound: return "FILE_NOT_FOUND";
    case ErrorCode::DifferFailed: return "DIFFER_FAILED";
    case ErrorCode::MissingSectionInput: return "MISSING_SECTION_INPUT";
    case ErrorCode::AuthMissing: return "AUTH_MISSING";
    case ErrorCode::ProviderError: return "PROVIDER_ERROR";
    case ErrorCode::CassetteMiss: return "CASSETTE_MISS";
    case ErrorCode::InputTooLarge: return "INPUT_TOO_LARGE";
    case ErrorCode::NoCodeBlock: return "NO_CODE_BLOCK";
    case ErrorCode::WorkspaceDirty: return "WORKSPACE_DIRTY";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::ZeroDenominator: return "ZERO_DENOMINATOR";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace depfix
