// Shared error taxonomy for the repair pipeline.
#pragma once

#include <stdexcept>
#include <string>

namespace depfix {

enum class ErrorCode {
  MalformedManifest,
  DuplicateCaseId,
  InvalidCommitId,
  EmptyCorpus,
  SpawnFailure,
  BuildTimeout,
  FileNotFound,
  DifferFailed,
  MissingSectionInput,
  AuthMissing,
  ProviderError,
  CassetteMiss,
  InputTooLarge,
  NoCodeBlock,
  WorkspaceDirty,
  EmptyInput,
  ZeroDenominator,
  ConfigInvalid,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace depfix
