// The per-case repair loop: parse the failing build, repair each erroneous
// file with one model call, apply the patches, rebuild once, and account for
// fixed / unresolved / newly introduced errors.
#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "depfix/api_diff.hpp"
#include "depfix/build_runner.hpp"
#include "depfix/llm_client.hpp"
#include "depfix/log_parser.hpp"
#include "depfix/manifest.hpp"
#include "depfix/prompt.hpp"

namespace depfix {

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct RepairOutcome {
  std::string case_id;
  std::string prompt_id;
  std::string model_name;
  std::vector<CompilationError> initial_errors;
  std::set<std::string> initial_error_files;
  std::set<std::string> files_patched;
  std::vector<SkippedFile> files_skipped;
  BuildOutcome final_outcome = BuildOutcome::OtherFailure;
  std::vector<CompilationError> residual_errors;
  std::int64_t fixed_errors = 0;
  std::int64_t unresolved_errors = 0;
  std::int64_t new_errors = 0;
  std::int64_t fixed_files = 0;
};

struct ErrorDiff {
  std::int64_t fixed = 0;
  std::int64_t unresolved = 0;
  std::int64_t introduced = 0;
};

// Multiset matching on (file path, normalized first message line); line and
// column are ignored because patches shift positions. Conservation holds for
// all inputs: fixed + unresolved = |before|, unresolved + introduced = |after|.
ErrorDiff diff_errors(const std::vector<CompilationError>& before,
                      const std::vector<CompilationError>& after);

struct RepairContext {
  ChatClient* client = nullptr;
  CompletionMode mode = CompletionMode::Replay;
  ModelSpec model;
  PromptTemplates templates;
  // Pre-computed differ reports, one file per dependency version pair named
  // by diff_cache_name(). An absent file disables the APIDiff sections.
  std::filesystem::path apidiff_dir;
  ApiDiffOptions diff_options;
  int build_timeout_seconds = 1800;
  // When set, prompts / responses / patched files / build logs are written
  // under this directory.
  std::filesystem::path artifact_dir;
};

// Runs the whole loop for one case inside `workspace` (a private scratch
// copy of the checkout is created there; the original is never mutated).
// Throws WorkspaceDirty when the scratch directory already exists, and
// propagates BuildTimeout from the builds. Per-file model failures
// (cassette miss, provider error, no code block) are recorded in
// files_skipped, never thrown.
RepairOutcome repair_case(const BreakingUpdateCase& c, PromptId prompt_id,
                          const RepairContext& context,
                          const std::filesystem::path& workspace);

// Serialized outcome record. Deterministic: no timestamps or durations, so
// identical replay runs produce byte-identical records.
std::string outcome_to_json(const RepairOutcome& outcome);
RepairOutcome outcome_from_json(const std::string& json_text);

}  // namespace depfix
