// Loading, validation, and filtering of the breaking-update case corpus.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace depfix {

enum class FailureCategory {
  DirectCompilation,
  IndirectCompilation,
  JavaVersionIncompatibility,
  Werror,
  DependencyResolutionConflict,
  Other,
};

const char* to_string(FailureCategory category);
FailureCategory failure_category_from_string(const std::string& name);

struct BreakingUpdateCase {
  std::string case_id;
  std::string project;
  std::string repo_location;  // local checkout path or URL
  std::string pre_breaking_commit;
  std::string breaking_commit;
  std::string dependency_group;
  std::string dependency_artifact;
  std::string old_version;
  std::string new_version;
  std::vector<std::string> build_command;  // defaults to the project's test command
  FailureCategory failure_category = FailureCategory::DirectCompilation;
};

struct CorpusFilter {
  std::set<FailureCategory> excluded_categories;

  // Categories that cannot be repaired by editing Java code.
  static CorpusFilter defaults();
};

// Per-case error statistics from the initial (pre-repair) build.
struct CaseErrorStats {
  std::string case_id;
  std::size_t files_with_errors = 0;
  std::size_t error_count = 0;
};

struct CorpusStats {
  std::size_t median_files_with_errors = 0;
  std::size_t median_errors = 0;
  std::map<std::size_t, std::size_t> files_histogram;   // files-with-errors -> #cases
  std::map<std::size_t, std::size_t> errors_histogram;  // error count -> #cases
};

// Loads a JSON manifest: one array of case objects with the exact field names
// of BreakingUpdateCase. Unknown fields are rejected. Throws Error with
// MalformedManifest, DuplicateCaseId, or InvalidCommitId.
std::vector<BreakingUpdateCase> load_manifest(const std::filesystem::path& path);

// Same validation, starting from an in-memory JSON document.
std::vector<BreakingUpdateCase> parse_manifest(const std::string& json_text);

// Keeps exactly the cases whose failure_category is not excluded, in stable
// order. Idempotent for a fixed filter.
std::vector<BreakingUpdateCase> filter_cases(const std::vector<BreakingUpdateCase>& cases,
                                             const CorpusFilter& filter);

// Medians (lower-middle element for even counts) and histograms over the
// per-case initial error statistics. Throws EmptyCorpus on empty input.
CorpusStats corpus_stats(const std::vector<CaseErrorStats>& stats);

}  // namespace depfix
