// Structured API differences between two dependency versions: obtained from
// an external differ (or a pre-computed report), parsed, filtered down to the
// constructs implicated by the build failure, and rendered for prompts.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace depfix {

struct BreakingUpdateCase;

enum class ApiChangeKind {
  RemovedMethod,
  NewMethod,
  RemovedClass,
  NewClass,
  ModifiedMethod,
  RemovedField,
  NewField,
  NewException,
  RemovedException,
  Other,
};

enum class ApiVisibility { Public, Protected, Package, Private, Unknown };

struct ApiChange {
  ApiChangeKind kind = ApiChangeKind::Other;
  ApiVisibility visibility = ApiVisibility::Unknown;
  std::optional<bool> is_static;
  std::string declaring_type;            // fully-qualified; raw text for Other
  std::string member_name;               // empty for class-level changes
  std::vector<std::string> signature;    // parameter type list
  std::string return_type;
  std::vector<ApiChange> children;       // e.g. exceptions nested under a method
  std::string raw_line;                  // the differ line this change came from

  bool is_method_kind() const {
    return kind == ApiChangeKind::RemovedMethod || kind == ApiChangeKind::NewMethod ||
           kind == ApiChangeKind::ModifiedMethod;
  }
  bool is_exception_kind() const {
    return kind == ApiChangeKind::NewException || kind == ApiChangeKind::RemovedException;
  }
  // Simple (unqualified) name of declaring_type.
  std::string declaring_simple_name() const;
};

struct ApiDiffExcerpt {
  std::vector<ApiChange> changes;  // exactly the changes present in rendered_text
  std::string rendered_text;
  bool truncated = false;
};

enum class DiffRenderMode {
  Sentences,  // one bullet sentence per change, exception children folded in
  Raw,        // the differ's own line shapes, exception children as sub-lines
};

struct ApiDiffOptions {
  DiffRenderMode render_mode = DiffRenderMode::Sentences;
  // When false the prompt receives the full diff, with relevant changes
  // ordered first; when true only the filtered excerpt.
  bool use_filtered = true;
  // Keep the full diff when filtering by symbols leaves nothing.
  bool fallback_to_full_when_filter_empty = true;
  // Character cap on rendered text; relevant changes are kept first and the
  // remainder truncated with an explicit sentinel.
  std::size_t char_cap = 20000;
};

struct DifferSource {
  std::string command_template;  // with {old_jar} and {new_jar} placeholders
  std::filesystem::path old_jar;
  std::filesystem::path new_jar;
};

// Reads a pre-computed differ report verbatim. Throws FileNotFound.
std::string obtain_diff(const std::filesystem::path& precomputed_file);

// Runs the external differ subprocess and returns its report verbatim,
// caching it under `cache_dir` keyed by the dependency coordinates.
// Throws FileNotFound (missing jar) or DifferFailed (nonzero exit).
std::string obtain_diff(const BreakingUpdateCase& c, const DifferSource& differ,
                        const std::filesystem::path& cache_dir);

// Cache file name for a dependency version pair: <group>__<artifact>__<old>__<new>.txt
std::string diff_cache_name(const BreakingUpdateCase& c);

// Parses the differ's textual report. Each ---!/+++ line becomes one change;
// indentation depth defines parent/child nesting. Unrecognized lines are
// preserved as kind=Other with the raw text in declaring_type.
std::vector<ApiChange> parse_diff(const std::string& raw_text);

// Keeps a change iff its member_name is in `symbols`, its declaring type's
// simple name is, it is (transitively) a child of a kept change, or it is a
// NEW_* sibling sharing member_name with a kept REMOVED_* change. An empty
// symbol set keeps everything. Monotone and idempotent.
std::vector<ApiChange> filter_relevant(const std::vector<ApiChange>& changes,
                                       const std::set<std::string>& symbols);

// One bullet sentence per change (input order), exception children omitted:
//   - Method a.b.C.m(t) has been removed in the new version of the dependency.
std::string render_for_prompt(const std::vector<ApiChange>& changes);

// The differ's own line shapes, exception children as indented sub-lines.
std::string render_raw_excerpt(const std::vector<ApiChange>& changes);

// Filter + render + cap in one step, honoring the configured fallbacks.
ApiDiffExcerpt build_excerpt(const std::vector<ApiChange>& changes,
                             const std::set<std::string>& symbols,
                             const ApiDiffOptions& options = {});

}  // namespace depfix
