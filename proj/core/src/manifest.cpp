#include "depfix/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "depfix/errors.hpp"

namespace depfix {
namespace {

using nlohmann::json;

const std::map<std::string, FailureCategory> kCategoryNames = {
    {"DIRECT_COMPILATION", FailureCategory::DirectCompilation},
    {"INDIRECT_COMPILATION", FailureCategory::IndirectCompilation},
    {"JAVA_VERSION_INCOMPATIBILITY", FailureCategory::JavaVersionIncompatibility},
    {"WERROR", FailureCategory::Werror},
    {"DEPENDENCY_RESOLUTION_CONFLICT", FailureCategory::DependencyResolutionConflict},
    {"OTHER", FailureCategory::Other},
};

bool is_40_hex(const std::string& s) {
  return s.size() == 40 && std::all_of(s.begin(), s.end(), [](unsigned char c) {
           return std::isxdigit(c) != 0;
         });
}

std::string require_string(const json& obj, const char* field, const std::string& case_hint) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::MalformedManifest,
                "case '" + case_hint + "': missing or non-string field '" + field + "'");
  }
  return it->get<std::string>();
}

BreakingUpdateCase parse_case(const json& obj, std::size_t index) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::MalformedManifest,
                "entry #" + std::to_string(index) + " is not an object");
  }
  static const std::set<std::string> known_fields = {
      "case_id",          "project",     "repo_location", "pre_breaking_commit",
      "breaking_commit",  "dependency_group", "dependency_artifact",
      "old_version",      "new_version", "build_command", "failure_category",
  };
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known_fields.count(it.key())) {
      throw Error(ErrorCode::MalformedManifest,
                  "entry #" + std::to_string(index) + ": unknown field '" + it.key() + "'");
    }
  }

  BreakingUpdateCase c;
  c.case_id = require_string(obj, "case_id", "#" + std::to_string(index));
  c.project = require_string(obj, "project", c.case_id);
  c.repo_location = require_string(obj, "repo_location", c.case_id);
  c.pre_breaking_commit = require_string(obj, "pre_breaking_commit", c.case_id);
  c.breaking_commit = require_string(obj, "breaking_commit", c.case_id);
  c.dependency_group = require_string(obj, "dependency_group", c.case_id);
  c.dependency_artifact = require_string(obj, "dependency_artifact", c.case_id);
  c.old_version = require_string(obj, "old_version", c.case_id);
  c.new_version = require_string(obj, "new_version", c.case_id);

  if (auto it = obj.find("build_command"); it != obj.end()) {
    if (!it->is_array() || it->empty()) {
      throw Error(ErrorCode::MalformedManifest,
                  "case '" + c.case_id + "': build_command must be a non-empty array");
    }
    for (const auto& arg : *it) {
      if (!arg.is_string()) {
        throw Error(ErrorCode::MalformedManifest,
                    "case '" + c.case_id + "': build_command entries must be strings");
      }
      c.build_command.push_back(arg.get<std::string>());
    }
  } else {
    c.build_command = {"mvn", "test"};
  }

  c.failure_category =
      failure_category_from_string(require_string(obj, "failure_category", c.case_id));

  if (!is_40_hex(c.pre_breaking_commit)) {
    throw Error(ErrorCode::InvalidCommitId,
                "case '" + c.case_id + "': pre_breaking_commit is not a 40-hex id");
  }
  if (!is_40_hex(c.breaking_commit)) {
    throw Error(ErrorCode::InvalidCommitId,
                "case '" + c.case_id + "': breaking_commit is not a 40-hex id");
  }
  if (c.pre_breaking_commit == c.breaking_commit) {
    throw Error(ErrorCode::MalformedManifest,
                "case '" + c.case_id + "': pre_breaking_commit equals breaking_commit");
  }
  if (c.old_version == c.new_version) {
    throw Error(ErrorCode::MalformedManifest,
                "case '" + c.case_id + "': old_version equals new_version");
  }
  return c;
}

std::size_t median_lower(std::vector<std::size_t> values) {
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

}  // namespace

const char* to_string(FailureCategory category) {
  switch (category) {
    case FailureCategory::DirectCompilation: return "DIRECT_COMPILATION";
    case FailureCategory::IndirectCompilation: return "INDIRECT_COMPILATION";
    case FailureCategory::JavaVersionIncompatibility: return "JAVA_VERSION_INCOMPATIBILITY";
    case FailureCategory::Werror: return "WERROR";
    case FailureCategory::DependencyResolutionConflict: return "DEPENDENCY_RESOLUTION_CONFLICT";
    case FailureCategory::Other: return "OTHER";
  }
  return "OTHER";
}

FailureCategory failure_category_from_string(const std::string& name) {
  auto it = kCategoryNames.find(name);
  if (it == kCategoryNames.end()) {
    throw Error(ErrorCode::MalformedManifest, "unknown failure_category '" + name + "'");
  }
  return it->second;
}

CorpusFilter CorpusFilter::defaults() {
  return CorpusFilter{{FailureCategory::JavaVersionIncompatibility, FailureCategory::Werror,
                       FailureCategory::DependencyResolutionConflict}};
}

std::vector<BreakingUpdateCase> parse_manifest(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedManifest, e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::MalformedManifest, "manifest root must be an array of case objects");
  }

  std::vector<BreakingUpdateCase> cases;
  std::set<std::string> seen_ids;
  cases.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    BreakingUpdateCase c = parse_case(doc[i], i);
    if (!seen_ids.insert(c.case_id).second) {
      throw Error(ErrorCode::DuplicateCaseId, "case_id '" + c.case_id + "' appears twice");
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

std::vector<BreakingUpdateCase> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::MalformedManifest, "cannot open manifest: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str());
}

std::vector<BreakingUpdateCase> filter_cases(const std::vector<BreakingUpdateCase>& cases,
                                             const CorpusFilter& filter) {
  std::vector<BreakingUpdateCase> kept;
  kept.reserve(cases.size());
  for (const auto& c : cases) {
    if (!filter.excluded_categories.count(c.failure_category)) kept.push_back(c);
  }
  return kept;
}

CorpusStats corpus_stats(const std::vector<CaseErrorStats>& stats) {
  if (stats.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "corpus_stats requires at least one case");
  }
  CorpusStats out;
  std::vector<std::size_t> files, errors;
  files.reserve(stats.size());
  errors.reserve(stats.size());
  for (const auto& s : stats) {
    files.push_back(s.files_with_errors);
    errors.push_back(s.error_count);
    out.files_histogram[s.files_with_errors] += 1;
    out.errors_histogram[s.error_count] += 1;
  }
  out.median_files_with_errors = median_lower(std::move(files));
  out.median_errors = median_lower(std::move(errors));
  return out;
}

}  // namespace depfix
