#include "depfix/repair.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "depfix/context.hpp"
#include "depfix/errors.hpp"

namespace depfix {
namespace {

using nlohmann::json;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << content;
}

// The checkout's newline convention survives patching: a CRLF original gets
// a CRLF replacement.
std::string match_newline_convention(const std::string& original, std::string replacement) {
  bool original_crlf = original.find("\r\n") != std::string::npos;
  bool replacement_crlf = replacement.find("\r\n") != std::string::npos;
  if (original_crlf == replacement_crlf) return replacement;
  std::string out;
  out.reserve(replacement.size());
  if (original_crlf) {
    for (char c : replacement) {
      if (c == '\n') out.append("\r\n");
      else out.push_back(c);
    }
  } else {
    for (std::size_t i = 0; i < replacement.size(); ++i) {
      if (replacement[i] == '\r' && i + 1 < replacement.size() && replacement[i + 1] == '\n')
        continue;
      out.push_back(replacement[i]);
    }
  }
  return out;
}

std::string sanitize_case_id(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  }
  return out;
}

// The per-file error message block: every message of the group, in log
// order, separated by blank lines.
std::string concatenated_messages(const ErrorFileGroup& group) {
  std::string out;
  for (std::size_t i = 0; i < group.errors.size(); ++i) {
    if (i) out.append("\n\n");
    out.append(group.errors[i].message);
  }
  return out;
}

json error_to_json(const CompilationError& e) {
  return json{{"file", e.file_path},     {"line", e.line},
              {"column", e.column},      {"message", e.message},
              {"occurrences", e.occurrences}, {"location_missing", e.location_missing}};
}

CompilationError error_from_json(const json& j) {
  CompilationError e;
  e.file_path = j.at("file").get<std::string>();
  e.line = j.at("line").get<int>();
  e.column = j.at("column").get<int>();
  e.message = j.at("message").get<std::string>();
  e.occurrences = j.value("occurrences", 1);
  e.location_missing = j.value("location_missing", false);
  return e;
}

BuildOutcome outcome_from_string(const std::string& s) {
  if (s == "SUCCESS") return BuildOutcome::Success;
  if (s == "COMPILATION_FAILURE") return BuildOutcome::CompilationFailure;
  if (s == "TEST_FAILURE") return BuildOutcome::TestFailure;
  return BuildOutcome::OtherFailure;
}

}  // namespace

ErrorDiff diff_errors(const std::vector<CompilationError>& before,
                      const std::vector<CompilationError>& after) {
  std::map<std::pair<std::string, std::string>, std::int64_t> before_counts, after_counts;
  std::int64_t total_before = 0, total_after = 0;
  for (const auto& e : before) {
    before_counts[{e.file_path, e.message_head()}] += e.occurrences;
    total_before += e.occurrences;
  }
  for (const auto& e : after) {
    after_counts[{e.file_path, e.message_head()}] += e.occurrences;
    total_after += e.occurrences;
  }

  ErrorDiff diff;
  for (const auto& [key, count] : before_counts) {
    auto it = after_counts.find(key);
    std::int64_t matched = it == after_counts.end() ? 0 : std::min(count, it->second);
    diff.unresolved += matched;
  }
  diff.fixed = total_before - diff.unresolved;
  diff.introduced = total_after - diff.unresolved;
  return diff;
}

RepairOutcome repair_case(const BreakingUpdateCase& c, PromptId prompt_id,
                          const RepairContext& context,
                          const std::filesystem::path& workspace) {
  RepairOutcome outcome;
  outcome.case_id = c.case_id;
  outcome.prompt_id = to_string(prompt_id);
  outcome.model_name = context.model.model_name;

  // Private scratch copy of the checkout; the original is never mutated.
  std::filesystem::path scratch = workspace / sanitize_case_id(c.case_id);
  if (std::filesystem::exists(scratch)) {
    throw Error(ErrorCode::WorkspaceDirty, scratch.string() + " already exists");
  }
  std::filesystem::create_directories(scratch);
  std::filesystem::copy(c.repo_location, scratch,
                        std::filesystem::copy_options::recursive |
                            std::filesystem::copy_options::copy_symlinks);

  const bool keep_artifacts = !context.artifact_dir.empty();
  if (keep_artifacts) std::filesystem::create_directories(context.artifact_dir);

  // Initial build: expected to fail with compilation errors.
  BuildReport initial = run_build(scratch, c.build_command, context.build_timeout_seconds);
  if (keep_artifacts) write_file(context.artifact_dir / "build_initial.log", initial.log_text);

  std::string workdir_prefix = scratch.string();
  outcome.initial_errors = parse_compilation_errors(initial.log_text, workdir_prefix);
  for (const auto& e : outcome.initial_errors) outcome.initial_error_files.insert(e.file_path);

  BuildOutcome initial_outcome = classify_outcome(initial);
  if (initial_outcome != BuildOutcome::CompilationFailure) {
    // Nothing to repair; the precondition (a failing compile) does not hold.
    outcome.final_outcome = initial_outcome;
    if (keep_artifacts) {
      write_file(context.artifact_dir / "outcome.json", outcome_to_json(outcome));
    }
    return outcome;
  }

  // Case-level API diff, shared by every file prompt.
  PromptConfig config = config_for(prompt_id);
  std::vector<ApiChange> diff_changes;
  bool have_diff = false;
  if (config.include_api_diff && !context.apidiff_dir.empty()) {
    std::filesystem::path diff_file = context.apidiff_dir / diff_cache_name(c);
    if (std::filesystem::exists(diff_file)) {
      diff_changes = parse_diff(obtain_diff(diff_file));
      have_diff = true;
    }
  }

  // One prompt and one model call per erroneous file, in log order.
  std::vector<ErrorFileGroup> groups = group_by_file(outcome.initial_errors);
  int file_index = 0;
  for (const auto& group : groups) {
    ++file_index;
    std::string stem = "file" + std::to_string(file_index);
    try {
      ClassText source = read_client_class(scratch, group.file_path);
      ErroneousLines lines = extract_erroneous_lines(source.text, group.errors);

      std::set<std::string> symbols;
      for (const auto& err : group.errors) {
        std::string line_text;
        for (const auto& [number, text] : lines.lines) {
          if (number == err.line) line_text = text;
        }
        std::set<std::string> mined = extract_construct_symbols(err, line_text);
        symbols.insert(mined.begin(), mined.end());
      }

      std::string diff_text;
      if (config.include_api_diff && have_diff) {
        diff_text = build_excerpt(diff_changes, symbols, context.diff_options).rendered_text;
      }

      PromptText prompt =
          build_prompt(config, source.text, concatenated_messages(group),
                       format_erroneous_lines(lines), diff_text, context.templates);
      if (keep_artifacts) {
        write_file(context.artifact_dir / (stem + "_prompt.txt"), prompt.message);
      }

      std::string raw = context.client->complete(context.model, prompt, context.mode);
      if (keep_artifacts) {
        write_file(context.artifact_dir / (stem + "_response.txt"), raw);
      }

      CodeExtraction extraction = extract_code_block(raw);
      std::string patched = match_newline_convention(source.text, extraction.code);
      if (!patched.empty() && patched.back() != '\n') patched.push_back('\n');
      write_file(scratch / group.file_path, patched);
      outcome.files_patched.insert(group.file_path);
      if (keep_artifacts) {
        write_file(context.artifact_dir / (stem + "_patched.java"), patched);
      }
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::CassetteMiss:
        case ErrorCode::ProviderError:
        case ErrorCode::AuthMissing:
        case ErrorCode::InputTooLarge:
        case ErrorCode::NoCodeBlock:
        case ErrorCode::MissingSectionInput:
        case ErrorCode::FileNotFound:
          outcome.files_skipped.push_back({group.file_path, e.what()});
          break;
        default:
          throw;
      }
    }
  }

  // Exactly one rebuild after all files are patched.
  BuildReport final_report = run_build(scratch, c.build_command, context.build_timeout_seconds);
  if (keep_artifacts) write_file(context.artifact_dir / "build_final.log", final_report.log_text);

  outcome.final_outcome = classify_outcome(final_report);
  outcome.residual_errors = parse_compilation_errors(final_report.log_text, workdir_prefix);

  ErrorDiff diff = diff_errors(outcome.initial_errors, outcome.residual_errors);
  outcome.fixed_errors = diff.fixed;
  outcome.unresolved_errors = diff.unresolved;
  outcome.new_errors = diff.introduced;

  // A file counts as fixed when the after-log no longer mentions it; counts
  // come from the rebuild log, never from inference.
  std::set<std::string> residual_files;
  for (const auto& e : outcome.residual_errors) residual_files.insert(e.file_path);
  for (const auto& file : outcome.initial_error_files) {
    if (!residual_files.count(file)) ++outcome.fixed_files;
  }

  if (keep_artifacts) {
    write_file(context.artifact_dir / "outcome.json", outcome_to_json(outcome));
  }
  return outcome;
}

std::string outcome_to_json(const RepairOutcome& outcome) {
  json j;
  j["case_id"] = outcome.case_id;
  j["prompt_id"] = outcome.prompt_id;
  j["model_name"] = outcome.model_name;
  j["initial_errors"] = json::array();
  for (const auto& e : outcome.initial_errors) j["initial_errors"].push_back(error_to_json(e));
  j["initial_error_files"] = outcome.initial_error_files;
  j["files_patched"] = outcome.files_patched;
  j["files_skipped"] = json::array();
  for (const auto& s : outcome.files_skipped) {
    j["files_skipped"].push_back({{"path", s.path}, {"reason", s.reason}});
  }
  j["final_outcome"] = to_string(outcome.final_outcome);
  j["residual_errors"] = json::array();
  for (const auto& e : outcome.residual_errors) j["residual_errors"].push_back(error_to_json(e));
  j["fixed_errors"] = outcome.fixed_errors;
  j["unresolved_errors"] = outcome.unresolved_errors;
  j["new_errors"] = outcome.new_errors;
  j["fixed_files"] = outcome.fixed_files;
  return j.dump(2) + "\n";
}

RepairOutcome outcome_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  RepairOutcome o;
  o.case_id = j.at("case_id").get<std::string>();
  o.prompt_id = j.at("prompt_id").get<std::string>();
  o.model_name = j.at("model_name").get<std::string>();
  for (const auto& e : j.at("initial_errors")) o.initial_errors.push_back(error_from_json(e));
  for (const auto& f : j.at("initial_error_files")) o.initial_error_files.insert(f.get<std::string>());
  for (const auto& f : j.at("files_patched")) o.files_patched.insert(f.get<std::string>());
  for (const auto& s : j.at("files_skipped")) {
    o.files_skipped.push_back({s.at("path").get<std::string>(), s.at("reason").get<std::string>()});
  }
  o.final_outcome = outcome_from_string(j.at("final_outcome").get<std::string>());
  for (const auto& e : j.at("residual_errors")) o.residual_errors.push_back(error_from_json(e));
  o.fixed_errors = j.at("fixed_errors").get<std::int64_t>();
  o.unresolved_errors = j.value("unresolved_errors", std::int64_t{0});
  o.new_errors = j.at("new_errors").get<std::int64_t>();
  o.fixed_files = j.at("fixed_files").get<std::int64_t>();
  return o;
}

}  // namespace depfix
