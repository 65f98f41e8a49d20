// depfix - repair compilation failures caused by breaking dependency updates.
//
// Subcommands: repair, report, parse-log, diff-api, validate-manifest.
// Exit status reflects harness health only; repair success lives in reports.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "depfix/api_diff.hpp"
#include "depfix/build_runner.hpp"
#include "depfix/errors.hpp"
#include "depfix/log_parser.hpp"
#include "depfix/manifest.hpp"
#include "depfix/metrics.hpp"
#include "depfix/report.hpp"
#include "depfix/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw depfix::Error(depfix::ErrorCode::FileNotFound, path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw depfix::Error(depfix::ErrorCode::IoError, "cannot write " + path.string());
  }
  out << content;
}

int run_repair_command(const depfix::RunConfig& config, bool json_output) {
  // ctrl-C drains in-flight builds instead of killing them mid-write.
  std::signal(SIGINT, [](int) { depfix::request_run_stop(); });
  depfix::RunSummary summary = depfix::run_repair(config);
  if (json_output) {
    nlohmann::json j;
    j["run_id"] = summary.run_id;
    j["artifacts_root"] = summary.artifacts_root.string();
    j["results"] = nlohmann::json::array();
    for (const auto& r : summary.results) {
      j["results"].push_back({
          {"case_id", r.case_id},
          {"prompt_id", r.prompt_id},
          {"model_name", r.model_name},
          {"completed", r.completed},
          {"error", r.error},
          {"final_outcome", r.completed ? depfix::to_string(r.outcome.final_outcome) : ""},
      });
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "run " << summary.run_id << " -> " << summary.artifacts_root.string() << "\n";
    for (const auto& r : summary.results) {
      if (r.completed) {
        std::printf("%s %s %s outcome=%s fixed_errors=%lld new_errors=%lld\n",
                    r.case_id.c_str(), r.prompt_id.c_str(), r.model_name.c_str(),
                    depfix::to_string(r.outcome.final_outcome),
                    static_cast<long long>(r.outcome.fixed_errors),
                    static_cast<long long>(r.outcome.new_errors));
      } else {
        std::printf("%s %s %s harness-error=%s\n", r.case_id.c_str(), r.prompt_id.c_str(),
                    r.model_name.c_str(), r.error.c_str());
      }
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"repair harness for breaking dependency updates"};
  app.require_subcommand(1);

  std::string format = "text";
  app.add_option("--format", format, "output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));

  // ---- repair ----
  auto* repair = app.add_subcommand("repair", "run the repair loop over a case grid");
  depfix::RunConfig config;
  std::vector<std::string> prompt_names = {"P8"};
  std::vector<std::string> model_names;
  std::string mode_name = "replay";
  repair->add_option("--manifest", config.manifest_path, "case manifest (JSON)")->required();
  repair->add_option("--prompt", prompt_names, "prompt ids (P1..P8)");
  repair->add_option("--model", model_names, "model names from the provider config")->required();
  repair->add_option("--mode", mode_name, "live, record, or replay")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  repair->add_option("--workspace", config.workspace_root, "scratch checkout root");
  repair->add_option("--runs-dir", config.runs_root, "run artifact root");
  repair->add_option("--cassettes", config.cassette_dir, "cassette store root");
  repair->add_option("--providers", config.providers_path, "provider config file");
  repair->add_option("--templates", config.templates_dir, "prompt template directory");
  repair->add_option("--apidiff-dir", config.apidiff_dir, "pre-computed differ reports");
  repair->add_option("--timeout-secs", config.timeout_seconds, "per-build timeout");
  repair->add_option("--max-parallel-builds", config.max_parallel_builds,
                     "concurrent build cap (also sizes the worker pool)");
  repair->add_option("--requests-per-minute", config.requests_per_minute,
                     "provider rate limit");
  repair->add_option("--run-id", config.run_id, "override the generated run id");
  repair->add_flag("!--full-diff", config.use_filtered_diff,
                   "send the full API diff instead of the filtered excerpt");

  // ---- report ----
  auto* report_cmd = app.add_subcommand("report", "aggregate metrics over a finished run");
  std::string run_id;
  std::filesystem::path runs_root = "runs";
  std::filesystem::path out_dir;
  report_cmd->add_option("--run", run_id, "run id to aggregate")->required();
  report_cmd->add_option("--runs-dir", runs_root, "run artifact root");
  report_cmd->add_option("--out", out_dir, "directory for the CSV/JSON/markdown files");

  // ---- parse-log ----
  auto* parse_cmd = app.add_subcommand("parse-log", "extract compiler diagnostics from a log");
  std::filesystem::path log_path;
  std::string workdir_prefix;
  parse_cmd->add_option("file", log_path, "build log file")->required();
  parse_cmd->add_option("--workdir-prefix", workdir_prefix,
                        "prefix to strip so paths become project-relative");

  // ---- diff-api ----
  auto* diff_cmd = app.add_subcommand("diff-api", "parse, filter, and render an API diff");
  std::filesystem::path diff_file;
  std::string differ_template;
  std::filesystem::path old_jar, new_jar, diff_cache = "cache/apidiff";
  std::vector<std::string> symbol_list;
  std::string render_mode = "sentences";
  diff_cmd->add_option("--diff-file", diff_file, "pre-computed differ report");
  diff_cmd->add_option("--differ-cmd", differ_template,
                       "differ command template with {old_jar} and {new_jar}");
  diff_cmd->add_option("--old-jar", old_jar, "old dependency jar");
  diff_cmd->add_option("--new-jar", new_jar, "new dependency jar");
  diff_cmd->add_option("--cache-dir", diff_cache, "differ report cache");
  diff_cmd->add_option("--symbols", symbol_list, "construct symbols to filter by");
  diff_cmd->add_option("--render", render_mode, "sentences or raw")
      ->check(CLI::IsMember({"sentences", "raw"}));

  // ---- validate-manifest ----
  auto* validate_cmd = app.add_subcommand("validate-manifest", "load and validate a manifest");
  std::filesystem::path manifest_path;
  validate_cmd->add_option("--manifest", manifest_path, "case manifest (JSON)")->required();

  CLI11_PARSE(app, argc, argv);
  const bool json_output = format == "json";

  try {
    if (repair->parsed()) {
      config.mode = depfix::completion_mode_from_string(mode_name);
      for (const auto& name : prompt_names) {
        config.prompts.push_back(depfix::prompt_id_from_string(name));
      }
      config.models = model_names;
      return run_repair_command(config, json_output);
    }

    if (report_cmd->parsed()) {
      auto outcomes = depfix::collect_outcomes(runs_root / run_id);
      depfix::RunReport report = depfix::build_run_report(outcomes);
      if (!out_dir.empty()) {
        write_file(out_dir / "metrics.json", depfix::report_to_json(report));
        write_file(out_dir / "bsr.csv", depfix::report_to_csv(report, "bsr"));
        write_file(out_dir / "ffsr.csv", depfix::report_to_csv(report, "ffsr"));
        write_file(out_dir / "cefr.csv", depfix::report_to_csv(report, "cefr"));
        write_file(out_dir / "ref.csv", depfix::ref_to_csv(report));
        write_file(out_dir / "intersections.csv", depfix::intersections_to_csv(report));
        write_file(out_dir / "summary.md", depfix::report_to_markdown(report));
        std::cout << "report written to " << out_dir.string() << "\n";
      } else if (json_output) {
        std::cout << depfix::report_to_json(report);
      } else {
        std::cout << depfix::report_to_markdown(report);
      }
      return kExitOk;
    }

    if (parse_cmd->parsed()) {
      auto errors = depfix::parse_compilation_errors(read_file(log_path), workdir_prefix);
      if (json_output) {
        std::cout << depfix::errors_to_json(errors);
      } else {
        for (const auto& e : errors) {
          std::printf("%s:%d:%d %s (x%d)\n", e.file_path.c_str(), e.line, e.column,
                      e.message_head().c_str(), e.occurrences);
        }
      }
      return kExitOk;
    }

    if (diff_cmd->parsed()) {
      std::string raw;
      if (!diff_file.empty()) {
        raw = depfix::obtain_diff(diff_file);
      } else if (!differ_template.empty()) {
        depfix::BreakingUpdateCase pseudo;
        pseudo.dependency_group = "adhoc";
        pseudo.dependency_artifact = old_jar.stem().string();
        pseudo.old_version = "old";
        pseudo.new_version = "new";
        raw = depfix::obtain_diff(pseudo, {differ_template, old_jar, new_jar}, diff_cache);
      } else {
        throw depfix::Error(depfix::ErrorCode::ConfigInvalid,
                            "diff-api needs --diff-file or --differ-cmd with jars");
      }
      auto changes = depfix::parse_diff(raw);
      std::set<std::string> symbols(symbol_list.begin(), symbol_list.end());
      depfix::ApiDiffOptions options;
      options.render_mode = render_mode == "raw" ? depfix::DiffRenderMode::Raw
                                                 : depfix::DiffRenderMode::Sentences;
      depfix::ApiDiffExcerpt excerpt = depfix::build_excerpt(changes, symbols, options);
      std::cout << excerpt.rendered_text << "\n";
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      auto cases = depfix::load_manifest(manifest_path);
      auto kept = depfix::filter_cases(cases, depfix::CorpusFilter::defaults());
      if (json_output) {
        nlohmann::json j;
        j["total"] = cases.size();
        j["after_default_filter"] = kept.size();
        nlohmann::json counts = nlohmann::json::object();
        for (const auto& c : cases) {
          std::string key = depfix::to_string(c.failure_category);
          counts[key] = counts.value(key, 0) + 1;
        }
        j["by_category"] = counts;
        std::cout << j.dump(2) << "\n";
      } else {
        std::printf("%zu cases, %zu after default category filter\n", cases.size(), kept.size());
      }
      return kExitOk;
    }
  } catch (const depfix::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case depfix::ErrorCode::ConfigInvalid:
      case depfix::ErrorCode::MalformedManifest:
      case depfix::ErrorCode::DuplicateCaseId:
      case depfix::ErrorCode::InvalidCommitId:
        return kExitConfig;
      default:
        return kExitIo;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
