// Batch execution of the repair loop over the (case x prompt x model) grid.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "depfix/llm_client.hpp"
#include "depfix/manifest.hpp"
#include "depfix/prompt.hpp"
#include "depfix/repair.hpp"

namespace depfix {

struct RunConfig {
  std::filesystem::path manifest_path;
  std::vector<PromptId> prompts;
  std::vector<std::string> models;  // model_name keys into the provider config
  CompletionMode mode = CompletionMode::Replay;
  std::filesystem::path workspace_root = "workspace";
  std::filesystem::path runs_root = "runs";
  std::filesystem::path cassette_dir = "cassettes";
  std::filesystem::path providers_path = "providers.json";
  std::filesystem::path templates_dir = "templates";
  std::filesystem::path apidiff_dir = "cache/apidiff";
  int timeout_seconds = 1800;
  unsigned max_parallel_builds = 1;
  int requests_per_minute = 60;
  bool use_filtered_diff = true;
  CorpusFilter corpus_filter = CorpusFilter::defaults();
  std::string run_id;  // empty: timestamp + short config hash
};

// Throws ConfigInvalid: at least one prompt and one model are required, and
// replay mode requires an existing cassette root.
void validate_run_config(const RunConfig& config);

// providers.json: an array of objects mirroring ModelSpec field names.
std::map<std::string, ModelSpec> load_providers(const std::filesystem::path& path);

std::string generate_run_id(const RunConfig& config);

struct CaseResult {
  std::string case_id;
  std::string prompt_id;
  std::string model_name;
  bool completed = false;   // harness-level: the loop ran to an outcome
  std::string error;        // harness failure detail when !completed
  RepairOutcome outcome;
};

struct RunSummary {
  std::string run_id;
  std::filesystem::path artifacts_root;  // runs_root / run_id
  std::vector<CaseResult> results;
};

// Runs every (case, prompt, model) combination, writing per-combination
// artifacts under runs_root/<run-id>/<case>/<prompt>/<model>/. Harness
// failures (timeouts, dirty workspaces) are captured per combination; the
// run itself completes regardless of repair success.
RunSummary run_repair(const RunConfig& config);

// Asks a running grid to stop picking up new combinations; in-flight builds
// drain normally. Safe to call from a signal handler.
void request_run_stop();

}  // namespace depfix
