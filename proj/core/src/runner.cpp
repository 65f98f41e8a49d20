#include "depfix/runner.hpp"

#include <atomic>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "depfix/build_runner.hpp"
#include "depfix/errors.hpp"

namespace depfix {
namespace {

using nlohmann::json;

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c == '/' || c == '\\' || c == ' ' || c == ':') c = '_';
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::atomic<bool> g_stop_requested{false};

}  // namespace

void request_run_stop() { g_stop_requested.store(true); }

void validate_run_config(const RunConfig& config) {
  if (config.prompts.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "at least one prompt is required");
  }
  if (config.models.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "at least one model is required");
  }
  if (config.manifest_path.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "a manifest path is required");
  }
  if (config.mode == CompletionMode::Replay &&
      !std::filesystem::exists(config.cassette_dir)) {
    throw Error(ErrorCode::ConfigInvalid,
                "replay mode requires a cassette root: " + config.cassette_dir.string());
  }
}

std::map<std::string, ModelSpec> load_providers(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::ConfigInvalid, "cannot open provider config " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("provider config: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::ConfigInvalid, "provider config must be an array of model specs");
  }
  std::map<std::string, ModelSpec> specs;
  for (const auto& entry : doc) {
    ModelSpec spec;
    try {
      spec.provider_id = entry.at("provider_id").get<std::string>();
      spec.model_name = entry.at("model_name").get<std::string>();
      spec.endpoint = entry.at("endpoint").get<std::string>();
      spec.api_key_env = entry.at("api_key_env").get<std::string>();
      spec.input_token_limit = entry.value("input_token_limit", std::int64_t{0});
      spec.output_token_limit = entry.value("output_token_limit", std::int64_t{0});
      spec.temperature = entry.value("temperature", 0.0);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigInvalid, std::string("provider config entry: ") + e.what());
    }
    specs[spec.model_name] = std::move(spec);
  }
  return specs;
}

std::string generate_run_id(const RunConfig& config) {
  std::string fingerprint = config.manifest_path.string() + "|" + to_string(config.mode);
  for (PromptId p : config.prompts) fingerprint += std::string("|") + to_string(p);
  for (const auto& m : config.models) fingerprint += "|" + m;

  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_utc);

  char hash[9];
  std::snprintf(hash, sizeof(hash), "%08x",
                static_cast<unsigned>(fnv1a(fingerprint) & 0xFFFFFFFFu));
  return std::string(stamp) + "-" + hash;
}

RunSummary run_repair(const RunConfig& config) {
  validate_run_config(config);
  g_stop_requested.store(false);
  std::map<std::string, ModelSpec> providers = load_providers(config.providers_path);
  for (const auto& name : config.models) {
    if (!providers.count(name)) {
      throw Error(ErrorCode::ConfigInvalid, "model '" + name + "' not in provider config");
    }
  }
  PromptTemplates templates = load_templates(config.templates_dir);

  std::vector<BreakingUpdateCase> cases =
      filter_cases(load_manifest(config.manifest_path), config.corpus_filter);

  RunSummary summary;
  summary.run_id = config.run_id.empty() ? generate_run_id(config) : config.run_id;
  summary.artifacts_root = config.runs_root / summary.run_id;
  std::filesystem::create_directories(summary.artifacts_root);

  set_max_parallel_builds(config.max_parallel_builds);

  struct Job {
    const BreakingUpdateCase* c;
    PromptId prompt;
    const ModelSpec* model;
  };
  std::vector<Job> jobs;
  for (const auto& c : cases) {
    for (PromptId prompt : config.prompts) {
      for (const auto& name : config.models) {
        jobs.push_back({&c, prompt, &providers.at(name)});
      }
    }
  }

  std::mutex results_mutex;
  summary.results.resize(jobs.size());
  std::atomic<std::size_t> next{0};

  unsigned worker_count = std::max(1u, config.max_parallel_builds);
  worker_count = std::min<unsigned>(worker_count, jobs.empty() ? 1 : jobs.size());

  auto worker = [&]() {
    ChatClientOptions client_options;
    client_options.cassette_dir = config.cassette_dir;
    client_options.requests_per_minute = config.requests_per_minute;
    ChatClient client(make_default_transport(), client_options);

    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const Job& job = jobs[i];
      CaseResult result;
      result.case_id = job.c->case_id;
      result.prompt_id = to_string(job.prompt);
      result.model_name = job.model->model_name;
      if (g_stop_requested.load()) {
        result.error = "run stopped before this combination started";
        std::lock_guard<std::mutex> lock(results_mutex);
        summary.results[i] = std::move(result);
        continue;
      }

      RepairContext context;
      context.client = &client;
      context.mode = config.mode;
      context.model = *job.model;
      context.templates = templates;
      context.apidiff_dir = config.apidiff_dir;
      context.diff_options.use_filtered = config.use_filtered_diff;
      context.build_timeout_seconds = config.timeout_seconds;
      context.artifact_dir = summary.artifacts_root / sanitize(job.c->case_id) /
                             result.prompt_id / sanitize(job.model->model_name);

      std::filesystem::path workspace = config.workspace_root / summary.run_id /
                                        result.prompt_id / sanitize(job.model->model_name);
      try {
        result.outcome = repair_case(*job.c, job.prompt, context, workspace);
        result.completed = true;
      } catch (const std::exception& e) {
        result.error = e.what();
      }
      std::lock_guard<std::mutex> lock(results_mutex);
      summary.results[i] = std::move(result);
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(worker_count);
  for (unsigned t = 0; t < worker_count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  return summary;
}

}  // namespace depfix
