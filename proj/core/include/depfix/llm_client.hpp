// Provider-agnostic chat-completion access with deterministic settings and a
// record/replay cassette store for reproducible runs.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "depfix/prompt.hpp"

namespace depfix {

struct ModelSpec {
  std::string provider_id;
  std::string model_name;
  std::string endpoint;     // full chat-completions URL
  std::string api_key_env;  // environment variable holding the key
  std::int64_t input_token_limit = 0;   // 0 = no pre-check
  std::int64_t output_token_limit = 0;
  double temperature = 0.0;  // deterministic by default
};

struct TokenCounts {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct CompletionRecord {
  std::string prompt_hash;
  std::string model_name;
  std::string prompt;
  std::string raw_response;
  std::optional<std::string> extracted_code;
  std::string timestamp;  // ISO-8601 UTC
  TokenCounts token_counts;
};

enum class CompletionMode { Live, Record, Replay };

CompletionMode completion_mode_from_string(const std::string& name);
const char* to_string(CompletionMode mode);

// Minimal HTTP seam so tests can inject a failing (or canned) transport.
struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url,
                            const std::map<std::string, std::string>& headers,
                            const std::string& body) = 0;
};

std::unique_ptr<HttpTransport> make_default_transport();

// Content hash over (model_name, prompt bytes); cassette entries verify the
// stored prompt on replay so a hash collision degrades to a miss.
std::string prompt_hash(const std::string& model_name, const std::string& prompt);

struct ChatClientOptions {
  std::filesystem::path cassette_dir = "cassettes";
  int max_attempts = 3;           // retries on HTTP 429/5xx
  int backoff_initial_ms = 500;   // doubled per retry
  int requests_per_minute = 60;   // per-provider token bucket
};

class ChatClient {
 public:
  ChatClient(std::unique_ptr<HttpTransport> transport, ChatClientOptions options);

  // Live/Record require the api key in the environment; Replay requires a
  // cassette entry and performs no network activity at all. Throws
  // AuthMissing, ProviderError, CassetteMiss, or InputTooLarge.
  std::string complete(const ModelSpec& model, const PromptText& prompt, CompletionMode mode);

  // The record written by the most recent Live/Record completion.
  const std::optional<CompletionRecord>& last_record() const { return last_record_; }

 private:
  std::string complete_live(const ModelSpec& model, const std::string& prompt,
                            TokenCounts& usage);
  std::filesystem::path cassette_path(const ModelSpec& model, const std::string& hash) const;

  std::unique_ptr<HttpTransport> transport_;
  ChatClientOptions options_;
  std::optional<CompletionRecord> last_record_;
  struct RateLimiter;
  std::shared_ptr<RateLimiter> limiter_;
};

struct CodeExtraction {
  std::string code;             // contents of the first fenced block
  std::string repair_strategy;  // <repair_strategy> section, when present
};

// Pulls the class text out of a model response: an optional
// <repair_strategy>...</repair_strategy> section is stripped and preserved,
// then the first fenced code block wins. Throws NoCodeBlock when the
// response carries no fence; callers record that as a per-file repair
// failure rather than a crash.
CodeExtraction extract_code_block(const std::string& raw_response);

// chars/4 heuristic used for input-limit pre-checks.
std::int64_t estimate_tokens(const std::string& text);

}  // namespace depfix
