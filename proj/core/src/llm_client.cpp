#include "depfix/llm_client.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "depfix/errors.hpp"

namespace depfix {
namespace {

using nlohmann::json;

std::string iso8601_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

json record_to_json(const CompletionRecord& record) {
  json j = {
      {"prompt_hash", record.prompt_hash},
      {"model_name", record.model_name},
      {"prompt", record.prompt},
      {"raw_response", record.raw_response},
      {"timestamp", record.timestamp},
      {"token_counts",
       {{"prompt_tokens", record.token_counts.prompt_tokens},
        {"completion_tokens", record.token_counts.completion_tokens}}},
  };
  if (record.extracted_code) j["extracted_code"] = *record.extracted_code;
  return j;
}

CompletionRecord record_from_json(const json& j) {
  CompletionRecord record;
  record.prompt_hash = j.at("prompt_hash").get<std::string>();
  record.model_name = j.at("model_name").get<std::string>();
  record.prompt = j.at("prompt").get<std::string>();
  record.raw_response = j.at("raw_response").get<std::string>();
  record.timestamp = j.value("timestamp", "");
  if (j.contains("token_counts")) {
    record.token_counts.prompt_tokens = j["token_counts"].value("prompt_tokens", 0);
    record.token_counts.completion_tokens = j["token_counts"].value("completion_tokens", 0);
  }
  if (j.contains("extracted_code")) record.extracted_code = j["extracted_code"].get<std::string>();
  return record;
}

class HttplibTransport : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                    const std::string& body) override {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      throw Error(ErrorCode::ProviderError, "endpoint is not a URL: " + url);
    }
    std::size_t path_start = url.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (origin.rfind("https://", 0) == 0) {
      throw Error(ErrorCode::ProviderError, "built without TLS support: " + origin);
    }
#endif
    httplib::Client client(origin);
    client.set_read_timeout(300, 0);
    client.set_connection_timeout(30, 0);
    httplib::Headers hl;
    for (const auto& [k, v] : headers) hl.emplace(k, v);
    auto res = client.Post(path, hl, body, "application/json");
    if (!res) {
      throw Error(ErrorCode::ProviderError,
                  "transport error: " + httplib::to_string(res.error()));
    }
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::unique_ptr<HttpTransport> make_default_transport() {
  return std::make_unique<HttplibTransport>();
}

CompletionMode completion_mode_from_string(const std::string& name) {
  if (name == "live" || name == "LIVE") return CompletionMode::Live;
  if (name == "record" || name == "RECORD") return CompletionMode::Record;
  if (name == "replay" || name == "REPLAY") return CompletionMode::Replay;
  throw Error(ErrorCode::ConfigInvalid, "unknown mode '" + name + "'");
}

const char* to_string(CompletionMode mode) {
  switch (mode) {
    case CompletionMode::Live: return "live";
    case CompletionMode::Record: return "record";
    case CompletionMode::Replay: return "replay";
  }
  return "live";
}

std::string prompt_hash(const std::string& model_name, const std::string& prompt) {
  // FNV-1a 64; replay verifies the stored prompt, so a collision is a miss,
  // never a wrong response.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  mix(model_name);
  h ^= 0x1F;
  h *= 1099511628211ULL;
  mix(prompt);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::int64_t estimate_tokens(const std::string& text) {
  return static_cast<std::int64_t>(text.size() / 4);
}

struct ChatClient::RateLimiter {
  std::mutex mutex;
  std::chrono::steady_clock::time_point next_slot = std::chrono::steady_clock::now();

  void acquire(int requests_per_minute) {
    if (requests_per_minute <= 0) return;
    std::chrono::milliseconds spacing(60000 / requests_per_minute);
    std::chrono::steady_clock::time_point wake;
    {
      std::lock_guard<std::mutex> lock(mutex);
      auto now = std::chrono::steady_clock::now();
      if (next_slot < now) next_slot = now;
      wake = next_slot;
      next_slot += spacing;
    }
    std::this_thread::sleep_until(wake);
  }
};

ChatClient::ChatClient(std::unique_ptr<HttpTransport> transport, ChatClientOptions options)
    : transport_(std::move(transport)),
      options_(std::move(options)),
      limiter_(std::make_shared<RateLimiter>()) {}

std::filesystem::path ChatClient::cassette_path(const ModelSpec& model,
                                                const std::string& hash) const {
  return options_.cassette_dir / model.provider_id / (hash + ".json");
}

std::string ChatClient::complete(const ModelSpec& model, const PromptText& prompt,
                                 CompletionMode mode) {
  const std::string hash = prompt_hash(model.model_name, prompt.message);

  if (mode == CompletionMode::Replay) {
    std::filesystem::path path = cassette_path(model, hash);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(ErrorCode::CassetteMiss, "no cassette entry " + path.string());
    }
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CassetteMiss, "unreadable cassette " + path.string() + ": " + e.what());
    }
    CompletionRecord record = record_from_json(j);
    if (record.prompt != prompt.message || record.model_name != model.model_name) {
      throw Error(ErrorCode::CassetteMiss, "cassette content mismatch for " + path.string());
    }
    return record.raw_response;
  }

  if (model.api_key_env.empty() || ::getenv(model.api_key_env.c_str()) == nullptr) {
    throw Error(ErrorCode::AuthMissing,
                "environment variable " + model.api_key_env + " is not set");
  }
  if (model.input_token_limit > 0 && estimate_tokens(prompt.message) > model.input_token_limit) {
    throw Error(ErrorCode::InputTooLarge,
                "estimated " + std::to_string(estimate_tokens(prompt.message)) +
                    " tokens exceeds limit " + std::to_string(model.input_token_limit));
  }

  TokenCounts usage;
  std::string raw = complete_live(model, prompt.message, usage);

  CompletionRecord record;
  record.prompt_hash = hash;
  record.model_name = model.model_name;
  record.prompt = prompt.message;
  record.raw_response = raw;
  record.timestamp = iso8601_now();
  record.token_counts = usage;
  try {
    record.extracted_code = extract_code_block(raw).code;
  } catch (const Error&) {
    // No fence in the response; the record still captures the raw text.
  }
  last_record_ = record;

  if (mode == CompletionMode::Record) {
    std::filesystem::path path = cassette_path(model, hash);
    std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << record_to_json(record).dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);  // atomic publish
  }
  return raw;
}

std::string ChatClient::complete_live(const ModelSpec& model, const std::string& prompt,
                                      TokenCounts& usage) {
  json request = {
      {"model", model.model_name},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", model.temperature},
  };
  std::map<std::string, std::string> headers = {
      {"Authorization", std::string("Bearer ") + ::getenv(model.api_key_env.c_str())},
  };

  int backoff_ms = options_.backoff_initial_ms;
  HttpResponse response;
  for (int attempt = 1;; ++attempt) {
    limiter_->acquire(options_.requests_per_minute);
    response = transport_->post(model.endpoint, headers, request.dump());
    bool transient = response.status == 429 || response.status >= 500;
    if (!transient || attempt >= options_.max_attempts) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
    backoff_ms *= 2;
  }
  if (response.status < 200 || response.status >= 300) {
    throw Error(ErrorCode::ProviderError,
                "HTTP " + std::to_string(response.status) + ": " + response.body);
  }

  json body;
  try {
    body = json::parse(response.body);
    const json& choices = body.at("choices");
    if (!choices.is_array() || choices.empty()) {
      throw Error(ErrorCode::ProviderError, "response has no choices: " + response.body);
    }
    std::string text = choices[0].at("message").at("content").get<std::string>();
    if (body.contains("usage")) {
      usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
      usage.completion_tokens = body["usage"].value("completion_tokens", 0);
    }
    return text;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderError,
                std::string("unparseable provider response: ") + e.what());
  }
}

CodeExtraction extract_code_block(const std::string& raw_response) {
  CodeExtraction out;
  std::string text = raw_response;

  static const std::string kOpen = "<repair_strategy>";
  static const std::string kClose = "</repair_strategy>";
  std::size_t open = text.find(kOpen);
  if (open != std::string::npos) {
    std::size_t close = text.find(kClose, open);
    std::size_t end = close == std::string::npos ? text.size() : close + kClose.size();
    out.repair_strategy = text.substr(open, end - open);
    text.erase(open, end - open);
  }

  // First fenced block: a line starting with ``` (optional language tag),
  // content until the next line that is ``` again.
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t fence = text.find("```", pos);
    if (fence == std::string::npos) break;
    if (fence != 0 && text[fence - 1] != '\n') {
      pos = fence + 3;
      continue;
    }
    std::size_t content_start = text.find('\n', fence);
    if (content_start == std::string::npos) break;
    ++content_start;
    std::size_t closing = text.find("\n```", content_start - 1);
    // Find a closing fence at the start of a line.
    while (closing != std::string::npos) {
      std::size_t line_start = closing + 1;
      std::size_t line_end = text.find('\n', line_start);
      std::string line = text.substr(line_start, line_end == std::string::npos
                                                     ? std::string::npos
                                                     : line_end - line_start);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line == "```") break;
      closing = text.find("\n```", closing + 1);
    }
    if (closing == std::string::npos) {
      // Unterminated fence, common when a response is cut off: keep the rest.
      out.code = text.substr(content_start);
    } else {
      out.code = text.substr(content_start, closing + 1 - content_start);
    }
    if (!out.code.empty() && out.code.back() == '\n') out.code.pop_back();
    return out;
  }
  throw Error(ErrorCode::NoCodeBlock, "response contains no fenced code block");
}

}  // namespace depfix
