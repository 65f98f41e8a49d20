// Acceptance suite: one test case per criterion, each printing a single
// [PASS]/[FAIL] line. Expected values come from independent computations
// (brute-force oracles, frozen goldens, hand-checked counts), never from the
// code paths under test.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "depfix/api_diff.hpp"
#include "depfix/errors.hpp"
#include "depfix/llm_client.hpp"
#include "depfix/log_parser.hpp"
#include "depfix/manifest.hpp"
#include "depfix/metrics.hpp"
#include "depfix/prompt.hpp"
#include "depfix/repair.hpp"
#include "depfix/runner.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace depfix;
using nlohmann::json;

namespace {

void report_line(int n, const char* what, bool ok) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", n, what);
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "criterion ", n, " failed (", what, ")");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct FailingTransport : HttpTransport {
  HttpResponse post(const std::string&, const std::map<std::string, std::string>&,
                    const std::string&) override {
    throw Error(ErrorCode::ProviderError, "network use is forbidden in replay");
  }
};

}  // namespace

TEST_SUITE("acceptance") {

TEST_CASE("criterion 1: metric recomputation from reported counts") {
  auto start = std::chrono::steady_clock::now();
  bool ok = true;

  ok = ok && percent_round_half_up(28, 103) == 27;
  ok = ok && percent_round_half_up(97, 239) == 41;
  ok = ok && percent_round_half_up(741, 955) == 78;
  ok = ok && ref_aggregate_percent(609, 522, 1004) == 9;
  ok = ok && ref_aggregate_percent(728, 1125, 1004) == -40;

  // The same numbers through the outcome-level entry points.
  std::vector<RepairOutcome> builds;
  for (int i = 0; i < 103; ++i) {
    RepairOutcome o;
    o.case_id = "c" + std::to_string(i);
    o.prompt_id = "P8";
    o.model_name = "m";
    o.final_outcome = i < 28 ? BuildOutcome::Success : BuildOutcome::CompilationFailure;
    CompilationError e;
    e.file_path = "F.java";
    e.message = "cannot find symbol";
    o.initial_errors = {e};
    o.initial_error_files = {"F.java"};
    builds.push_back(o);
  }
  Ratio bsr = compute_bsr({builds, MetricsScope::AllCases});
  ok = ok && bsr.num == 28 && bsr.den == 103 && bsr.percent() == 27;

  RepairOutcome files;
  files.prompt_id = "P4";
  files.model_name = "m";
  files.final_outcome = BuildOutcome::CompilationFailure;
  files.fixed_files = 97;
  CompilationError err_proto;
  err_proto.message = "cannot find symbol";
  for (int f = 0; f < 239; ++f) {
    files.initial_error_files.insert("F" + std::to_string(f) + ".java");
  }
  err_proto.file_path = "F0.java";
  err_proto.occurrences = 955;
  files.initial_errors = {err_proto};
  files.fixed_errors = 741;
  files.new_errors = 0;
  MetricsInput file_input{{files}, MetricsScope::FailedCasesOnly};
  ok = ok && compute_ffsr(file_input).percent() == 41;
  ok = ok && compute_cefr(file_input).percent() == 78;

  ok = ok && seconds_since(start) < 1.0;
  report_line(1, "BSR 27%, FFSR 41%, CEFR 78%, REF 9% and -40%, under 1s", ok);
}

TEST_CASE("criterion 2: log-parser fidelity on the billy excerpt") {
  std::string log = testsupport::read_file(testsupport::fixtures_dir() / "logs/fig_billy.log");
  auto errors = parse_compilation_errors(log);

  bool ok = errors.size() == 1;
  if (ok) {
    const CompilationError& e = errors[0];
    ok = ok && e.file_path ==
                   "/billy/billy-gin/src/main/java/com/premiumminds/billy/gin/services/impl/"
                   "pdf/FOPPDFTransformer.java";
    ok = ok && e.line == 115;
    ok = ok && e.column == 43;
    ok = ok && e.message.rfind("no suitable method found for newInstance(no arguments)", 0) == 0;
  }
  report_line(2, "one diagnostic at 115:43 with the exact message head", ok);
}

TEST_CASE("criterion 3: API diff parse and render fidelity") {
  auto changes =
      parse_diff(testsupport::read_file(testsupport::fixtures_dir() / "diffs/fop_fig4.txt"));

  std::size_t removed = 0, added = 0, exceptions = 0;
  std::function<void(const std::vector<ApiChange>&)> count = [&](const std::vector<ApiChange>& cs) {
    for (const auto& c : cs) {
      if (c.kind == ApiChangeKind::RemovedMethod) ++removed;
      if (c.kind == ApiChangeKind::NewMethod) ++added;
      if (c.kind == ApiChangeKind::NewException) ++exceptions;
      count(c.children);
    }
  };
  count(changes);
  bool ok = removed == 1 && added == 4 && exceptions == 4;

  auto pair = parse_diff(
      testsupport::read_file(testsupport::fixtures_dir() / "diffs/jasperreports_pair.txt"));
  std::string bullets = render_for_prompt(pair);
  ok = ok && bullets ==
                 "- Method net.sf.jasperreports.engine.JRPen.setLineWidth(float) has been "
                 "removed in the new version of the dependency.\n"
                 "- Method net.sf.jasperreports.engine.base.JRBasePen.setLineWidth(float) has "
                 "been removed in the new version of the dependency.";
  report_line(3, "1 removed + 4 new methods with 4 nested exceptions; bullets byte-exact", ok);
}

TEST_CASE("criterion 4: prompt renders match the frozen goldens") {
  PromptTemplates templates = load_templates(testsupport::templates_dir());
  auto dir = testsupport::fixtures_dir() / "goldens";
  auto strip = [](std::string s) {
    while (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
  };
  std::string cls = strip(testsupport::read_file(dir / "payload_class.txt"));
  std::string err = strip(testsupport::read_file(dir / "payload_error.txt"));
  std::string lines = strip(testsupport::read_file(dir / "payload_lines.txt"));
  std::string diff = strip(testsupport::read_file(dir / "payload_diff.txt"));

  bool ok = true;
  std::string p1_render;
  for (int i = 0; i < 8; ++i) {
    PromptId id = static_cast<PromptId>(i);
    PromptText prompt = build_prompt(config_for(id), cls, err, lines, diff, templates);
    std::string golden =
        testsupport::read_file(dir / (std::string(to_string(id)) + ".txt"));
    ok = ok && prompt.message == golden && prompt.placeholders_resolved;
    if (id == PromptId::P1) p1_render = prompt.message;
  }

  // P1 body verbatim inside P2-P4.
  std::size_t constraints_at = p1_render.find("- Propose a patch");
  ok = ok && constraints_at != std::string::npos;
  if (ok) {
    std::string head = p1_render.substr(0, constraints_at);
    while (!head.empty() && head.back() == '\n') head.pop_back();
    std::string tail = p1_render.substr(constraints_at);
    for (PromptId id : {PromptId::P2, PromptId::P3, PromptId::P4}) {
      PromptText enriched = build_prompt(config_for(id), cls, err, lines, diff, templates);
      ok = ok && enriched.message.find(head) != std::string::npos;
      ok = ok && enriched.message.find(tail) != std::string::npos;
    }
  }

  // Every CoT render carries the eight strategy bullets.
  const char* bullets[] = {
      "- Identify the specific API changes that are causing the failure in the client code.",
      "- Compare the old and new API versions, noting any changes in method signatures, return types, or parameter lists.",
      "- Determine which parts of the client code need to be updated to accommodate these API changes.",
      "- Consider any constraints or requirements for the fix (e.g., not changing function signatures, potential import adjustments).",
      "- Plan the minimal set of changes needed to fix the issue while keeping the code functional and compliant with the new API.",
      "- Consider potential side effects of the proposed changes on other parts of the code.",
      "- Ensure that the planned changes will result in a complete and compilable class.",
      "- If applicable, note any additional imports that may be needed due to the API changes.",
  };
  for (PromptId id : {PromptId::P5, PromptId::P6, PromptId::P7, PromptId::P8}) {
    PromptText prompt = build_prompt(config_for(id), cls, err, lines, diff, templates);
    for (const char* bullet : bullets) {
      ok = ok && prompt.message.find(bullet) != std::string::npos;
    }
  }
  report_line(4, "P1-P8 byte-equal to goldens, P1 contained in P2-P4, CoT bullets present", ok);
}

TEST_CASE("criterion 5: end-to-end replay determinism on the bundled fixture") {
  auto start = std::chrono::steady_clock::now();
  testsupport::TempDir area;

  // Stage the fixture project as the case checkout.
  auto checkout = area.path() / "checkout";
  std::filesystem::copy(testsupport::fixtures_dir() / "sample-app", checkout,
                        std::filesystem::copy_options::recursive);

  json manifest = json::array({{
      {"case_id", "widgets-sample"},
      {"project", "sample-app"},
      {"repo_location", checkout.string()},
      {"pre_breaking_commit", "aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa"},
      {"breaking_commit", "bbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbb"},
      {"dependency_group", "com.example.widgets"},
      {"dependency_artifact", "widget-core"},
      {"old_version", "1.2.0"},
      {"new_version", "2.0.0"},
      {"build_command", json::array({"/bin/sh", "tools/fakemvn", "test"})},
      {"failure_category", "DIRECT_COMPILATION"},
  }});
  auto manifest_path = area.path() / "manifest.json";
  testsupport::write_file(manifest_path, manifest.dump(2));

  // A canned chat-completion provider on the loopback interface.
  std::string alpha_response =
      testsupport::read_file(testsupport::fixtures_dir() / "responses/alpha_response.txt");
  std::string beta_response =
      testsupport::read_file(testsupport::fixtures_dir() / "responses/beta_response.txt");
  httplib::Server server;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    json request = json::parse(req.body);
    std::string content = request["messages"][0]["content"];
    const std::string& reply =
        content.find("class Alpha") != std::string::npos ? alpha_response : beta_response;
    json body = {
        {"choices", json::array({{{"message", {{"role", "assistant"}, {"content", reply}}}}})},
        {"usage", {{"prompt_tokens", 100}, {"completion_tokens", 80}}},
    };
    res.set_content(body.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  json providers = json::array({{
      {"provider_id", "stub"},
      {"model_name", "stub-model"},
      {"endpoint", "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"},
      {"api_key_env", "DEPFIX_STUB_KEY"},
      {"input_token_limit", 131000},
      {"output_token_limit", 131000},
  }});
  auto providers_path = area.path() / "providers.json";
  testsupport::write_file(providers_path, providers.dump(2));
  setenv("DEPFIX_STUB_KEY", "stub-secret", 1);

  RunConfig record_config;
  record_config.manifest_path = manifest_path;
  record_config.prompts = {PromptId::P8};
  record_config.models = {"stub-model"};
  record_config.mode = CompletionMode::Record;
  record_config.workspace_root = area.path() / "ws";
  record_config.runs_root = area.path() / "runs";
  record_config.cassette_dir = area.path() / "cassettes";
  record_config.providers_path = providers_path;
  record_config.templates_dir = testsupport::templates_dir();
  record_config.apidiff_dir = testsupport::fixtures_dir() / "sample-apidiff";
  record_config.timeout_seconds = 60;
  record_config.run_id = "record";

  RunSummary recorded = run_repair(record_config);
  server.stop();
  server_thread.join();

  bool ok = recorded.results.size() == 1 && recorded.results[0].completed;
  const RepairOutcome& first = recorded.results[0].outcome;
  // The bundled fixture is the stated shape: 2 error files, 5 errors.
  ok = ok && first.initial_error_files.size() == 2;
  std::int64_t initial_total = 0;
  for (const auto& e : first.initial_errors) initial_total += e.occurrences;
  ok = ok && initial_total == 5;
  ok = ok && first.final_outcome == BuildOutcome::Success;
  ok = ok && first.fixed_errors == 5 && first.new_errors == 0 && first.fixed_files == 2;

  // Library-level replay with a transport that throws on touch: zero network.
  {
    ChatClientOptions options;
    options.cassette_dir = record_config.cassette_dir;
    ChatClient replay_client(std::make_unique<FailingTransport>(), options);
    BreakingUpdateCase c = load_manifest(manifest_path)[0];
    RepairContext context;
    context.client = &replay_client;
    context.mode = CompletionMode::Replay;
    context.model.provider_id = "stub";
    context.model.model_name = "stub-model";
    context.templates = load_templates(record_config.templates_dir);
    context.apidiff_dir = record_config.apidiff_dir;
    context.build_timeout_seconds = 60;
    RepairOutcome offline = repair_case(c, PromptId::P8, context, area.path() / "ws-offline");
    ok = ok && offline.final_outcome == BuildOutcome::Success;
  }

  // Three consecutive CLI replay runs produce identical outcome records.
  std::vector<std::string> records;
  for (int i = 1; i <= 3; ++i) {
    std::string run_id = "replay" + std::to_string(i);
    std::string cmd = std::string(DEPFIX_CLI_PATH) + " repair" +
                      " --manifest " + manifest_path.string() +
                      " --prompt P8 --model stub-model --mode replay" +
                      " --workspace " + (area.path() / "ws").string() +
                      " --runs-dir " + (area.path() / "runs").string() +
                      " --cassettes " + record_config.cassette_dir.string() +
                      " --providers " + providers_path.string() +
                      " --templates " + record_config.templates_dir.string() +
                      " --apidiff-dir " + record_config.apidiff_dir.string() +
                      " --timeout-secs 60 --run-id " + run_id +
                      " > " + (area.path() / (run_id + ".log")).string() + " 2>&1";
    int exit_code = std::system(cmd.c_str());
    ok = ok && exit_code == 0;
    auto record_path =
        area.path() / "runs" / run_id / "widgets-sample" / "P8" / "stub-model" / "outcome.json";
    if (std::filesystem::exists(record_path)) {
      records.push_back(testsupport::read_file(record_path));
    }
  }
  ok = ok && records.size() == 3 && records[0] == records[1] && records[1] == records[2];
  if (records.size() == 3) {
    RepairOutcome replayed = outcome_from_json(records[0]);
    ok = ok && replayed.final_outcome == BuildOutcome::Success;
    ok = ok && replayed.files_patched.size() == 2 && replayed.files_skipped.empty();
  }

  ok = ok && seconds_since(start) < 120.0;
  unsetenv("DEPFIX_STUB_KEY");
  report_line(5, "record once, replay 3x hash-equal, SUCCESS, no network, under 2min", ok);
}

TEST_CASE("criterion 6: error diff matches the exhaustive matching brute force") {
  auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(60606);
  const char* files[] = {"A.java", "B.java", "C.java"};
  const char* heads[] = {"cannot find symbol a", "cannot find symbol b", "bad operand"};

  bool ok = true;
  for (int round = 0; round < 200 && ok; ++round) {
    auto random_side = [&](std::vector<std::string>& keys) {
      std::vector<CompilationError> side;
      int n = static_cast<int>(rng() % 11);
      for (int i = 0; i < n; ++i) {
        CompilationError e;
        e.file_path = files[rng() % 3];
        e.message = heads[rng() % 3];
        e.line = 1 + static_cast<int>(rng() % 40);
        e.column = 1;
        side.push_back(e);
        keys.push_back(e.file_path + "|" + e.message);
      }
      return side;
    };
    std::vector<std::string> before_keys, after_keys;
    auto before = random_side(before_keys);
    auto after = random_side(after_keys);

    ErrorDiff diff = diff_errors(before, after);
    std::int64_t matched = testsupport::brute_force_max_matching(before_keys, after_keys);
    ok = ok && diff.unresolved == matched;
    ok = ok && diff.fixed + diff.unresolved == static_cast<std::int64_t>(before.size());
    ok = ok && diff.unresolved + diff.introduced == static_cast<std::int64_t>(after.size());
    ok = ok && diff.fixed >= 0 && diff.introduced >= 0;
  }
  ok = ok && seconds_since(start) < 5.0;
  report_line(6, "200 randomized diffs equal the brute-force matcher, under 5s", ok);
}

TEST_CASE("criterion 7: intersection chunks match the powerset brute force") {
  auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(70707);

  bool ok = true;
  for (int round = 0; round < 100 && ok; ++round) {
    std::map<std::string, std::set<std::string>> sets;
    int k = 2 + static_cast<int>(rng() % 5);
    for (int s = 0; s < k; ++s) {
      auto& ids = sets["label" + std::to_string(s)];
      int size = static_cast<int>(rng() % 21);
      for (int i = 0; i < size; ++i) ids.insert("id" + std::to_string(rng() % 20));
    }
    auto chunks = intersection_report(sets);
    auto oracle = testsupport::brute_force_chunks(sets);
    std::set<std::string> universe;
    for (const auto& [label, ids] : sets) universe.insert(ids.begin(), ids.end());

    std::size_t total = 0;
    for (const auto& chunk : chunks) {
      std::set<std::string> combo(chunk.labels.begin(), chunk.labels.end());
      auto it = oracle.find(combo);
      std::size_t expected = it == oracle.end() ? 0 : it->second;
      ok = ok && chunk.exclusive_count == expected;
      total += chunk.exclusive_count;
    }
    ok = ok && total == universe.size();
  }

  // Families engineered to the reported overlaps: 16 cases fixed by all 8
  // prompts, 8 cases fixed by all 5 models.
  std::map<std::string, std::set<std::string>> prompts;
  for (int p = 1; p <= 8; ++p) {
    auto& ids = prompts["P" + std::to_string(p)];
    for (int i = 0; i < 16; ++i) ids.insert("common" + std::to_string(i));
    for (int i = 0; i < 1 + p % 3; ++i) {
      ids.insert("extra-P" + std::to_string(p) + "-" + std::to_string(i));
    }
  }
  std::size_t all8 = 0;
  for (const auto& chunk : intersection_report(prompts)) {
    if (chunk.labels.size() == 8) all8 = chunk.exclusive_count;
  }
  ok = ok && all8 == 16;

  std::map<std::string, std::set<std::string>> models;
  const char* names[] = {"m1", "m2", "m3", "m4", "m5"};
  for (const char* name : names) {
    auto& ids = models[name];
    for (int i = 0; i < 8; ++i) ids.insert("shared" + std::to_string(i));
  }
  models["m3"].insert("solo");
  std::size_t all5 = 0;
  for (const auto& chunk : intersection_report(models)) {
    if (chunk.labels.size() == 5) all5 = chunk.exclusive_count;
  }
  ok = ok && all5 == 8;

  ok = ok && seconds_since(start) < 5.0;
  report_line(7, "100 random families match the powerset oracle; all-8=16, all-5=8", ok);
}

TEST_CASE("criterion 8: default corpus filter keeps exactly 103 cases") {
  testsupport::TempDir tmp;
  json manifest = json::array();
  auto add_cases = [&](int count, const char* category) {
    for (int i = 0; i < count; ++i) {
      std::string id = std::string(category) + "-" + std::to_string(i);
      manifest.push_back({
          {"case_id", id},
          {"project", "p-" + id},
          {"repo_location", "/checkouts/" + id},
          {"pre_breaking_commit", "aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa"},
          {"breaking_commit", "bbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbb"},
          {"dependency_group", "g"},
          {"dependency_artifact", "a"},
          {"old_version", "1"},
          {"new_version", "2"},
          {"build_command", json::array({"mvn", "test"})},
          {"failure_category", category},
      });
    }
  };
  // The compilation-failure corpus: 243 cases total, of which 78 need a Java
  // version change, 8 are Werror, 54 are classpath conflicts, and 103 remain.
  add_cases(60, "DIRECT_COMPILATION");
  add_cases(43, "INDIRECT_COMPILATION");
  add_cases(78, "JAVA_VERSION_INCOMPATIBILITY");
  add_cases(8, "WERROR");
  add_cases(54, "DEPENDENCY_RESOLUTION_CONFLICT");

  auto path = tmp.path() / "corpus.json";
  testsupport::write_file(path, manifest.dump());

  auto cases = load_manifest(path);
  auto kept = filter_cases(cases, CorpusFilter::defaults());
  bool ok = cases.size() == 243 && kept.size() == 103;
  report_line(8, "243-case manifest filters down to exactly 103", ok);
}

}  // TEST_SUITE
