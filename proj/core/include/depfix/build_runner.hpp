// Runs a case's build command in an isolated working directory, captures the
// interleaved output streams, and classifies the outcome from the log.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace depfix {

struct BuildReport {
  int exit_status = -1;
  std::string log_text;  // stdout and stderr interleaved in arrival order
  double duration_seconds = 0.0;
  std::filesystem::path workdir;
  bool timed_out = false;
};

enum class BuildOutcome { Success, CompilationFailure, TestFailure, OtherFailure };

const char* to_string(BuildOutcome outcome);

// Caps the number of concurrently running builds, process-wide. The default
// is unbounded; the CLI wires --max-parallel-builds through here.
void set_max_parallel_builds(unsigned count);

// Executes `command` with cwd = workdir, the environment reduced to an
// allowlist plus CI=true, and both output streams captured in arrival order.
// A nonzero exit is data, not an error. Throws SpawnFailure when the command
// cannot be executed and BuildTimeout (with the partial log attached) when
// the process exceeds `timeout_seconds`.
BuildReport run_build(const std::filesystem::path& workdir,
                      const std::vector<std::string>& command, int timeout_seconds = 1800);

// Pure function of the report:
//   Success            exit 0 and the "BUILD SUCCESS" marker
//   CompilationFailure at least one parseable compiler diagnostic
//   TestFailure        no diagnostics, test-failure marker present
//   OtherFailure       everything else
BuildOutcome classify_outcome(const BuildReport& report);

}  // namespace depfix
