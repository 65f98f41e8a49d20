#include "depfix/build_runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include "depfix/errors.hpp"
#include "depfix/log_parser.hpp"

extern char** environ;

namespace depfix {
namespace {

// Environment variables passed through to build subprocesses.
constexpr const char* kEnvAllowlist[] = {
    "PATH", "HOME", "USER", "SHELL", "LANG", "LC_ALL", "TMPDIR",
    "JAVA_HOME", "M2_HOME", "MAVEN_OPTS", "MAVEN_ARGS", "JDK_JAVA_OPTIONS",
};

class BuildSlots {
 public:
  void set_limit(unsigned count) {
    std::lock_guard<std::mutex> lock(mutex_);
    limit_ = count;
    cv_.notify_all();
  }

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [this] { return limit_ == 0 || in_use_ < limit_; });
    ++in_use_;
  }

  void release() {
    std::lock_guard<std::mutex> lock(mutex_);
    --in_use_;
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  unsigned limit_ = 0;  // 0 = unbounded
  unsigned in_use_ = 0;
};

BuildSlots& build_slots() {
  static BuildSlots slots;
  return slots;
}

struct SlotGuard {
  SlotGuard() { build_slots().acquire(); }
  ~SlotGuard() { build_slots().release(); }
};

std::vector<std::string> build_environment() {
  std::vector<std::string> env;
  for (const char* name : kEnvAllowlist) {
    if (const char* value = ::getenv(name)) {
      env.push_back(std::string(name) + "=" + value);
    }
  }
  env.push_back("CI=true");
  return env;
}

// Surefire/failsafe summary line: Tests run: N, Failures: F, ...
bool has_test_failures(const std::string& log) {
  if (log.find("There are test failures") != std::string::npos) return true;
  static const std::string kSummary = "Tests run:";
  for (std::size_t pos = log.find(kSummary); pos != std::string::npos;
       pos = log.find(kSummary, pos + 1)) {
    std::size_t failures = log.find("Failures:", pos);
    if (failures == std::string::npos) continue;
    std::size_t eol = log.find('\n', pos);
    if (eol != std::string::npos && failures > eol) continue;
    const char* p = log.c_str() + failures + 9;
    while (*p == ' ') ++p;
    if (std::isdigit(static_cast<unsigned char>(*p)) && std::atoi(p) > 0) return true;
  }
  return false;
}

}  // namespace

const char* to_string(BuildOutcome outcome) {
  switch (outcome) {
    case BuildOutcome::Success: return "SUCCESS";
    case BuildOutcome::CompilationFailure: return "COMPILATION_FAILURE";
    case BuildOutcome::TestFailure: return "TEST_FAILURE";
    case BuildOutcome::OtherFailure: return "OTHER_FAILURE";
  }
  return "OTHER_FAILURE";
}

void set_max_parallel_builds(unsigned count) { build_slots().set_limit(count); }

BuildReport run_build(const std::filesystem::path& workdir,
                      const std::vector<std::string>& command, int timeout_seconds) {
  if (command.empty()) {
    throw Error(ErrorCode::SpawnFailure, "empty command vector");
  }
  SlotGuard slot;

  int out_pipe[2];
  int err_pipe[2];  // exec-failure reporting, CLOEXEC
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    throw Error(ErrorCode::SpawnFailure, std::strerror(errno));
  }
  fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

  std::vector<std::string> env = build_environment();
  std::vector<char*> argv, envp;
  for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);
  for (const auto& var : env) envp.push_back(const_cast<char*>(var.c_str()));
  envp.push_back(nullptr);

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    throw Error(ErrorCode::SpawnFailure, std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);  // own process group, so a timeout can kill the whole tree
    if (chdir(workdir.c_str()) != 0) _exit(127);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(out_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    execvpe(argv[0], argv.data(), envp.data());
    int err = errno;
    ssize_t ignored = write(err_pipe[1], &err, sizeof(err));
    (void)ignored;
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);

  BuildReport report;
  report.workdir = workdir;

  auto deadline = start + std::chrono::seconds(timeout_seconds);
  bool timed_out = false;
  char buffer[8192];
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    struct pollfd pfd = {out_pipe[0], POLLIN, 0};
    int ready = poll(&pfd, 1, std::min(wait_ms, 1000));
    if (ready < 0 && errno != EINTR) break;
    if (ready > 0) {
      ssize_t n = read(out_pipe[0], buffer, sizeof(buffer));
      if (n > 0) {
        report.log_text.append(buffer, static_cast<std::size_t>(n));
      } else {
        break;  // writer closed
      }
    }
  }

  if (timed_out) {
    kill(-pid, SIGKILL);
    // Drain whatever the process managed to write before the kill.
    ssize_t n;
    while ((n = read(out_pipe[0], buffer, sizeof(buffer))) > 0) {
      report.log_text.append(buffer, static_cast<std::size_t>(n));
    }
  }
  close(out_pipe[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  report.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  report.timed_out = timed_out;

  int exec_errno = 0;
  if (read(err_pipe[0], &exec_errno, sizeof(exec_errno)) == sizeof(exec_errno)) {
    close(err_pipe[0]);
    throw Error(ErrorCode::SpawnFailure,
                command[0] + ": " + std::strerror(exec_errno));
  }
  close(err_pipe[0]);

  if (timed_out) {
    throw Error(ErrorCode::BuildTimeout,
                "build exceeded " + std::to_string(timeout_seconds) + "s in " +
                    workdir.string() + "\n--- partial log ---\n" + report.log_text);
  }
  return report;
}

BuildOutcome classify_outcome(const BuildReport& report) {
  if (report.exit_status == 0 && report.log_text.find("BUILD SUCCESS") != std::string::npos) {
    return BuildOutcome::Success;
  }
  if (!parse_compilation_errors(report.log_text).empty()) {
    return BuildOutcome::CompilationFailure;
  }
  if (has_test_failures(report.log_text)) {
    return BuildOutcome::TestFailure;
  }
  return BuildOutcome::OtherFailure;
}

}  // namespace depfix
