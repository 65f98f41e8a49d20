#include <benchmark/benchmark.h>

#include <string>

#include "depfix/log_parser.hpp"

namespace {

std::string make_log(int files, int errors_per_file) {
  std::string log;
  log.reserve(static_cast<std::size_t>(files) * errors_per_file * 160);
  for (int f = 0; f < files; ++f) {
    log += "[INFO] compiling module " + std::to_string(f) + "\n";
    for (int e = 0; e < errors_per_file; ++e) {
      log += "[ERROR] /ws/src/main/java/com/example/File" + std::to_string(f) + ".java:[" +
             std::to_string(10 + e) + ",17] cannot find symbol\n  symbol:   method m" +
             std::to_string(e) + "()\n  location: class com.example.Dep\n";
    }
  }
  log += "[INFO] BUILD FAILURE\n";
  return log;
}

void BM_ParseCompilationErrors(benchmark::State& state) {
  std::string log = make_log(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) {
    auto errors = depfix::parse_compilation_errors(log, "/ws");
    benchmark::DoNotOptimize(errors);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(log.size()));
}
BENCHMARK(BM_ParseCompilationErrors)->Arg(4)->Arg(32)->Arg(128);

void BM_GroupByFile(benchmark::State& state) {
  auto errors = depfix::parse_compilation_errors(make_log(static_cast<int>(state.range(0)), 8));
  for (auto _ : state) {
    auto groups = depfix::group_by_file(errors);
    benchmark::DoNotOptimize(groups);
  }
}
BENCHMARK(BM_GroupByFile)->Arg(4)->Arg(32);

}  // namespace
