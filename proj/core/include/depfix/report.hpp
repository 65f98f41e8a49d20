// Aggregation of run outcomes into the per-configuration metric tables and
// intersection summaries, with JSON / CSV / markdown emission.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depfix/manifest.hpp"
#include "depfix/metrics.hpp"
#include "depfix/repair.hpp"

namespace depfix {

struct ConfigCell {
  std::string prompt_id;
  std::string model_name;
  std::size_t cases = 0;
  Ratio bsr;
  std::optional<Ratio> ffsr;  // absent when no failed case left files in scope
  std::optional<Ratio> cefr;
  RefSummary ref;                  // over all cases
  std::optional<double> ref_median_failed_only;  // labeled variant
};

struct IntersectionTable {
  std::string dimension;  // "prompts-for-model:<m>" or "models-for-prompt:<p>"
  std::vector<IntersectionChunk> chunks;
};

struct RunReport {
  std::vector<ConfigCell> cells;   // one per (prompt, model) present
  std::optional<CorpusStats> corpus;
  std::vector<IntersectionTable> intersections;
};

// Reads every outcome.json under a run directory (read-only).
std::vector<RepairOutcome> collect_outcomes(const std::filesystem::path& run_dir);

RunReport build_run_report(const std::vector<RepairOutcome>& outcomes);

// Machine-readable report with every numerator and denominator.
std::string report_to_json(const RunReport& report);

// Table shaped like the per-configuration results: rows P1..P8, model
// columns, cells "num/den (pct%)". `metric` is one of bsr, ffsr, cefr.
std::string report_to_csv(const RunReport& report, const std::string& metric);

// REF table: cells hold "median% / aggregate%".
std::string ref_to_csv(const RunReport& report);

std::string intersections_to_csv(const RunReport& report);

std::string report_to_markdown(const RunReport& report);

// Structured error list for the parse-log subcommand.
std::string errors_to_json(const std::vector<CompilationError>& errors);

}  // namespace depfix
