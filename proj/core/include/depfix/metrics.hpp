// Build/file/error-level evaluation metrics over repair outcomes, plus the
// exclusive set-intersection summaries.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "depfix/repair.hpp"

namespace depfix {

enum class MetricsScope { AllCases, FailedCasesOnly };

// One (prompt, model) configuration's outcomes.
struct MetricsInput {
  std::vector<RepairOutcome> outcomes;
  MetricsScope scope = MetricsScope::FailedCasesOnly;
};

struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 0;

  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / den; }
  // Integer percent, rounded half up (matching the reported tables).
  int percent() const;
  // "num/den (pct%)"
  std::string pretty() const;
};

// Integer percent of num/den (den > 0), rounded half up. Exact integer
// arithmetic, no floating point.
int percent_round_half_up(std::int64_t num, std::int64_t den);

struct RefSummary {
  std::vector<double> per_case;    // (fixed - new) / initial, per outcome
  double median_percent = 0.0;     // lower-middle element for even counts
  double aggregate_percent = 0.0;  // (sum fixed - sum new) / sum initial, as percent
  int aggregate_percent_rounded = 0;
  std::int64_t total_fixed = 0;
  std::int64_t total_new = 0;
  std::int64_t total_initial = 0;
};

// Build Success Rate: fully repaired builds over initially failing builds.
// Always computed over all outcomes. Throws EmptyInput.
Ratio compute_bsr(const MetricsInput& input);

// File Fix Success Rate: fixed error-files over initial error-files, by
// default over still-failing repairs. Throws EmptyInput / ZeroDenominator.
Ratio compute_ffsr(const MetricsInput& input);

// Compilation Error Fix Rate: fixed errors over initial errors, same scoping
// rules as compute_ffsr.
Ratio compute_cefr(const MetricsInput& input);

// Relative Error Fixed ratio: (fixed - newly introduced) / initial. At most
// 100%, unbounded below. Median uses the lower-middle element.
RefSummary compute_ref(const MetricsInput& input);

// Aggregate REF from raw totals, as an exactly rounded integer percent.
int ref_aggregate_percent(std::int64_t fixed, std::int64_t introduced, std::int64_t initial);

struct IntersectionChunk {
  std::vector<std::string> labels;  // the exact combination
  std::size_t exclusive_count = 0;  // ids fixed by exactly this combination
};

// For every nonempty label combination, the number of ids covered by exactly
// that combination. Exclusive counts sum to |union of all sets|.
std::vector<IntersectionChunk> intersection_report(
    const std::map<std::string, std::set<std::string>>& fixed_sets);

}  // namespace depfix
