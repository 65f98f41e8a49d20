#include "depfix/metrics.hpp"

#include <algorithm>

#include "depfix/errors.hpp"

namespace depfix {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

bool in_scope(const RepairOutcome& o, MetricsScope scope) {
  return scope == MetricsScope::AllCases || o.final_outcome != BuildOutcome::Success;
}

double median_lower(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

}  // namespace

int percent_round_half_up(std::int64_t num, std::int64_t den) {
  // floor((200*num + den) / (2*den)) with true floor semantics.
  return static_cast<int>(floor_div(200 * num + den, 2 * den));
}

int Ratio::percent() const { return den == 0 ? 0 : percent_round_half_up(num, den); }

std::string Ratio::pretty() const {
  return std::to_string(num) + "/" + std::to_string(den) + " (" + std::to_string(percent()) +
         "%)";
}

Ratio compute_bsr(const MetricsInput& input) {
  if (input.outcomes.empty()) {
    throw Error(ErrorCode::EmptyInput, "BSR over zero outcomes");
  }
  Ratio r;
  r.den = static_cast<std::int64_t>(input.outcomes.size());
  for (const auto& o : input.outcomes) {
    if (o.final_outcome == BuildOutcome::Success) ++r.num;
  }
  return r;
}

Ratio compute_ffsr(const MetricsInput& input) {
  if (input.outcomes.empty()) {
    throw Error(ErrorCode::EmptyInput, "FFSR over zero outcomes");
  }
  Ratio r;
  for (const auto& o : input.outcomes) {
    if (!in_scope(o, input.scope)) continue;
    r.num += o.fixed_files;
    r.den += static_cast<std::int64_t>(o.initial_error_files.size());
  }
  if (r.den == 0) {
    throw Error(ErrorCode::ZeroDenominator, "no initially erroneous files in scope");
  }
  return r;
}

Ratio compute_cefr(const MetricsInput& input) {
  if (input.outcomes.empty()) {
    throw Error(ErrorCode::EmptyInput, "CEFR over zero outcomes");
  }
  Ratio r;
  for (const auto& o : input.outcomes) {
    if (!in_scope(o, input.scope)) continue;
    r.num += o.fixed_errors;
    std::int64_t initial = 0;
    for (const auto& e : o.initial_errors) initial += e.occurrences;
    r.den += initial;
  }
  if (r.den == 0) {
    throw Error(ErrorCode::ZeroDenominator, "no initial errors in scope");
  }
  return r;
}

RefSummary compute_ref(const MetricsInput& input) {
  if (input.outcomes.empty()) {
    throw Error(ErrorCode::EmptyInput, "REF over zero outcomes");
  }
  RefSummary s;
  for (const auto& o : input.outcomes) {
    std::int64_t initial = 0;
    for (const auto& e : o.initial_errors) initial += e.occurrences;
    s.total_fixed += o.fixed_errors;
    s.total_new += o.new_errors;
    s.total_initial += initial;
    if (initial > 0) {
      s.per_case.push_back(100.0 * static_cast<double>(o.fixed_errors - o.new_errors) /
                           static_cast<double>(initial));
    }
  }
  if (!s.per_case.empty()) s.median_percent = median_lower(s.per_case);
  if (s.total_initial > 0) {
    s.aggregate_percent =
        100.0 * static_cast<double>(s.total_fixed - s.total_new) / s.total_initial;
    s.aggregate_percent_rounded =
        ref_aggregate_percent(s.total_fixed, s.total_new, s.total_initial);
  }
  return s;
}

int ref_aggregate_percent(std::int64_t fixed, std::int64_t introduced, std::int64_t initial) {
  if (initial <= 0) {
    throw Error(ErrorCode::ZeroDenominator, "REF with no initial errors");
  }
  return percent_round_half_up(fixed - introduced, initial);
}

std::vector<IntersectionChunk> intersection_report(
    const std::map<std::string, std::set<std::string>>& fixed_sets) {
  std::vector<std::string> labels;
  labels.reserve(fixed_sets.size());
  for (const auto& [label, ids] : fixed_sets) labels.push_back(label);
  const std::size_t k = labels.size();
  if (k < 2) {
    throw Error(ErrorCode::EmptyInput, "intersection_report needs at least 2 labeled sets");
  }
  if (k > 16) {
    throw Error(ErrorCode::ConfigInvalid, "intersection_report caps out at 16 sets");
  }

  // Which exact combination covers each id in the union.
  std::map<std::string, std::uint64_t> membership;
  for (std::size_t bit = 0; bit < k; ++bit) {
    for (const auto& id : fixed_sets.at(labels[bit])) {
      membership[id] |= (std::uint64_t{1} << bit);
    }
  }
  std::map<std::uint64_t, std::size_t> counts;
  for (const auto& [id, mask] : membership) counts[mask] += 1;

  std::vector<IntersectionChunk> chunks;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
    IntersectionChunk chunk;
    for (std::size_t bit = 0; bit < k; ++bit) {
      if (mask & (std::uint64_t{1} << bit)) chunk.labels.push_back(labels[bit]);
    }
    if (auto it = counts.find(mask); it != counts.end()) chunk.exclusive_count = it->second;
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

}  // namespace depfix
