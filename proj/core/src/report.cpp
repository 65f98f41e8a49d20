#include "depfix/report.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "depfix/errors.hpp"

namespace depfix {
namespace {

using nlohmann::json;

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", value);
  return buf;
}

std::vector<std::string> sorted_prompts(const RunReport& report) {
  std::set<std::string> set;
  for (const auto& cell : report.cells) set.insert(cell.prompt_id);
  return {set.begin(), set.end()};
}

std::vector<std::string> sorted_models(const RunReport& report) {
  std::set<std::string> set;
  for (const auto& cell : report.cells) set.insert(cell.model_name);
  return {set.begin(), set.end()};
}

const ConfigCell* find_cell(const RunReport& report, const std::string& prompt,
                            const std::string& model) {
  for (const auto& cell : report.cells) {
    if (cell.prompt_id == prompt && cell.model_name == model) return &cell;
  }
  return nullptr;
}

std::string grid_csv(const RunReport& report,
                     const std::function<std::string(const ConfigCell&)>& render) {
  std::vector<std::string> prompts = sorted_prompts(report);
  std::vector<std::string> models = sorted_models(report);
  std::ostringstream out;
  out << "prompt";
  for (const auto& m : models) out << "," << csv_escape(m);
  out << "\n";
  for (const auto& p : prompts) {
    out << p;
    for (const auto& m : models) {
      const ConfigCell* cell = find_cell(report, p, m);
      out << "," << (cell ? csv_escape(render(*cell)) : "");
    }
    out << "\n";
  }
  return out.str();
}

json ratio_json(const Ratio& r) {
  return json{{"num", r.num}, {"den", r.den}, {"percent", r.percent()}};
}

}  // namespace

std::vector<RepairOutcome> collect_outcomes(const std::filesystem::path& run_dir) {
  std::vector<RepairOutcome> outcomes;
  if (!std::filesystem::exists(run_dir)) {
    throw Error(ErrorCode::FileNotFound, "run directory " + run_dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(run_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "outcome.json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    outcomes.push_back(outcome_from_json(buffer.str()));
  }
  return outcomes;
}

RunReport build_run_report(const std::vector<RepairOutcome>& outcomes) {
  RunReport report;

  std::map<std::pair<std::string, std::string>, std::vector<RepairOutcome>> by_config;
  for (const auto& o : outcomes) {
    by_config[{o.prompt_id, o.model_name}].push_back(o);
  }

  for (const auto& [key, config_outcomes] : by_config) {
    ConfigCell cell;
    cell.prompt_id = key.first;
    cell.model_name = key.second;
    cell.cases = config_outcomes.size();

    MetricsInput all{config_outcomes, MetricsScope::AllCases};
    MetricsInput failed{config_outcomes, MetricsScope::FailedCasesOnly};
    cell.bsr = compute_bsr(all);
    try {
      cell.ffsr = compute_ffsr(failed);
      cell.cefr = compute_cefr(failed);
    } catch (const Error&) {
      // every case repaired: the over-failed-cases rates have no denominator
    }
    cell.ref = compute_ref(all);

    std::vector<RepairOutcome> failed_only;
    for (const auto& o : config_outcomes) {
      if (o.final_outcome != BuildOutcome::Success) failed_only.push_back(o);
    }
    if (!failed_only.empty()) {
      cell.ref_median_failed_only =
          compute_ref(MetricsInput{failed_only, MetricsScope::AllCases}).median_percent;
    }
    report.cells.push_back(std::move(cell));
  }

  // Corpus statistics from the initial parse of each distinct case.
  std::map<std::string, CaseErrorStats> per_case;
  for (const auto& o : outcomes) {
    if (per_case.count(o.case_id)) continue;
    CaseErrorStats stats;
    stats.case_id = o.case_id;
    stats.files_with_errors = o.initial_error_files.size();
    std::size_t errors = 0;
    for (const auto& e : o.initial_errors) errors += static_cast<std::size_t>(e.occurrences);
    stats.error_count = errors;
    per_case[o.case_id] = stats;
  }
  if (!per_case.empty()) {
    std::vector<CaseErrorStats> stats;
    stats.reserve(per_case.size());
    for (const auto& [id, s] : per_case) stats.push_back(s);
    report.corpus = corpus_stats(stats);
  }

  // Fixed-case intersections: prompts compared per model, models per prompt.
  std::map<std::string, std::map<std::string, std::set<std::string>>> prompts_by_model;
  std::map<std::string, std::map<std::string, std::set<std::string>>> models_by_prompt;
  for (const auto& o : outcomes) {
    if (o.final_outcome != BuildOutcome::Success) continue;
    prompts_by_model[o.model_name][o.prompt_id].insert(o.case_id);
    models_by_prompt[o.prompt_id][o.model_name].insert(o.case_id);
  }
  for (const auto& [model, sets] : prompts_by_model) {
    if (sets.size() < 2) continue;
    report.intersections.push_back({"prompts-for-model:" + model, intersection_report(sets)});
  }
  for (const auto& [prompt, sets] : models_by_prompt) {
    if (sets.size() < 2) continue;
    report.intersections.push_back({"models-for-prompt:" + prompt, intersection_report(sets)});
  }
  return report;
}

std::string report_to_json(const RunReport& report) {
  json j;
  j["configurations"] = json::array();
  for (const auto& cell : report.cells) {
    json c;
    c["prompt_id"] = cell.prompt_id;
    c["model_name"] = cell.model_name;
    c["cases"] = cell.cases;
    c["bsr"] = ratio_json(cell.bsr);
    if (cell.ffsr) c["ffsr"] = ratio_json(*cell.ffsr);
    if (cell.cefr) c["cefr"] = ratio_json(*cell.cefr);
    c["ref"] = {
        {"per_case_percent", cell.ref.per_case},
        {"median_percent", cell.ref.median_percent},
        {"aggregate_percent", cell.ref.aggregate_percent},
        {"aggregate_percent_rounded", cell.ref.aggregate_percent_rounded},
        {"total_fixed", cell.ref.total_fixed},
        {"total_new", cell.ref.total_new},
        {"total_initial", cell.ref.total_initial},
    };
    if (cell.ref_median_failed_only) {
      c["ref"]["median_percent_failed_cases_only"] = *cell.ref_median_failed_only;
    }
    j["configurations"].push_back(std::move(c));
  }
  if (report.corpus) {
    json histo_files = json::object(), histo_errors = json::object();
    for (const auto& [k, v] : report.corpus->files_histogram) histo_files[std::to_string(k)] = v;
    for (const auto& [k, v] : report.corpus->errors_histogram) histo_errors[std::to_string(k)] = v;
    j["corpus"] = {
        {"median_files_with_errors", report.corpus->median_files_with_errors},
        {"median_errors", report.corpus->median_errors},
        {"files_histogram", histo_files},
        {"errors_histogram", histo_errors},
    };
  }
  j["intersections"] = json::array();
  for (const auto& table : report.intersections) {
    json t;
    t["dimension"] = table.dimension;
    t["chunks"] = json::array();
    for (const auto& chunk : table.chunks) {
      if (chunk.exclusive_count == 0) continue;
      t["chunks"].push_back({{"labels", chunk.labels}, {"count", chunk.exclusive_count}});
    }
    j["intersections"].push_back(std::move(t));
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const RunReport& report, const std::string& metric) {
  return grid_csv(report, [&metric](const ConfigCell& cell) -> std::string {
    if (metric == "bsr") return cell.bsr.pretty();
    if (metric == "ffsr") return cell.ffsr ? cell.ffsr->pretty() : "n/a";
    if (metric == "cefr") return cell.cefr ? cell.cefr->pretty() : "n/a";
    throw Error(ErrorCode::ConfigInvalid, "unknown metric '" + metric + "'");
  });
}

std::string ref_to_csv(const RunReport& report) {
  return grid_csv(report, [](const ConfigCell& cell) {
    return format_percent(cell.ref.median_percent) + " / " +
           std::to_string(cell.ref.aggregate_percent_rounded) + "%";
  });
}

std::string intersections_to_csv(const RunReport& report) {
  std::ostringstream out;
  out << "dimension,labels,exclusive_count\n";
  for (const auto& table : report.intersections) {
    for (const auto& chunk : table.chunks) {
      if (chunk.exclusive_count == 0) continue;
      std::string labels;
      for (std::size_t i = 0; i < chunk.labels.size(); ++i) {
        if (i) labels += "+";
        labels += chunk.labels[i];
      }
      out << csv_escape(table.dimension) << "," << csv_escape(labels) << ","
          << chunk.exclusive_count << "\n";
    }
  }
  return out.str();
}

std::string report_to_markdown(const RunReport& report) {
  std::ostringstream out;
  std::vector<std::string> prompts = sorted_prompts(report);
  std::vector<std::string> models = sorted_models(report);

  auto table = [&](const std::string& title,
                   const std::function<std::string(const ConfigCell&)>& render) {
    out << "## " << title << "\n\n| prompt |";
    for (const auto& m : models) out << " " << m << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < models.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& p : prompts) {
      out << "| " << p << " |";
      for (const auto& m : models) {
        const ConfigCell* cell = find_cell(report, p, m);
        out << " " << (cell ? render(*cell) : "") << " |";
      }
      out << "\n";
    }
    out << "\n";
  };

  table("Build success rate", [](const ConfigCell& c) { return c.bsr.pretty(); });
  table("File fix success rate (failed cases)",
        [](const ConfigCell& c) { return c.ffsr ? c.ffsr->pretty() : std::string("n/a"); });
  table("Compilation error fix rate (failed cases)",
        [](const ConfigCell& c) { return c.cefr ? c.cefr->pretty() : "n/a"; });
  table("Relative errors fixed (median / aggregate)", [](const ConfigCell& c) {
    return format_percent(c.ref.median_percent) + " / " +
           std::to_string(c.ref.aggregate_percent_rounded) + "%";
  });

  if (report.corpus) {
    out << "## Corpus\n\nmedian files with errors: " << report.corpus->median_files_with_errors
        << ", median errors: " << report.corpus->median_errors << "\n";
  }
  return out.str();
}

std::string errors_to_json(const std::vector<CompilationError>& errors) {
  json j = json::array();
  for (const auto& e : errors) {
    j.push_back({{"file", e.file_path},
                 {"line", e.line},
                 {"column", e.column},
                 {"message", e.message},
                 {"occurrences", e.occurrences},
                 {"location_missing", e.location_missing}});
  }
  return j.dump(2) + "\n";
}

}  // namespace depfix
