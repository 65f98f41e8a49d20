// Extraction of structured compiler diagnostics from Maven build logs.
//
// The grammar is anchored on the maven-compiler-plugin line shape
//   [ERROR] <path>:[<line>,<col>] <message>
// with indented or marker-less lines treated as message continuations.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace depfix {

struct CompilationError {
  std::string file_path;   // project-relative once a workdir prefix is known
  int line = 1;            // 1-based
  int column = 1;          // 1-based
  std::string message;     // first line plus continuation lines
  std::string raw_block;   // verbatim block, starting at the [ERROR] marker line
  int occurrences = 1;     // identical diagnostics collapsed into one entry
  bool location_missing = false;  // no [line,col] anchor was present

  // Identity used for dedup and before/after matching: location plus the
  // whitespace-normalized first message line.
  std::string message_head() const;
};

struct ErrorFileGroup {
  std::string file_path;
  std::vector<CompilationError> errors;
};

// Normalizes runs of whitespace to single spaces and trims the ends.
std::string normalize_message_line(std::string_view line);

// Parses every compiler diagnostic out of a raw build log. Unparseable logs
// yield an empty list; the caller decides how severe that is. When
// `workdir_prefix` is non-empty it is stripped from file paths so they become
// project-relative. Windows separators are normalized to '/'.
std::vector<CompilationError> parse_compilation_errors(std::string_view log_text,
                                                       std::string_view workdir_prefix = {});

// Groups errors by file in first-appearance order. The groups partition the
// input: disjoint, jointly exhaustive, and order-preserving within each file.
std::vector<ErrorFileGroup> group_by_file(const std::vector<CompilationError>& errors);

}  // namespace depfix
