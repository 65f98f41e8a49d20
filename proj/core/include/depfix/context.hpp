// Failing-class text, erroneous source lines, and construct symbols.
#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "depfix/log_parser.hpp"

namespace depfix {

struct ClassText {
  std::string text;
  bool had_invalid_utf8 = false;  // invalid sequences replaced with U+FFFD
};

struct ErroneousLines {
  // (line number, verbatim source line), strictly ascending, duplicate-free.
  std::vector<std::pair<int, std::string>> lines;
  // Error line numbers past end-of-file, skipped rather than guessed.
  std::vector<int> out_of_range;
};

// Reads the failing file under `workdir`. Exact bytes, decoded as UTF-8 with
// lossy replacement on invalid sequences. Throws FileNotFound.
ClassText read_client_class(const std::filesystem::path& workdir, const std::string& file_path);

// One entry per distinct error line, ascending, lines taken verbatim from
// class_text (the compiler message does not carry the source line itself).
ErroneousLines extract_erroneous_lines(const std::string& class_text,
                                       const std::vector<CompilationError>& errors);

// Mines the identifiers a diagnostic implicates, using an ordered ruleset
// over the javac message taxonomy:
//   1. "no suitable method found for <name>(" -> name
//   2. "cannot find symbol" / "can't find symbol" with
//      "symbol: (class|method|variable) <name>" -> name
//   3. "method <fq>.<name>(...) ... is not applicable" -> name
// An unrecognized message yields the empty set.
std::set<std::string> extract_construct_symbols(const CompilationError& error);

// Same ruleset, plus a fallback when it yields nothing: identifiers that
// appear both on the erroneous source line and in the message.
std::set<std::string> extract_construct_symbols(const CompilationError& error,
                                                const std::string& erroneous_line);

// Verbatim erroneous lines joined for prompt insertion.
std::string format_erroneous_lines(const ErroneousLines& lines);

}  // namespace depfix
