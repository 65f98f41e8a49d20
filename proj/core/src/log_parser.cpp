#include "depfix/log_parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace depfix {
namespace {

constexpr std::string_view kErrorMarker = "[ERROR]";
constexpr std::string_view kInfoMarker = "[INFO]";
constexpr std::string_view kWarningMarker = "[WARNING]";
constexpr std::string_view kDebugMarker = "[DEBUG]";

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) lines.push_back(text.substr(pos));
      break;
    }
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::string normalize_path(std::string_view path, std::string_view workdir_prefix) {
  std::string p(path);
  std::replace(p.begin(), p.end(), '\\', '/');
  if (!workdir_prefix.empty()) {
    std::string prefix(workdir_prefix);
    std::replace(prefix.begin(), prefix.end(), '\\', '/');
    if (!prefix.empty() && prefix.back() != '/') prefix.push_back('/');
    if (starts_with(p, prefix)) p.erase(0, prefix.size());
  }
  return p;
}

// Matches `<path>:[<line>,<col>] <msg>` after the [ERROR] marker. Returns
// nothing if the content is not a compiler diagnostic (e.g. "[ERROR] Failed
// to execute goal ...").
struct Anchor {
  std::string path;
  int line = 1;
  int column = 1;
  std::string first_line;
  bool location_missing = false;
};

std::optional<Anchor> match_anchor(std::string_view content) {
  // The path must look like a source file reference: a ':'-terminated token
  // containing ".java".
  std::size_t colon = std::string_view::npos;
  std::size_t java = content.find(".java");
  while (java != std::string_view::npos) {
    std::size_t c = java + 5;
    if (c < content.size() && content[c] == ':') {
      colon = c;
      break;
    }
    java = content.find(".java", java + 1);
  }
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  std::string_view path = content.substr(0, colon);
  if (path.find(' ') != std::string_view::npos) return std::nullopt;

  Anchor a;
  a.path = std::string(path);
  std::string_view rest = content.substr(colon + 1);
  if (!rest.empty() && rest.front() == '[') {
    std::size_t close = rest.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view box = rest.substr(1, close - 1);
    std::size_t comma = box.find(',');
    try {
      if (comma == std::string_view::npos) {
        a.line = std::stoi(std::string(box));
      } else {
        a.line = std::stoi(std::string(box.substr(0, comma)));
        a.column = std::stoi(std::string(box.substr(comma + 1)));
      }
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (a.line < 1 || a.column < 1) return std::nullopt;
    rest.remove_prefix(close + 1);
    if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  } else {
    a.location_missing = true;
    if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  }
  if (rest.empty()) return std::nullopt;
  a.first_line = std::string(rest);
  return a;
}

}  // namespace

std::string normalize_message_line(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  bool pending_space = false;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string CompilationError::message_head() const {
  // First line, plus the "symbol:" continuation when javac defers the
  // offending name to it; otherwise distinct missing-symbol diagnostics
  // would be indistinguishable.
  std::size_t nl = message.find('\n');
  std::string head = normalize_message_line(
      nl == std::string::npos ? std::string_view(message)
                              : std::string_view(message).substr(0, nl));
  std::size_t pos = nl;
  while (pos != std::string::npos) {
    std::size_t start = pos + 1;
    std::size_t end = message.find('\n', start);
    std::string line = normalize_message_line(
        std::string_view(message).substr(start, end == std::string::npos ? std::string::npos
                                                                         : end - start));
    if (line.rfind("symbol:", 0) == 0) {
      head += " " + line;
      break;
    }
    pos = end;
  }
  return head;
}

std::vector<CompilationError> parse_compilation_errors(std::string_view log_text,
                                                       std::string_view workdir_prefix) {
  std::vector<CompilationError> out;
  CompilationError* open = nullptr;

  auto append_continuation = [&](std::string_view text) {
    if (!open) return;
    open->message.push_back('\n');
    open->message.append(text);
    open->raw_block.push_back('\n');
    open->raw_block.append(text);
  };

  for (std::string_view line : split_lines(log_text)) {
    if (starts_with(line, kInfoMarker) || starts_with(line, kWarningMarker) ||
        starts_with(line, kDebugMarker)) {
      continue;  // invisible to the diagnostic grammar
    }
    if (starts_with(line, kErrorMarker)) {
      std::string_view content = line.substr(kErrorMarker.size());
      if (!content.empty() && content.front() == ' ') content.remove_prefix(1);
      if (auto anchor = match_anchor(content)) {
        CompilationError err;
        err.file_path = normalize_path(anchor->path, workdir_prefix);
        err.line = anchor->line;
        err.column = anchor->column;
        err.location_missing = anchor->location_missing;
        err.message = anchor->first_line;
        err.raw_block = std::string(line);
        out.push_back(std::move(err));
        open = &out.back();
      } else if (!content.empty() &&
                 std::isspace(static_cast<unsigned char>(content.front()))) {
        // Some Maven versions prefix javac continuation lines with [ERROR].
        append_continuation(content);
      } else {
        open = nullptr;  // unrelated [ERROR] line ends the block
      }
      continue;
    }
    // Marker-less line: continuation of the open block, otherwise noise.
    if (open) append_continuation(line);
  }

  // Collapse identical diagnostics, keeping first-appearance order.
  std::vector<CompilationError> dedup;
  for (auto& err : out) {
    auto same = std::find_if(dedup.begin(), dedup.end(), [&](const CompilationError& d) {
      return d.file_path == err.file_path && d.line == err.line && d.column == err.column &&
             d.message_head() == err.message_head();
    });
    if (same != dedup.end()) {
      same->occurrences += 1;
    } else {
      dedup.push_back(std::move(err));
    }
  }
  return dedup;
}

std::vector<ErrorFileGroup> group_by_file(const std::vector<CompilationError>& errors) {
  std::vector<ErrorFileGroup> groups;
  for (const auto& err : errors) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const ErrorFileGroup& g) { return g.file_path == err.file_path; });
    if (it == groups.end()) {
      groups.push_back(ErrorFileGroup{err.file_path, {err}});
    } else {
      it->errors.push_back(err);
    }
  }
  return groups;
}

}  // namespace depfix
