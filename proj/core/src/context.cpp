#include "depfix/context.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "depfix/errors.hpp"

namespace depfix {
namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::vector<std::string> identifier_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_ident_start(text[i])) {
      std::size_t j = i + 1;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      tokens.push_back(text.substr(i, j - i));
      i = j;
    } else {
      ++i;
    }
  }
  return tokens;
}

// Reads the identifier that starts at `pos`, skipping leading whitespace.
std::string identifier_at(const std::string& text, std::size_t pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size() || !is_ident_start(text[pos])) return {};
  std::size_t end = pos + 1;
  while (end < text.size() && is_ident_char(text[end])) ++end;
  return text.substr(pos, end - pos);
}

// Validates byte `i` as the start of a UTF-8 sequence; returns its length or
// 0 when invalid.
std::size_t utf8_sequence_length(const std::string& bytes, std::size_t i) {
  unsigned char c = static_cast<unsigned char>(bytes[i]);
  std::size_t len = 0;
  if (c < 0x80) return 1;
  if ((c & 0xE0) == 0xC0) len = 2;
  else if ((c & 0xF0) == 0xE0) len = 3;
  else if ((c & 0xF8) == 0xF0) len = 4;
  else return 0;
  if (i + len > bytes.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(bytes[i + k]) & 0xC0) != 0x80) return 0;
  }
  return len;
}

std::vector<std::string> split_source_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

void mine_message(const std::string& message, std::set<std::string>& symbols) {
  // Rule 1: no suitable method found for <name>(
  static const std::string kNoSuitable = "no suitable method found for ";
  for (std::size_t pos = message.find(kNoSuitable); pos != std::string::npos;
       pos = message.find(kNoSuitable, pos + 1)) {
    std::string name = identifier_at(message, pos + kNoSuitable.size());
    if (!name.empty()) symbols.insert(name);
  }

  // Rule 2: cannot/can't find symbol + symbol: (class|method|variable) <name>
  if (message.find("cannot find symbol") != std::string::npos ||
      message.find("can't find symbol") != std::string::npos) {
    static const std::string kSymbol = "symbol:";
    for (std::size_t pos = message.find(kSymbol); pos != std::string::npos;
         pos = message.find(kSymbol, pos + 1)) {
      std::size_t after = pos + kSymbol.size();
      std::string kind = identifier_at(message, after);
      if (kind != "class" && kind != "method" && kind != "variable") continue;
      std::size_t kind_pos = message.find(kind, after);
      std::string name = identifier_at(message, kind_pos + kind.size());
      if (!name.empty()) symbols.insert(name);
    }
  }

  // Rule 3: method <fq>.<name>(...) ... is not applicable
  if (message.find("is not applicable") != std::string::npos) {
    static const std::string kMethod = "method ";
    for (std::size_t pos = message.find(kMethod); pos != std::string::npos;
         pos = message.find(kMethod, pos + 1)) {
      std::size_t start = pos + kMethod.size();
      std::size_t paren = message.find('(', start);
      if (paren == std::string::npos) continue;
      std::string qualified = message.substr(start, paren - start);
      if (qualified.empty() ||
          qualified.find_first_of(" \t\n") != std::string::npos) {
        continue;
      }
      std::size_t dot = qualified.rfind('.');
      std::string name = dot == std::string::npos ? qualified : qualified.substr(dot + 1);
      if (!name.empty() && is_ident_start(name[0]) &&
          std::all_of(name.begin(), name.end(), is_ident_char)) {
        symbols.insert(name);
      }
    }
  }
}

}  // namespace

ClassText read_client_class(const std::filesystem::path& workdir, const std::string& file_path) {
  std::filesystem::path full =
      std::filesystem::path(file_path).is_absolute() ? std::filesystem::path(file_path)
                                                     : workdir / file_path;
  std::ifstream in(full, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, full.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string bytes = buffer.str();

  ClassText result;
  result.text.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    std::size_t len = utf8_sequence_length(bytes, i);
    if (len == 0) {
      result.text.append("\xEF\xBF\xBD");  // U+FFFD
      result.had_invalid_utf8 = true;
      ++i;
    } else {
      result.text.append(bytes, i, len);
      i += len;
    }
  }
  return result;
}

ErroneousLines extract_erroneous_lines(const std::string& class_text,
                                       const std::vector<CompilationError>& errors) {
  std::vector<std::string> source = split_source_lines(class_text);

  std::set<int> wanted;
  for (const auto& err : errors) wanted.insert(err.line);

  ErroneousLines out;
  for (int line : wanted) {
    if (line < 1 || static_cast<std::size_t>(line) > source.size()) {
      out.out_of_range.push_back(line);
    } else {
      out.lines.emplace_back(line, source[static_cast<std::size_t>(line) - 1]);
    }
  }
  return out;
}

std::set<std::string> extract_construct_symbols(const CompilationError& error) {
  std::set<std::string> symbols;
  mine_message(error.message, symbols);
  return symbols;
}

std::set<std::string> extract_construct_symbols(const CompilationError& error,
                                                const std::string& erroneous_line) {
  std::set<std::string> symbols = extract_construct_symbols(error);
  if (!symbols.empty()) return symbols;

  // Fallback: identifiers shared between the erroneous line and the message.
  std::vector<std::string> line_tokens = identifier_tokens(erroneous_line);
  std::vector<std::string> message_tokens = identifier_tokens(error.message);
  std::set<std::string> in_message(message_tokens.begin(), message_tokens.end());
  for (const auto& token : line_tokens) {
    if (in_message.count(token)) symbols.insert(token);
  }
  return symbols;
}

std::string format_erroneous_lines(const ErroneousLines& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.lines.size(); ++i) {
    if (i) out.push_back('\n');
    out.append(lines.lines[i].second);
  }
  return out;
}

}  // namespace depfix
