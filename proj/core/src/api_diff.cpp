#include "depfix/api_diff.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "depfix/build_runner.hpp"
#include "depfix/errors.hpp"
#include "depfix/manifest.hpp"

namespace depfix {
namespace {

struct KindName {
  const char* phrase;
  ApiChangeKind kind;
};

constexpr KindName kKindNames[] = {
    {"REMOVED METHOD", ApiChangeKind::RemovedMethod},
    {"NEW METHOD", ApiChangeKind::NewMethod},
    {"MODIFIED METHOD", ApiChangeKind::ModifiedMethod},
    {"REMOVED CLASS", ApiChangeKind::RemovedClass},
    {"NEW CLASS", ApiChangeKind::NewClass},
    {"REMOVED FIELD", ApiChangeKind::RemovedField},
    {"NEW FIELD", ApiChangeKind::NewField},
    {"NEW EXCEPTION", ApiChangeKind::NewException},
    {"REMOVED EXCEPTION", ApiChangeKind::RemovedException},
};

bool kind_is_new(ApiChangeKind k) {
  return k == ApiChangeKind::NewMethod || k == ApiChangeKind::NewClass ||
         k == ApiChangeKind::NewField || k == ApiChangeKind::NewException;
}

bool kind_is_removed(ApiChangeKind k) {
  return k == ApiChangeKind::RemovedMethod || k == ApiChangeKind::RemovedClass ||
         k == ApiChangeKind::RemovedField || k == ApiChangeKind::RemovedException;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) tokens.push_back(std::string(s.substr(i, j - i)));
    i = j;
  }
  return tokens;
}

// Splits a parameter list on top-level commas, respecting <> nesting.
std::vector<std::string> split_params(std::string_view params) {
  std::vector<std::string> out;
  int angle = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    char c = params[i];
    if (c == '<') ++angle;
    else if (c == '>') --angle;
    else if (c == ',' && angle == 0) {
      std::string p = trim(params.substr(start, i - start));
      if (!p.empty()) out.push_back(std::move(p));
      start = i + 1;
    }
  }
  std::string last = trim(params.substr(start));
  if (!last.empty()) out.push_back(std::move(last));
  return out;
}

// Modifier tokens look like PUBLIC(+), STATIC(-), FINAL(+), or bare keywords.
// Anything else (including all-caps type names) is part of the declaration.
bool consume_modifier(const std::string& token, ApiChange& change) {
  std::string word = token;
  if (std::size_t paren = word.find('('); paren != std::string::npos) {
    std::string suffix = word.substr(paren);
    if (suffix != "(+)" && suffix != "(-)" && suffix != "(~)") return false;
    word = word.substr(0, paren);
  }
  static const std::set<std::string> kKeywords = {
      "PUBLIC", "PROTECTED", "PRIVATE", "PACKAGE", "PACKAGE_PROTECTED", "PACKAGE_PRIVATE",
      "STATIC", "NON_STATIC", "FINAL", "ABSTRACT", "SYNCHRONIZED", "NATIVE", "SYNTHETIC",
      "BRIDGE",
  };
  if (!kKeywords.count(word)) return false;
  if (word == "PUBLIC") change.visibility = ApiVisibility::Public;
  else if (word == "PROTECTED") change.visibility = ApiVisibility::Protected;
  else if (word == "PRIVATE") change.visibility = ApiVisibility::Private;
  else if (word == "PACKAGE" || word == "PACKAGE_PROTECTED" || word == "PACKAGE_PRIVATE")
    change.visibility = ApiVisibility::Package;
  else if (word == "STATIC") change.is_static = true;
  else if (word == "NON_STATIC") change.is_static = false;
  // FINAL, ABSTRACT, SYNTHETIC, ... carry no field of their own.
  return true;
}

// Splits "a.b.C.name" into declaring type and simple name.
void split_qualified(const std::string& qualified, ApiChange& change) {
  std::size_t dot = qualified.rfind('.');
  if (dot == std::string::npos) {
    change.member_name = qualified;
  } else {
    change.declaring_type = qualified.substr(0, dot);
    change.member_name = qualified.substr(dot + 1);
  }
}

void parse_declaration(const std::string& decl, ApiChange& change) {
  // Leading modifier tokens first, so their (+)/(-) parens cannot be taken
  // for the parameter list.
  std::vector<std::string> all = split_whitespace(decl);
  std::size_t idx = 0;
  while (idx < all.size() && consume_modifier(all[idx], change)) ++idx;
  std::vector<std::string> tokens(all.begin() + static_cast<std::ptrdiff_t>(idx), all.end());
  if (tokens.empty()) return;

  std::string rest = tokens[0];
  for (std::size_t i = 1; i < tokens.size(); ++i) rest += " " + tokens[i];

  std::size_t paren = rest.find('(');
  if (paren != std::string::npos && change.is_method_kind()) {
    std::size_t close = rest.rfind(')');
    std::string params =
        close != std::string::npos && close > paren ? rest.substr(paren + 1, close - paren - 1)
                                                    : rest.substr(paren + 1);
    change.signature = split_params(params);

    std::vector<std::string> head = split_whitespace(rest.substr(0, paren));
    if (head.empty()) return;
    split_qualified(head.back(), change);
    if (head.size() > 1) {
      std::string ret = head[0];
      for (std::size_t i = 1; i + 1 < head.size(); ++i) ret += " " + head[i];
      change.return_type = ret;
    }
    return;
  }

  switch (change.kind) {
    case ApiChangeKind::NewException:
    case ApiChangeKind::RemovedException:
    case ApiChangeKind::NewClass:
    case ApiChangeKind::RemovedClass:
      change.declaring_type = tokens.back();
      break;
    case ApiChangeKind::NewField:
    case ApiChangeKind::RemovedField:
      split_qualified(tokens.back(), change);
      if (tokens.size() > 1) change.return_type = tokens[0];
      break;
    default:
      change.declaring_type = trim(decl);
      break;
  }
}

// Indent width in columns; a tab counts as four.
std::size_t indent_width(std::string_view line, std::size_t* content_start) {
  std::size_t width = 0, i = 0;
  for (; i < line.size(); ++i) {
    if (line[i] == '\t') width += 4;
    else if (line[i] == ' ') width += 1;
    else break;
  }
  *content_start = i;
  return width;
}

bool strip_marker(std::string_view& content) {
  for (std::string_view marker : {"---!", "+++!", "***!", "---", "+++", "***"}) {
    if (content.substr(0, marker.size()) == marker) {
      content.remove_prefix(marker.size());
      while (!content.empty() && content.front() == ' ') content.remove_prefix(1);
      return true;
    }
  }
  return false;
}

std::string method_subject(const ApiChange& c) {
  std::string subject = c.declaring_type.empty() ? c.member_name
                                                 : c.declaring_type + "." + c.member_name;
  subject.push_back('(');
  for (std::size_t i = 0; i < c.signature.size(); ++i) {
    if (i) subject.append(", ");
    subject.append(c.signature[i]);
  }
  subject.push_back(')');
  return subject;
}

void render_bullets(const std::vector<ApiChange>& changes, std::vector<std::string>& bullets) {
  for (const auto& c : changes) {
    if (!c.is_exception_kind()) {
      std::string line = "- ";
      switch (c.kind) {
        case ApiChangeKind::RemovedMethod:
        case ApiChangeKind::NewMethod:
        case ApiChangeKind::ModifiedMethod:
          line += "Method " + method_subject(c);
          break;
        case ApiChangeKind::RemovedClass:
        case ApiChangeKind::NewClass:
          line += "Class " + c.declaring_type;
          break;
        case ApiChangeKind::RemovedField:
        case ApiChangeKind::NewField:
          line += "Field " + (c.declaring_type.empty()
                                  ? c.member_name
                                  : c.declaring_type + "." + c.member_name);
          break;
        default:
          bullets.push_back("- " + trim(c.declaring_type.empty() ? c.raw_line : c.declaring_type));
          render_bullets(c.children, bullets);
          continue;
      }
      if (kind_is_removed(c.kind)) {
        line += " has been removed in the new version of the dependency.";
      } else if (kind_is_new(c.kind)) {
        line += " has been added in the new version of the dependency.";
      } else {
        line += " has been modified in the new version of the dependency.";
      }
      bullets.push_back(std::move(line));
    }
    render_bullets(c.children, bullets);
  }
}

void render_raw_lines(const std::vector<ApiChange>& changes, std::vector<std::string>& lines) {
  for (const auto& c : changes) {
    if (!c.raw_line.empty()) {
      lines.push_back(c.raw_line);
    }
    render_raw_lines(c.children, lines);
  }
}

bool self_match(const ApiChange& c, const std::set<std::string>& symbols) {
  if (!c.member_name.empty() && symbols.count(c.member_name)) return true;
  std::string simple = c.declaring_simple_name();
  return !simple.empty() && symbols.count(simple) != 0;
}

bool subtree_match(const ApiChange& c, const std::set<std::string>& symbols) {
  if (self_match(c, symbols)) return true;
  return std::any_of(c.children.begin(), c.children.end(),
                     [&](const ApiChange& child) { return subtree_match(child, symbols); });
}

// Applies the keep rules to one sibling level. When an ancestor is kept the
// whole subtree travels with it; a kept node whose parent was dropped is
// hoisted to this level.
std::vector<ApiChange> filter_level(const std::vector<ApiChange>& siblings,
                                    const std::set<std::string>& symbols) {
  std::vector<ApiChange> out;
  for (const auto& c : siblings) {
    bool kept = self_match(c, symbols);
    if (!kept && kind_is_new(c.kind) && !c.member_name.empty()) {
      kept = std::any_of(siblings.begin(), siblings.end(), [&](const ApiChange& sib) {
        return kind_is_removed(sib.kind) && sib.member_name == c.member_name &&
               self_match(sib, symbols);
      });
    }
    if (kept) {
      out.push_back(c);
    } else {
      for (auto& hoisted : filter_level(c.children, symbols)) out.push_back(std::move(hoisted));
    }
  }
  return out;
}

void count_relevance(const std::vector<ApiChange>& changes, const std::set<std::string>& symbols,
                     std::vector<bool>& relevant) {
  relevant.resize(changes.size());
  for (std::size_t i = 0; i < changes.size(); ++i) {
    relevant[i] = subtree_match(changes[i], symbols);
  }
}

std::string render_unit(const ApiChange& change, DiffRenderMode mode) {
  std::vector<std::string> lines;
  std::vector<ApiChange> one = {change};
  if (mode == DiffRenderMode::Sentences) {
    render_bullets(one, lines);
  } else {
    render_raw_lines(one, lines);
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out.append(lines[i]);
  }
  return out;
}

}  // namespace

std::string ApiChange::declaring_simple_name() const {
  std::size_t dot = declaring_type.rfind('.');
  return dot == std::string::npos ? declaring_type : declaring_type.substr(dot + 1);
}

std::string obtain_diff(const std::filesystem::path& precomputed_file) {
  std::ifstream in(precomputed_file, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, precomputed_file.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string diff_cache_name(const BreakingUpdateCase& c) {
  return c.dependency_group + "__" + c.dependency_artifact + "__" + c.old_version + "__" +
         c.new_version + ".txt";
}

std::string obtain_diff(const BreakingUpdateCase& c, const DifferSource& differ,
                        const std::filesystem::path& cache_dir) {
  std::filesystem::create_directories(cache_dir);
  std::filesystem::path cache_file = cache_dir / diff_cache_name(c);
  if (std::filesystem::exists(cache_file)) {
    return obtain_diff(cache_file);
  }

  if (!std::filesystem::exists(differ.old_jar)) {
    throw Error(ErrorCode::FileNotFound, differ.old_jar.string());
  }
  if (!std::filesystem::exists(differ.new_jar)) {
    throw Error(ErrorCode::FileNotFound, differ.new_jar.string());
  }

  std::string command = differ.command_template;
  auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos)) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all(command, "{old_jar}", differ.old_jar.string());
  replace_all(command, "{new_jar}", differ.new_jar.string());

  BuildReport report = run_build(cache_dir, split_whitespace(command), 600);
  if (report.exit_status != 0) {
    throw Error(ErrorCode::DifferFailed, "differ exited with " +
                                             std::to_string(report.exit_status) + "\n" +
                                             report.log_text);
  }

  std::filesystem::path tmp = cache_file;
  tmp += ".tmp";
  std::ofstream out(tmp, std::ios::binary);
  out << report.log_text;
  out.close();
  std::filesystem::rename(tmp, cache_file);
  return report.log_text;
}

std::vector<ApiChange> parse_diff(const std::string& raw_text) {
  std::vector<ApiChange> roots;
  // (indent width, pointer to the open change at that depth)
  std::vector<std::pair<std::size_t, ApiChange*>> stack;

  std::istringstream in(raw_text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t content_start = 0;
    std::size_t width = indent_width(line, &content_start);
    std::string_view content = std::string_view(line).substr(content_start);
    if (content.empty()) continue;

    ApiChange change;
    change.raw_line = line;
    std::string_view body = content;
    if (strip_marker(body)) {
      std::size_t colon = body.find(':');
      std::string phrase = colon == std::string_view::npos ? "" : trim(body.substr(0, colon));
      auto named = std::find_if(std::begin(kKindNames), std::end(kKindNames),
                                [&](const KindName& k) { return phrase == k.phrase; });
      if (named != std::end(kKindNames)) {
        change.kind = named->kind;
        parse_declaration(trim(body.substr(colon + 1)), change);
      } else {
        change.declaring_type = std::string(content);
      }
    } else {
      change.declaring_type = std::string(content);
    }

    while (!stack.empty() && stack.back().first >= width) stack.pop_back();
    if (stack.empty()) {
      roots.push_back(std::move(change));
      stack.emplace_back(width, &roots.back());
    } else {
      auto& parent_children = stack.back().second->children;
      parent_children.push_back(std::move(change));
      stack.emplace_back(width, &parent_children.back());
    }
  }
  return roots;
}

std::vector<ApiChange> filter_relevant(const std::vector<ApiChange>& changes,
                                       const std::set<std::string>& symbols) {
  if (symbols.empty()) return changes;
  return filter_level(changes, symbols);
}

std::string render_for_prompt(const std::vector<ApiChange>& changes) {
  std::vector<std::string> bullets;
  render_bullets(changes, bullets);
  std::string out;
  for (std::size_t i = 0; i < bullets.size(); ++i) {
    if (i) out.push_back('\n');
    out.append(bullets[i]);
  }
  return out;
}

std::string render_raw_excerpt(const std::vector<ApiChange>& changes) {
  std::vector<std::string> lines;
  render_raw_lines(changes, lines);
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out.append(lines[i]);
  }
  return out;
}

ApiDiffExcerpt build_excerpt(const std::vector<ApiChange>& changes,
                             const std::set<std::string>& symbols,
                             const ApiDiffOptions& options) {
  std::vector<ApiChange> filtered = filter_relevant(changes, symbols);
  // Candidates in priority order: relevant changes first, so a cap drops the
  // unrelated tail rather than the interesting head.
  std::vector<ApiChange> candidates;
  if (options.use_filtered &&
      (!filtered.empty() || !options.fallback_to_full_when_filter_empty)) {
    candidates = std::move(filtered);
  } else {
    std::vector<bool> relevant;
    count_relevance(changes, symbols, relevant);
    for (std::size_t i = 0; i < changes.size(); ++i) {
      if (relevant[i]) candidates.push_back(changes[i]);
    }
    for (std::size_t i = 0; i < changes.size(); ++i) {
      if (!relevant[i]) candidates.push_back(changes[i]);
    }
  }

  ApiDiffExcerpt excerpt;
  for (auto& change : candidates) {
    std::string unit = render_unit(change, options.render_mode);
    std::size_t extra = unit.size() + (excerpt.rendered_text.empty() ? 0 : 1);
    if (excerpt.rendered_text.size() + extra > options.char_cap) {
      excerpt.truncated = true;
      break;
    }
    if (!excerpt.rendered_text.empty()) excerpt.rendered_text.push_back('\n');
    excerpt.rendered_text.append(unit);
    excerpt.changes.push_back(std::move(change));
  }
  if (excerpt.truncated) {
    if (!excerpt.rendered_text.empty()) excerpt.rendered_text.push_back('\n');
    excerpt.rendered_text.append("(diff truncated)");
  }
  return excerpt;
}

}  // namespace depfix
