#include "depfix/prompt.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <vector>

#include "depfix/errors.hpp"

namespace depfix {
namespace {

constexpr const char* kClientCode = "<client_code>";
constexpr const char* kErrorMessage = "<error_message>";
constexpr const char* kErroneousLine = "<erroneous_line>";
constexpr const char* kApiDiff = "<api_diff>";

std::string read_asset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, "prompt template: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

std::vector<std::string> split_blank_separated(const std::string& text) {
  std::vector<std::string> sections;
  std::string current;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.empty()) {
        sections.push_back(std::move(current));
        current.clear();
      }
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
  }
  if (!current.empty()) sections.push_back(std::move(current));
  return sections;
}

void substitute(std::string& section, const std::string& placeholder, const std::string& value) {
  std::size_t pos = section.find(placeholder);
  if (pos != std::string::npos) {
    section.replace(pos, placeholder.size(), value);
  }
}

bool contains_placeholder(const std::string& text) {
  for (const char* token : {kClientCode, kErrorMessage, kErroneousLine, kApiDiff}) {
    if (text.find(token) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

const char* to_string(PromptId id) {
  static constexpr std::array<const char*, 8> names = {"P1", "P2", "P3", "P4",
                                                       "P5", "P6", "P7", "P8"};
  return names[static_cast<std::size_t>(id)];
}

PromptId prompt_id_from_string(const std::string& name) {
  for (int i = 0; i < 8; ++i) {
    PromptId id = static_cast<PromptId>(i);
    if (name == to_string(id)) return id;
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown prompt id '" + name + "' (expected P1..P8)");
}

PromptTemplates load_templates(const std::filesystem::path& dir) {
  PromptTemplates t;
  std::vector<std::string> base = split_blank_separated(read_asset(dir / "base.txt"));
  if (base.size() != 4) {
    throw Error(ErrorCode::ConfigInvalid,
                "base.txt must hold exactly 4 blank-line-separated sections, found " +
                    std::to_string(base.size()));
  }
  t.preamble = base[0];
  t.code_section = base[1];
  t.error_section = base[2];
  t.constraints = base[3];
  t.erroneous_line_section = read_asset(dir / "erroneous_line.txt");
  t.api_diff_section = read_asset(dir / "apidiff.txt");
  t.cot_section = read_asset(dir / "cot.txt");

  if (t.code_section.find(kClientCode) == std::string::npos ||
      t.error_section.find(kErrorMessage) == std::string::npos ||
      t.erroneous_line_section.find(kErroneousLine) == std::string::npos ||
      t.api_diff_section.find(kApiDiff) == std::string::npos) {
    throw Error(ErrorCode::ConfigInvalid, "template is missing its placeholder token");
  }
  return t;
}

PromptConfig config_for(PromptId id) {
  PromptConfig c;
  c.id = id;
  switch (id) {
    case PromptId::P1: break;
    case PromptId::P2: c.include_erroneous_line = true; break;
    case PromptId::P3: c.include_api_diff = true; break;
    case PromptId::P4: c.include_erroneous_line = true; c.include_api_diff = true; break;
    case PromptId::P5: c.use_cot = true; break;
    case PromptId::P6: c.use_cot = true; c.include_erroneous_line = true; break;
    case PromptId::P7: c.use_cot = true; c.include_api_diff = true; break;
    case PromptId::P8:
      c.use_cot = true;
      c.include_erroneous_line = true;
      c.include_api_diff = true;
      break;
  }
  return c;
}

PromptText build_prompt(const PromptConfig& config, const std::string& class_text,
                        const std::string& error_messages,
                        const std::string& erroneous_lines_text,
                        const std::string& api_diff_text, const PromptTemplates& templates) {
  if (class_text.empty()) {
    throw Error(ErrorCode::MissingSectionInput, "client code payload is empty");
  }
  if (error_messages.empty()) {
    throw Error(ErrorCode::MissingSectionInput, "error message payload is empty");
  }
  if (config.include_erroneous_line && erroneous_lines_text.empty()) {
    throw Error(ErrorCode::MissingSectionInput, "erroneous-line section enabled with no payload");
  }
  if (config.include_api_diff && api_diff_text.empty()) {
    throw Error(ErrorCode::MissingSectionInput, "APIDiff section enabled with no payload");
  }

  std::string code = templates.code_section;
  substitute(code, kClientCode, class_text);
  std::string error = templates.error_section;
  substitute(error, kErrorMessage, error_messages);
  std::string line = templates.erroneous_line_section;
  substitute(line, kErroneousLine, erroneous_lines_text);
  std::string diff = templates.api_diff_section;
  substitute(diff, kApiDiff, api_diff_text);

  std::vector<const std::string*> sections;
  sections.push_back(&templates.preamble);
  sections.push_back(&code);
  if (config.use_cot && config.include_erroneous_line) sections.push_back(&line);
  sections.push_back(&error);
  if (!config.use_cot && config.include_erroneous_line) sections.push_back(&line);
  if (config.include_api_diff) sections.push_back(&diff);
  if (config.use_cot) sections.push_back(&templates.cot_section);
  sections.push_back(&templates.constraints);

  PromptText out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i) out.message.append("\n\n");
    out.message.append(*sections[i]);
  }
  out.message.push_back('\n');
  out.placeholders_resolved = !contains_placeholder(out.message);
  return out;
}

}  // namespace depfix
