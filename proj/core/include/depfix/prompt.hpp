// Renders the eight studied prompt configurations byte-exactly from external
// template assets.
#pragma once

#include <filesystem>
#include <string>

namespace depfix {

enum class PromptId { P1, P2, P3, P4, P5, P6, P7, P8 };

const char* to_string(PromptId id);
PromptId prompt_id_from_string(const std::string& name);  // "P1".."P8"

struct PromptConfig {
  PromptId id = PromptId::P1;
  bool include_erroneous_line = false;
  bool include_api_diff = false;
  bool use_cot = false;
};

struct PromptText {
  std::string message;  // the whole prompt, sent as a single user message
  bool placeholders_resolved = false;
};

// Template text loaded from the asset directory
// (templates/{base,erroneous_line,apidiff,cot}.txt). base.txt holds four
// blank-line-separated sections: preamble, fenced client code, error message,
// and the constraints list.
struct PromptTemplates {
  std::string preamble;
  std::string code_section;        // contains <client_code>
  std::string error_section;       // contains <error_message>
  std::string constraints;
  std::string erroneous_line_section;  // contains <erroneous_line>
  std::string api_diff_section;        // contains <api_diff>
  std::string cot_section;
};

PromptTemplates load_templates(const std::filesystem::path& dir);

// Flag triple for each configuration:
//   P1 ---  P2 line  P3 diff  P4 line+diff
//   P5 cot  P6 cot+line  P7 cot+diff  P8 cot+line+diff
PromptConfig config_for(PromptId id);

// Assembles the prompt. Section order is preamble, client code, error
// message, then the optional blocks, with the constraints always last. CoT
// configurations place the erroneous-line block directly after the client
// code; the others place it after the error message. Throws
// MissingSectionInput when an enabled section has an empty payload.
PromptText build_prompt(const PromptConfig& config, const std::string& class_text,
                        const std::string& error_messages,
                        const std::string& erroneous_lines_text,
                        const std::string& api_diff_text, const PromptTemplates& templates);

}  // namespace depfix
