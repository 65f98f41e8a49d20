#include "depfix/context.hpp"

#include <cctype>
#include <set>
#include <vector>

#include <doctest.h>

#include "depfix/errors.hpp"
#include "support/fixtures.hpp"

using namespace depfix;

namespace {

CompilationError error_at(const std::string& file, int line, const std::string& message) {
  CompilationError e;
  e.file_path = file;
  e.line = line;
  e.column = 1;
  e.message = message;
  return e;
}

std::set<std::string> identifier_set(const std::string& text) {
  std::set<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.insert(current);
    current.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace

TEST_SUITE("context") {

TEST_CASE("read_client_class returns exact file text") {
  testsupport::TempDir tmp;
  std::string body =
      "public class FOPPDFTransformer {\n"
      "    FopFactory fopFactory = FopFactory.newInstance();\n"
      "}\n";
  testsupport::write_file(tmp.path() / "src/FOPPDFTransformer.java", body);

  ClassText text = read_client_class(tmp.path(), "src/FOPPDFTransformer.java");
  CHECK(text.text == body);
  CHECK_FALSE(text.had_invalid_utf8);

  testsupport::write_file(tmp.path() / "src/Empty.java", "");
  CHECK(read_client_class(tmp.path(), "src/Empty.java").text.empty());

  try {
    read_client_class(tmp.path(), "src/Missing.java");
    FAIL("expected FileNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FileNotFound);
  }
}

TEST_CASE("invalid byte sequences are replaced and flagged") {
  testsupport::TempDir tmp;
  std::string body = "class A { // caf\xE9 }\n";  // latin-1 byte, invalid UTF-8
  testsupport::write_file(tmp.path() / "A.java", body);
  ClassText text = read_client_class(tmp.path(), "A.java");
  CHECK(text.had_invalid_utf8);
  CHECK(text.text.find("\xEF\xBF\xBD") != std::string::npos);
}

TEST_CASE("erroneous lines come back verbatim, ascending, deduplicated") {
  std::string source;
  for (int i = 1; i <= 15; ++i) source += "line " + std::to_string(i) + ";\n";

  SUBCASE("single error line") {
    auto out = extract_erroneous_lines(source, {error_at("A.java", 2, "boom")});
    REQUIRE(out.lines.size() == 1);
    CHECK(out.lines[0].first == 2);
    CHECK(out.lines[0].second == "line 2;");
  }

  SUBCASE("duplicates collapse to one entry") {
    auto out = extract_erroneous_lines(
        source, {error_at("A.java", 7, "x"), error_at("A.java", 7, "y")});
    REQUIRE(out.lines.size() == 1);
    CHECK(out.lines[0].first == 7);
  }

  SUBCASE("line set {3,7,7,12} yields entries 3, 7, 12") {
    auto out = extract_erroneous_lines(
        source, {error_at("A.java", 7, "a"), error_at("A.java", 3, "b"),
                 error_at("A.java", 12, "c"), error_at("A.java", 7, "d")});
    REQUIRE(out.lines.size() == 3);
    CHECK(out.lines[0].first == 3);
    CHECK(out.lines[1].first == 7);
    CHECK(out.lines[2].first == 12);
    for (std::size_t i = 1; i < out.lines.size(); ++i) {
      CHECK(out.lines[i - 1].first < out.lines[i].first);
    }
  }

  SUBCASE("out-of-range lines are skipped and flagged") {
    auto out = extract_erroneous_lines(
        source, {error_at("A.java", 4, "ok"), error_at("A.java", 99, "past eof")});
    REQUIRE(out.lines.size() == 1);
    CHECK(out.lines[0].first == 4);
    REQUIRE(out.out_of_range.size() == 1);
    CHECK(out.out_of_range[0] == 99);
  }
}

TEST_CASE("a deep error line is fetched verbatim from a large class") {
  std::string source;
  for (int i = 1; i <= 140; ++i) {
    if (i == 115) {
      source += "        FopFactory fopFactory = FopFactory.newInstance();\n";
    } else {
      source += "        // filler line " + std::to_string(i) + "\n";
    }
  }
  auto out = extract_erroneous_lines(
      source, {error_at("FOPPDFTransformer.java", 115,
                        "no suitable method found for newInstance(no arguments)")});
  REQUIRE(out.lines.size() == 1);
  CHECK(out.lines[0].first == 115);
  CHECK(out.lines[0].second == "        FopFactory fopFactory = FopFactory.newInstance();");
}

TEST_CASE("construct symbols from the javac message taxonomy") {
  CompilationError no_suitable = error_at(
      "F.java", 115, "no suitable method found for newInstance(no arguments)");
  CHECK(extract_construct_symbols(no_suitable) == std::set<std::string>{"newInstance"});

  CompilationError cant_find =
      error_at("F.java", 9, "can't find symbol\n  symbol: class Plugin");
  CHECK(extract_construct_symbols(cant_find) == std::set<std::string>{"Plugin"});

  CompilationError padded = error_at(
      "F.java", 12, "cannot find symbol\n  symbol:   method setRetries(int)\n  location: x");
  CHECK(extract_construct_symbols(padded) == std::set<std::string>{"setRetries"});

  CompilationError not_applicable = error_at(
      "F.java", 5,
      "method org.apache.fop.apps.FopFactory.newInstance(java.io.File) is not applicable");
  CHECK(extract_construct_symbols(not_applicable) == std::set<std::string>{"newInstance"});

  CompilationError unrecognized = error_at("F.java", 1, "';' expected");
  CHECK(extract_construct_symbols(unrecognized).empty());
}

TEST_CASE("line fallback keeps identifiers shared with the message") {
  CompilationError e = error_at("F.java", 3, "incompatible types: Widget cannot be converted");
  std::string line = "Widget widget = factory.make();";
  auto symbols = extract_construct_symbols(e, line);
  CHECK(symbols.count("Widget"));
  CHECK_FALSE(symbols.count("factory"));
  CHECK_FALSE(symbols.count("make"));
}

TEST_CASE("symbols are always tokens of the message or the erroneous line") {
  std::vector<std::string> messages = {
      "no suitable method found for alpha(int)",
      "cannot find symbol\n  symbol:   variable beta",
      "method a.b.C.gamma(x) is not applicable",
      "arbitrary text with delta and epsilon",
  };
  std::string line = "delta(epsilon, zeta);";
  for (const auto& message : messages) {
    CompilationError e = error_at("F.java", 1, message);
    auto symbols = extract_construct_symbols(e, line);
    auto allowed = identifier_set(message + " " + line);
    for (const auto& s : symbols) {
      CHECK_MESSAGE(allowed.count(s), "unexpected symbol ", s, " for message: ", message);
    }
  }
}

TEST_CASE("format_erroneous_lines joins verbatim lines") {
  ErroneousLines lines;
  lines.lines = {{3, "  int a = 1;"}, {9, "\tclient.run();"}};
  CHECK(format_erroneous_lines(lines) == "  int a = 1;\n\tclient.run();");
  CHECK(format_erroneous_lines({}).empty());
}

}  // TEST_SUITE
