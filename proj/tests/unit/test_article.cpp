#include <doctest.h>

#include <random>

#include "mmlhub/article.hpp"
#include "mmlhub/error.hpp"
#include "mmlhub/io.hpp"
#include "mmlhub/platform.hpp"
#include "mmlhub/text.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mmlhub;

namespace {
Article parse(const char* name, std::string_view src) { return parse_article(ArticleName::parse(name), src); }
}  // namespace

TEST_CASE("article names follow the identifier grammar") {
  CHECK(ArticleName::parse("XBOOLE_0").value() == "XBOOLE_0");
  CHECK_FALSE(ArticleName::parse("TARSKI").exceeds_legacy_length());
  CHECK(ArticleName::parse("VERYLONGNAME").exceeds_legacy_length());
  for (const char* bad : {"", "0ABC", "abc", "A-B", "_A", "A B"}) {
    CHECK_FALSE(is_valid_article_name(bad));
    CHECK_THROWS_AS(ArticleName::parse(bad), Error);
  }
}

TEST_CASE("single-line theorem") {
  auto a = parse("T1", "environ theorems TARSKI;\nbegin\ntheorem Th1: contradiction;\n");
  REQUIRE(a.env.entries.size() == 1);
  CHECK(a.env.entries[0].kind == DirectiveKind::Theorems);
  REQUIRE(a.env.entries[0].names.size() == 1);
  CHECK(a.env.entries[0].names[0].value() == "TARSKI");
  REQUIRE(a.items.size() == 1);
  CHECK(a.items[0].anchor == "T1:theorem:1");
  CHECK(a.items[0].label == "Th1");
  CHECK(a.items[0].span == LineSpan{3, 3});
  CHECK(a.items[0].statement_text == "contradiction");
}

TEST_CASE("empty article") {
  auto a = parse("T2", "environ\nbegin\n");
  CHECK(a.env.entries.empty());
  CHECK(a.items.empty());
}

TEST_CASE("statement text stops before the proof and the span covers it") {
  const char* src =
      "environ\nbegin\n"
      "theorem Th1: for x being set holds\n"
      "  x = x\n"
      "proof\n"
      "  let x be set;\n"
      "  now\n"
      "    thus x = x;\n"
      "  end;\n"
      "  thus thesis;\n"
      "end;\n"
      "theorem X = X;\n";
  auto a = parse("T3", src);
  REQUIRE(a.items.size() == 2);
  CHECK(a.items[0].span == LineSpan{3, 11});
  CHECK(a.items[0].statement_text == "for x being set holds x = x");
  CHECK(a.items[1].label.empty());
  CHECK(a.items[1].statement_text == "X = X");
  CHECK(a.items[1].anchor == "T3:theorem:2");
}

TEST_CASE("comment lines never open items and comments are stripped from statements") {
  const char* src =
      "environ\nbegin\n"
      ":: theorem Fake: not an item;\n"
      "  :: definition neither\n"
      "theorem Th1: x in X :: trailing remark\n"
      "  implies X <> {};\n";
  auto a = parse("C", src);
  REQUIRE(a.items.size() == 1);
  CHECK(a.items[0].span == LineSpan{5, 6});
  CHECK(a.items[0].statement_text == "x in X implies X <> {}");
}

TEST_CASE("ordinals are per kind and contiguous") {
  const char* src =
      "environ\nbegin\n"
      "definition let X be set; func f X -> set equals X; end;\n"
      "theorem A: X = X;\n"
      "scheme S { P[set] }: P[{}] proof thus thesis; end;\n"
      "definition let X be set; func g X -> set equals X; end;\n"
      "theorem B: Y = Y;\n";
  auto a = parse("ORD", src);
  std::vector<std::string> anchors;
  for (const auto& i : a.items) anchors.push_back(i.anchor);
  CHECK(anchors == std::vector<std::string>{"ORD:definition:1", "ORD:theorem:1", "ORD:scheme:1",
                                            "ORD:definition:2", "ORD:theorem:2"});
  CHECK(a.items[2].label == "S");
}

TEST_CASE("malformed environments and unterminated blocks carry line numbers") {
  auto expect = [](std::string_view src, ErrorCode code, std::size_t line) {
    try {
      parse("BAD", src);
      FAIL("no error for: " << src);
    } catch (const ParseError& e) {
      CHECK(e.code() == code);
      CHECK(e.line() == line);
    }
  };
  expect("begin\ntheorem X = X;\n", ErrorCode::MalformedEnvironment, 1);
  // missing `begin` is reported at the last line of the input
  expect("environ\ntheorems TARSKI;\n", ErrorCode::MalformedEnvironment, 3);
  expect("environ\ntheorems TARSKI\nbegin\n", ErrorCode::MalformedEnvironment, 2);
  expect("environ\nbegin\ndefinition\n  let X be set;\n", ErrorCode::UnterminatedBlock, 3);
  expect("environ\nbegin\ntheorem X = X\nproof\n  thus thesis;\n", ErrorCode::UnterminatedBlock, 3);
}

TEST_CASE("directives may span lines and keep duplicates") {
  auto a = parse("D", "environ\n vocabularies TARSKI,\n   XBOOLE_0, TARSKI;\n theorems A1;\nbegin\n");
  REQUIRE(a.env.entries.size() == 2);
  CHECK(a.env.entries[0].names.size() == 3);
  CHECK(a.env.entries[0].names[2].value() == "TARSKI");
  CHECK(a.env.entries[0].line == 2);
}

TEST_CASE("long article names warn instead of failing") {
  auto a = parse("LONGNAME9", "environ\n theorems ANOTHERLONG;\nbegin\n");
  CHECK(a.warnings.size() == 2);
}

TEST_CASE("symbol extraction") {
  const char* src =
      "environ\nbegin\n"
      "definition\n"
      "  let X, Y be set;\n"
      "  pred X misses Y means\n"
      "  X /\\ Y = {};\n"
      "  attr X is empty means\n"
      "  X = {};\n"
      "end;\n"
      "definition\n"
      "  let A be set;\n"
      "  func union A -> set means\n"
      "  x in it;\n"
      "end;\n"
      "theorem T: X = X;\n";
  auto a = parse("SYM", src);
  REQUIRE(a.symbols.size() == 3);
  CHECK(a.symbols[0].symbol == "misses");
  CHECK(a.symbols[0].anchor == "SYM:definition:1");
  CHECK(a.symbols[1].symbol == "empty");
  CHECK(a.symbols[2].symbol == "union");
  CHECK(a.symbols[2].anchor == "SYM:definition:2");

  CHECK(extract_symbols(parse("N", "environ\nbegin\ntheorem X = X;\n")).empty());
}

TEST_CASE("rendering links corpus articles, carries anchors and places comments") {
  auto a = parse("T1", "environ theorems TARSKI, OTHER;\nbegin\ntheorem Th1: contradiction;\n");
  auto html = render_article(a, {"TARSKI", "T1"}, {});
  CHECK(html.find("<a class=\"article-ref\" href=\"/articles/TARSKI\">TARSKI</a>") != std::string::npos);
  CHECK(html.find("href=\"/articles/OTHER\"") == std::string::npos);
  CHECK(html.find("id=\"T1:theorem:1\"") != std::string::npos);
  CHECK(html.find("class=\"annotation\"") == std::string::npos);

  auto with = render_article(a, {"TARSKI"}, {{"T1:theorem:1", "$x \\in y$"}});
  auto note = with.find("<div class=\"annotation\" data-anchor=\"T1:theorem:1\">$x \\in y$</div>");
  REQUIRE(note != std::string::npos);
  CHECK(note < with.find("id=\"T1:theorem:1\""));

  CHECK_THROWS_AS(render_article(a, {}, {{"T1:theorem:2", "x"}}), Error);
}

TEST_CASE("round trip and determinism on every fixture") {
  for (const auto& dir : {"corpus_v1", "corpus_add", "corpus_del", "tiny3"}) {
    for (const auto& entry : std::filesystem::directory_iterator(testing::fixture(dir))) {
      auto src = read_file(entry.path());
      auto stem = entry.path().stem().string();
      for (auto& c : stem) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      auto a = parse_article(ArticleName::parse(stem), src);
      CHECK(join_lines(a.lines) == src);
      auto b = parse_article(ArticleName::parse(stem), src);
      CHECK(a.items.size() == b.items.size());
      for (std::size_t i = 0; i < a.items.size() && i < b.items.size(); ++i) {
        CHECK(a.items[i].anchor == b.items[i].anchor);
        CHECK(a.items[i].statement_text == b.items[i].statement_text);
        CHECK(a.items[i].span == b.items[i].span);
      }
    }
  }
}

TEST_CASE("property: item counts, spans and anchors on generated articles") {
  std::mt19937_64 rng(20240601);
  for (int round = 0; round < 200; ++round) {
    auto g = oracle::random_article(rng);
    auto a = parse_article(ArticleName::parse("GEN"), g.source);
    CHECK(join_lines(a.lines) == g.source);
    REQUIRE(a.items.size() == oracle::count_items(g.source));
    CHECK(a.items.size() == g.theorems + g.definitions + g.schemes);
    std::set<std::string> anchors;
    std::size_t prev_last = 0;
    for (const auto& item : a.items) {
      CHECK(anchors.insert(item.anchor).second);
      CHECK(item.span.first <= item.span.last);
      CHECK(item.span.last <= a.lines.size());
      CHECK(item.span.first > prev_last);
      prev_last = item.span.last;
      CHECK(item.statement_text.find("proof") == std::string::npos);
    }
  }
}

TEST_CASE("corpus directory parsing") {
  auto articles = parse_corpus_dir(testing::fixture("tiny3"));
  REQUIRE(articles.size() == 3);
  CHECK(articles[0].name.value() == "ALPHA");
  CHECK(articles[2].name.value() == "GAMMA");
  CHECK_THROWS_AS(parse_corpus_dir(testing::fixture("missing")), Error);
}
