#include <doctest.h>

#include <random>

#include "kbp/turtle.hpp"
#include "test_support.hpp"

using namespace kbp;

TEST_CASE("parse minimal document") {
  auto result = parse("@prefix sm: <http://example.org/space-mission#> . sm:M1 a sm:Mission .");
  REQUIRE(result.ok());
  CHECK(result.graph.size() == 1);
  Triple expected{Iri{"http://example.org/space-mission#M1"}, Iri{rdf::type},
                  Iri{"http://example.org/space-mission#Mission"}};
  CHECK(result.graph.contains(expected));
}

TEST_CASE("parse reports undeclared prefix with location") {
  auto result = parse("sm:M1 a sm:Mission .");
  REQUIRE_FALSE(result.ok());
  CHECK(result.errors.front().line == 1);
  CHECK(result.errors.front().message.find("undeclared prefix 'sm'") != std::string::npos);
}

TEST_CASE("empty document is an empty graph") {
  auto result = parse("");
  REQUIRE(result.ok());
  CHECK(result.graph.empty());
}

TEST_CASE("parse handles literals, langs, datatypes and numbers") {
  auto result = parse(R"(@prefix sm: <http://example.org/space-mission#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
sm:M1 sm:missionName "Aqua"@en ;
      sm:launchDate "2002-05-04T00:00:00"^^xsd:dateTime ;
      sm:weight 42 ;
      sm:ratio 1.5 ;
      sm:active true .)");
  REQUIRE(result.ok());
  CHECK(result.graph.size() == 5);
  const std::string ns = "http://example.org/space-mission#";
  CHECK(result.graph.contains({Iri{ns + "M1"}, Iri{ns + "missionName"},
                               Literal{"Aqua", xsd::string_type, "en"}}));
  CHECK(result.graph.contains({Iri{ns + "M1"}, Iri{ns + "launchDate"},
                               Literal{"2002-05-04T00:00:00", xsd::dateTime}}));
  CHECK(result.graph.contains({Iri{ns + "M1"}, Iri{ns + "weight"}, Literal{"42", xsd::integer}}));
  CHECK(result.graph.contains({Iri{ns + "M1"}, Iri{ns + "ratio"}, Literal{"1.5", xsd::decimal}}));
  CHECK(result.graph.contains({Iri{ns + "M1"}, Iri{ns + "active"}, Literal{"true", xsd::boolean}}));
}

TEST_CASE("parse rejects the excluded constructs") {
  CHECK_FALSE(parse("@base <http://example.org/> .").ok());
  CHECK_FALSE(parse("@prefix sm: <http://x.org/> . sm:a sm:b [ sm:c sm:d ] .").ok());
  CHECK_FALSE(parse("@prefix sm: <http://x.org/> . sm:a sm:b ( sm:c ) .").ok());
  CHECK_FALSE(parse("<relative> <p> <o> .").ok());
}

TEST_CASE("parse recovers and reports multiple errors") {
  auto result = parse(
      "@prefix sm: <http://x.org/> .\n"
      "zz:M1 a sm:Mission .\n"
      "sm:M2 a sm:Mission .\n"
      "yy:M3 a sm:Mission .\n");
  REQUIRE_FALSE(result.ok());
  CHECK(result.errors.size() == 2);
  CHECK(result.graph.contains(
      {Iri{"http://x.org/M2"}, Iri{rdf::type}, Iri{"http://x.org/Mission"}}));
}

TEST_CASE("duplicate triples collapse under set semantics") {
  auto result = parse(
      "@prefix sm: <http://x.org/> . sm:M1 a sm:Mission . sm:M1 a sm:Mission .");
  REQUIRE(result.ok());
  CHECK(result.graph.size() == 1);
}

TEST_CASE("serialize empty graph") {
  Graph g;
  CHECK(serialize(g).empty());
  g.set_prefix("sm", "http://x.org/");
  CHECK(serialize(g) == "@prefix sm: <http://x.org/> .\n");
}

TEST_CASE("serialize one triple round-trips") {
  Graph g;
  g.set_prefix("sm", "http://x.org/");
  g.insert({Iri{"http://x.org/M1"}, Iri{rdf::type}, Iri{"http://x.org/Mission"}});
  auto reparsed = parse(serialize(g));
  REQUIRE(reparsed.ok());
  CHECK(reparsed.graph.triples() == g.triples());
}

TEST_CASE("two predicates share one subject block") {
  const std::string ns = "http://x.org/";
  Graph g;
  g.set_prefix("sm", ns);
  g.insert({Iri{ns + "M1"}, Iri{rdf::type}, Iri{ns + "Mission"}});
  g.insert({Iri{ns + "M1"}, Iri{ns + "missionName"}, Literal{"Aqua"}});
  std::string text = serialize(g);
  CHECK(text.find(';') != std::string::npos);
  CHECK(text.find("sm:M1") == text.rfind("sm:M1"));
  auto reparsed = parse(text);
  REQUIRE(reparsed.ok());
  CHECK(reparsed.graph.triples() == g.triples());
}

TEST_CASE("round-trip and byte-stable canonicalization on generated graphs") {
  kbp::testing::MissionGraphGen gen(7);
  for (int i = 0; i < 100; ++i) {
    Graph g = gen.next();
    std::string first = serialize(g);
    auto reparsed = parse(first);
    REQUIRE(reparsed.ok());
    CHECK(reparsed.graph.triples() == g.triples());
    CHECK(reparsed.graph.prefixes() == g.prefixes());
    CHECK(serialize(reparsed.graph) == first);
  }
}

TEST_CASE("parse survives arbitrary byte input") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    std::string junk;
    std::size_t len = rng() % 400;
    for (std::size_t j = 0; j < len; ++j) junk += static_cast<char>(rng() % 256);
    auto result = parse(junk);  // must neither crash nor hang
    if (!result.ok()) CHECK(result.errors.front().line >= 1);
  }
}

TEST_CASE("extract_turtle_block prefers the first fenced block") {
  CHECK(extract_turtle_block("Here you go:\n```turtle\n@prefix sm: <http://x.org/> .\n```") ==
        "@prefix sm: <http://x.org/> .");
  CHECK(extract_turtle_block("```\nsm:M1 a sm:Mission .\n```\n```\nother\n```") ==
        "sm:M1 a sm:Mission .");
}

TEST_CASE("extract_turtle_block finds @prefix and triple-like suffixes") {
  std::string raw = "Sure! The Turtle is below.\n@prefix sm: <http://x.org/> .\nsm:M1 a sm:Mission .";
  CHECK(extract_turtle_block(raw) ==
        "@prefix sm: <http://x.org/> .\nsm:M1 a sm:Mission .");
  std::string no_prefix = "The triples:\nsm:M1 a sm:Mission .\nsm:M1 sm:missionName \"Aqua\" .";
  CHECK(extract_turtle_block(no_prefix) ==
        "sm:M1 a sm:Mission .\nsm:M1 sm:missionName \"Aqua\" .");
  std::string question = "?M1 a sm:Mission .";
  CHECK(extract_turtle_block(question) == question);
}

TEST_CASE("extract_turtle_block falls back to the unchanged input") {
  CHECK(extract_turtle_block("Sorry, I cannot.") == "Sorry, I cannot.");
  CHECK_FALSE(has_turtle_payload("Sorry, I cannot."));
  CHECK(extract_turtle_block("raw text with no markers") == "raw text with no markers");
}

TEST_CASE("serializer escapes special characters") {
  Graph g;
  g.insert({Iri{"http://x.org/s"}, Iri{"http://x.org/p"},
            Literal{"say \"hi\"\nnew\tline\\slash"}});
  auto reparsed = parse(serialize(g));
  REQUIRE(reparsed.ok());
  CHECK(reparsed.graph.triples() == g.triples());
}
