#include <doctest.h>

#include <algorithm>

#include "kbp/errors.hpp"
#include "kbp/ontology.hpp"
#include "test_support.hpp"

using namespace kbp;

namespace {
const std::string ns = kbp::testing::kNs;

Graph graph_of(const std::string& turtle) {
  auto result = parse(turtle);
  REQUIRE(result.ok());
  return result.graph;
}
}  // namespace

TEST_CASE("builtin schema matches the mission ontology table") {
  const OntologySchema& schema = builtin_mission_schema();
  CHECK(schema.classes().size() == 5);
  CHECK(schema.properties().size() == 18);

  const PropertyDef* has_orbit = schema.property_by_local("hasOrbit");
  REQUIRE(has_orbit != nullptr);
  CHECK(has_orbit->kind == PropertyKind::object);
  CHECK(has_orbit->domains == std::set<std::string>{ns + "Mission"});
  CHECK(has_orbit->ranges == std::set<std::string>{ns + "Orbit"});

  const PropertyDef* launch = schema.property_by_local("launchDate");
  REQUIRE(launch != nullptr);
  CHECK(launch->kind == PropertyKind::data);
  CHECK(launch->datatype == xsd::dateTime);

  int data = 0, object = 0;
  for (const auto& [iri, def] : schema.properties())
    (def.kind == PropertyKind::data ? data : object)++;
  CHECK(data == 13);
  CHECK(object == 5);
}

TEST_CASE("schema serialization round-trips") {
  const OntologySchema& schema = builtin_mission_schema();
  OntologySchema loaded = load_schema(serialize_schema(schema));
  CHECK(loaded == schema);
}

TEST_CASE("load_schema error paths") {
  CHECK_THROWS_WITH_AS(load_schema(""), doctest::Contains("no classes declared"), SchemaError);

  std::string missing_range =
      "@prefix sm: <" + ns + "> .\n"
      "@prefix rdfs: <" + rdfs::ns + "> .\n"
      "@prefix rdf: <" + rdf::ns + "> .\n"
      "sm:Stakeholder a rdfs:Class .\n"
      "sm:Instrument a rdfs:Class .\n"
      "sm:ownsInstrument a rdf:Property ;\n"
      "    rdfs:domain sm:Stakeholder .\n";
  CHECK_THROWS_WITH_AS(load_schema(missing_range), doctest::Contains("ownsInstrument"),
                       SchemaError);

  CHECK_THROWS_AS(load_schema("sm:M1 a sm:Mission ."), SchemaError);  // parse failure
}

TEST_CASE("conforms accepts a typed mission with a name") {
  auto g = graph_of("@prefix sm: <" + ns + "> . sm:M1 a sm:Mission ; sm:missionName \"Aqua\" .");
  CHECK(conforms(g, builtin_mission_schema()).empty());
}

TEST_CASE("conforms flags a domain violation exactly once") {
  auto g = graph_of("@prefix sm: <" + ns + "> . sm:O1 a sm:Orbit ; sm:hasInstrument sm:I1 .");
  auto violations = conforms(g, builtin_mission_schema());
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == ViolationKind::domain_violation);
}

TEST_CASE("conforms flags an invalid date as datatype mismatch") {
  auto g = graph_of("@prefix sm: <" + ns + "> . sm:M1 a sm:Mission ; sm:launchDate \"soon\" .");
  auto violations = conforms(g, builtin_mission_schema());
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == ViolationKind::datatype_mismatch);
}

TEST_CASE("conforms flags bare dates so the repair pass has a trigger") {
  auto g = graph_of("@prefix sm: <" + ns +
                    "> . sm:M1 a sm:Mission ; sm:launchDate \"2009-01-23\" .");
  auto violations = conforms(g, builtin_mission_schema());
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == ViolationKind::datatype_mismatch);
}

TEST_CASE("conforms accepts full date-times with or without the tag") {
  auto tagged = graph_of("@prefix sm: <" + ns + "> . @prefix xsd: <" + xsd::ns +
                         "> . sm:M1 a sm:Mission ; sm:launchDate "
                         "\"2009-01-23T12:00:00\"^^xsd:dateTime .");
  CHECK(conforms(tagged, builtin_mission_schema()).empty());
  auto plain = graph_of("@prefix sm: <" + ns +
                        "> . sm:M1 a sm:Mission ; sm:launchDate \"2009-01-23T12:00:00\" .");
  CHECK(conforms(plain, builtin_mission_schema()).empty());
}

TEST_CASE("conforms classifies the remaining violation kinds") {
  const OntologySchema& schema = builtin_mission_schema();

  auto unknown = graph_of("@prefix sm: <" + ns + "> . sm:M1 a sm:Mission ; sm:flies \"yes\" .");
  REQUIRE(conforms(unknown, schema).size() == 1);
  CHECK(conforms(unknown, schema)[0].kind == ViolationKind::unknown_property);

  auto untyped = graph_of("@prefix sm: <" + ns + "> . sm:M1 sm:missionName \"Aqua\" .");
  REQUIRE(conforms(untyped, schema).size() == 1);
  CHECK(conforms(untyped, schema)[0].kind == ViolationKind::untyped_individual);

  auto bad_range = graph_of("@prefix sm: <" + ns +
                            "> . sm:M1 a sm:Mission . sm:C1 a sm:Country . "
                            "sm:M1 sm:hasOrbit sm:C1 .");
  REQUIRE(conforms(bad_range, schema).size() == 1);
  CHECK(conforms(bad_range, schema)[0].kind == ViolationKind::range_violation);

  auto bad_class = graph_of("@prefix sm: <" + ns + "> . sm:M1 a sm:Spaceship .");
  REQUIRE(conforms(bad_class, schema).size() == 1);
  CHECK(conforms(bad_class, schema)[0].kind == ViolationKind::untyped_individual);
}

TEST_CASE("every builtin property accepts a correctly typed assertion") {
  const OntologySchema& schema = builtin_mission_schema();
  for (const auto& [iri, prop] : schema.properties()) {
    Graph g;
    Term subject = Iri{ns + "subject"};
    g.insert({subject, Iri{rdf::type}, Iri{*prop.domains.begin()}});
    if (prop.kind == PropertyKind::data) {
      std::string value = prop.datatype == xsd::dateTime ? "2002-05-04T00:00:00" : "value";
      g.insert({subject, Iri{iri}, Literal{value, prop.datatype}});
    } else {
      Term object = Iri{ns + "object"};
      g.insert({object, Iri{rdf::type}, Iri{*prop.ranges.begin()}});
      g.insert({subject, Iri{iri}, object});
    }
    INFO("property ", iri);
    CHECK(conforms(g, schema).empty());
  }
}

TEST_CASE("conforms is order independent") {
  kbp::testing::MissionGraphGen gen(3);
  const OntologySchema& schema = builtin_mission_schema();
  for (int i = 0; i < 20; ++i) {
    Graph g = gen.next();
    // Mutate into a violating graph: inject one bogus property triple.
    g.insert({Iri{ns + "X"}, Iri{ns + "notAProperty"}, Literal{"v"}});
    auto direct = conforms(g, schema);

    // Same triples inserted in reverse order.
    Graph reversed;
    std::vector<Triple> triples(g.begin(), g.end());
    std::reverse(triples.begin(), triples.end());
    for (const auto& t : triples) reversed.insert(t);
    auto mirrored = conforms(reversed, schema);

    REQUIRE(direct.size() == mirrored.size());
    for (std::size_t k = 0; k < direct.size(); ++k) {
      CHECK(direct[k].kind == mirrored[k].kind);
      CHECK(direct[k].triple == mirrored[k].triple);
    }
  }
}

TEST_CASE("removing a violating triple only surfaces untyped individuals") {
  const OntologySchema& schema = builtin_mission_schema();
  auto g = graph_of("@prefix sm: <" + ns +
                    "> . sm:M1 a sm:Mission ; sm:missionName \"Aqua\" . "
                    "sm:O1 a sm:Orbit ; sm:hasInstrument sm:I1 .");
  auto violations = conforms(g, schema);
  REQUIRE(violations.size() == 1);

  Graph without;
  for (const auto& t : g)
    if (!(t == violations[0].triple)) without.insert(t);
  auto after = conforms(without, schema);
  CHECK(after.empty());

  // Deleting a type assertion may surface untyped_individual, nothing else.
  Graph no_type;
  for (const auto& t : g)
    if (!(t.predicate.value == rdf::type && is_iri(t.subject) &&
          iri_value(t.subject) == ns + "M1"))
      no_type.insert(t);
  for (const auto& v : conforms(no_type, schema))
    if (v.triple.predicate.value == ns + "missionName")
      CHECK(v.kind == ViolationKind::untyped_individual);
}

TEST_CASE("describe_schema lists every class and property") {
  std::string text = describe_schema(builtin_mission_schema());
  for (const char* name : {"Mission", "Instrument", "Orbit", "Stakeholder", "Country",
                           "missionName", "hasInstrument", "launchDate", "countryName"})
    CHECK(text.find(name) != std::string::npos);
}
