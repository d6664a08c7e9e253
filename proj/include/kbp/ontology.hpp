#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kbp/turtle.hpp"

namespace kbp {

enum class PropertyKind { data, object };

struct ClassDef {
  std::string iri;
  std::string label;
  auto operator<=>(const ClassDef&) const = default;
};

struct PropertyDef {
  std::string iri;
  PropertyKind kind = PropertyKind::data;
  std::set<std::string> domains;  // class IRIs, non-empty
  std::set<std::string> ranges;   // class IRIs, non-empty for object kind
  std::string datatype;           // XSD datatype IRI for data kind
  auto operator<=>(const PropertyDef&) const = default;
};

/// An RDFS-subset schema: classes plus domain/range-constrained properties.
/// Immutable after construction and safe to share across threads.
class OntologySchema {
public:
  OntologySchema(std::vector<ClassDef> classes, std::vector<PropertyDef> properties,
                 std::string canonical_namespace,
                 std::map<std::string, std::string> canonical_prefixes);

  const std::map<std::string, ClassDef>& classes() const { return classes_; }
  const std::map<std::string, PropertyDef>& properties() const { return properties_; }
  const std::string& canonical_namespace() const { return canonical_namespace_; }
  const std::map<std::string, std::string>& canonical_prefixes() const {
    return canonical_prefixes_;
  }
  /// Prefix label bound to the canonical namespace.
  const std::string& canonical_label() const { return canonical_label_; }

  bool is_class(const std::string& iri) const { return classes_.count(iri) > 0; }
  const PropertyDef* find_property(const std::string& iri) const;
  const ClassDef* find_class(const std::string& iri) const;

  /// Lookup by local name, e.g. "Mission" or "hasOrbit". Null when absent.
  const ClassDef* class_by_local(const std::string& name) const;
  const PropertyDef* property_by_local(const std::string& name) const;

  bool operator==(const OntologySchema&) const = default;

private:
  std::map<std::string, ClassDef> classes_;
  std::map<std::string, PropertyDef> properties_;
  std::string canonical_namespace_;
  std::map<std::string, std::string> canonical_prefixes_;
  std::string canonical_label_;
};

/// The built-in space mission schema: Mission, Instrument, Orbit,
/// Stakeholder and Country with their 18 properties.
const OntologySchema& builtin_mission_schema();

/// Load a schema from Turtle using the rdfs:Class / rdf:Property /
/// rdfs:domain / rdfs:range vocabulary (owl:Class and the owl property
/// classes are accepted as aliases). Throws SchemaError.
OntologySchema load_schema(const std::string& turtle_text);

/// Render a schema as Turtle. load_schema(serialize_schema(s)) == s.
std::string serialize_schema(const OntologySchema& schema);

/// Plain-text description of the schema for use inside prompts.
std::string describe_schema(const OntologySchema& schema);

enum class ViolationKind {
  unknown_property,
  domain_violation,
  range_violation,
  untyped_individual,
  datatype_mismatch,
};

std::string to_string(ViolationKind kind);

struct ConformanceViolation {
  Triple triple;
  ViolationKind kind;
  std::string detail;
};

/// Check every triple of the graph against the schema. Deterministic and
/// order-independent; an empty result means the graph satisfies the schema.
std::vector<ConformanceViolation> conforms(const Graph& graph, const OntologySchema& schema);

/// Lexical-space validation for the supported XSD datatypes. For
/// xsd:dateTime a bare date is rejected (it is repairable, not valid).
bool lexical_valid(const std::string& datatype_iri, const std::string& lexical);

/// Whether a literal satisfies a data property's declared datatype. Plain
/// literals are judged by lexical form, so an untagged full date-time counts
/// as a dateTime; every other tag must match the declaration.
bool literal_in_range(const Literal& lit, const std::string& datatype_iri);

/// True for "YYYY-MM-DD" shaped values that fix_dates can complete.
bool is_bare_date(const std::string& lexical);

/// Class IRIs the graph asserts for a term, filtered to schema classes.
std::set<std::string> schema_types(const Graph& graph, const OntologySchema& schema,
                                   const Term& term);

}  // namespace kbp
