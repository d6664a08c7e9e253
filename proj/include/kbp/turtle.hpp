#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace kbp {

namespace rdf {
inline const std::string ns = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline const std::string type = ns + "type";
inline const std::string Property = ns + "Property";
}  // namespace rdf

namespace rdfs {
inline const std::string ns = "http://www.w3.org/2000/01/rdf-schema#";
inline const std::string Class = ns + "Class";
inline const std::string subClassOf = ns + "subClassOf";
inline const std::string domain = ns + "domain";
inline const std::string range = ns + "range";
inline const std::string label = ns + "label";
}  // namespace rdfs

namespace owl {
inline const std::string ns = "http://www.w3.org/2002/07/owl#";
inline const std::string Class = ns + "Class";
inline const std::string ObjectProperty = ns + "ObjectProperty";
inline const std::string DatatypeProperty = ns + "DatatypeProperty";
}  // namespace owl

namespace xsd {
inline const std::string ns = "http://www.w3.org/2001/XMLSchema#";
inline const std::string string_type = ns + "string";
inline const std::string dateTime = ns + "dateTime";
inline const std::string date = ns + "date";
inline const std::string integer = ns + "integer";
inline const std::string decimal = ns + "decimal";
inline const std::string double_type = ns + "double";
inline const std::string boolean = ns + "boolean";
}  // namespace xsd

struct Iri {
  std::string value;
  auto operator<=>(const Iri&) const = default;
};

struct BlankNode {
  std::string label;
  auto operator<=>(const BlankNode&) const = default;
};

/// Literal equality is (lexical form, datatype, language); no value-space
/// normalization, so textual repairs stay observable.
struct Literal {
  std::string lexical;
  std::string datatype = xsd::string_type;
  std::string language;  // empty when untagged
  auto operator<=>(const Literal&) const = default;
};

using Term = std::variant<Iri, BlankNode, Literal>;

bool is_iri(const Term& t);
bool is_blank(const Term& t);
bool is_literal(const Term& t);
const std::string& iri_value(const Term& t);  // precondition: is_iri(t)

/// Last segment of an IRI after '#' or the final '/'.
std::string local_name(const std::string& iri);

struct Triple {
  Term subject;  // Iri or BlankNode
  Iri predicate;
  Term object;
  auto operator<=>(const Triple&) const = default;
};

/// A set of triples plus the prefix map they were parsed with.
/// Duplicate insertions are absorbed; iteration order is canonical.
class Graph {
public:
  using TripleSet = std::set<Triple>;

  void insert(Triple t) { triples_.insert(std::move(t)); }
  void erase(const Triple& t) { triples_.erase(t); }
  bool contains(const Triple& t) const { return triples_.count(t) > 0; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  const TripleSet& triples() const { return triples_; }
  TripleSet::const_iterator begin() const { return triples_.begin(); }
  TripleSet::const_iterator end() const { return triples_.end(); }

  const std::map<std::string, std::string>& prefixes() const { return prefixes_; }
  void set_prefix(const std::string& prefix_label, const std::string& iri) {
    prefixes_[prefix_label] = iri;
  }

  bool operator==(const Graph&) const = default;

private:
  TripleSet triples_;
  std::map<std::string, std::string> prefixes_;  // label -> namespace IRI
};

struct SyntaxError {
  int line = 1;
  int column = 1;
  std::string message;
  std::string offending_fragment;
};

/// Either a graph or the list of syntax errors that prevented one.
struct ParseResult {
  Graph graph;
  std::vector<SyntaxError> errors;
  bool ok() const { return errors.empty(); }
};

/// Parse a UTF-8 Turtle document. Supported subset: @prefix, 'a',
/// predicate/object lists, typed and language-tagged literals, labeled blank
/// nodes, numeric and boolean shorthand. Collections, anonymous blank-node
/// property lists and @base are rejected with errors.
ParseResult parse(const std::string& text);

/// Canonical serialization: prefixes sorted by label, subjects sorted, one
/// block per subject with ';'-grouped predicates and ','-grouped objects.
/// parse(serialize(g)) reproduces g; re-serialization is byte-stable.
std::string serialize(const Graph& graph);

std::string serialize_term(const Term& t, const std::map<std::string, std::string>& prefixes);

/// Pull the Turtle payload out of a chat reply: first fenced code block if
/// any, else the suffix starting at the first '@prefix' or first line that
/// looks like a triple, else the input unchanged.
std::string extract_turtle_block(const std::string& llm_output);

/// True when extract_turtle_block would fall through to "input unchanged".
bool has_turtle_payload(const std::string& llm_output);

}  // namespace kbp
