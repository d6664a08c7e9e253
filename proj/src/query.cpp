#include "kbp/query.hpp"

#include <algorithm>
#include <sstream>

#include "kbp/errors.hpp"

namespace kbp::query {

std::vector<Triple> match(const Graph& graph, const Pattern& pattern) {
  std::vector<Triple> out;
  for (const Triple& t : graph) {
    if (pattern.subject && !(t.subject == *pattern.subject)) continue;
    if (pattern.predicate && !(t.predicate == *pattern.predicate)) continue;
    if (pattern.object && !(t.object == *pattern.object)) continue;
    out.push_back(t);
  }
  return out;
}

namespace {

// The data property that names individuals of a class, e.g. instrumentName
// for Instrument. Lexicographically first when several qualify.
const PropertyDef* name_property(const OntologySchema& schema, const std::string& class_iri) {
  const PropertyDef* best = nullptr;
  for (const auto& [iri, def] : schema.properties()) {
    if (def.kind != PropertyKind::data || !def.domains.count(class_iri)) continue;
    if (!local_name(iri).ends_with("Name")) continue;
    if (!best || iri < best->iri) best = &def;
  }
  return best;
}

std::string resolve_object_value(const Graph& graph, const OntologySchema& schema,
                                 const PropertyDef& prop, const Term& object) {
  for (const std::string& range_iri : prop.ranges) {
    const PropertyDef* namer = name_property(schema, range_iri);
    if (!namer) continue;
    for (const Triple& t : graph) {
      if (t.subject == object && t.predicate.value == namer->iri && is_literal(t.object))
        return std::get<Literal>(t.object).lexical;
    }
  }
  if (is_iri(object)) return local_name(iri_value(object));
  if (is_blank(object)) return std::get<BlankNode>(object).label;
  return std::get<Literal>(object).lexical;
}

std::string subject_key(const Term& subject) {
  if (is_iri(subject)) return iri_value(subject);
  if (is_blank(subject)) return "_:" + std::get<BlankNode>(subject).label;
  return "";
}

}  // namespace

PropertyValueTable extract_property_values(const Graph& graph, const OntologySchema& schema) {
  PropertyValueTable table;
  for (const Triple& t : graph) {
    const PropertyDef* prop = schema.find_property(t.predicate.value);
    if (!prop) continue;
    std::string value;
    if (prop->kind == PropertyKind::data) {
      if (!is_literal(t.object)) continue;
      value = std::get<Literal>(t.object).lexical;
    } else {
      value = resolve_object_value(graph, schema, *prop, t.object);
    }
    table[prop->iri].emplace_back(subject_key(t.subject), std::move(value));
  }
  return table;
}

namespace {

Term parse_term_token(const std::string& token, const Graph& graph,
                      const OntologySchema* schema) {
  if (token.size() >= 2 && token.front() == '<' && token.back() == '>')
    return Iri{token.substr(1, token.size() - 2)};
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"')
    return Literal{token.substr(1, token.size() - 2)};
  if (token.rfind("_:", 0) == 0) return BlankNode{token.substr(2)};
  if (token == "a") return Iri{rdf::type};
  auto colon = token.find(':');
  if (colon == std::string::npos)
    throw InputError("cannot parse pattern term '" + token + "'");
  std::string label = token.substr(0, colon);
  std::string local = token.substr(colon + 1);
  auto it = graph.prefixes().find(label);
  if (it != graph.prefixes().end()) return Iri{it->second + local};
  if (schema) {
    auto cit = schema->canonical_prefixes().find(label);
    if (cit != schema->canonical_prefixes().end()) return Iri{cit->second + local};
  }
  throw InputError("unknown prefix '" + label + "' in pattern term '" + token + "'");
}

}  // namespace

Pattern parse_pattern(const std::string& text, const Graph& graph,
                      const OntologySchema* schema) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  std::string token;
  while (in >> token) tokens.push_back(token);
  if (tokens.size() != 3)
    throw InputError("pattern must have exactly three terms, got " +
                     std::to_string(tokens.size()));

  Pattern p;
  if (tokens[0] != "?") p.subject = parse_term_token(tokens[0], graph, schema);
  if (tokens[1] != "?") {
    Term t = parse_term_token(tokens[1], graph, schema);
    if (!is_iri(t)) throw InputError("pattern predicate must be an IRI");
    p.predicate = Iri{iri_value(t)};
  }
  if (tokens[2] != "?") p.object = parse_term_token(tokens[2], graph, schema);
  return p;
}

}  // namespace kbp::query
