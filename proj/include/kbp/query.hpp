#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kbp/ontology.hpp"
#include "kbp/turtle.hpp"

namespace kbp::query {

/// A triple pattern; absent positions are wildcards.
struct Pattern {
  std::optional<Term> subject;
  std::optional<Iri> predicate;
  std::optional<Term> object;
};

/// All triples unifying with the pattern, in canonical graph order.
std::vector<Triple> match(const Graph& graph, const Pattern& pattern);

/// property IRI -> (individual IRI, value) rows, in canonical order.
using PropertyValueTable = std::map<std::string, std::vector<std::pair<std::string, std::string>>>;

/// Values per schema property present in the graph. Data properties yield
/// the literal's lexical form; object properties resolve the object's name
/// data property when one exists, falling back to the IRI local name.
PropertyValueTable extract_property_values(const Graph& graph, const OntologySchema& schema);

/// Parse a CLI pattern of the form "s p o" where '?' is a wildcard. Terms
/// may be <iri>, prefixed names (resolved against the graph's prefixes plus
/// the schema's canonical ones), _:labels or quoted literals.
Pattern parse_pattern(const std::string& text, const Graph& graph, const OntologySchema* schema);

}  // namespace kbp::query
