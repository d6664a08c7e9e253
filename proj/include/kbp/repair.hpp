#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kbp/ontology.hpp"
#include "kbp/turtle.hpp"

namespace kbp::repair {

enum class FixKind {
  namespaces,
  date_format,
  question_prefix,
  domain_constraint,
  range_constraint,
  orphan_link,
  subclass_rewrite,
};

std::string to_string(FixKind kind);

enum class Stage { gen, ns, lex_sint, sem };

std::string to_string(Stage stage);

enum class RepairStatus { valid, invalid };

/// Syntactic validity reached at each textual stage, cumulative.
struct StageParses {
  bool gen = false;
  bool ns = false;
  bool lex_sint = false;
};

struct RepairOutcome {
  RepairStatus status = RepairStatus::invalid;
  std::optional<Graph> graph;
  std::vector<std::pair<FixKind, int>> fixes_applied;
  std::vector<Triple> deleted_triples;
  Stage stage_reached = Stage::gen;
  StageParses parsed;
  std::vector<std::string> warnings;

  bool valid() const { return status == RepairStatus::valid; }
};

struct RepairOptions {
  /// Date object values treated as unknown and deleted, case-insensitive.
  std::vector<std::string> unknown_date_tokens = {"unknown", "", "n/a"};
};

struct TextFix {
  std::string text;
  int fixes = 0;
};

struct GraphFix {
  Graph graph;
  int fixes = 0;
  std::vector<Triple> deleted;
  std::vector<std::string> warnings;
};

/// Rebind every prefix declaration to the schema's namespaces, prepend
/// declarations for prefixes used without one, and move full IRIs that share
/// a local name with a schema term into the canonical namespace. Textual and
/// best-effort: works on unparseable input.
TextFix fix_namespaces(const std::string& text, const OntologySchema& schema);

/// Rewrite SPARQL-style '?name' tokens outside literals and IRIs into
/// canonical-prefix names.
TextFix strip_question_prefix(const std::string& text, const OntologySchema& schema);

/// Complete bare dates of dateTime-typed properties with T00:00:00 and drop
/// triples whose date object is an unknown-value token.
GraphFix fix_dates(const Graph& graph, const OntologySchema& schema,
                   const RepairOptions& options = {});

/// Delete triples whose subject type falls outside the property's domain.
GraphFix enforce_domain(const Graph& graph, const OntologySchema& schema);

/// Delete triples whose object type or literal datatype falls outside the
/// property's range.
GraphFix enforce_range(const Graph& graph, const OntologySchema& schema);

/// Attach instruments and orbits that no mission references to the unique
/// mission individual. Ambiguous graphs are left unchanged with a warning.
GraphFix link_orphans(const Graph& graph, const OntologySchema& schema);

/// Turn rdfs:subClassOf assertions into rdf:type.
GraphFix rewrite_subclass(const Graph& graph);

/// Full repair pipeline over a raw model reply: extraction, namespace fixes,
/// lexical fixes, semantic fixes, final conformance check.
RepairOutcome repair_pipeline(const std::string& raw_output, const OntologySchema& schema,
                              const RepairOptions& options = {});

/// Validity check without any repair: parse + conformance + non-emptiness.
/// Used when scoring model outputs as-is.
RepairOutcome assess(const std::string& turtle_text, const OntologySchema& schema);

}  // namespace kbp::repair
