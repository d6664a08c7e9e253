#include "kbp/repair.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace kbp::repair {

std::string to_string(FixKind kind) {
  switch (kind) {
    case FixKind::namespaces: return "namespaces";
    case FixKind::date_format: return "date_format";
    case FixKind::question_prefix: return "question_prefix";
    case FixKind::domain_constraint: return "domain_constraint";
    case FixKind::range_constraint: return "range_constraint";
    case FixKind::orphan_link: return "orphan_link";
    case FixKind::subclass_rewrite: return "subclass_rewrite";
  }
  return "unknown";
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::gen: return "gen";
    case Stage::ns: return "ns";
    case Stage::lex_sint: return "lex_sint";
    case Stage::sem: return "sem";
  }
  return "unknown";
}

namespace {

// Per-character context for the textual passes: 'c' code, 's' string
// literal, 'i' IRI ref, '#' comment. Quotes and angle brackets themselves
// are classified with their interior.
std::vector<char> context_mask(const std::string& text) {
  std::vector<char> mask(text.size(), 'c');
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') mask[i++] = '#';
    } else if (c == '<') {
      mask[i++] = 'i';
      while (i < text.size() && text[i] != '>' && text[i] != '\n') mask[i++] = 'i';
      if (i < text.size() && text[i] == '>') mask[i++] = 'i';
    } else if (c == '"') {
      bool long_form = text.compare(i, 3, "\"\"\"") == 0;
      std::size_t quote_len = long_form ? 3 : 1;
      for (std::size_t k = 0; k < quote_len; ++k) mask[i++] = 's';
      while (i < text.size()) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          mask[i++] = 's';
          mask[i++] = 's';
          continue;
        }
        if (!long_form && (text[i] == '"' || text[i] == '\n')) break;
        if (long_form && text.compare(i, 3, "\"\"\"") == 0) break;
        mask[i++] = 's';
      }
      if (i < text.size() && text[i] == '"') {
        for (std::size_t k = 0; k < quote_len && i < text.size(); ++k) mask[i++] = 's';
      }
    } else {
      ++i;
    }
  }
  return mask;
}

bool name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool name_char(char c) {
  return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-';
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Edit {
  std::size_t begin;
  std::size_t end;  // exclusive
  std::string replacement;
};

std::string apply_edits(const std::string& text, std::vector<Edit> edits) {
  std::sort(edits.begin(), edits.end(),
            [](const Edit& a, const Edit& b) { return a.begin > b.begin; });
  std::string out = text;
  for (const Edit& e : edits) out.replace(e.begin, e.end - e.begin, e.replacement);
  return out;
}

struct PrefixDecl {
  std::string label;
  std::size_t iri_begin;  // inside the angle brackets
  std::size_t iri_end;
  std::string iri;
  std::size_t stmt_begin;
  std::size_t stmt_end;  // past the closing '>'
};

std::vector<PrefixDecl> find_prefix_decls(const std::string& text,
                                          const std::vector<char>& mask) {
  std::vector<PrefixDecl> decls;
  std::size_t i = 0;
  while ((i = text.find("@prefix", i)) != std::string::npos) {
    if (mask[i] != 'c') {
      i += 7;
      continue;
    }
    PrefixDecl d;
    d.stmt_begin = i;
    std::size_t p = i + 7;
    while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
    std::string label;
    while (p < text.size() && (name_char(text[p]) || text[p] == '.')) label += text[p++];
    if (p >= text.size() || text[p] != ':') {
      i += 7;
      continue;
    }
    ++p;
    while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
    if (p >= text.size() || text[p] != '<') {
      i += 7;
      continue;
    }
    d.label = label;
    d.iri_begin = ++p;
    while (p < text.size() && text[p] != '>' && text[p] != '\n') ++p;
    if (p >= text.size() || text[p] != '>') {
      i += 7;
      continue;
    }
    d.iri_end = p;
    d.iri = text.substr(d.iri_begin, d.iri_end - d.iri_begin);
    d.stmt_end = p + 1;
    decls.push_back(d);
    i = p;
  }
  return decls;
}

}  // namespace

TextFix fix_namespaces(const std::string& text, const OntologySchema& schema) {
  const auto mask = context_mask(text);
  const auto& canonical = schema.canonical_prefixes();
  std::set<std::string> canonical_iris;
  for (const auto& [label, iri] : canonical) canonical_iris.insert(iri);

  std::vector<Edit> edits;
  int fixes = 0;

  // Rebind declarations.
  auto decls = find_prefix_decls(text, mask);
  std::set<std::string> declared;
  for (const PrefixDecl& d : decls) {
    declared.insert(d.label);
    std::string target;
    auto it = canonical.find(d.label);
    if (it != canonical.end()) {
      target = it->second;
    } else if (canonical_iris.count(d.iri)) {
      continue;  // alias for a known namespace
    } else {
      target = schema.canonical_namespace();
    }
    if (d.iri != target) {
      edits.push_back({d.iri_begin, d.iri_end, target});
      ++fixes;
    }
  }

  // Prefixes used without a declaration.
  std::set<std::string> used;
  std::size_t i = 0;
  while (i < text.size()) {
    if (mask[i] != 'c' || !name_start(text[i])) {
      // An unprefixed ':' name uses the empty label.
      if (mask[i] == 'c' && text[i] == ':' && (i == 0 || !name_char(text[i - 1]))) {
        if (i + 1 < text.size() && (name_char(text[i + 1]))) used.insert("");
      }
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && (name_char(text[i]) ||
                               (text[i] == '.' && i + 1 < text.size() && name_char(text[i + 1]))))
      ++i;
    if (i < text.size() && text[i] == ':' && mask[start] == 'c') {
      std::string label = text.substr(start, i - start);
      bool in_decl = std::any_of(decls.begin(), decls.end(), [&](const PrefixDecl& d) {
        return start >= d.stmt_begin && start < d.stmt_end;
      });
      if (!in_decl && label != "_") used.insert(label);
      ++i;
    }
  }
  std::string prologue;
  for (const std::string& label : used) {
    if (declared.count(label)) continue;
    auto it = canonical.find(label);
    const std::string& ns = it != canonical.end() ? it->second : schema.canonical_namespace();
    prologue += "@prefix " + label + ": <" + ns + "> .\n";
    ++fixes;
  }

  // Full IRIs carrying a schema term's local name in a foreign namespace.
  std::set<std::string> term_locals;
  for (const auto& [iri, def] : schema.classes()) term_locals.insert(local_name(iri));
  for (const auto& [iri, def] : schema.properties()) term_locals.insert(local_name(iri));
  i = 0;
  while (i < text.size()) {
    if (mask[i] != 'i' || text[i] != '<') {
      ++i;
      continue;
    }
    std::size_t close = text.find('>', i);
    if (close == std::string::npos) break;
    std::string iri = text.substr(i + 1, close - i - 1);
    std::string local = local_name(iri);
    std::string expected = schema.canonical_namespace() + local;
    if (term_locals.count(local) && iri != expected && !canonical_iris.count(iri) &&
        iri.size() > local.size()) {
      edits.push_back({i + 1, close, expected});
      ++fixes;
    }
    i = close + 1;
  }

  TextFix result;
  result.text = prologue + apply_edits(text, std::move(edits));
  result.fixes = fixes;
  return result;
}

TextFix strip_question_prefix(const std::string& text, const OntologySchema& schema) {
  const auto mask = context_mask(text);
  const std::string replacement = schema.canonical_label() + ":";
  std::vector<Edit> edits;
  int fixes = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (mask[i] != 'c' || text[i] != '?') continue;
    if (!name_start(text[i + 1]) && !std::isdigit(static_cast<unsigned char>(text[i + 1])))
      continue;
    edits.push_back({i, i + 1, replacement});
    ++fixes;
  }
  TextFix result;
  result.text = apply_edits(text, std::move(edits));
  result.fixes = fixes;
  return result;
}

GraphFix fix_dates(const Graph& graph, const OntologySchema& schema,
                   const RepairOptions& options) {
  std::set<std::string> unknown;
  for (const auto& tok : options.unknown_date_tokens) unknown.insert(lower(tok));

  GraphFix out;
  for (const Triple& t : graph) {
    const PropertyDef* prop = schema.find_property(t.predicate.value);
    bool date_prop = prop && prop->kind == PropertyKind::data &&
                     (prop->datatype == xsd::dateTime || prop->datatype == xsd::date);
    if (!date_prop || !is_literal(t.object)) {
      out.graph.insert(t);
      continue;
    }
    const auto& lit = std::get<Literal>(t.object);
    if (unknown.count(lower(trimmed(lit.lexical)))) {
      out.deleted.push_back(t);
      ++out.fixes;
      continue;
    }
    if (prop->datatype == xsd::dateTime && is_bare_date(lit.lexical)) {
      Triple fixed = t;
      fixed.object = Literal{lit.lexical + "T00:00:00", xsd::dateTime};
      out.graph.insert(std::move(fixed));
      ++out.fixes;
      continue;
    }
    out.graph.insert(t);
  }
  for (const auto& [label, iri] : graph.prefixes()) out.graph.set_prefix(label, iri);
  return out;
}

GraphFix enforce_domain(const Graph& graph, const OntologySchema& schema) {
  GraphFix out;
  for (const Triple& t : graph) {
    const PropertyDef* prop =
        t.predicate.value == rdf::type ? nullptr : schema.find_property(t.predicate.value);
    if (!prop) {
      out.graph.insert(t);
      continue;
    }
    auto subject_types = schema_types(graph, schema, t.subject);
    bool in_domain = std::any_of(subject_types.begin(), subject_types.end(),
                                 [&](const std::string& c) { return prop->domains.count(c); });
    if (in_domain) {
      out.graph.insert(t);
    } else {
      out.deleted.push_back(t);
      ++out.fixes;
    }
  }
  for (const auto& [label, iri] : graph.prefixes()) out.graph.set_prefix(label, iri);
  return out;
}

GraphFix enforce_range(const Graph& graph, const OntologySchema& schema) {
  GraphFix out;
  for (const Triple& t : graph) {
    const PropertyDef* prop =
        t.predicate.value == rdf::type ? nullptr : schema.find_property(t.predicate.value);
    if (!prop) {
      out.graph.insert(t);
      continue;
    }
    bool keep;
    if (prop->kind == PropertyKind::data) {
      keep = is_literal(t.object) &&
             literal_in_range(std::get<Literal>(t.object), prop->datatype);
    } else {
      if (is_literal(t.object)) {
        keep = false;
      } else {
        auto object_types = schema_types(graph, schema, t.object);
        keep = std::any_of(object_types.begin(), object_types.end(),
                           [&](const std::string& c) { return prop->ranges.count(c); });
      }
    }
    if (keep) {
      out.graph.insert(t);
    } else {
      out.deleted.push_back(t);
      ++out.fixes;
    }
  }
  for (const auto& [label, iri] : graph.prefixes()) out.graph.set_prefix(label, iri);
  return out;
}

GraphFix link_orphans(const Graph& graph, const OntologySchema& schema) {
  GraphFix out;
  out.graph = graph;

  const ClassDef* mission_cls = schema.class_by_local("Mission");
  const PropertyDef* has_instrument = schema.property_by_local("hasInstrument");
  const PropertyDef* has_orbit = schema.property_by_local("hasOrbit");
  const ClassDef* instrument_cls = schema.class_by_local("Instrument");
  const ClassDef* orbit_cls = schema.class_by_local("Orbit");
  if (!mission_cls) return out;

  auto individuals_of = [&](const std::string& class_iri) {
    std::set<Term> result;
    for (const Triple& t : graph)
      if (t.predicate.value == rdf::type && is_iri(t.object) &&
          iri_value(t.object) == class_iri)
        result.insert(t.subject);
    return result;
  };
  auto linked_by = [&](const std::string& prop_iri) {
    std::set<Term> result;
    for (const Triple& t : graph)
      if (t.predicate.value == prop_iri) result.insert(t.object);
    return result;
  };

  std::vector<std::pair<const PropertyDef*, std::set<Term>>> pending;
  if (instrument_cls && has_instrument) {
    auto orphans = individuals_of(instrument_cls->iri);
    for (const Term& linked : linked_by(has_instrument->iri)) orphans.erase(linked);
    if (!orphans.empty()) pending.emplace_back(has_instrument, std::move(orphans));
  }
  if (orbit_cls && has_orbit) {
    auto orphans = individuals_of(orbit_cls->iri);
    for (const Term& linked : linked_by(has_orbit->iri)) orphans.erase(linked);
    if (!orphans.empty()) pending.emplace_back(has_orbit, std::move(orphans));
  }
  if (pending.empty()) return out;

  auto missions = individuals_of(mission_cls->iri);
  if (missions.size() != 1) {
    std::ostringstream w;
    w << "orphan linking skipped: " << missions.size() << " mission individuals in the graph";
    out.warnings.push_back(w.str());
    return out;
  }
  const Term& mission = *missions.begin();
  for (auto& [prop, orphans] : pending) {
    for (const Term& orphan : orphans) {
      out.graph.insert(Triple{mission, Iri{prop->iri}, orphan});
      ++out.fixes;
    }
  }
  return out;
}

GraphFix rewrite_subclass(const Graph& graph) {
  GraphFix out;
  for (const Triple& t : graph) {
    if (t.predicate.value == rdfs::subClassOf) {
      out.graph.insert(Triple{t.subject, Iri{rdf::type}, t.object});
      ++out.fixes;
    } else {
      out.graph.insert(t);
    }
  }
  for (const auto& [label, iri] : graph.prefixes()) out.graph.set_prefix(label, iri);
  return out;
}

namespace {

class FixTally {
public:
  void add(FixKind kind, int count) {
    if (count > 0) counts_[kind] += count;
  }
  std::vector<std::pair<FixKind, int>> entries() const {
    return {counts_.begin(), counts_.end()};
  }

private:
  std::map<FixKind, int> counts_;
};

bool has_non_type_triple(const Graph& g) {
  return std::any_of(g.begin(), g.end(),
                     [](const Triple& t) { return t.predicate.value != rdf::type; });
}

bool fully_valid(const Graph& g, const OntologySchema& schema) {
  return !g.empty() && conforms(g, schema).empty();
}

}  // namespace

RepairOutcome repair_pipeline(const std::string& raw_output, const OntologySchema& schema,
                              const RepairOptions& options) {
  RepairOutcome out;
  FixTally tally;

  // gen: extraction plus a first parse of the untouched payload.
  std::string text = extract_turtle_block(raw_output);
  ParseResult gen = parse(text);
  out.parsed.gen = gen.ok();
  if (gen.ok() && fully_valid(gen.graph, schema)) {
    out.status = RepairStatus::valid;
    out.graph = std::move(gen.graph);
    out.stage_reached = Stage::gen;
    out.parsed.ns = out.parsed.lex_sint = true;
    return out;
  }
  if (!gen.ok() && !has_turtle_payload(raw_output)) {
    out.stage_reached = Stage::gen;
    return out;
  }

  // ns: namespace normalization on the raw text.
  TextFix ns = fix_namespaces(text, schema);
  tally.add(FixKind::namespaces, ns.fixes);
  ParseResult after_ns = parse(ns.text);
  out.parsed.ns = out.parsed.gen || after_ns.ok();
  if (after_ns.ok() && fully_valid(after_ns.graph, schema)) {
    out.status = RepairStatus::valid;
    out.graph = std::move(after_ns.graph);
    out.stage_reached = Stage::ns;
    out.parsed.lex_sint = true;
    out.fixes_applied = tally.entries();
    return out;
  }

  // lex_sint: question-mark names, then date normalization on the graph.
  // Stripping can introduce canonical-prefix names, so namespaces run again.
  TextFix stripped = strip_question_prefix(ns.text, schema);
  tally.add(FixKind::question_prefix, stripped.fixes);
  TextFix redeclared = fix_namespaces(stripped.text, schema);
  tally.add(FixKind::namespaces, redeclared.fixes);
  ParseResult after_lex = parse(redeclared.text);
  out.parsed.lex_sint = out.parsed.ns || after_lex.ok();
  if (!after_lex.ok()) {
    out.stage_reached = Stage::lex_sint;
    out.fixes_applied = tally.entries();
    return out;
  }
  GraphFix dated = fix_dates(after_lex.graph, schema, options);
  tally.add(FixKind::date_format, dated.fixes);
  out.deleted_triples.insert(out.deleted_triples.end(), dated.deleted.begin(),
                             dated.deleted.end());
  if (fully_valid(dated.graph, schema)) {
    out.status = RepairStatus::valid;
    out.graph = std::move(dated.graph);
    out.stage_reached = Stage::lex_sint;
    out.fixes_applied = tally.entries();
    return out;
  }

  // sem: subclass rewrite, domain/range pruning, orphan linking.
  GraphFix sub = rewrite_subclass(dated.graph);
  tally.add(FixKind::subclass_rewrite, sub.fixes);
  GraphFix dom = enforce_domain(sub.graph, schema);
  tally.add(FixKind::domain_constraint, dom.fixes);
  out.deleted_triples.insert(out.deleted_triples.end(), dom.deleted.begin(), dom.deleted.end());
  GraphFix rng = enforce_range(dom.graph, schema);
  tally.add(FixKind::range_constraint, rng.fixes);
  out.deleted_triples.insert(out.deleted_triples.end(), rng.deleted.begin(), rng.deleted.end());
  GraphFix linked = link_orphans(rng.graph, schema);
  tally.add(FixKind::orphan_link, linked.fixes);
  out.warnings.insert(out.warnings.end(), linked.warnings.begin(), linked.warnings.end());

  out.stage_reached = Stage::sem;
  out.fixes_applied = tally.entries();
  // Deletions can empty a graph of its facts; a type-only remainder does not
  // count as a successful extraction.
  if (conforms(linked.graph, schema).empty() && has_non_type_triple(linked.graph)) {
    out.status = RepairStatus::valid;
    out.graph = std::move(linked.graph);
  } else {
    out.status = RepairStatus::invalid;
    out.graph = std::move(linked.graph);
  }
  return out;
}

RepairOutcome assess(const std::string& turtle_text, const OntologySchema& schema) {
  RepairOutcome out;
  ParseResult parsed = parse(extract_turtle_block(turtle_text));
  out.parsed.gen = parsed.ok();
  out.stage_reached = Stage::gen;
  if (parsed.ok()) {
    if (fully_valid(parsed.graph, schema)) out.status = RepairStatus::valid;
    out.graph = std::move(parsed.graph);
    out.parsed.ns = out.parsed.lex_sint = true;
  }
  return out;
}

}  // namespace kbp::repair
