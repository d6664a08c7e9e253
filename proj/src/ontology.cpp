#include "kbp/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "kbp/errors.hpp"

namespace kbp {

namespace {

const std::string kMissionNs = "http://example.org/space-mission#";

bool has_scheme(const std::string& iri) {
  if (iri.empty() || !std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
  return iri.find(':') != std::string::npos;
}

}  // namespace

OntologySchema::OntologySchema(std::vector<ClassDef> classes, std::vector<PropertyDef> properties,
                               std::string canonical_namespace,
                               std::map<std::string, std::string> canonical_prefixes)
    : canonical_namespace_(std::move(canonical_namespace)),
      canonical_prefixes_(std::move(canonical_prefixes)) {
  for (auto& c : classes) {
    if (c.iri.empty() || !has_scheme(c.iri))
      throw SchemaError("class IRI must be absolute: '" + c.iri + "'");
    classes_.emplace(c.iri, std::move(c));
  }
  for (auto& p : properties) {
    if (p.domains.empty()) throw SchemaError("property " + p.iri + " has no domain");
    if (p.kind == PropertyKind::object && p.ranges.empty())
      throw SchemaError("object property " + p.iri + " has no range");
    if (p.kind == PropertyKind::data && !p.datatype.starts_with(xsd::ns))
      throw SchemaError("data property " + p.iri + " has unsupported datatype " + p.datatype);
    for (const auto& d : p.domains)
      if (!classes_.count(d))
        throw SchemaError("property " + p.iri + " declares unknown domain class " + d);
    for (const auto& r : p.ranges)
      if (!classes_.count(r))
        throw SchemaError("property " + p.iri + " declares unknown range class " + r);
    properties_.emplace(p.iri, std::move(p));
  }
  for (const auto& [label, iri] : canonical_prefixes_)
    if (iri == canonical_namespace_ && canonical_label_.empty()) canonical_label_ = label;
  if (canonical_label_.empty())
    throw SchemaError("canonical namespace is missing from the prefix map");
}

const PropertyDef* OntologySchema::find_property(const std::string& iri) const {
  auto it = properties_.find(iri);
  return it == properties_.end() ? nullptr : &it->second;
}

const ClassDef* OntologySchema::find_class(const std::string& iri) const {
  auto it = classes_.find(iri);
  return it == classes_.end() ? nullptr : &it->second;
}

const ClassDef* OntologySchema::class_by_local(const std::string& name) const {
  for (const auto& [iri, def] : classes_)
    if (local_name(iri) == name) return &def;
  return nullptr;
}

const PropertyDef* OntologySchema::property_by_local(const std::string& name) const {
  for (const auto& [iri, def] : properties_)
    if (local_name(iri) == name) return &def;
  return nullptr;
}

const OntologySchema& builtin_mission_schema() {
  static const OntologySchema schema = [] {
    const std::string& ns = kMissionNs;
    std::vector<ClassDef> classes = {
        {ns + "Mission", "Mission"},         {ns + "Instrument", "Instrument"},
        {ns + "Orbit", "Orbit"},             {ns + "Stakeholder", "Stakeholder"},
        {ns + "Country", "Country"},
    };
    auto data = [&](const std::string& name, const std::string& domain,
                    const std::string& datatype) {
      return PropertyDef{ns + name, PropertyKind::data, {ns + domain}, {}, datatype};
    };
    auto object = [&](const std::string& name, const std::string& domain,
                      const std::string& range) {
      return PropertyDef{ns + name, PropertyKind::object, {ns + domain}, {ns + range}, ""};
    };
    std::vector<PropertyDef> properties = {
        data("missionName", "Mission", xsd::string_type),
        data("missionStatus", "Mission", xsd::string_type),
        data("launchDate", "Mission", xsd::dateTime),
        data("endOfLife", "Mission", xsd::dateTime),
        data("objectives", "Mission", xsd::string_type),
        object("hasInstrument", "Mission", "Instrument"),
        object("hasOrbit", "Mission", "Orbit"),
        data("instrumentName", "Instrument", xsd::string_type),
        data("instrumentType", "Instrument", xsd::string_type),
        data("measurementsApp", "Instrument", xsd::string_type),
        data("orbitAltitude", "Orbit", xsd::string_type),
        data("orbitInclination", "Orbit", xsd::string_type),
        data("orbitType", "Orbit", xsd::string_type),
        data("stakeholderName", "Stakeholder", xsd::string_type),
        object("isBasedIn", "Stakeholder", "Country"),
        object("managesMission", "Stakeholder", "Mission"),
        object("ownsInstrument", "Stakeholder", "Instrument"),
        data("countryName", "Country", xsd::string_type),
    };
    std::map<std::string, std::string> prefixes = {
        {"sm", ns}, {"rdf", rdf::ns}, {"rdfs", rdfs::ns}, {"xsd", xsd::ns}};
    return OntologySchema(std::move(classes), std::move(properties), ns, std::move(prefixes));
  }();
  return schema;
}

OntologySchema load_schema(const std::string& turtle_text) {
  ParseResult parsed = parse(turtle_text);
  if (!parsed.ok()) {
    const SyntaxError& first = parsed.errors.front();
    std::ostringstream msg;
    msg << "schema parse failed at " << first.line << ":" << first.column << ": "
        << first.message;
    throw SchemaError(msg.str());
  }
  const Graph& g = parsed.graph;

  std::map<std::string, ClassDef> classes;
  std::set<std::string> property_iris;
  std::map<std::string, std::string> labels;
  for (const Triple& t : g) {
    if (!is_iri(t.subject)) continue;
    const std::string& s = iri_value(t.subject);
    if (t.predicate.value == rdf::type && is_iri(t.object)) {
      const std::string& o = iri_value(t.object);
      if (o == rdfs::Class || o == owl::Class) classes[s] = ClassDef{s, local_name(s)};
      if (o == rdf::Property || o == owl::ObjectProperty || o == owl::DatatypeProperty)
        property_iris.insert(s);
    }
    if (t.predicate.value == rdfs::label && is_literal(t.object))
      labels[s] = std::get<Literal>(t.object).lexical;
    if (t.predicate.value == rdfs::domain || t.predicate.value == rdfs::range)
      property_iris.insert(s);
  }
  if (classes.empty()) throw SchemaError("no classes declared");
  for (auto& [iri, def] : classes) {
    auto it = labels.find(iri);
    if (it != labels.end()) def.label = it->second;
  }

  std::vector<PropertyDef> properties;
  for (const std::string& p : property_iris) {
    std::set<std::string> domains, range_iris;
    for (const Triple& t : g) {
      if (!is_iri(t.subject) || iri_value(t.subject) != p || !is_iri(t.object)) continue;
      if (t.predicate.value == rdfs::domain) domains.insert(iri_value(t.object));
      if (t.predicate.value == rdfs::range) range_iris.insert(iri_value(t.object));
    }
    if (domains.empty()) throw SchemaError("property " + p + " has no rdfs:domain");
    if (range_iris.empty()) throw SchemaError("property " + p + " has no rdfs:range");

    PropertyDef def;
    def.iri = p;
    def.domains = std::move(domains);
    bool xsd_range = std::all_of(range_iris.begin(), range_iris.end(),
                                 [](const std::string& r) { return r.starts_with(xsd::ns); });
    if (xsd_range) {
      if (range_iris.size() != 1)
        throw SchemaError("data property " + p + " must have a single datatype range");
      def.kind = PropertyKind::data;
      def.datatype = *range_iris.begin();
    } else {
      def.kind = PropertyKind::object;
      for (const auto& r : range_iris)
        if (!classes.count(r))
          throw SchemaError("property " + p + " has range " + r +
                            " which is neither a class nor an XSD datatype");
      def.ranges = std::move(range_iris);
    }
    properties.push_back(std::move(def));
  }

  // Canonical namespace: the one shared by most declared classes.
  std::map<std::string, int> ns_votes;
  for (const auto& [iri, def] : classes) {
    auto cut = iri.find_last_of("#/");
    if (cut != std::string::npos) ns_votes[iri.substr(0, cut + 1)]++;
  }
  std::string canonical_ns;
  int best = -1;
  for (const auto& [ns, votes] : ns_votes) {
    if (votes > best) {
      best = votes;
      canonical_ns = ns;
    }
  }

  std::map<std::string, std::string> prefixes = g.prefixes();
  bool bound = std::any_of(prefixes.begin(), prefixes.end(),
                           [&](const auto& kv) { return kv.second == canonical_ns; });
  if (!bound) prefixes["sm"] = canonical_ns;

  std::vector<ClassDef> class_list;
  class_list.reserve(classes.size());
  for (auto& [iri, def] : classes) class_list.push_back(std::move(def));
  return OntologySchema(std::move(class_list), std::move(properties), canonical_ns,
                        std::move(prefixes));
}

std::string serialize_schema(const OntologySchema& schema) {
  Graph g;
  for (const auto& [label, iri] : schema.canonical_prefixes()) g.set_prefix(label, iri);
  for (const auto& [iri, def] : schema.classes()) {
    g.insert(Triple{Iri{iri}, Iri{rdf::type}, Iri{rdfs::Class}});
    g.insert(Triple{Iri{iri}, Iri{rdfs::label}, Literal{def.label}});
  }
  for (const auto& [iri, def] : schema.properties()) {
    g.insert(Triple{Iri{iri}, Iri{rdf::type}, Iri{rdf::Property}});
    for (const auto& d : def.domains)
      g.insert(Triple{Iri{iri}, Iri{rdfs::domain}, Iri{d}});
    if (def.kind == PropertyKind::data) {
      g.insert(Triple{Iri{iri}, Iri{rdfs::range}, Iri{def.datatype}});
    } else {
      for (const auto& r : def.ranges)
        g.insert(Triple{Iri{iri}, Iri{rdfs::range}, Iri{r}});
    }
  }
  return serialize(g);
}

std::string describe_schema(const OntologySchema& schema) {
  std::ostringstream out;
  out << "The ontology defines the following classes and properties.\n";
  for (const auto& [class_iri, cls] : schema.classes()) {
    out << "\nClass " << cls.label << ":\n";
    for (const auto& [prop_iri, prop] : schema.properties()) {
      if (!prop.domains.count(class_iri)) continue;
      out << "  - " << local_name(prop_iri);
      if (prop.kind == PropertyKind::data) {
        out << " (data property, " << local_name(prop.datatype) << ")";
      } else {
        out << " (object property, range";
        for (const auto& r : prop.ranges) out << " " << local_name(r);
        out << ")";
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::unknown_property: return "unknown_property";
    case ViolationKind::domain_violation: return "domain_violation";
    case ViolationKind::range_violation: return "range_violation";
    case ViolationKind::untyped_individual: return "untyped_individual";
    case ViolationKind::datatype_mismatch: return "datatype_mismatch";
  }
  return "unknown";
}

namespace {

bool all_digits(const std::string& s, std::size_t from, std::size_t to) {
  if (from >= to || to > s.size()) return false;
  for (std::size_t i = from; i < to; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

bool valid_date_part(const std::string& s) {
  // YYYY-MM-DD
  return s.size() == 10 && all_digits(s, 0, 4) && s[4] == '-' && all_digits(s, 5, 7) &&
         s[7] == '-' && all_digits(s, 8, 10);
}

bool valid_time_part(const std::string& s) {
  // hh:mm:ss with optional fraction and optional zone (Z or +hh:mm)
  if (s.size() < 8) return false;
  if (!all_digits(s, 0, 2) || s[2] != ':' || !all_digits(s, 3, 5) || s[5] != ':' ||
      !all_digits(s, 6, 8))
    return false;
  std::size_t i = 8;
  if (i < s.size() && s[i] == '.') {
    std::size_t j = i + 1;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i + 1) return false;
    i = j;
  }
  if (i == s.size()) return true;
  if (s[i] == 'Z') return i + 1 == s.size();
  if (s[i] == '+' || s[i] == '-')
    return s.size() == i + 6 && all_digits(s, i + 1, i + 3) && s[i + 3] == ':' &&
           all_digits(s, i + 4, i + 6);
  return false;
}

bool valid_datetime(const std::string& s) {
  auto t = s.find('T');
  if (t == std::string::npos) return false;
  return valid_date_part(s.substr(0, t)) && valid_time_part(s.substr(t + 1));
}

bool valid_integer(const std::string& s) {
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  return all_digits(s, i, s.size());
}

bool valid_decimal(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos) return valid_integer(s);
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  return all_digits(s, i, dot) && all_digits(s, dot + 1, s.size());
}

bool valid_double(const std::string& s) {
  auto e = s.find_first_of("eE");
  if (e == std::string::npos) return valid_decimal(s);
  return valid_decimal(s.substr(0, e)) && valid_integer(s.substr(e + 1));
}

}  // namespace

bool is_bare_date(const std::string& lexical) { return valid_date_part(lexical); }

bool lexical_valid(const std::string& datatype_iri, const std::string& lexical) {
  if (datatype_iri == xsd::string_type) return true;
  if (datatype_iri == xsd::dateTime) return valid_datetime(lexical);
  if (datatype_iri == xsd::date) return valid_date_part(lexical);
  if (datatype_iri == xsd::integer) return valid_integer(lexical);
  if (datatype_iri == xsd::decimal) return valid_decimal(lexical);
  if (datatype_iri == xsd::double_type) return valid_double(lexical);
  if (datatype_iri == xsd::boolean)
    return lexical == "true" || lexical == "false" || lexical == "0" || lexical == "1";
  // Unrecognized XSD types pass on lexical form; schemas restrict the set.
  return true;
}

std::set<std::string> schema_types(const Graph& graph, const OntologySchema& schema,
                                   const Term& term) {
  std::set<std::string> types;
  for (const Triple& t : graph) {
    if (t.predicate.value != rdf::type || !(t.subject == term)) continue;
    if (is_iri(t.object) && schema.is_class(iri_value(t.object)))
      types.insert(iri_value(t.object));
  }
  return types;
}

bool literal_in_range(const Literal& lit, const std::string& datatype_iri) {
  if (datatype_iri == xsd::string_type) return lit.datatype == xsd::string_type;
  if (lit.datatype != datatype_iri && lit.datatype != xsd::string_type) return false;
  if (!lit.language.empty()) return false;
  return lexical_valid(datatype_iri, lit.lexical);
}

namespace {

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += local_name(s);
  }
  return out;
}

}  // namespace

std::vector<ConformanceViolation> conforms(const Graph& graph, const OntologySchema& schema) {
  std::vector<ConformanceViolation> violations;

  // Type assertions cache: term -> schema classes.
  std::map<Term, std::set<std::string>> types;
  for (const Triple& t : graph) {
    if (t.predicate.value == rdf::type && is_iri(t.object) &&
        schema.is_class(iri_value(t.object)))
      types[t.subject].insert(iri_value(t.object));
  }
  auto types_of = [&](const Term& term) -> const std::set<std::string>& {
    static const std::set<std::string> empty;
    auto it = types.find(term);
    return it == types.end() ? empty : it->second;
  };

  // At most one violation per triple: the first failed conjunct, checked in
  // the order property membership, subject/domain, object/range.
  auto check = [&](const Triple& t) -> std::optional<ConformanceViolation> {
    if (t.predicate.value == rdf::type) {
      if (!is_iri(t.object))
        return ConformanceViolation{t, ViolationKind::range_violation,
                                    "rdf:type requires a class IRI as object"};
      if (!schema.is_class(iri_value(t.object)))
        return ConformanceViolation{
            t, ViolationKind::untyped_individual,
            local_name(iri_value(t.object)) + " is not a class of the schema"};
      return std::nullopt;
    }

    const PropertyDef* prop = schema.find_property(t.predicate.value);
    if (!prop)
      return ConformanceViolation{
          t, ViolationKind::unknown_property,
          local_name(t.predicate.value) + " is not a property of the schema"};

    const auto& subject_types = types_of(t.subject);
    if (subject_types.empty())
      return ConformanceViolation{t, ViolationKind::untyped_individual,
                                  "subject has no schema class type"};
    bool in_domain = std::any_of(subject_types.begin(), subject_types.end(),
                                 [&](const std::string& c) { return prop->domains.count(c); });
    if (!in_domain)
      return ConformanceViolation{t, ViolationKind::domain_violation,
                                  "subject type {" + join(subject_types) + "} outside domain {" +
                                      join(prop->domains) + "}"};

    if (prop->kind == PropertyKind::data) {
      if (!is_literal(t.object))
        return ConformanceViolation{t, ViolationKind::range_violation,
                                    "data property requires a literal object"};
      if (!literal_in_range(std::get<Literal>(t.object), prop->datatype))
        return ConformanceViolation{t, ViolationKind::datatype_mismatch,
                                    "\"" + std::get<Literal>(t.object).lexical +
                                        "\" is not a valid " + local_name(prop->datatype)};
      return std::nullopt;
    }

    if (is_literal(t.object))
      return ConformanceViolation{t, ViolationKind::range_violation,
                                  "object property requires a resource object"};
    const auto& object_types = types_of(t.object);
    if (object_types.empty())
      return ConformanceViolation{t, ViolationKind::untyped_individual,
                                  "object has no schema class type"};
    bool in_range = std::any_of(object_types.begin(), object_types.end(),
                                [&](const std::string& c) { return prop->ranges.count(c); });
    if (!in_range)
      return ConformanceViolation{t, ViolationKind::range_violation,
                                  "object type {" + join(object_types) + "} outside range {" +
                                      join(prop->ranges) + "}"};
    return std::nullopt;
  };

  for (const Triple& t : graph) {
    if (auto violation = check(t)) violations.push_back(std::move(*violation));
  }
  return violations;
}

}  // namespace kbp
