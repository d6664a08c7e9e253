#include "kbp/eval.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kbp/errors.hpp"
#include "kbp/query.hpp"

namespace kbp::eval {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double rouge_l_tokens(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference) {
  if (candidate.empty() && reference.empty()) return 1.0;
  if (candidate.empty() || reference.empty()) return 0.0;

  const std::size_t n = candidate.size();
  const std::size_t m = reference.size();
  std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (candidate[i - 1] == reference[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  const int lcs = prev[m];
  if (lcs == 0) return 0.0;
  const double precision = static_cast<double>(lcs) / static_cast<double>(n);
  const double recall = static_cast<double>(lcs) / static_cast<double>(m);
  return 2.0 * precision * recall / (precision + recall);
}

double rouge_l(const std::string& candidate, const std::string& reference) {
  return rouge_l_tokens(tokenize(candidate), tokenize(reference));
}

double parse_judge_score(const std::string& reply) {
  for (std::size_t i = 0; i < reply.size(); ++i) {
    bool digit = std::isdigit(static_cast<unsigned char>(reply[i])) != 0;
    bool dot_start = reply[i] == '.' && i + 1 < reply.size() &&
                     std::isdigit(static_cast<unsigned char>(reply[i + 1]));
    if (!digit && !dot_start) continue;
    std::size_t j = i;
    bool seen_dot = false;
    while (j < reply.size() &&
           (std::isdigit(static_cast<unsigned char>(reply[j])) || (reply[j] == '.' && !seen_dot))) {
      if (reply[j] == '.') {
        // A trailing dot is sentence punctuation, not part of the number.
        if (j + 1 >= reply.size() || !std::isdigit(static_cast<unsigned char>(reply[j + 1])))
          break;
        seen_dot = true;
      }
      ++j;
    }
    double value = std::stod(reply.substr(i, j - i));
    return std::clamp(value, 0.0, 1.0);
  }
  throw JudgeParseError("judge reply contains no numeric score", reply);
}

const std::string& default_judge_prompt() {
  static const std::string prompt =
      "Rate the semantic similarity of the two texts below on a scale from 0 to 1, where 0 means "
      "unrelated and 1 means the same meaning. Respond with a single number.\n\n"
      "Text A: {candidate}\n"
      "Text B: {reference}";
  return prompt;
}

namespace {

std::string fill_placeholders(std::string text, const std::string& candidate,
                              const std::string& reference) {
  auto replace_all = [](std::string s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
    return s;
  };
  return replace_all(replace_all(std::move(text), "{candidate}", candidate), "{reference}",
                     reference);
}

}  // namespace

double llm_similarity(const std::string& candidate, const std::string& reference,
                      genloop::ChatBackend& backend, const std::string& prompt_template) {
  std::vector<genloop::ChatMessage> messages = {
      {genloop::Role::user, fill_placeholders(prompt_template, candidate, reference)}};
  return parse_judge_score(genloop::chat(backend, messages));
}

double valid_turtle_rate(const std::vector<repair::RepairOutcome>& outcomes) {
  if (outcomes.empty()) throw InputError("valid_turtle_rate requires at least one outcome");
  std::size_t valid = std::count_if(outcomes.begin(), outcomes.end(),
                                    [](const repair::RepairOutcome& o) { return o.valid(); });
  return static_cast<double>(valid) / static_cast<double>(outcomes.size());
}

const std::vector<std::string>& default_evaluated_properties() {
  static const std::vector<std::string> properties = {
      "missionName",   "missionStatus", "launchDate",       "endOfLife",
      "objectives",    "orbitInclination", "orbitAltitude", "orbitType",
      "instrumentName", "measurementsApp", "stakeholderName",
  };
  return properties;
}

std::string display_name(const std::string& property_local_name) {
  static const std::map<std::string, std::string> names = {
      {"missionName", "Mission Name"},
      {"missionStatus", "Mission Status"},
      {"launchDate", "Launch Date"},
      {"endOfLife", "EOL Date"},
      {"objectives", "Objectives"},
      {"orbitInclination", "Orbit Inclination"},
      {"orbitAltitude", "Orbit Altitude"},
      {"orbitType", "Orbit Type"},
      {"instrumentName", "Instrument Name"},
      {"measurementsApp", "Measurements app."},
      {"stakeholderName", "Stakeholder Name"},
  };
  auto it = names.find(property_local_name);
  return it == names.end() ? property_local_name : it->second;
}

namespace {

struct PairScores {
  double rouge_total = 0.0;
  double sim_total = 0.0;
};

// Greedy maximum-Rouge alignment of candidate values to reference values.
// Both lists arrive sorted, so ties resolve deterministically.
PairScores align_and_score(const std::vector<std::string>& candidates,
                           const std::vector<std::string>& refs,
                           genloop::ChatBackend* judge) {
  PairScores out;
  struct Cell {
    double rouge;
    std::size_t c, r;
  };
  std::vector<Cell> cells;
  cells.reserve(candidates.size() * refs.size());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    for (std::size_t r = 0; r < refs.size(); ++r)
      cells.push_back({rouge_l(candidates[c], refs[r]), c, r});
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.rouge != b.rouge) return a.rouge > b.rouge;
    if (a.c != b.c) return a.c < b.c;
    return a.r < b.r;
  });
  std::vector<bool> c_used(candidates.size(), false), r_used(refs.size(), false);
  for (const Cell& cell : cells) {
    if (c_used[cell.c] || r_used[cell.r]) continue;
    c_used[cell.c] = true;
    r_used[cell.r] = true;
    out.rouge_total += cell.rouge;
    if (judge) out.sim_total += llm_similarity(candidates[cell.c], refs[cell.r], *judge);
  }
  return out;
}

}  // namespace

EvalReport evaluate(const std::map<std::string, Graph>& predicted,
                    const std::vector<ReferenceRecord>& references,
                    const std::map<std::string, repair::RepairOutcome>& outcomes,
                    const OntologySchema& schema, genloop::ChatBackend* judge,
                    const std::vector<std::string>& properties) {
  const std::vector<std::string>& props =
      properties.empty() ? default_evaluated_properties() : properties;

  std::vector<repair::RepairOutcome> reference_outcomes;
  for (const ReferenceRecord& ref : references) {
    auto it = outcomes.find(ref.mission_id);
    if (it == outcomes.end())
      throw InputError("no outcome recorded for mission '" + ref.mission_id + "'");
    reference_outcomes.push_back(it->second);
  }

  // Candidate value lists per mission and property, canonically sorted.
  std::map<std::string, std::map<std::string, std::vector<std::string>>> candidates;
  for (const ReferenceRecord& ref : references) {
    auto git = predicted.find(ref.mission_id);
    if (git == predicted.end()) continue;
    query::PropertyValueTable table = query::extract_property_values(git->second, schema);
    auto& per_prop = candidates[ref.mission_id];
    for (const auto& [prop_iri, rows] : table) {
      auto& values = per_prop[local_name(prop_iri)];
      for (const auto& [individual, value] : rows) values.push_back(value);
      std::sort(values.begin(), values.end());
    }
  }

  EvalReport report;
  double rouge_sum = 0.0, sim_sum = 0.0;
  int scored_properties = 0;
  for (const std::string& prop : props) {
    PropertyScore score;
    score.property = prop;
    double rouge_total = 0.0, sim_total = 0.0;
    for (const ReferenceRecord& ref : references) {
      auto vit = ref.values.find(prop);
      if (vit == ref.values.end() || vit->second.empty()) continue;
      ++score.support;
      std::vector<std::string> refs = vit->second;
      std::sort(refs.begin(), refs.end());

      std::vector<std::string> cand;
      auto mit = candidates.find(ref.mission_id);
      if (mit != candidates.end()) {
        auto pit = mit->second.find(prop);
        if (pit != mit->second.end()) cand = pit->second;
      }
      PairScores pair = align_and_score(cand, refs, judge);
      rouge_total += pair.rouge_total / static_cast<double>(refs.size());
      sim_total += pair.sim_total / static_cast<double>(refs.size());
    }
    if (score.support > 0) {
      score.rouge = rouge_total / score.support;
      if (judge) score.similarity = sim_total / score.support;
      rouge_sum += *score.rouge;
      if (judge) sim_sum += *score.similarity;
      ++scored_properties;
    }
    report.per_property.push_back(std::move(score));
  }
  if (scored_properties > 0) {
    report.average_rouge = rouge_sum / scored_properties;
    if (judge) report.average_similarity = sim_sum / scored_properties;
  }
  report.valid_turtle_rate = valid_turtle_rate(reference_outcomes);
  return report;
}

std::string render_report_table(const EvalReport& report) {
  std::ostringstream out;
  bool with_sim = report.average_similarity.has_value();
  out << std::left << std::setw(22) << "Properties/metrics" << std::right << std::setw(8)
      << "Rouge";
  if (with_sim) out << std::setw(8) << "Sim.";
  out << "\n";
  auto fmt = [](std::optional<double> v) {
    if (!v) return std::string("-");
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(3) << *v;
    return cell.str();
  };
  for (const PropertyScore& row : report.per_property) {
    out << std::left << std::setw(22) << display_name(row.property) << std::right << std::setw(8)
        << fmt(row.rouge);
    if (with_sim) out << std::setw(8) << fmt(row.similarity);
    out << "\n";
  }
  out << std::left << std::setw(22) << "Average" << std::right << std::setw(8)
      << fmt(report.average_rouge);
  if (with_sim) out << std::setw(8) << fmt(report.average_similarity);
  out << "\n";
  out << std::left << std::setw(22) << "Valid Turtle rate" << std::right << std::setw(8)
      << fmt(report.valid_turtle_rate) << "\n";
  return out.str();
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json doc;
  auto& rows = doc["per_property"] = nlohmann::json::array();
  for (const PropertyScore& row : report.per_property) {
    nlohmann::json cell = {{"property", row.property},
                           {"display_name", display_name(row.property)},
                           {"support", row.support}};
    if (row.rouge) cell["rouge_l"] = *row.rouge;
    if (row.similarity) cell["llm_similarity"] = *row.similarity;
    rows.push_back(std::move(cell));
  }
  doc["average_rouge"] = report.average_rouge;
  if (report.average_similarity) doc["average_similarity"] = *report.average_similarity;
  doc["valid_turtle_rate"] = report.valid_turtle_rate;
  doc["table"] = render_report_table(report);
  return doc;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::vector<std::string> split_values(const std::string& cell) {
  std::vector<std::string> values;
  std::string value;
  std::istringstream in(cell);
  while (std::getline(in, value, '|'))
    if (!value.empty()) values.push_back(value);
  return values;
}

void check_known_property(const std::string& name) {
  const auto& known = default_evaluated_properties();
  if (std::find(known.begin(), known.end(), name) == known.end())
    throw InputError("unknown reference property '" + name + "'");
}

}  // namespace

std::vector<ReferenceRecord> load_references_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("reference CSV is empty");
  std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "mission_id")
    throw InputError("reference CSV must start with a mission_id column");
  for (std::size_t i = 1; i < header.size(); ++i) check_known_property(header[i]);

  std::vector<ReferenceRecord> records;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(line);
    ReferenceRecord record;
    record.mission_id = fields[0];
    for (std::size_t i = 1; i < fields.size() && i < header.size(); ++i) {
      auto values = split_values(fields[i]);
      if (!values.empty()) record.values[header[i]] = std::move(values);
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<ReferenceRecord> load_references_jsonl(const std::string& text) {
  std::vector<ReferenceRecord> records;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
      throw InputError("reference line " + std::to_string(line_no) + " is not a JSON object");
    ReferenceRecord record;
    for (auto& [key, value] : doc.items()) {
      if (key == "mission_id") {
        record.mission_id = value.get<std::string>();
        continue;
      }
      check_known_property(key);
      std::vector<std::string> values;
      if (value.is_string()) {
        values.push_back(value.get<std::string>());
      } else if (value.is_array()) {
        for (const auto& v : value) values.push_back(v.get<std::string>());
      }
      if (!values.empty()) record.values[key] = std::move(values);
    }
    if (record.mission_id.empty())
      throw InputError("reference line " + std::to_string(line_no) + " has no mission_id");
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace kbp::eval
