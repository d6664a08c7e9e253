#include "kbp/dataset.hpp"

#include <nlohmann/json.hpp>

#include "kbp/errors.hpp"

namespace kbp::dataset {

const std::string& default_instruction_template(bool with_ontology) {
  static const std::string with =
      "Extract the individuals of the mission ontology from the mission description below and "
      "serialize them in Turtle format.\n\nOntology:\n{ontology}\nMission description:\n{summary}";
  static const std::string without =
      "Extract the individuals of the mission ontology from the mission description below and "
      "serialize them in Turtle format.\n\nMission description:\n{summary}";
  return with_ontology ? with : without;
}

namespace {

std::string substitute(std::string text, const std::string& placeholder,
                       const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

std::vector<DatasetRecord> build_records(const std::map<std::string, std::string>& summaries,
                                         const std::map<std::string, Graph>& graphs,
                                         bool with_ontology, const OntologySchema& schema,
                                         const std::string& instruction_template) {
  const std::string& tmpl =
      instruction_template.empty() ? default_instruction_template(with_ontology)
                                   : instruction_template;
  std::string ontology_text = with_ontology ? describe_schema(schema) : "";

  std::vector<DatasetRecord> records;
  records.reserve(graphs.size());
  for (const auto& [id, graph] : graphs) {
    auto summary_it = summaries.find(id);
    if (summary_it == summaries.end())
      throw InputError("no summary for mission '" + id + "'");

    DatasetRecord record;
    record.mission_id = id;
    record.with_ontology = with_ontology;
    record.instruction =
        substitute(substitute(tmpl, "{ontology}", ontology_text), "{summary}", summary_it->second);
    record.response = serialize(graph);

    ParseResult reparsed = parse(record.response);
    if (!reparsed.ok())
      throw InputError("serialized response for mission '" + id + "' does not re-parse");
    if (!conforms(reparsed.graph, schema).empty())
      throw InputError("serialized response for mission '" + id + "' violates the schema");
    records.push_back(std::move(record));
  }
  return records;
}

Split split(const std::vector<DatasetRecord>& records,
            const std::set<std::string>& reference_ids) {
  Split out;
  for (const DatasetRecord& r : records) {
    if (reference_ids.count(r.mission_id)) {
      out.validation.push_back(r);
    } else {
      out.train.push_back(r);
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const DatasetRecord& r : records) {
    nlohmann::json line = {{"mission_id", r.mission_id},
                           {"instruction", r.instruction},
                           {"response", r.response},
                           {"with_ontology", r.with_ontology}};
    out += line.dump();
    out += "\n";
  }
  return out;
}

std::vector<DatasetRecord> from_jsonl(const std::string& text) {
  std::vector<DatasetRecord> records;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
      throw InputError("dataset line " + std::to_string(line_no) + " is not a JSON object");
    DatasetRecord r;
    r.mission_id = doc.value("mission_id", "");
    r.instruction = doc.value("instruction", "");
    r.response = doc.value("response", "");
    r.with_ontology = doc.value("with_ontology", false);
    if (r.mission_id.empty())
      throw InputError("dataset line " + std::to_string(line_no) + " has no mission_id");
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace kbp::dataset
