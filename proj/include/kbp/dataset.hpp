#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "kbp/ontology.hpp"
#include "kbp/turtle.hpp"

namespace kbp::dataset {

struct DatasetRecord {
  std::string mission_id;
  std::string instruction;
  std::string response;  // canonical Turtle
  bool with_ontology = false;
  bool operator==(const DatasetRecord&) const = default;
};

/// Instruction template placeholders: {ontology} and {summary}.
const std::string& default_instruction_template(bool with_ontology);

/// One record per mission graph; the response is the canonical serialization
/// and is re-parsed and re-checked against the schema before emission.
/// Throws InputError when a graph has no summary.
std::vector<DatasetRecord> build_records(const std::map<std::string, std::string>& summaries,
                                         const std::map<std::string, Graph>& graphs,
                                         bool with_ontology, const OntologySchema& schema,
                                         const std::string& instruction_template = "");

struct Split {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> validation;
};

/// Stable partition: records whose mission is in reference_ids form the
/// validation set, everything else trains.
Split split(const std::vector<DatasetRecord>& records, const std::set<std::string>& reference_ids);

std::string to_jsonl(const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> from_jsonl(const std::string& text);

}  // namespace kbp::dataset
