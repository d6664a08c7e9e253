#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kbp/genloop.hpp"
#include "kbp/ontology.hpp"
#include "kbp/repair.hpp"
#include "kbp/turtle.hpp"

namespace kbp::eval {

/// Lowercase tokens split on any non-alphanumeric character.
std::vector<std::string> tokenize(const std::string& text);

/// Rouge-L F1 over pre-tokenized sequences: LCS-based precision against the
/// candidate, recall against the reference, balanced F-measure. Two empty
/// sequences score 1, one empty sequence scores 0.
double rouge_l_tokens(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference);

double rouge_l(const std::string& candidate, const std::string& reference);

/// First decimal number in the reply, clamped to [0,1].
/// Throws JudgeParseError when none is present.
double parse_judge_score(const std::string& reply);

const std::string& default_judge_prompt();

/// Ask the backend to score the semantic similarity of two texts in [0,1].
/// The template's {candidate} and {reference} placeholders are filled in.
double llm_similarity(const std::string& candidate, const std::string& reference,
                      genloop::ChatBackend& backend,
                      const std::string& prompt_template = default_judge_prompt());

/// Fraction of outcomes with valid status. Throws InputError on empty input.
double valid_turtle_rate(const std::vector<repair::RepairOutcome>& outcomes);

struct ReferenceRecord {
  std::string mission_id;
  std::map<std::string, std::vector<std::string>> values;  // property local name -> values
};

struct PropertyScore {
  std::string property;  // local name
  std::optional<double> rouge;
  std::optional<double> similarity;
  int support = 0;  // missions whose reference carries the property
};

struct EvalReport {
  std::vector<PropertyScore> per_property;
  double average_rouge = 0.0;
  std::optional<double> average_similarity;
  double valid_turtle_rate = 0.0;
};

/// The eleven properties scored in the report, as local names.
const std::vector<std::string>& default_evaluated_properties();

/// Human-readable row label for a property local name.
std::string display_name(const std::string& property_local_name);

/// Score predicted graphs against reference records. Candidate values are
/// aligned to reference values per property by greedy maximum-Rouge pairing;
/// unmatched reference values score zero, and missions without a valid
/// prediction score zero on every property their reference supports. Without
/// a judge backend the similarity columns are omitted.
EvalReport evaluate(const std::map<std::string, Graph>& predicted,
                    const std::vector<ReferenceRecord>& references,
                    const std::map<std::string, repair::RepairOutcome>& outcomes,
                    const OntologySchema& schema, genloop::ChatBackend* judge = nullptr,
                    const std::vector<std::string>& properties = {});

std::string render_report_table(const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);

/// CSV with a mission_id column plus property columns; multiple values in a
/// cell are '|'-separated. Quoted fields with doubled-quote escapes.
std::vector<ReferenceRecord> load_references_csv(const std::string& text);

/// JSONL of {"mission_id": ..., "<property>": "v" | ["v", ...], ...}.
std::vector<ReferenceRecord> load_references_jsonl(const std::string& text);

}  // namespace kbp::eval
