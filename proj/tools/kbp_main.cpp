#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kbp/dataset.hpp"
#include "kbp/errors.hpp"
#include "kbp/eval.hpp"
#include "kbp/genloop.hpp"
#include "kbp/ontology.hpp"
#include "kbp/query.hpp"
#include "kbp/repair.hpp"
#include "kbp/turtle.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kbp::InputError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw kbp::InputError("cannot write file: " + path.string());
  out << content;
}

/// Flat key = value file; '#' starts a comment, values may be quoted.
std::map<std::string, std::string> parse_config_file(const std::string& text) {
  std::map<std::string, std::string> config;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (!key.empty()) config[key] = value;
  }
  return config;
}

/// CLI flag > environment variable > config file > default.
class Settings {
public:
  void load_config(const std::string& path) {
    if (!path.empty()) file_ = parse_config_file(read_file(path));
  }
  std::string resolve(bool cli_given, const std::string& cli_value, const char* env_name,
                      const std::string& file_key, const std::string& fallback) const {
    if (cli_given) return cli_value;
    if (env_name) {
      const char* env = std::getenv(env_name);
      if (env && *env) return env;
    }
    auto it = file_.find(file_key);
    if (it != file_.end()) return it->second;
    return fallback;
  }

private:
  std::map<std::string, std::string> file_;
};

const kbp::OntologySchema& load_schema_or_builtin(const std::string& path,
                                                  std::optional<kbp::OntologySchema>& storage) {
  if (path.empty()) return kbp::builtin_mission_schema();
  storage = kbp::load_schema(read_file(path));
  return *storage;
}

std::unique_ptr<kbp::genloop::ChatBackend> make_backend(const std::string& replay_path,
                                                        const std::string& endpoint,
                                                        const std::string& model,
                                                        const std::string& api_key) {
  if (!replay_path.empty())
    return std::make_unique<kbp::genloop::ReplayBackend>(
        kbp::genloop::ReplayBackend::from_json_text(read_file(replay_path)));
  if (endpoint.empty())
    throw kbp::ConfigError("no backend configured: pass --endpoint/--replay or set KBP_ENDPOINT");
  return std::make_unique<kbp::genloop::HttpBackend>(endpoint, model, api_key);
}

nlohmann::json outcome_to_json(const kbp::repair::RepairOutcome& outcome) {
  nlohmann::json doc;
  doc["status"] = outcome.valid() ? "valid" : "invalid";
  doc["stage_reached"] = kbp::repair::to_string(outcome.stage_reached);
  auto& fixes = doc["fixes_applied"] = nlohmann::json::array();
  for (const auto& [kind, count] : outcome.fixes_applied)
    fixes.push_back({{"kind", kbp::repair::to_string(kind)}, {"count", count}});
  auto& deleted = doc["deleted_triples"] = nlohmann::json::array();
  static const std::map<std::string, std::string> no_prefixes;
  for (const kbp::Triple& t : outcome.deleted_triples)
    deleted.push_back(kbp::serialize_term(t.subject, no_prefixes) + " " +
                      kbp::serialize_term(kbp::Term(t.predicate), no_prefixes) + " " +
                      kbp::serialize_term(t.object, no_prefixes) + " .");
  doc["parsed"] = {{"gen", outcome.parsed.gen},
                   {"ns", outcome.parsed.ns},
                   {"lex_sint", outcome.parsed.lex_sint}};
  doc["warnings"] = outcome.warnings;
  doc["triples"] = outcome.graph ? outcome.graph->size() : 0;
  return doc;
}

int cmd_validate(const std::string& file) {
  kbp::ParseResult result = kbp::parse(read_file(file));
  if (result.ok()) return 0;
  for (const kbp::SyntaxError& e : result.errors)
    std::cerr << e.line << ":" << e.column << " " << e.message << "\n";
  return 1;
}

int cmd_repair(const std::string& file, const kbp::OntologySchema& schema,
               const std::string& report_path) {
  kbp::repair::RepairOutcome outcome = kbp::repair::repair_pipeline(read_file(file), schema);
  if (!report_path.empty()) write_file(report_path, outcome_to_json(outcome).dump(2) + "\n");
  for (const std::string& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  if (outcome.valid()) {
    std::cout << kbp::serialize(*outcome.graph);
    return 0;
  }
  std::cerr << "repair failed at stage " << kbp::repair::to_string(outcome.stage_reached) << "\n";
  return 1;
}

int cmd_generate(const std::string& corpus_path, const kbp::OntologySchema& schema,
                 kbp::genloop::ChatBackend& backend, int max_iters,
                 const kbp::genloop::SamplingParams& params,
                 const kbp::genloop::GenOptions& options, const std::string& out_dir) {
  auto corpus = kbp::genloop::parse_corpus_jsonl(read_file(corpus_path));
  auto result = kbp::genloop::run_iterations(corpus, backend, schema, max_iters, params, options);

  fs::create_directories(out_dir);
  for (const auto& [id, graph] : result.records)
    write_file(fs::path(out_dir) / (id + ".ttl"), kbp::serialize(graph));
  write_file(fs::path(out_dir) / "stats.csv", kbp::genloop::render_stats_csv(result.stats));
  std::string summaries;
  for (const auto& [id, summary] : result.summaries) {
    nlohmann::json line = {{"id", id}, {"summary", summary}};
    summaries += line.dump() + "\n";
  }
  write_file(fs::path(out_dir) / "summaries.jsonl", summaries);

  std::cout << kbp::genloop::render_stats_csv(result.stats);
  std::cout << "valid: " << result.records.size() << "/" << corpus.size() << "\n";
  return 0;
}

std::map<std::string, std::string> load_summaries_jsonl(const std::string& text) {
  std::map<std::string, std::string> summaries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("id") ||
        !doc.contains("summary"))
      throw kbp::InputError("summaries line " + std::to_string(line_no) +
                            " must be {\"id\": ..., \"summary\": ...}");
    summaries[doc["id"].get<std::string>()] = doc["summary"].get<std::string>();
  }
  return summaries;
}

int cmd_dataset(const std::string& summaries_path, const std::string& turtle_dir,
                const std::string& reference_ids_path, bool with_ontology,
                const kbp::OntologySchema& schema, const std::string& template_path,
                const std::string& out_dir) {
  auto summaries = load_summaries_jsonl(read_file(summaries_path));

  std::map<std::string, kbp::Graph> graphs;
  for (const auto& entry : fs::directory_iterator(turtle_dir)) {
    if (entry.path().extension() != ".ttl") continue;
    kbp::ParseResult parsed = kbp::parse(read_file(entry.path()));
    if (!parsed.ok())
      throw kbp::InputError("turtle file does not parse: " + entry.path().string());
    graphs[entry.path().stem().string()] = std::move(parsed.graph);
  }

  std::set<std::string> reference_ids;
  {
    std::istringstream in(read_file(reference_ids_path));
    std::string line;
    while (std::getline(in, line)) {
      auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      auto e = line.find_last_not_of(" \t\r");
      reference_ids.insert(line.substr(b, e - b + 1));
    }
  }

  std::string instruction_template =
      template_path.empty() ? "" : read_file(template_path);
  auto records =
      kbp::dataset::build_records(summaries, graphs, with_ontology, schema, instruction_template);
  auto split = kbp::dataset::split(records, reference_ids);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "train.jsonl", kbp::dataset::to_jsonl(split.train));
  write_file(fs::path(out_dir) / "validation.jsonl", kbp::dataset::to_jsonl(split.validation));
  std::cout << "train: " << split.train.size() << ", validation: " << split.validation.size()
            << "\n";
  return 0;
}

int cmd_query(const std::string& file, const std::string& pattern_text,
              const kbp::OntologySchema& schema) {
  kbp::ParseResult parsed = kbp::parse(read_file(file));
  if (!parsed.ok()) {
    for (const kbp::SyntaxError& e : parsed.errors)
      std::cerr << e.line << ":" << e.column << " " << e.message << "\n";
    return 1;
  }
  kbp::query::Pattern pattern = kbp::query::parse_pattern(pattern_text, parsed.graph, &schema);
  static const std::map<std::string, std::string> no_prefixes;
  for (const kbp::Triple& t : kbp::query::match(parsed.graph, pattern))
    std::cout << kbp::serialize_term(t.subject, no_prefixes) << " "
              << kbp::serialize_term(kbp::Term(t.predicate), no_prefixes) << " "
              << kbp::serialize_term(t.object, no_prefixes) << " .\n";
  return 0;
}

int cmd_evaluate(const std::string& predicted_dir, const std::string& references_path,
                 const kbp::OntologySchema& schema, kbp::genloop::ChatBackend* judge,
                 const std::string& out_path) {
  std::map<std::string, kbp::Graph> predicted;
  std::map<std::string, kbp::repair::RepairOutcome> outcomes;
  for (const auto& entry : fs::directory_iterator(predicted_dir)) {
    if (entry.path().extension() != ".ttl") continue;
    std::string id = entry.path().stem().string();
    kbp::repair::RepairOutcome outcome = kbp::repair::assess(read_file(entry.path()), schema);
    if (outcome.valid()) predicted[id] = *outcome.graph;
    outcomes[id] = std::move(outcome);
  }

  std::string ref_text = read_file(references_path);
  std::vector<kbp::eval::ReferenceRecord> references =
      fs::path(references_path).extension() == ".csv"
          ? kbp::eval::load_references_csv(ref_text)
          : kbp::eval::load_references_jsonl(ref_text);

  kbp::eval::EvalReport report =
      kbp::eval::evaluate(predicted, references, outcomes, schema, judge);
  if (!out_path.empty()) write_file(out_path, kbp::eval::report_to_json(report).dump(2) + "\n");
  std::cout << kbp::eval::render_report_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge base population toolkit for the space mission ontology"};
  app.require_subcommand(1);

  std::string config_path, schema_path;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--schema", schema_path, "ontology schema in Turtle (default: built-in)");

  std::string endpoint, model = "llama3-8b-instruct", replay_path;
  int parallel = 4, max_iters = 9, token_budget = kbp::genloop::kDefaultTokenBudget;
  std::optional<unsigned> seed;
  kbp::genloop::SamplingParams sampling;

  auto* validate_cmd = app.add_subcommand("validate", "check a Turtle file for syntax errors");
  std::string validate_file;
  validate_cmd->add_option("file", validate_file, "Turtle file")->required();

  auto* repair_cmd = app.add_subcommand("repair", "repair a model reply into valid Turtle");
  std::string repair_file, repair_report;
  repair_cmd->add_option("file", repair_file, "raw model output")->required();
  repair_cmd->add_option("--report", repair_report, "write a JSON repair report here");

  auto* generate_cmd =
      app.add_subcommand("generate", "run the iterative generate-validate-repair loop");
  std::string corpus_path, out_dir = "out", example_path;
  generate_cmd->add_option("--corpus", corpus_path, "mission corpus JSONL")->required();
  generate_cmd->add_option("--out", out_dir, "output directory");
  generate_cmd->add_option("--max-iters", max_iters, "maximum generation iterations");
  generate_cmd->add_option("--endpoint", endpoint, "chat-completions endpoint URL");
  generate_cmd->add_option("--model", model, "model name for the request body");
  generate_cmd->add_option("--replay", replay_path, "replay backend JSON file");
  generate_cmd->add_option("--parallel", parallel, "concurrent requests per iteration");
  generate_cmd->add_option("--token-budget", token_budget, "description truncation budget");
  generate_cmd->add_option("--example", example_path, "task example file for the prompt");
  generate_cmd->add_option("--temperature", sampling.temperature, "sampling temperature");
  generate_cmd->add_option("--top-p", sampling.top_p, "nucleus sampling threshold");
  generate_cmd->add_option("--max-tokens", sampling.max_tokens, "completion token limit");
  generate_cmd->add_option("--seed", seed, "seed for stochastic stub backends");

  auto* dataset_cmd = app.add_subcommand("dataset", "assemble instruction-tuning records");
  std::string summaries_path, turtle_dir, reference_ids_path, template_path,
      dataset_out = "dataset";
  bool with_ontology = false;
  dataset_cmd->add_option("--summaries", summaries_path, "summaries JSONL")->required();
  dataset_cmd->add_option("--turtle-dir", turtle_dir, "directory of <id>.ttl graphs")->required();
  dataset_cmd->add_option("--reference-ids", reference_ids_path, "validation ids, one per line")
      ->required();
  dataset_cmd->add_flag("--with-ontology", with_ontology,
                        "include the ontology text in instructions");
  dataset_cmd->add_option("--template", template_path,
                          "instruction template with {ontology} and {summary}");
  dataset_cmd->add_option("--out", dataset_out, "output directory");

  auto* query_cmd = app.add_subcommand("query", "match a triple pattern against a graph");
  std::string query_file, pattern_text;
  query_cmd->add_option("file", query_file, "Turtle file")->required();
  query_cmd->add_option("--pattern", pattern_text, "pattern \"s p o\" with ? as wildcard")
      ->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score predicted graphs against references");
  std::string predicted_dir, references_path, report_out = "report.json", judge_endpoint,
              judge_model = "llama3-8b-instruct", judge_replay;
  evaluate_cmd->add_option("--predicted", predicted_dir, "directory of predicted <id>.ttl")
      ->required();
  evaluate_cmd->add_option("--references", references_path, "reference CSV or JSONL")->required();
  evaluate_cmd->add_option("--out", report_out, "report JSON path");
  evaluate_cmd->add_option("--judge-endpoint", judge_endpoint, "judge model endpoint");
  evaluate_cmd->add_option("--judge-model", judge_model, "judge model name");
  evaluate_cmd->add_option("--judge-replay", judge_replay, "judge replay JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Settings settings;
    settings.load_config(config_path);
    std::optional<kbp::OntologySchema> schema_storage;
    const kbp::OntologySchema& schema = load_schema_or_builtin(
        settings.resolve(!schema_path.empty(), schema_path, nullptr, "schema", ""),
        schema_storage);

    if (validate_cmd->parsed()) return cmd_validate(validate_file);
    if (repair_cmd->parsed()) return cmd_repair(repair_file, schema, repair_report);

    if (generate_cmd->parsed()) {
      std::string resolved_endpoint = settings.resolve(
          generate_cmd->count("--endpoint") > 0, endpoint, "KBP_ENDPOINT", "endpoint", "");
      std::string resolved_model =
          settings.resolve(generate_cmd->count("--model") > 0, model, nullptr, "model", model);
      std::string api_key = settings.resolve(false, "", "KBP_API_KEY", "api_key", "");
      auto backend = make_backend(replay_path, resolved_endpoint, resolved_model, api_key);
      kbp::genloop::GenOptions options;
      options.parallel = parallel;
      options.token_budget = token_budget;
      if (!example_path.empty()) options.example = read_file(example_path);
      return cmd_generate(corpus_path, schema, *backend, max_iters, sampling, options, out_dir);
    }

    if (dataset_cmd->parsed())
      return cmd_dataset(summaries_path, turtle_dir, reference_ids_path, with_ontology, schema,
                         template_path, dataset_out);
    if (query_cmd->parsed()) return cmd_query(query_file, pattern_text, schema);

    if (evaluate_cmd->parsed()) {
      std::unique_ptr<kbp::genloop::ChatBackend> judge;
      std::string resolved_judge = settings.resolve(evaluate_cmd->count("--judge-endpoint") > 0,
                                                    judge_endpoint, nullptr, "judge_endpoint", "");
      if (!judge_replay.empty() || !resolved_judge.empty())
        judge = make_backend(judge_replay, resolved_judge, judge_model,
                             settings.resolve(false, "", "KBP_API_KEY", "api_key", ""));
      return cmd_evaluate(predicted_dir, references_path, schema, judge.get(), report_out);
    }
  } catch (const kbp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
