#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kbp/ontology.hpp"
#include "kbp/repair.hpp"
#include "kbp/turtle.hpp"

#include <nlohmann/json_fwd.hpp>

namespace kbp::genloop {

struct MissionDocument {
  std::string id;
  std::string description;
  std::optional<std::string> summary;
};

struct SamplingParams {
  double temperature = 0.6;
  double top_p = 0.9;
  int max_tokens = 2048;
};

enum class Role { user, system, assistant };

std::string to_string(Role role);

struct ChatMessage {
  Role role;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

/// Abstraction over a chat-completions model endpoint.
class ChatBackend {
public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages,
                               const SamplingParams& params) = 0;
};

/// Client for an OpenAI-compatible chat-completions HTTP endpoint.
/// Plain http only; the API key travels as a bearer token.
class HttpBackend : public ChatBackend {
public:
  HttpBackend(std::string endpoint, std::string model, std::string api_key = "");
  std::string complete(const std::vector<ChatMessage>& messages,
                       const SamplingParams& params) override;

private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
};

/// Deterministic stub keyed by a digest of the message sequence. A lookup
/// miss raises ConfigError naming the digest, so missing fixtures surface
/// immediately.
class ReplayBackend : public ChatBackend {
public:
  ReplayBackend() = default;
  explicit ReplayBackend(std::map<std::string, std::string> replies);
  static ReplayBackend from_json_text(const std::string& json_text);

  void add(const std::vector<ChatMessage>& messages, const std::string& reply);
  std::string complete(const std::vector<ChatMessage>& messages,
                       const SamplingParams& params) override;

private:
  std::map<std::string, std::string> replies_;
};

/// Stable 64-bit hex digest of a message sequence.
std::string message_digest(const std::vector<ChatMessage>& messages);

/// Request body for the chat-completions wire format.
nlohmann::json build_chat_request(const std::string& model,
                                  const std::vector<ChatMessage>& messages,
                                  const SamplingParams& params);

/// Send a dialogue to the backend and return the assistant text.
std::string chat(ChatBackend& backend, const std::vector<ChatMessage>& messages,
                 const SamplingParams& params = {});

inline constexpr int kDefaultTokenBudget = 8192;

/// Ask the backend for a summary of the mission description, truncated to
/// token_budget whitespace-delimited tokens beforehand.
std::string summarize(const MissionDocument& doc, ChatBackend& backend,
                      int token_budget = kDefaultTokenBudget,
                      const SamplingParams& params = {});

/// Truncate text to the first `budget` whitespace-delimited tokens.
std::string truncate_tokens(const std::string& text, int budget);

/// The extraction dialogue: ontology acknowledgment request, the assistant's
/// acknowledgment, and the extraction request carrying the task example and
/// the mission summary. The model's reply completes the exchange.
std::vector<ChatMessage> build_extraction_dialogue(const std::string& summary,
                                                   const OntologySchema& schema,
                                                   const std::string& example);

/// Built-in example of the extraction task; replaceable via CLI flag.
const std::string& default_task_example();

struct IterationStats {
  int iteration = 1;
  int missions_processed = 0;
  int valid_gen = 0;        // syntactically valid as generated
  int valid_after_ns = 0;   // parses after namespace fixes
  int valid_after_lex = 0;  // parses after lexical fixes
  int valid_after_sem = 0;  // valid and conformant after the full pipeline
  int non_valid = 0;
  bool operator==(const IterationStats&) const = default;
};

std::string render_stats_csv(const std::vector<IterationStats>& stats);

struct GenOptions {
  int parallel = 4;
  int token_budget = kDefaultTokenBudget;
  std::string example = default_task_example();
  repair::RepairOptions repair;
};

struct GenResult {
  std::vector<std::pair<std::string, Graph>> records;  // corpus order
  std::vector<IterationStats> stats;
  std::map<std::string, std::string> summaries;
  std::map<std::string, repair::RepairOutcome> final_outcomes;
};

/// Iterative generate-validate-repair loop. Iteration 1 processes the whole
/// corpus; every later iteration reprocesses only the still-invalid
/// missions. A mission's graph is frozen the first time it comes out valid.
GenResult run_iterations(const std::vector<MissionDocument>& corpus, ChatBackend& backend,
                         const OntologySchema& schema, int max_iters,
                         const SamplingParams& params = {}, const GenOptions& options = {});

/// Corpus JSONL: one {"id": ..., "description": ..., "summary"?: ...} per line.
std::vector<MissionDocument> parse_corpus_jsonl(const std::string& text);

}  // namespace kbp::genloop
