#include "kbp/genloop.hpp"

#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "kbp/errors.hpp"

namespace kbp::genloop {

std::string to_string(Role role) {
  switch (role) {
    case Role::user: return "user";
    case Role::system: return "system";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::string message_digest(const std::vector<ChatMessage>& messages) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const ChatMessage& m : messages) {
    mix(to_string(m.role));
    mix("\x1f");
    mix(m.content);
    mix("\x1e");
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

nlohmann::json build_chat_request(const std::string& model,
                                  const std::vector<ChatMessage>& messages,
                                  const SamplingParams& params) {
  nlohmann::json body;
  body["model"] = model;
  body["temperature"] = params.temperature;
  body["top_p"] = params.top_p;
  body["max_tokens"] = params.max_tokens;
  auto& list = body["messages"] = nlohmann::json::array();
  for (const ChatMessage& m : messages)
    list.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return body;
}

std::string chat(ChatBackend& backend, const std::vector<ChatMessage>& messages,
                 const SamplingParams& params) {
  if (messages.empty()) throw InputError("chat requires at least one message");
  for (const ChatMessage& m : messages)
    if (m.content.empty()) throw InputError("chat messages must have non-empty content");
  return backend.complete(messages, params);
}

ReplayBackend::ReplayBackend(std::map<std::string, std::string> replies)
    : replies_(std::move(replies)) {}

ReplayBackend ReplayBackend::from_json_text(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw ConfigError("replay file must be a JSON object of digest -> reply");
  std::map<std::string, std::string> replies;
  for (auto& [digest, reply] : doc.items()) {
    if (!reply.is_string()) throw ConfigError("replay reply for " + digest + " is not a string");
    replies[digest] = reply.get<std::string>();
  }
  return ReplayBackend(std::move(replies));
}

void ReplayBackend::add(const std::vector<ChatMessage>& messages, const std::string& reply) {
  replies_[message_digest(messages)] = reply;
}

std::string ReplayBackend::complete(const std::vector<ChatMessage>& messages,
                                    const SamplingParams&) {
  std::string digest = message_digest(messages);
  auto it = replies_.find(digest);
  if (it == replies_.end())
    throw ConfigError("replay backend has no reply for digest " + digest);
  return it->second;
}

std::string truncate_tokens(const std::string& text, int budget) {
  if (budget <= 0) throw InputError("token budget must be positive");
  int count = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    if (!space && !in_word) {
      ++count;
      if (count > budget) return text.substr(0, i);
    }
    in_word = !space;
  }
  return text;
}

std::string summarize(const MissionDocument& doc, ChatBackend& backend, int token_budget,
                      const SamplingParams& params) {
  if (doc.description.empty()) throw InputError("mission " + doc.id + " has an empty description");
  std::string truncated = truncate_tokens(doc.description, token_budget);
  std::vector<ChatMessage> messages = {
      {Role::user,
       "Provide a summary of the following space mission description in no more than four "
       "paragraphs. Focus on the main topics of the mission ontology: mission name and status, "
       "launch and end-of-life dates, objectives, orbit, instruments, and stakeholders.\n\n" +
           truncated},
  };
  std::string reply = chat(backend, messages, params);
  if (reply.empty()) throw ProtocolError("backend returned an empty summary for " + doc.id);
  return reply;
}

std::vector<ChatMessage> build_extraction_dialogue(const std::string& summary,
                                                   const OntologySchema& schema,
                                                   const std::string& example) {
  if (summary.empty()) throw InputError("mission summary must not be empty");
  std::vector<ChatMessage> messages;
  messages.push_back(
      {Role::user,
       "Please acknowledge that you understand the mission ontology described below.\n\n" +
           describe_schema(schema)});
  messages.push_back(
      {Role::assistant,
       "I understand the ontology. It describes space missions together with their instruments, "
       "orbits, stakeholders and countries, and the data and object properties that relate "
       "them."});
  messages.push_back(
      {Role::user,
       "Extract the individuals of the ontology from the mission summary below and serialize "
       "them in Turtle format. An example of the task is provided.\n\nExample:\n" +
           example + "\n\nMission summary:\n" + summary +
           "\n\nRespond with the Turtle serialization only."});
  return messages;
}

const std::string& default_task_example() {
  static const std::string example = R"(Input:
The Aqua mission is a NASA Earth science satellite launched on 4 May 2002 and still operational.
It studies the water cycle from a sun-synchronous orbit at 705 km altitude with an inclination
of 98.2 degrees, carrying the MODIS imaging spectroradiometer.

Output:
@prefix sm: <http://example.org/space-mission#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .

sm:Aqua a sm:Mission ;
    sm:missionName "Aqua" ;
    sm:missionStatus "Operational" ;
    sm:launchDate "2002-05-04T00:00:00"^^xsd:dateTime ;
    sm:objectives "Study the global water cycle" ;
    sm:hasInstrument sm:MODIS ;
    sm:hasOrbit sm:AquaOrbit .
sm:MODIS a sm:Instrument ;
    sm:instrumentName "MODIS" ;
    sm:instrumentType "Imaging spectroradiometer" .
sm:AquaOrbit a sm:Orbit ;
    sm:orbitAltitude "705 km" ;
    sm:orbitInclination "98.2 degrees" ;
    sm:orbitType "Sun-synchronous" .
sm:NASA a sm:Stakeholder ;
    sm:stakeholderName "NASA" ;
    sm:managesMission sm:Aqua ;
    sm:ownsInstrument sm:MODIS ;
    sm:isBasedIn sm:USA .
sm:USA a sm:Country ;
    sm:countryName "United States" .)";
  return example;
}

std::string render_stats_csv(const std::vector<IterationStats>& stats) {
  std::ostringstream out;
  out << "iter,missions,gen,ns,lex_sint,sem,non_valid\n";
  for (const IterationStats& row : stats) {
    out << row.iteration << "," << row.missions_processed << "," << row.valid_gen << ","
        << row.valid_after_ns << "," << row.valid_after_lex << "," << row.valid_after_sem << ","
        << row.non_valid << "\n";
  }
  return out.str();
}

namespace {

struct MissionRound {
  MissionDocument doc;
  repair::RepairOutcome outcome;
  bool backend_failed = false;
};

}  // namespace

GenResult run_iterations(const std::vector<MissionDocument>& corpus, ChatBackend& backend,
                         const OntologySchema& schema, int max_iters,
                         const SamplingParams& params, const GenOptions& options) {
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (options.parallel < 1) throw InputError("parallel must be at least 1");
  {
    std::set<std::string> ids;
    for (const MissionDocument& doc : corpus) {
      if (doc.description.empty())
        throw InputError("mission " + doc.id + " has an empty description");
      if (!ids.insert(doc.id).second)
        throw InputError("duplicate mission id '" + doc.id + "' in corpus");
    }
  }

  GenResult result;
  std::map<std::string, Graph> frozen;
  std::vector<MissionDocument> pending(corpus.begin(), corpus.end());

  for (int iter = 1; iter <= max_iters && !pending.empty(); ++iter) {
    std::vector<MissionRound> rounds(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) rounds[i].doc = pending[i];

    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto worker = [&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= rounds.size()) return;
        MissionRound& round = rounds[i];
        try {
          if (!round.doc.summary)
            round.doc.summary = summarize(round.doc, backend, options.token_budget, params);
          auto dialogue = build_extraction_dialogue(*round.doc.summary, schema, options.example);
          std::string reply = chat(backend, dialogue, params);
          round.outcome = repair_pipeline(reply, schema, options.repair);
        } catch (const TransportError&) {
          round.backend_failed = true;
        } catch (const ProtocolError&) {
          round.backend_failed = true;
        } catch (...) {
          std::lock_guard<std::mutex> lock(fatal_mutex);
          if (!fatal) fatal = std::current_exception();
          return;
        }
      }
    };
    std::size_t n_threads = std::min<std::size_t>(options.parallel, rounds.size());
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (fatal) std::rethrow_exception(fatal);

    IterationStats row;
    row.iteration = iter;
    row.missions_processed = static_cast<int>(rounds.size());
    std::vector<MissionDocument> still_invalid;
    for (MissionRound& round : rounds) {
      if (round.doc.summary) result.summaries[round.doc.id] = *round.doc.summary;
      if (round.backend_failed) {
        still_invalid.push_back(std::move(round.doc));
        continue;
      }
      const repair::RepairOutcome& o = round.outcome;
      row.valid_gen += o.parsed.gen ? 1 : 0;
      row.valid_after_ns += o.parsed.ns ? 1 : 0;
      row.valid_after_lex += o.parsed.lex_sint ? 1 : 0;
      if (o.valid()) {
        row.valid_after_sem += 1;
        frozen.emplace(round.doc.id, *o.graph);
      } else {
        still_invalid.push_back(std::move(round.doc));
      }
      result.final_outcomes[round.doc.id] = std::move(round.outcome);
    }
    row.non_valid = row.missions_processed - row.valid_after_sem;
    result.stats.push_back(row);
    pending = std::move(still_invalid);
  }

  for (const MissionDocument& doc : corpus) {
    auto it = frozen.find(doc.id);
    if (it != frozen.end()) result.records.emplace_back(doc.id, it->second);
  }
  return result;
}

std::vector<MissionDocument> parse_corpus_jsonl(const std::string& text) {
  std::vector<MissionDocument> corpus;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
      throw InputError("corpus line " + std::to_string(line_no) + " is not a JSON object");
    if (!doc.contains("id") || !doc["id"].is_string())
      throw InputError("corpus line " + std::to_string(line_no) + " is missing string field 'id'");
    if (!doc.contains("description") || !doc["description"].is_string())
      throw InputError("corpus line " + std::to_string(line_no) +
                       " is missing string field 'description'");
    MissionDocument m;
    m.id = doc["id"].get<std::string>();
    m.description = doc["description"].get<std::string>();
    if (doc.contains("summary") && doc["summary"].is_string())
      m.summary = doc["summary"].get<std::string>();
    corpus.push_back(std::move(m));
  }
  return corpus;
}

}  // namespace kbp::genloop
