#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "kbp/errors.hpp"

#include "kbp/genloop.hpp"
#include "kbp/ontology.hpp"
#include "kbp/turtle.hpp"

namespace kbp::testing {

inline const std::string kNs = "http://example.org/space-mission#";

/// Random graphs shaped like mission extractions: one or more missions with
/// instruments, orbits, stakeholders and countries, plus assertions drawn
/// from the built-in schema. Always schema-conformant.
class MissionGraphGen {
public:
  explicit MissionGraphGen(std::uint64_t seed) : rng_(seed) {}

  Graph next() {
    Graph g;
    g.set_prefix("sm", kNs);
    g.set_prefix("xsd", xsd::ns);
    ++serial_;

    int n_missions = 1 + static_cast<int>(rng_() % 2);
    std::vector<Term> missions;
    for (int i = 0; i < n_missions; ++i) {
      Term m = new_individual("M");
      missions.push_back(m);
      g.insert({m, Iri{rdf::type}, Iri{kNs + "Mission"}});
      g.insert({m, Iri{kNs + "missionName"}, Literal{random_text()}});
      if (coin()) g.insert({m, Iri{kNs + "missionStatus"}, Literal{random_text()}});
      if (coin()) g.insert({m, Iri{kNs + "launchDate"}, Literal{random_datetime(), xsd::dateTime}});
      if (coin()) g.insert({m, Iri{kNs + "endOfLife"}, Literal{random_datetime(), xsd::dateTime}});
      if (coin()) g.insert({m, Iri{kNs + "objectives"}, Literal{random_text()}});
    }
    int n_instruments = static_cast<int>(rng_() % 3);
    for (int i = 0; i < n_instruments; ++i) {
      Term inst = new_individual("I");
      g.insert({inst, Iri{rdf::type}, Iri{kNs + "Instrument"}});
      g.insert({inst, Iri{kNs + "instrumentName"}, Literal{random_text()}});
      if (coin()) g.insert({inst, Iri{kNs + "instrumentType"}, Literal{random_text()}});
      if (coin()) g.insert({inst, Iri{kNs + "measurementsApp"}, Literal{random_text()}});
      g.insert({pick(missions), Iri{kNs + "hasInstrument"}, inst});
    }
    int n_orbits = static_cast<int>(rng_() % 2);
    for (int i = 0; i < n_orbits; ++i) {
      Term orbit = new_individual("O");
      g.insert({orbit, Iri{rdf::type}, Iri{kNs + "Orbit"}});
      if (coin()) g.insert({orbit, Iri{kNs + "orbitAltitude"}, Literal{random_text()}});
      if (coin()) g.insert({orbit, Iri{kNs + "orbitInclination"}, Literal{random_text()}});
      g.insert({orbit, Iri{kNs + "orbitType"}, Literal{random_text()}});
      g.insert({pick(missions), Iri{kNs + "hasOrbit"}, orbit});
    }
    int n_stakeholders = static_cast<int>(rng_() % 2);
    for (int i = 0; i < n_stakeholders; ++i) {
      Term s = new_individual("S");
      g.insert({s, Iri{rdf::type}, Iri{kNs + "Stakeholder"}});
      g.insert({s, Iri{kNs + "stakeholderName"}, Literal{random_text()}});
      g.insert({s, Iri{kNs + "managesMission"}, pick(missions)});
      if (coin()) {
        Term c = new_individual("C");
        g.insert({c, Iri{rdf::type}, Iri{kNs + "Country"}});
        g.insert({c, Iri{kNs + "countryName"}, Literal{random_text()}});
        g.insert({s, Iri{kNs + "isBasedIn"}, c});
      }
    }
    return g;
  }

private:
  bool coin() { return (rng_() & 1) != 0; }

  Term pick(const std::vector<Term>& terms) { return terms[rng_() % terms.size()]; }

  Term new_individual(const std::string& stem) {
    std::string name = stem + std::to_string(serial_) + "_" + std::to_string(counter_++);
    switch (rng_() % 4) {
      case 0: return BlankNode{name};
      case 1: return Iri{"http://data.example.com/item/" + name};
      default: return Iri{kNs + name};
    }
  }

  std::string random_text() {
    static const std::vector<std::string> pool = {
        "Aqua",
        "sun synchronous polar orbit",
        "705 km",
        "value with \"quotes\"",
        "line\nbreak and tab\t",
        "café études",
        "98.2 degrees",
        "N/A placeholder text",
        "backslash \\ inside",
        "Operational",
    };
    std::string base = pool[rng_() % pool.size()];
    if (coin()) base += " " + std::to_string(rng_() % 1000);
    return base;
  }

  std::string random_datetime() {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d",
                  1990 + static_cast<int>(rng_() % 40), 1 + static_cast<int>(rng_() % 12),
                  1 + static_cast<int>(rng_() % 28), static_cast<int>(rng_() % 24),
                  static_cast<int>(rng_() % 60), static_cast<int>(rng_() % 60));
    return buf;
  }

  std::mt19937_64 rng_;
  int serial_ = 0;
  int counter_ = 0;
};

/// LCS length by explicit enumeration: every subsequence of the shorter
/// sequence is tested for containment in the longer one.
inline int lcs_by_enumeration(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
  const auto& shorter = a.size() <= b.size() ? a : b;
  const auto& longer = a.size() <= b.size() ? b : a;
  const std::size_t n = shorter.size();
  int best = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    int bits = std::popcount(mask);
    if (bits <= best) continue;
    std::size_t pos = 0;
    bool contained = true;
    for (std::size_t i = 0; i < n && contained; ++i) {
      if (!(mask & (1ull << i))) continue;
      while (pos < longer.size() && longer[pos] != shorter[i]) ++pos;
      if (pos == longer.size()) {
        contained = false;
      } else {
        ++pos;
      }
    }
    if (contained) best = bits;
  }
  return best;
}

/// Rouge-L F1 from the enumeration oracle.
inline double rouge_by_enumeration(const std::vector<std::string>& candidate,
                                   const std::vector<std::string>& reference) {
  if (candidate.empty() && reference.empty()) return 1.0;
  if (candidate.empty() || reference.empty()) return 0.0;
  int lcs = lcs_by_enumeration(candidate, reference);
  if (lcs == 0) return 0.0;
  double p = static_cast<double>(lcs) / candidate.size();
  double r = static_cast<double>(lcs) / reference.size();
  return 2.0 * p * r / (p + r);
}

/// Bit-parallel LCS over symbol ids (Allison-Dix row encoding); an
/// independent second route for large sweeps. Sequences must be <= 64 long.
inline int lcs_bit_parallel(const std::vector<std::uint8_t>& a,
                            const std::vector<std::uint8_t>& b, int alphabet) {
  std::vector<std::uint64_t> masks(alphabet, 0);
  for (std::size_t i = 0; i < a.size(); ++i) masks[a[i]] |= 1ull << i;
  std::uint64_t row = 0;
  for (std::uint8_t c : b) {
    std::uint64_t s = row | masks[c];
    row = s & ~(s - ((row << 1) | 1));
  }
  return std::popcount(row);
}

/// Backend whose replies follow a per-mission schedule: mission ids are
/// recovered from the prompt text, and each mission's reply is drawn from
/// its script in attempt order (the last entry repeats).
class ScriptedBackend : public genloop::ChatBackend {
public:
  void set_script(const std::string& mission_id, std::vector<std::string> replies) {
    scripts_[mission_id] = std::move(replies);
  }

  std::string complete(const std::vector<genloop::ChatMessage>& messages,
                       const genloop::SamplingParams&) override {
    const std::string& last = messages.back().content;
    // Summarization requests carry the description; echo a tagged summary.
    if (messages.size() == 1 && last.find("Provide a summary") != std::string::npos) {
      std::string id = find_id(last);
      return "SUMMARY id=" + id;
    }
    std::string id = find_id(last);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = scripts_.find(id);
    if (it == scripts_.end()) throw kbp::ConfigError("no script for mission '" + id + "'");
    std::size_t attempt = attempts_[id]++;
    const auto& replies = it->second;
    return replies[std::min(attempt, replies.size() - 1)];
  }

  int attempts(const std::string& mission_id) const {
    auto it = attempts_.find(mission_id);
    return it == attempts_.end() ? 0 : static_cast<int>(it->second);
  }

private:
  static std::string find_id(const std::string& text) {
    auto pos = text.find("id=");
    if (pos == std::string::npos) throw kbp::ConfigError("no mission id marker in prompt");
    std::string id;
    for (std::size_t i = pos + 3; i < text.size() && (std::isalnum(static_cast<unsigned char>(
                                                          text[i])) ||
                                                      text[i] == '_' || text[i] == '-');
         ++i)
      id += text[i];
    return id;
  }

  std::mutex mutex_;
  std::map<std::string, std::vector<std::string>> scripts_;
  std::map<std::string, std::size_t> attempts_;
};

/// Canonical valid Turtle emitted by stubs for a given mission id.
inline std::string valid_turtle_for(const std::string& id) {
  return "@prefix sm: <" + kNs + "> .\n" +
         "sm:" + id + " a sm:Mission ;\n    sm:missionName \"" + id + "\" .\n";
}

}  // namespace kbp::testing
