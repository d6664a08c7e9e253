#include "kbp/turtle.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace kbp {

bool is_iri(const Term& t) { return std::holds_alternative<Iri>(t); }
bool is_blank(const Term& t) { return std::holds_alternative<BlankNode>(t); }
bool is_literal(const Term& t) { return std::holds_alternative<Literal>(t); }

const std::string& iri_value(const Term& t) { return std::get<Iri>(t).value; }

std::string local_name(const std::string& iri) {
  auto hash = iri.find_last_of('#');
  if (hash != std::string::npos) return iri.substr(hash + 1);
  auto slash = iri.find_last_of('/');
  if (slash != std::string::npos) return iri.substr(slash + 1);
  return iri;
}

namespace {

bool is_absolute_iri(const std::string& iri) {
  if (iri.empty() || !std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
  for (std::size_t i = 1; i < iri.size(); ++i) {
    char c = iri[i];
    if (c == ':') return true;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      return false;
  }
  return false;
}

bool name_start_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool name_char(char c) {
  return name_start_char(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-';
}

enum class Tok {
  Eof,
  Dot,
  Semicolon,
  Comma,
  LBracket,
  RBracket,
  LParen,
  RParen,
  Caret,      // ^^
  AtName,     // @prefix, @base or a language tag
  IriRef,
  PName,      // prefix:local, text=prefix, text2=local
  BlankLabel, // _:label
  StringLit,
  IntegerLit,
  DecimalLit,
  DoubleLit,
  BooleanLit,
  KeywordA,
  QuestionName,  // ?name, always a syntax error in this grammar
  Invalid,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;   // main payload
  std::string text2;  // local part for PName
  int line = 1;
  int column = 1;
  std::string error;  // set when kind == Invalid
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_trivia();
    Token t;
    t.line = line_;
    t.column = col_;
    if (at_end()) return t;

    char c = peek();
    switch (c) {
      case '.': {
        // A dot can start a decimal (".5") but never mid-name here.
        if (pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))
          return lex_number(t);
        advance();
        t.kind = Tok::Dot;
        return t;
      }
      case ';': advance(); t.kind = Tok::Semicolon; return t;
      case ',': advance(); t.kind = Tok::Comma; return t;
      case '[': advance(); t.kind = Tok::LBracket; return t;
      case ']': advance(); t.kind = Tok::RBracket; return t;
      case '(': advance(); t.kind = Tok::LParen; return t;
      case ')': advance(); t.kind = Tok::RParen; return t;
      case '^':
        advance();
        if (!at_end() && peek() == '^') {
          advance();
          t.kind = Tok::Caret;
          return t;
        }
        return invalid(t, "'^^' expected", "^");
      case '@': {
        advance();
        std::string name;
        while (!at_end() && (name_char(peek()) || peek() == '-')) name += take();
        if (name.empty()) return invalid(t, "directive or language tag expected after '@'", "@");
        t.kind = Tok::AtName;
        t.text = name;
        return t;
      }
      case '<': return lex_iri(t);
      case '"': return lex_string(t);
      case '?': {
        advance();
        std::string name;
        while (!at_end() && name_char(peek())) name += take();
        t.kind = Tok::QuestionName;
        t.text = name;
        return t;
      }
      default: break;
    }

    if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) return lex_number(t);
    if (name_start_char(c) || c == ':') return lex_name(t);

    advance();
    return invalid(t, std::string("unexpected character '") + c + "'", std::string(1, c));
  }

private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }
  char take() {
    char c = src_[pos_];
    advance();
    return c;
  }
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token invalid(Token& t, std::string message, std::string fragment) {
    t.kind = Tok::Invalid;
    t.error = std::move(message);
    t.text = std::move(fragment);
    return t;
  }

  Token lex_iri(Token& t) {
    advance();  // consume '<'
    std::string value;
    while (!at_end()) {
      char c = peek();
      if (c == '>') {
        advance();
        t.kind = Tok::IriRef;
        t.text = value;
        return t;
      }
      if (c == '\n') return invalid(t, "unterminated IRI", "<" + value);
      if (c == '\\') {
        advance();
        if (!append_escape(value)) return invalid(t, "invalid escape in IRI", value);
        continue;
      }
      value += take();
    }
    return invalid(t, "unterminated IRI", "<" + value);
  }

  Token lex_string(Token& t) {
    advance();  // consume opening '"'
    // Long string form """..."""
    if (pos_ + 1 < src_.size() && src_[pos_] == '"' && src_[pos_ + 1] == '"') {
      advance();
      advance();
      std::string value;
      while (!at_end()) {
        if (peek() == '"' && pos_ + 2 < src_.size() + 1 && src_.compare(pos_, 3, "\"\"\"") == 0) {
          advance();
          advance();
          advance();
          t.kind = Tok::StringLit;
          t.text = value;
          return t;
        }
        if (peek() == '\\') {
          advance();
          if (!append_escape(value)) return invalid(t, "invalid escape in string", value);
          continue;
        }
        value += take();
      }
      return invalid(t, "unterminated string", value);
    }
    std::string value;
    while (!at_end()) {
      char c = peek();
      if (c == '"') {
        advance();
        t.kind = Tok::StringLit;
        t.text = value;
        return t;
      }
      if (c == '\n') return invalid(t, "unterminated string", value);
      if (c == '\\') {
        advance();
        if (!append_escape(value)) return invalid(t, "invalid escape in string", value);
        continue;
      }
      value += take();
    }
    return invalid(t, "unterminated string", value);
  }

  bool append_escape(std::string& out) {
    if (at_end()) return false;
    char c = take();
    switch (c) {
      case 't': out += '\t'; return true;
      case 'n': out += '\n'; return true;
      case 'r': out += '\r'; return true;
      case 'b': out += '\b'; return true;
      case 'f': out += '\f'; return true;
      case '"': out += '"'; return true;
      case '\'': out += '\''; return true;
      case '\\': out += '\\'; return true;
      case 'u': return append_unicode(out, 4);
      case 'U': return append_unicode(out, 8);
      default: return false;
    }
  }

  bool append_unicode(std::string& out, int digits) {
    unsigned code = 0;
    for (int i = 0; i < digits; ++i) {
      if (at_end() || !std::isxdigit(static_cast<unsigned char>(peek()))) return false;
      char c = take();
      unsigned v = std::isdigit(static_cast<unsigned char>(c))
                       ? static_cast<unsigned>(c - '0')
                       : static_cast<unsigned>(std::tolower(c) - 'a' + 10);
      code = (code << 4) | v;
    }
    if (code < 0x80) {
      out += static_cast<char>(code);
    } else if (code < 0x800) {
      out += static_cast<char>(0xc0 | (code >> 6));
      out += static_cast<char>(0x80 | (code & 0x3f));
    } else if (code < 0x10000) {
      out += static_cast<char>(0xe0 | (code >> 12));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (code & 0x3f));
    } else {
      out += static_cast<char>(0xf0 | (code >> 18));
      out += static_cast<char>(0x80 | ((code >> 12) & 0x3f));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (code & 0x3f));
    }
    return true;
  }

  Token lex_number(Token& t) {
    std::string text;
    bool seen_dot = false;
    bool seen_exp = false;
    if (peek() == '+' || peek() == '-') text += take();
    while (!at_end()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        text += take();
      } else if (c == '.' && !seen_dot && !seen_exp) {
        // Dot only belongs to the number when a digit follows.
        if (pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
          seen_dot = true;
          text += take();
        } else {
          break;
        }
      } else if ((c == 'e' || c == 'E') && !seen_exp) {
        seen_exp = true;
        text += take();
        if (!at_end() && (peek() == '+' || peek() == '-')) text += take();
      } else {
        break;
      }
    }
    if (text.empty() || !std::isdigit(static_cast<unsigned char>(text.back())))
      return invalid(t, "malformed number", text);
    t.text = text;
    t.kind = seen_exp ? Tok::DoubleLit : (seen_dot ? Tok::DecimalLit : Tok::IntegerLit);
    return t;
  }

  // Bare names: keyword 'a', booleans, blank node labels and prefixed names.
  Token lex_name(Token& t) {
    std::string prefix;
    if (peek() != ':') {
      prefix += take();
      while (!at_end()) {
        char c = peek();
        if (name_char(c)) {
          prefix += take();
        } else if (c == '.' && pos_ + 1 < src_.size() && name_char(src_[pos_ + 1])) {
          prefix += take();  // interior dot
        } else {
          break;
        }
      }
    }
    if (at_end() || peek() != ':') {
      if (prefix == "a") {
        t.kind = Tok::KeywordA;
        return t;
      }
      if (prefix == "true" || prefix == "false") {
        t.kind = Tok::BooleanLit;
        t.text = prefix;
        return t;
      }
      return invalid(t, "unexpected name '" + prefix + "'", prefix);
    }
    advance();  // consume ':'
    std::string local;
    while (!at_end()) {
      char c = peek();
      if (name_char(c) || c == '%' || std::isdigit(static_cast<unsigned char>(c))) {
        local += take();
      } else if (c == '.' && pos_ + 1 < src_.size() &&
                 (name_char(src_[pos_ + 1]) || std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        local += take();
      } else {
        break;
      }
    }
    if (prefix == "_") {
      if (local.empty()) return invalid(t, "blank node label expected after '_:'", "_:");
      t.kind = Tok::BlankLabel;
      t.text = local;
      return t;
    }
    t.kind = Tok::PName;
    t.text = prefix;
    t.text2 = local;
    return t;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(const std::string& src) : lexer_(src) { advance(); }

  ParseResult run() {
    while (cur_.kind != Tok::Eof) {
      if (cur_.kind == Tok::AtName) {
        parse_directive();
      } else {
        parse_triple_statement();
      }
    }
    ParseResult result;
    result.graph = std::move(graph_);
    result.errors = std::move(errors_);
    return result;
  }

private:
  void advance() {
    cur_ = lexer_.next();
    if (cur_.kind == Tok::Invalid) {
      record(cur_.error, cur_.text);
      // Invalid tokens are consumed by the recovery loop of the caller.
    }
  }

  void record(const std::string& message, const std::string& fragment) {
    SyntaxError e;
    e.line = cur_.line;
    e.column = cur_.column;
    e.message = message;
    e.offending_fragment = fragment;
    errors_.push_back(std::move(e));
  }

  // Skip to just past the next '.', resynchronizing statement-wise.
  void recover() {
    while (cur_.kind != Tok::Eof) {
      bool was_dot = cur_.kind == Tok::Dot;
      advance();
      if (was_dot) return;
    }
  }

  void parse_directive() {
    if (cur_.text == "base") {
      record("@base is not supported; use absolute IRIs", "@base");
      recover();
      return;
    }
    if (cur_.text != "prefix") {
      record("unknown directive '@" + cur_.text + "'", "@" + cur_.text);
      recover();
      return;
    }
    advance();
    std::string label;
    if (cur_.kind == Tok::PName && cur_.text2.empty()) {
      label = cur_.text;
      advance();
    } else if (cur_.kind == Tok::KeywordA) {
      // "@prefix a: <...>" lexes the label as the keyword; allow it.
      label = "a";
      advance();
      if (cur_.kind != Tok::PName && cur_.kind != Tok::IriRef) {
        record("':' expected after prefix label", "a");
        recover();
        return;
      }
    } else {
      record("prefix label expected after @prefix", cur_.text);
      recover();
      return;
    }
    if (cur_.kind != Tok::IriRef) {
      record("namespace IRI expected in @prefix", cur_.text);
      recover();
      return;
    }
    if (!is_absolute_iri(cur_.text)) {
      record("prefix IRI must be absolute: <" + cur_.text + ">", cur_.text);
      recover();
      return;
    }
    graph_.set_prefix(label, cur_.text);
    advance();
    if (cur_.kind != Tok::Dot) {
      record("'.' expected after @prefix directive", cur_.text);
      recover();
      return;
    }
    advance();
  }

  bool resolve_pname(const Token& t, std::string& out) {
    auto it = graph_.prefixes().find(t.text);
    if (it == graph_.prefixes().end()) {
      record("undeclared prefix '" + t.text + "'", t.text + ":" + t.text2);
      return false;
    }
    out = it->second + t.text2;
    return true;
  }

  bool parse_subject(Term& out) {
    switch (cur_.kind) {
      case Tok::IriRef: {
        if (!is_absolute_iri(cur_.text)) {
          record("relative IRI not supported: <" + cur_.text + ">", cur_.text);
          return false;
        }
        out = Iri{cur_.text};
        advance();
        return true;
      }
      case Tok::PName: {
        std::string iri;
        if (!resolve_pname(cur_, iri)) return false;
        out = Iri{iri};
        advance();
        return true;
      }
      case Tok::BlankLabel: {
        out = BlankNode{cur_.text};
        advance();
        return true;
      }
      case Tok::QuestionName:
        record("'?" + cur_.text + "' is not a valid subject (SPARQL variable syntax)",
               "?" + cur_.text);
        return false;
      case Tok::LBracket:
        record("anonymous blank nodes are not supported", "[");
        return false;
      case Tok::LParen:
        record("collections are not supported", "(");
        return false;
      default:
        record("subject expected", cur_.text);
        return false;
    }
  }

  bool parse_predicate(Iri& out) {
    switch (cur_.kind) {
      case Tok::KeywordA:
        out = Iri{rdf::type};
        advance();
        return true;
      case Tok::IriRef:
        if (!is_absolute_iri(cur_.text)) {
          record("relative IRI not supported: <" + cur_.text + ">", cur_.text);
          return false;
        }
        out = Iri{cur_.text};
        advance();
        return true;
      case Tok::PName: {
        std::string iri;
        if (!resolve_pname(cur_, iri)) return false;
        out = Iri{iri};
        advance();
        return true;
      }
      default:
        record("predicate expected", cur_.text);
        return false;
    }
  }

  bool parse_object(Term& out) {
    switch (cur_.kind) {
      case Tok::IriRef:
        if (!is_absolute_iri(cur_.text)) {
          record("relative IRI not supported: <" + cur_.text + ">", cur_.text);
          return false;
        }
        out = Iri{cur_.text};
        advance();
        return true;
      case Tok::PName: {
        std::string iri;
        if (!resolve_pname(cur_, iri)) return false;
        out = Iri{iri};
        advance();
        return true;
      }
      case Tok::BlankLabel:
        out = BlankNode{cur_.text};
        advance();
        return true;
      case Tok::StringLit: {
        Literal lit;
        lit.lexical = cur_.text;
        advance();
        if (cur_.kind == Tok::AtName) {
          lit.language = cur_.text;
          advance();
        } else if (cur_.kind == Tok::Caret) {
          advance();
          if (cur_.kind == Tok::IriRef) {
            lit.datatype = cur_.text;
            advance();
          } else if (cur_.kind == Tok::PName) {
            std::string iri;
            if (!resolve_pname(cur_, iri)) return false;
            lit.datatype = iri;
            advance();
          } else {
            record("datatype IRI expected after '^^'", cur_.text);
            return false;
          }
        }
        out = lit;
        return true;
      }
      case Tok::IntegerLit:
        out = Literal{cur_.text, xsd::integer};
        advance();
        return true;
      case Tok::DecimalLit:
        out = Literal{cur_.text, xsd::decimal};
        advance();
        return true;
      case Tok::DoubleLit:
        out = Literal{cur_.text, xsd::double_type};
        advance();
        return true;
      case Tok::BooleanLit:
        out = Literal{cur_.text, xsd::boolean};
        advance();
        return true;
      case Tok::QuestionName:
        record("'?" + cur_.text + "' is not a valid object (SPARQL variable syntax)",
               "?" + cur_.text);
        return false;
      case Tok::LBracket:
        record("anonymous blank nodes are not supported", "[");
        return false;
      case Tok::LParen:
        record("collections are not supported", "(");
        return false;
      default:
        record("object expected", cur_.text);
        return false;
    }
  }

  void parse_triple_statement() {
    Term subject;
    if (!parse_subject(subject)) {
      recover();
      return;
    }
    while (true) {
      Iri predicate;
      if (!parse_predicate(predicate)) {
        recover();
        return;
      }
      while (true) {
        Term object;
        if (!parse_object(object)) {
          recover();
          return;
        }
        graph_.insert(Triple{subject, predicate, object});
        if (cur_.kind == Tok::Comma) {
          advance();
          continue;
        }
        break;
      }
      if (cur_.kind == Tok::Semicolon) {
        advance();
        if (cur_.kind == Tok::Dot) break;  // trailing ';'
        continue;
      }
      break;
    }
    if (cur_.kind != Tok::Dot) {
      record("'.' expected at end of statement", cur_.text);
      recover();
      return;
    }
    advance();
  }

  Lexer lexer_;
  Token cur_;
  Graph graph_;
  std::vector<SyntaxError> errors_;
};

}  // namespace

ParseResult parse(const std::string& text) { return Parser(text).run(); }

namespace {

bool pn_local_safe(const std::string& local) {
  if (local.empty()) return false;
  if (!name_start_char(local[0])) return false;
  return std::all_of(local.begin(), local.end(), [](char c) { return name_char(c); });
}

std::string escape_literal(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_iri(const std::string& iri, const std::map<std::string, std::string>& prefixes) {
  const std::string* best_label = nullptr;
  std::size_t best_len = 0;
  for (const auto& [label, ns] : prefixes) {
    if (ns.size() > best_len && iri.size() > ns.size() && iri.compare(0, ns.size(), ns) == 0 &&
        pn_local_safe(iri.substr(ns.size()))) {
      best_label = &label;
      best_len = ns.size();
    }
  }
  if (best_label) return *best_label + ":" + iri.substr(best_len);
  return "<" + iri + ">";
}

}  // namespace

std::string serialize_term(const Term& t, const std::map<std::string, std::string>& prefixes) {
  if (const auto* iri = std::get_if<Iri>(&t)) return render_iri(iri->value, prefixes);
  if (const auto* blank = std::get_if<BlankNode>(&t)) return "_:" + blank->label;
  const auto& lit = std::get<Literal>(t);
  std::string out = "\"" + escape_literal(lit.lexical) + "\"";
  if (!lit.language.empty()) {
    out += "@" + lit.language;
  } else if (lit.datatype != xsd::string_type) {
    out += "^^" + render_iri(lit.datatype, prefixes);
  }
  return out;
}

std::string serialize(const Graph& graph) {
  std::ostringstream out;
  const auto& prefixes = graph.prefixes();
  for (const auto& [label, ns] : prefixes)
    out << "@prefix " << label << ": <" << ns << "> .\n";
  if (!prefixes.empty() && !graph.empty()) out << "\n";

  // subject -> predicate -> objects, all in canonical order; rdf:type first.
  std::map<Term, std::map<std::pair<bool, Iri>, std::set<Term>>> blocks;
  for (const Triple& t : graph)
    blocks[t.subject][{t.predicate.value != rdf::type, t.predicate}].insert(t.object);

  for (const auto& [subject, preds] : blocks) {
    out << serialize_term(subject, prefixes);
    bool first_pred = true;
    for (const auto& [key, objects] : preds) {
      if (!first_pred) out << " ;\n   ";
      first_pred = false;
      const Iri& pred = key.second;
      out << " " << (pred.value == rdf::type ? "a" : render_iri(pred.value, prefixes));
      bool first_obj = true;
      for (const Term& o : objects) {
        out << (first_obj ? " " : " , ") << serialize_term(o, prefixes);
        first_obj = false;
      }
    }
    out << " .\n";
  }
  return out.str();
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// First token of a line looks like a Turtle subject (or a SPARQL-style
// variable, which the repair pass can still rescue).
bool subject_like(const std::string& tok) {
  if (tok.empty()) return false;
  if (tok[0] == '?' && tok.size() > 1) return true;
  if (tok[0] == '<') return tok.find('>') != std::string::npos;
  if (tok.rfind("_:", 0) == 0) return tok.size() > 2;
  auto colon = tok.find(':');
  if (colon == std::string::npos) return false;
  for (std::size_t i = 0; i < colon; ++i)
    if (!name_char(tok[i]) && tok[i] != '.') return false;
  return true;
}

bool triple_like_line(const std::string& line) {
  std::string t = trim(line);
  if (t.size() < 5 || t.back() != '.') return false;
  std::istringstream words(t);
  std::string first, second, third;
  if (!(words >> first >> second >> third)) return false;
  if (!subject_like(first)) return false;
  return second == "a" || second.find(':') != std::string::npos || second[0] == '<';
}

// Returns npos when nothing Turtle-shaped is present.
std::size_t payload_start(const std::string& text) {
  std::size_t best = std::string::npos;
  std::size_t at = text.find("@prefix");
  if (at != std::string::npos) best = at;

  std::size_t line_start = 0;
  while (line_start < text.size() && line_start < best) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    if (triple_like_line(text.substr(line_start, line_end - line_start))) {
      best = std::min(best, line_start);
      break;
    }
    line_start = line_end + 1;
  }
  return best;
}

bool find_fenced_block(const std::string& text, std::string& out) {
  std::size_t open = text.find("```");
  if (open == std::string::npos) return false;
  std::size_t content = text.find('\n', open);
  if (content == std::string::npos) return false;
  ++content;
  std::size_t close = text.find("```", content);
  if (close == std::string::npos) {
    out = trim(text.substr(content));
    return true;
  }
  out = trim(text.substr(content, close - content));
  return true;
}

}  // namespace

std::string extract_turtle_block(const std::string& llm_output) {
  std::string fenced;
  if (find_fenced_block(llm_output, fenced)) return fenced;
  std::size_t start = payload_start(llm_output);
  if (start != std::string::npos) return llm_output.substr(start);
  return llm_output;
}

bool has_turtle_payload(const std::string& llm_output) {
  std::string fenced;
  if (find_fenced_block(llm_output, fenced)) return true;
  return payload_start(llm_output) != std::string::npos;
}

}  // namespace kbp
