#include "opbsp/lp_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "opbsp/error.hpp"

namespace opbsp {

std::string to_string(LpFormat format) {
  return format == LpFormat::kMps ? "mps" : "lp";
}

LpFormat lp_format_from_string(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "lp") return LpFormat::kLp;
  if (lower == "mps") return LpFormat::kMps;
  throw UsageError("unknown LP format '" + text + "' (expected lp or mps)");
}

LpFormat lp_format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".mps" ? LpFormat::kMps : LpFormat::kLp;
}

namespace {

std::string num(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  if (v == 0.0) return "0";
  return fmt::format("{}", v);
}

const char* sense_text(RowSense s) {
  switch (s) {
    case RowSense::kLessEqual: return "<=";
    case RowSense::kGreaterEqual: return ">=";
    case RowSense::kEqual: return "=";
  }
  return "=";
}

// Writes " + 3 x - 2 y" style expressions, wrapping long lines.
void write_terms(std::ostream& out, const std::vector<std::pair<std::string, double>>& terms) {
  int on_line = 0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& [name, coef] = terms[k];
    if (on_line == 6) {
      out << "\n   ";
      on_line = 0;
    }
    const bool neg = std::signbit(coef) && coef != 0.0;
    if (k == 0) {
      out << (neg ? " - " : " ");
    } else {
      out << (neg ? " - " : " + ");
    }
    out << num(std::abs(coef)) << ' ' << name;
    ++on_line;
  }
}

bool is_binary(const LpVariable& v) {
  return v.integer && v.lower == 0.0 && v.upper == 1.0;
}

}  // namespace

void write_lp(const LpModel& model, std::ostream& out) {
  out << "\\ " << model.name << '\n';
  out << (model.maximize ? "Maximize\n" : "Minimize\n");
  out << " obj:";
  std::vector<std::pair<std::string, double>> terms;
  for (const auto& v : model.variables) terms.emplace_back(v.name, v.objective);
  write_terms(out, terms);
  if (model.objective_offset != 0.0) {
    out << (model.objective_offset < 0 ? " - " : " + ")
        << num(std::abs(model.objective_offset));
  }
  out << "\nSubject To\n";
  for (const auto& row : model.rows) {
    out << ' ' << row.name << ':';
    terms.clear();
    for (const auto& t : row.terms) terms.emplace_back(model.variables[t.var].name, t.coef);
    if (terms.empty() && !model.variables.empty()) {
      terms.emplace_back(model.variables.front().name, 0.0);
    }
    write_terms(out, terms);
    out << ' ' << sense_text(row.sense) << ' ' << num(row.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : model.variables) {
    if (is_binary(v)) continue;
    if (v.lower == -kInf && v.upper == kInf) {
      out << ' ' << v.name << " free\n";
    } else if (v.lower == v.upper) {
      out << ' ' << v.name << " = " << num(v.lower) << '\n';
    } else {
      out << ' ' << num(v.lower) << " <= " << v.name << " <= " << num(v.upper) << '\n';
    }
  }
  bool any = false;
  for (const auto& v : model.variables) {
    if (!is_binary(v)) continue;
    if (!any) out << "Binaries\n";
    any = true;
    out << ' ' << v.name << '\n';
  }
  any = false;
  for (const auto& v : model.variables) {
    if (!v.integer || is_binary(v)) continue;
    if (!any) out << "Generals\n";
    any = true;
    out << ' ' << v.name << '\n';
  }
  out << "End\n";
}

void write_mps(const LpModel& model, std::ostream& out) {
  const auto field = [](const std::string& s) { return fmt::format("{:<8}", s); };
  out << "NAME          " << model.name << '\n';
  out << "OBJSENSE\n    " << (model.maximize ? "MAX" : "MIN") << '\n';
  out << "ROWS\n N  obj\n";
  for (const auto& row : model.rows) {
    const char* type = row.sense == RowSense::kLessEqual      ? "L"
                       : row.sense == RowSense::kGreaterEqual ? "G"
                                                              : "E";
    out << ' ' << type << "  " << row.name << '\n';
  }
  std::vector<std::vector<std::pair<int, double>>> cols(model.variables.size());
  for (int r = 0; r < model.num_rows(); ++r) {
    for (const auto& t : model.rows[r].terms) cols[t.var].emplace_back(r, t.coef);
  }
  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  const auto toggle = [&](bool want) {
    if (want == in_int) return;
    out << "    " << field(fmt::format("MARKER{}", marker++)) << "  'MARKER'  "
        << (want ? "'INTORG'" : "'INTEND'") << '\n';
    in_int = want;
  };
  for (std::size_t j = 0; j < model.variables.size(); ++j) {
    const auto& v = model.variables[j];
    toggle(v.integer);
    const std::string name = field(v.name);
    if (v.objective != 0.0 || cols[j].empty()) {
      out << "    " << name << "  " << field("obj") << "  " << num(v.objective) << '\n';
    }
    for (const auto& [r, coef] : cols[j]) {
      out << "    " << name << "  " << field(model.rows[r].name) << "  " << num(coef)
          << '\n';
    }
  }
  toggle(false);
  out << "RHS\n";
  if (model.objective_offset != 0.0) {
    out << "    " << field("RHS") << "  " << field("obj") << "  "
        << num(-model.objective_offset) << '\n';
  }
  for (const auto& row : model.rows) {
    if (row.rhs == 0.0) continue;
    out << "    " << field("RHS") << "  " << field(row.name) << "  " << num(row.rhs)
        << '\n';
  }
  out << "BOUNDS\n";
  for (const auto& v : model.variables) {
    const std::string name = field(v.name);
    if (v.lower == -kInf && v.upper == kInf) {
      out << " FR BND       " << name << '\n';
      continue;
    }
    if (v.lower == v.upper) {
      out << " FX BND       " << name << "  " << num(v.lower) << '\n';
      continue;
    }
    if (v.lower == -kInf) {
      out << " MI BND       " << name << '\n';
    } else if (v.lower != 0.0) {
      out << " LO BND       " << name << "  " << num(v.lower) << '\n';
    }
    if (v.upper != kInf) {
      out << " UP BND       " << name << "  " << num(v.upper) << '\n';
    } else if (v.integer) {
      out << " PL BND       " << name << '\n';
    }
  }
  out << "ENDATA\n";
}

void export_lp(const LpModel& model, const std::filesystem::path& path,
               LpFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  if (format == LpFormat::kMps) {
    write_mps(model, out);
  } else {
    write_lp(model, out);
  }
  if (!out) throw Error("error writing " + path.string());
}

namespace {

double parse_number(const std::string& text, std::size_t line) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "inf" || lower == "+inf" || lower == "infinity" || lower == "+infinity") {
    return kInf;
  }
  if (lower == "-inf" || lower == "-infinity") return -kInf;
  double v = 0.0;
  const char* begin = text.data();
  if (!text.empty() && text[0] == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("expected a number, got '" + text + "'", line);
  }
  return v;
}

// Variable registry shared by both readers.
class ModelBuilder {
 public:
  int var(const std::string& name) {
    const auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const int j = static_cast<int>(model.variables.size());
    model.variables.push_back({name, 0.0, kInf, 0.0, false});
    index_.emplace(name, j);
    return j;
  }
  int find(const std::string& name) const {
    const auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  LpModel model;

 private:
  std::unordered_map<std::string, int> index_;
};

}  // namespace

LpModel read_mps(std::istream& in) {
  ModelBuilder b;
  b.model.name.clear();
  b.model.maximize = false;
  std::unordered_map<std::string, int> rows;
  std::string objective_row;
  std::string section;
  bool integer = false;
  bool ended = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      section = tok[0];
      if (section == "NAME") {
        b.model.name = tok.size() > 1 ? tok[1] : "";
      } else if (section == "OBJSENSE" && tok.size() > 1) {
        b.model.maximize = tok[1] == "MAX" || tok[1] == "MAXIMIZE";
      } else if (section == "ENDATA") {
        ended = true;
        break;
      } else if (section == "RANGES") {
        throw ParseError("MPS RANGES are not supported", lineno);
      } else if (section != "ROWS" && section != "COLUMNS" && section != "RHS" &&
                 section != "BOUNDS" && section != "OBJSENSE") {
        throw ParseError("unknown MPS section '" + section + "'", lineno);
      }
      continue;
    }
    if (section == "OBJSENSE") {
      b.model.maximize = tok[0] == "MAX" || tok[0] == "MAXIMIZE";
    } else if (section == "ROWS") {
      if (tok.size() != 2) throw ParseError("malformed ROWS entry", lineno);
      if (tok[0] == "N") {
        if (objective_row.empty()) objective_row = tok[1];
        continue;
      }
      RowSense sense;
      if (tok[0] == "L") {
        sense = RowSense::kLessEqual;
      } else if (tok[0] == "G") {
        sense = RowSense::kGreaterEqual;
      } else if (tok[0] == "E") {
        sense = RowSense::kEqual;
      } else {
        throw ParseError("unknown row type '" + tok[0] + "'", lineno);
      }
      rows.emplace(tok[1], b.model.num_rows());
      b.model.rows.push_back({tok[1], {}, sense, 0.0});
    } else if (section == "COLUMNS") {
      if (tok.size() >= 3 && tok[1] == "'MARKER'") {
        if (tok[2] == "'INTORG'") {
          integer = true;
        } else if (tok[2] == "'INTEND'") {
          integer = false;
        } else {
          throw ParseError("unknown marker " + tok[2], lineno);
        }
        continue;
      }
      if (tok.size() != 3 && tok.size() != 5) {
        throw ParseError("malformed COLUMNS entry", lineno);
      }
      const int j = b.var(tok[0]);
      b.model.variables[j].integer = integer;
      for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
        const double v = parse_number(tok[k + 1], lineno);
        if (tok[k] == objective_row) {
          b.model.variables[j].objective += v;
          continue;
        }
        const auto it = rows.find(tok[k]);
        if (it == rows.end()) throw ParseError("unknown row '" + tok[k] + "'", lineno);
        b.model.rows[it->second].terms.push_back({j, v});
      }
    } else if (section == "RHS") {
      // Optional set name: pairs start at index 1 when the count is odd.
      const std::size_t start = tok.size() % 2 == 1 ? 1 : 0;
      for (std::size_t k = start; k + 1 < tok.size(); k += 2) {
        const double v = parse_number(tok[k + 1], lineno);
        if (tok[k] == objective_row) {
          b.model.objective_offset = -v;
          continue;
        }
        const auto it = rows.find(tok[k]);
        if (it == rows.end()) throw ParseError("unknown row '" + tok[k] + "'", lineno);
        b.model.rows[it->second].rhs = v;
      }
    } else if (section == "BOUNDS") {
      if (tok.size() < 3) throw ParseError("malformed BOUNDS entry", lineno);
      const std::string& type = tok[0];
      const int j = b.find(tok[2]);
      if (j < 0) throw ParseError("bound on unknown column '" + tok[2] + "'", lineno);
      auto& v = b.model.variables[j];
      const bool needs_value = type == "UP" || type == "LO" || type == "FX" ||
                               type == "BV" || type == "LI" || type == "UI";
      if (needs_value && tok.size() < 4 && type != "BV") {
        throw ParseError("bound " + type + " needs a value", lineno);
      }
      const double val = tok.size() >= 4 ? parse_number(tok[3], lineno) : 0.0;
      if (type == "UP") {
        v.upper = val;
      } else if (type == "LO") {
        v.lower = val;
      } else if (type == "FX") {
        v.lower = v.upper = val;
      } else if (type == "FR") {
        v.lower = -kInf;
        v.upper = kInf;
      } else if (type == "MI") {
        v.lower = -kInf;
      } else if (type == "PL") {
        v.upper = kInf;
      } else if (type == "BV") {
        v.lower = 0.0;
        v.upper = 1.0;
        v.integer = true;
      } else if (type == "LI") {
        v.lower = val;
        v.integer = true;
      } else if (type == "UI") {
        v.upper = val;
        v.integer = true;
      } else {
        throw ParseError("unknown bound type '" + type + "'", lineno);
      }
    } else {
      throw ParseError("data outside of a section", lineno);
    }
  }
  if (!ended) throw ParseError("missing ENDATA", lineno);
  return std::move(b.model);
}

namespace {

struct Token {
  enum Kind { kWord, kNumber, kSign, kRel, kColon, kEnd } kind = kEnd;
  std::string text;
  std::size_t line = 0;
};

bool name_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) ||
         std::string_view("!\"#$%&()/,.;?@_`'{}|~").find(ch) != std::string_view::npos;
}

std::vector<Token> lex_lp(std::istream& in) {
  std::vector<Token> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('\\');
    if (comment != std::string::npos) line.resize(comment);
    std::size_t i = 0;
    while (i < line.size()) {
      const char ch = line[i];
      if (std::isspace(static_cast<unsigned char>(ch))) {
        ++i;
      } else if (ch == '+' || ch == '-') {
        out.push_back({Token::kSign, std::string(1, ch), lineno});
        ++i;
      } else if (ch == ':') {
        out.push_back({Token::kColon, ":", lineno});
        ++i;
      } else if (ch == '<' || ch == '>' || ch == '=') {
        std::string rel(1, ch);
        ++i;
        if (i < line.size() && (line[i] == '=' || line[i] == '<' || line[i] == '>')) {
          rel += line[i++];
        }
        if (rel == "<" || rel == "=<") rel = "<=";
        if (rel == ">" || rel == "=>") rel = ">=";
        out.push_back({Token::kRel, rel, lineno});
      } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        std::size_t j = i;
        while (j < line.size() &&
               (std::isdigit(static_cast<unsigned char>(line[j])) || line[j] == '.')) {
          ++j;
        }
        if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
          if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
            j = k;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
          }
        }
        out.push_back({Token::kNumber, line.substr(i, j - i), lineno});
        i = j;
      } else if (name_char(ch)) {
        std::size_t j = i;
        while (j < line.size() && (name_char(line[j]) || line[j] == '[' || line[j] == ']')) ++j;
        out.push_back({Token::kWord, line.substr(i, j - i), lineno});
        i = j;
      } else {
        throw ParseError(std::string("unexpected character '") + ch + "'", lineno);
      }
    }
  }
  out.push_back({Token::kEnd, "", lineno});
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

enum class LpSection { kNone, kObjective, kConstraints, kBounds, kBinaries, kGenerals, kEnd };

class LpParser {
 public:
  explicit LpParser(std::vector<Token> tokens) : tok_(std::move(tokens)) {}

  LpModel parse() {
    b_.model.name = "lp";
    LpSection section = LpSection::kNone;
    while (peek().kind != Token::kEnd) {
      if (const auto s = section_at(); s) {
        section = *s;
        if (section == LpSection::kEnd) break;
        continue;
      }
      switch (section) {
        case LpSection::kObjective: parse_objective(); break;
        case LpSection::kConstraints: parse_constraint(); break;
        case LpSection::kBounds: parse_bound(); break;
        case LpSection::kBinaries:
        case LpSection::kGenerals: {
          const Token t = next();
          if (t.kind != Token::kWord) throw ParseError("expected a variable name", t.line);
          auto& v = b_.model.variables[b_.var(t.text)];
          v.integer = true;
          if (section == LpSection::kBinaries) {
            v.lower = 0.0;
            v.upper = 1.0;
          }
          break;
        }
        default: throw ParseError("expected Maximize or Minimize", peek().line);
      }
    }
    return std::move(b_.model);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tok_[std::min(pos_ + ahead, tok_.size() - 1)];
  }
  Token next() { return tok_[std::min(pos_++, tok_.size() - 1)]; }

  // Consumes a section keyword if one starts here.
  std::optional<LpSection> section_at() {
    if (peek().kind != Token::kWord) return std::nullopt;
    const std::string w = lower(peek().text);
    if (peek(1).kind == Token::kColon) return std::nullopt;
    LpSection s;
    std::size_t words = 1;
    if (w == "maximize" || w == "maximum" || w == "max" || w == "maximise") {
      b_.model.maximize = true;
      s = LpSection::kObjective;
    } else if (w == "minimize" || w == "minimum" || w == "min" || w == "minimise") {
      b_.model.maximize = false;
      s = LpSection::kObjective;
    } else if ((w == "subject" || w == "such") && peek(1).kind == Token::kWord &&
               (lower(peek(1).text) == "to" || lower(peek(1).text) == "that")) {
      s = LpSection::kConstraints;
      words = 2;
    } else if (w == "st" || w == "s.t.") {
      s = LpSection::kConstraints;
    } else if (w == "bounds" || w == "bound") {
      s = LpSection::kBounds;
    } else if (w == "binaries" || w == "binary" || w == "bin") {
      s = LpSection::kBinaries;
    } else if (w == "generals" || w == "general" || w == "gen" || w == "integers") {
      s = LpSection::kGenerals;
    } else if (w == "end") {
      s = LpSection::kEnd;
    } else {
      return std::nullopt;
    }
    pos_ += words;
    return s;
  }

  // Linear expression up to a relation or a section keyword. Constants are
  // accumulated into `constant`.
  std::vector<LpTerm> parse_expression(double& constant) {
    std::vector<LpTerm> terms;
    constant = 0.0;
    while (true) {
      const Token& t = peek();
      if (t.kind == Token::kEnd || t.kind == Token::kRel) break;
      if (t.kind == Token::kWord && peek(1).kind == Token::kColon) break;
      if (t.kind == Token::kWord && is_keyword(t.text)) break;
      double sign = 1.0;
      while (peek().kind == Token::kSign) {
        if (next().text == "-") sign = -sign;
      }
      double coef = 1.0;
      bool have_number = false;
      if (peek().kind == Token::kNumber) {
        const Token n = next();
        coef = parse_number(n.text, n.line);
        have_number = true;
      }
      if (peek().kind == Token::kWord && !is_keyword(peek().text) &&
          peek(1).kind != Token::kColon) {
        const Token name = next();
        terms.push_back({b_.var(name.text), sign * coef});
      } else if (have_number) {
        constant += sign * coef;
      } else {
        throw ParseError("malformed linear expression near '" + peek().text + "'",
                         peek().line);
      }
    }
    return terms;
  }

  bool is_keyword(const std::string& word) const {
    static const char* const kWords[] = {
        "maximize", "maximum", "max", "maximise", "minimize", "minimum", "min",
        "minimise", "subject", "such", "st", "s.t.", "bounds", "bound",
        "binaries", "binary", "bin", "generals", "general", "gen", "integers", "end"};
    const std::string w = lower(word);
    for (const char* k : kWords) {
      if (w == k) return true;
    }
    return false;
  }

  void parse_objective() {
    if (peek().kind == Token::kWord && peek(1).kind == Token::kColon) pos_ += 2;
    double constant = 0.0;
    const auto terms = parse_expression(constant);
    for (const auto& t : terms) b_.model.variables[t.var].objective += t.coef;
    b_.model.objective_offset += constant;
  }

  double parse_signed_value() {
    double sign = 1.0;
    while (peek().kind == Token::kSign) {
      if (next().text == "-") sign = -sign;
    }
    const Token t = next();
    if (t.kind != Token::kNumber && t.kind != Token::kWord) {
      throw ParseError("expected a number", t.line);
    }
    return sign * parse_number(t.text, t.line);
  }

  void parse_constraint() {
    std::string name;
    if (peek().kind == Token::kWord && peek(1).kind == Token::kColon) {
      name = next().text;
      next();
    } else {
      name = "R" + std::to_string(b_.model.num_rows() + 1);
    }
    double constant = 0.0;
    auto terms = parse_expression(constant);
    const Token rel = next();
    if (rel.kind != Token::kRel) throw ParseError("expected <=, >= or =", rel.line);
    const double rhs = parse_signed_value();
    const RowSense sense = rel.text == "<="   ? RowSense::kLessEqual
                           : rel.text == ">=" ? RowSense::kGreaterEqual
                                              : RowSense::kEqual;
    b_.model.rows.push_back({name, std::move(terms), sense, rhs - constant});
  }

  bool value_ahead() const {
    std::size_t k = 0;
    while (peek(k).kind == Token::kSign) ++k;
    if (peek(k).kind == Token::kNumber) return true;
    if (peek(k).kind != Token::kWord) return false;
    const std::string w = lower(peek(k).text);
    return k > 0 && (w == "inf" || w == "infinity");
  }

  void set_bound(LpVariable& v, const std::string& rel, double value, bool var_on_left) {
    std::string r = rel;
    if (!var_on_left && r != "=") r = r == "<=" ? ">=" : "<=";
    if (r == "<=") {
      v.upper = value;
    } else if (r == ">=") {
      v.lower = value;
    } else {
      v.lower = v.upper = value;
    }
  }

  void parse_bound() {
    const std::size_t line = peek().line;
    if (value_ahead()) {
      const double lhs = parse_signed_value();
      const Token rel = next();
      if (rel.kind != Token::kRel) throw ParseError("expected a relation in bound", line);
      const Token name = next();
      if (name.kind != Token::kWord) throw ParseError("expected a variable in bound", line);
      auto& v = b_.model.variables[b_.var(name.text)];
      set_bound(v, rel.text, lhs, false);
      if (peek().kind == Token::kRel) {
        const std::string rel2 = next().text;
        set_bound(v, rel2, parse_signed_value(), true);
      }
      return;
    }
    const Token name = next();
    if (name.kind != Token::kWord) throw ParseError("expected a bound", line);
    auto& v = b_.model.variables[b_.var(name.text)];
    if (peek().kind == Token::kWord && lower(peek().text) == "free") {
      next();
      v.lower = -kInf;
      v.upper = kInf;
      return;
    }
    const Token rel = next();
    if (rel.kind != Token::kRel) throw ParseError("expected a relation in bound", line);
    set_bound(v, rel.text, parse_signed_value(), true);
  }

  std::vector<Token> tok_;
  std::size_t pos_ = 0;
  ModelBuilder b_;
};

}  // namespace

LpModel read_lp(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::istringstream body(text);
  LpParser parser(lex_lp(body));
  LpModel model = parser.parse();
  // The writer puts the model name in a leading comment.
  if (text.rfind("\\ ", 0) == 0) model.name = text.substr(2, text.find('\n') - 2);
  return model;
}

LpModel read_lp_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return lp_format_for_path(path) == LpFormat::kMps ? read_mps(in) : read_lp(in);
}

nlohmann::json solution_to_json(const LpModel& model, const LpSolution& solution) {
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  for (std::size_t j = 0; j < solution.values.size() && j < model.variables.size(); ++j) {
    values[model.variables[j].name] = solution.values[j];
  }
  nlohmann::ordered_json j;
  j["status"] = to_string(solution.status);
  j["objective"] = solution.objective;
  j["iterations"] = solution.iterations;
  j["values"] = values;
  return nlohmann::json::parse(j.dump());
}

std::vector<double> solution_from_json(const LpModel& model, const nlohmann::json& j) {
  const nlohmann::json& values = j.contains("values") ? j.at("values") : j;
  if (!values.is_object()) throw ParseError("solution values must be a JSON object");
  std::unordered_map<std::string, int> index;
  for (int k = 0; k < model.num_variables(); ++k) index.emplace(model.variables[k].name, k);
  std::vector<double> x(model.variables.size(), 0.0);
  for (const auto& [name, v] : values.items()) {
    const auto it = index.find(name);
    if (it == index.end()) throw ParseError("solution names unknown variable '" + name + "'");
    if (!v.is_number()) throw ParseError("value of '" + name + "' is not a number");
    x[it->second] = v.get<double>();
  }
  return x;
}

}  // namespace opbsp
