#include "binreg/emitters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "binreg/error.hpp"
#include "binreg/logging.hpp"
#include "json.hpp"

namespace binreg {
namespace {

using json = nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> tokens;
  for (std::string t; ss >> t;) tokens.push_back(t);
  return tokens;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

std::optional<int64_t> try_integer(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  int64_t v = 0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec == std::errc() && end == token.data() + token.size()) return v;
  // Integral decimals such as "1.0" or "-2e+00".
  double d = 0;
  auto [dend, dec] = std::from_chars(token.data(), token.data() + token.size(), d);
  if (dec == std::errc() && dend == token.data() + token.size() && std::isfinite(d) &&
      d == std::trunc(d) && std::abs(d) < 9.2e18) {
    return static_cast<int64_t>(d);
  }
  return std::nullopt;
}

bool is_number(std::string_view token) {
  if (!token.empty() && (token.front() == '+' || token.front() == '-')) token.remove_prefix(1);
  double d = 0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), d);
  return !token.empty() && ec == std::errc() && end == token.data() + token.size();
}

int64_t integer_token(const std::string& token, const std::string& context) {
  auto v = try_integer(token);
  if (!v) throw Error(context + ": expected an integer, got '" + token + "'");
  return *v;
}

// Unique row names, falling back to c<index>.
std::vector<std::string> row_names(const ModelIR& model) {
  std::vector<std::string> names;
  std::unordered_set<std::string> used;
  for (const Variable& v : model.variables()) used.insert(v.name);
  used.insert("obj");
  for (size_t r = 0; r < model.constraints().size(); ++r) {
    std::string name = model.constraints()[r].name;
    if (name.empty() || name.find_first_of(" \t:") != std::string::npos || used.contains(name)) {
      name = "c" + std::to_string(r);
      while (used.contains(name)) name += "_";
    }
    used.insert(name);
    names.push_back(name);
  }
  return names;
}

// ---------------------------------------------------------------- LP

class LineWriter {
 public:
  explicit LineWriter(std::ostream& out) : out_(out) {}
  void token(const std::string& t) {
    if (width_ + t.size() + 1 > 240 && width_ > 0) {
      out_ << "\n  ";
      width_ = 2;
    }
    out_ << ' ' << t;
    width_ += t.size() + 1;
  }
  void end_line() {
    out_ << '\n';
    width_ = 0;
  }

 private:
  std::ostream& out_;
  size_t width_ = 0;
};

std::string portable_name(const std::string& name) {
  static const std::string kExtra = "!\"#$%&()/,.;?@_`'{}|~";
  std::string out;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || kExtra.find(ch) != std::string::npos) {
      out += ch;
    } else {
      out += ch == '+' ? 'p' : ch == '-' ? 'm' : '_';
    }
  }
  return out;
}

std::vector<std::string> lp_variable_names(const ModelIR& model, bool portable) {
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  for (const Variable& v : model.variables()) {
    names.push_back(portable ? portable_name(v.name) : v.name);
    if (!seen.insert(names.back()).second) {
      throw Error("LP: variable name '" + names.back() + "' is not unique after renaming");
    }
  }
  return names;
}

void lp_terms(LineWriter& w, const std::vector<std::string>& names, const std::vector<Term>& terms,
              int64_t constant) {
  bool first = true;
  for (const Term& t : terms) {
    const std::string& name = names[t.var.index];
    if (t.coef < 0) {
      w.token("-");
      w.token(std::to_string(-t.coef));
    } else {
      if (!first) w.token("+");
      if (t.coef != 1) w.token(std::to_string(t.coef));
    }
    w.token(name);
    first = false;
  }
  if (constant != 0 || first) {
    if (constant < 0) {
      w.token("-");
      w.token(std::to_string(-constant));
    } else {
      if (!first) w.token("+");
      w.token(std::to_string(constant));
    }
  }
}

const char* lp_sense(Sense s) {
  switch (s) {
    case Sense::kLessEqual:
      return "<=";
    case Sense::kGreaterEqual:
      return ">=";
    case Sense::kEqual:
      return "=";
  }
  return "?";
}

std::optional<Sense> parse_sense(const std::string& t) {
  if (t == "<=" || t == "<" || t == "=<") return Sense::kLessEqual;
  if (t == ">=" || t == ">" || t == "=>") return Sense::kGreaterEqual;
  if (t == "=") return Sense::kEqual;
  return std::nullopt;
}

struct ParsedTerms {
  std::vector<std::pair<std::string, int64_t>> terms;
  int64_t constant = 0;
};

// Consumes tokens from `pos` until `stop` returns true or tokens run out.
template <typename Stop>
ParsedTerms parse_terms(const std::vector<std::string>& tokens, size_t& pos, Stop stop) {
  ParsedTerms out;
  int64_t sign = 1;
  int64_t coef = 1;
  bool has_coef = false;
  for (; pos < tokens.size() && !stop(tokens[pos]); ++pos) {
    const std::string& t = tokens[pos];
    if (t == "+" || t == "-") {
      if (has_coef) {
        out.constant += sign * coef;
        has_coef = false;
        sign = 1;
      }
      if (t == "-") sign = -sign;
    } else if (is_number(t)) {
      if (has_coef) throw Error("two numbers in a row near '" + t + "'");
      coef = integer_token(t, "LP coefficient");
      has_coef = true;
    } else {
      out.terms.emplace_back(t, sign * (has_coef ? coef : 1));
      has_coef = false;
      sign = 1;
    }
  }
  if (has_coef) out.constant += sign * coef;
  return out;
}

enum class LpSection { kNone, kObjective, kConstraints, kBounds, kGenerals, kBinaries, kEnd };

std::optional<LpSection> lp_header(const std::string& line) {
  const auto tokens = split_ws(lower(line));
  if (tokens.empty()) return std::nullopt;
  const std::string& a = tokens[0];
  if (tokens.size() == 1) {
    if (a == "minimize" || a == "minimise" || a == "min") return LpSection::kObjective;
    if (a == "st" || a == "s.t." || a == "subject") return LpSection::kConstraints;
    if (a == "bounds" || a == "bound") return LpSection::kBounds;
    if (a == "generals" || a == "general" || a == "gen") return LpSection::kGenerals;
    if (a == "binaries" || a == "binary" || a == "bin") return LpSection::kBinaries;
    if (a == "end") return LpSection::kEnd;
  }
  if (tokens.size() == 2 && a == "subject" && tokens[1] == "to") return LpSection::kConstraints;
  if (a == "maximize" || a == "maximise" || a == "max") throw Error("only minimization is supported");
  return std::nullopt;
}

struct PendingRow {
  std::string name;
  ParsedTerms lhs;
  Sense sense;
  int64_t rhs;
};

struct VarDecl {
  std::string name;
  int64_t lower;
  int64_t upper;
};

// Builds the model once every variable has been declared with bounds.
ModelIR assemble(const std::vector<VarDecl>& vars, const std::unordered_set<std::string>& binary,
                 const ParsedTerms& objective, const std::vector<PendingRow>& rows) {
  ModelIR model;
  for (const VarDecl& v : vars) {
    const bool is_bin = binary.contains(v.name) || (v.lower == 0 && v.upper == 1);
    model.add_variable(v.name, is_bin ? Domain::kBinary : Domain::kInteger, v.lower, v.upper);
  }
  auto to_expr = [&](const ParsedTerms& pt) {
    LinearExpr e;
    for (const auto& [name, coef] : pt.terms) {
      auto id = model.find(name);
      if (!id) throw Error("variable '" + name + "' has no bounds");
      e.add(*id, coef);
    }
    e.add_constant(pt.constant);
    return e;
  };
  model.set_objective(to_expr(objective));
  for (const PendingRow& r : rows) model.add_constraint(to_expr(r.lhs), r.sense, r.rhs, r.name);
  return model;
}

// ---------------------------------------------------------------- MPS

std::string field(const std::string& s, size_t width) {
  std::string out = s;
  if (out.size() < width) out.resize(width, ' ');
  return out;
}

// Columns 2-3 type, 5-12 name, 15-22 name, 25-36 value.
void mps_line(std::ostream& out, const std::string& type, const std::string& a,
              const std::string& b, const std::string& value) {
  std::string line = " " + field(type, 2) + " " + field(a, 8) + "  " + field(b, 8);
  if (!value.empty()) line += "  " + value;
  while (!line.empty() && line.back() == ' ') line.pop_back();
  out << line << '\n';
}

}  // namespace

void write_lp(const ModelIR& model, std::ostream& out, LpWriteOptions options) {
  const auto names = row_names(model);
  const auto vars = lp_variable_names(model, options.portable_names);
  out << "\\ binreg integer program\n";
  out << "Minimize\n";
  LineWriter w(out);
  w.token("obj:");
  lp_terms(w, vars, model.objective().terms(), model.objective().constant());
  w.end_line();
  out << "Subject To\n";
  for (size_t r = 0; r < model.constraints().size(); ++r) {
    const Constraint& c = model.constraints()[r];
    w.token((options.portable_names ? portable_name(names[r]) : names[r]) + ":");
    lp_terms(w, vars, c.expr.terms(), 0);
    w.token(lp_sense(c.sense));
    w.token(std::to_string(c.rhs));
    w.end_line();
  }
  out << "Bounds\n";
  for (const Variable& v : model.variables()) {
    out << ' ' << v.lower << " <= " << vars[v.id.index] << " <= " << v.upper << '\n';
  }
  for (Domain d : {Domain::kInteger, Domain::kBinary}) {
    bool any = false;
    for (const Variable& v : model.variables()) {
      if (v.domain != d) continue;
      if (!any) out << (d == Domain::kInteger ? "Generals\n" : "Binaries\n");
      any = true;
      w.token(vars[v.id.index]);
    }
    if (any) w.end_line();
  }
  out << "End\n";
}

void write_lp(const ModelIR& model, const std::filesystem::path& path, LpWriteOptions options) {
  auto out = open_out(path);
  write_lp(model, out, options);
  finish(out, path);
}

ModelIR parse_lp(std::istream& in) {
  std::map<LpSection, std::vector<std::string>> tokens;
  std::vector<std::vector<std::string>> bound_lines;
  LpSection section = LpSection::kNone;
  for (std::string line; std::getline(in, line);) {
    if (auto cut = line.find('\\'); cut != std::string::npos) line.resize(cut);
    if (auto header = lp_header(line)) {
      section = *header;
      continue;
    }
    auto t = split_ws(line);
    if (t.empty()) continue;
    if (section == LpSection::kNone || section == LpSection::kEnd) {
      throw Error("LP: text outside of a section: " + line);
    }
    if (section == LpSection::kBounds) {
      bound_lines.push_back(t);
    } else {
      auto& dst = tokens[section];
      dst.insert(dst.end(), t.begin(), t.end());
    }
  }

  std::vector<VarDecl> vars;
  std::unordered_map<std::string, size_t> var_index;
  for (const auto& t : bound_lines) {
    VarDecl d;
    if (t.size() == 5 && t[1] == "<=" && t[3] == "<=") {
      d = {t[2], integer_token(t[0], "LP bound"), integer_token(t[4], "LP bound")};
    } else if (t.size() == 3 && t[1] == "=") {
      const int64_t v = integer_token(t[2], "LP bound");
      d = {t[0], v, v};
    } else {
      std::string joined;
      for (const auto& s : t) joined += s + " ";
      throw Error("LP: unsupported bound line: " + joined);
    }
    if (var_index.contains(d.name)) throw Error("LP: duplicate bound for " + d.name);
    var_index[d.name] = vars.size();
    vars.push_back(d);
  }

  std::unordered_set<std::string> binary;
  for (const auto& name : tokens[LpSection::kBinaries]) {
    auto it = var_index.find(name);
    if (it == var_index.end()) {
      var_index[name] = vars.size();
      vars.push_back({name, 0, 1});
    }
    binary.insert(name);
  }
  for (const auto& name : tokens[LpSection::kGenerals]) {
    if (!var_index.contains(name)) throw Error("LP: general variable '" + name + "' has no bounds");
  }

  const auto& obj_tokens = tokens[LpSection::kObjective];
  size_t pos = 0;
  if (!obj_tokens.empty() && obj_tokens[0].back() == ':') pos = 1;
  const ParsedTerms objective = parse_terms(obj_tokens, pos, [](const std::string&) { return false; });

  std::vector<PendingRow> rows;
  const auto& row_tokens = tokens[LpSection::kConstraints];
  pos = 0;
  while (pos < row_tokens.size()) {
    PendingRow row;
    if (row_tokens[pos].back() == ':') {
      row.name = row_tokens[pos].substr(0, row_tokens[pos].size() - 1);
      ++pos;
    } else {
      row.name = "c" + std::to_string(rows.size());
    }
    row.lhs = parse_terms(row_tokens, pos, [](const std::string& t) { return parse_sense(t).has_value(); });
    if (pos + 1 >= row_tokens.size()) throw Error("LP: row '" + row.name + "' has no right-hand side");
    row.sense = *parse_sense(row_tokens[pos]);
    row.rhs = integer_token(row_tokens[pos + 1], "LP right-hand side");
    pos += 2;
    rows.push_back(std::move(row));
  }
  return assemble(vars, binary, objective, rows);
}

ModelIR parse_lp(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_lp(in);
}

void write_mps(const ModelIR& model, std::ostream& out) {
  const auto names = row_names(model);
  std::vector<std::vector<std::pair<std::string, int64_t>>> entries(model.num_variables());
  for (const Term& t : model.objective().terms()) entries[t.var.index].emplace_back("obj", t.coef);
  for (size_t r = 0; r < model.constraints().size(); ++r) {
    for (const Term& t : model.constraints()[r].expr.terms()) {
      entries[t.var.index].emplace_back(names[r], t.coef);
    }
  }

  out << "NAME          binreg\n";
  out << "ROWS\n";
  mps_line(out, "N", "obj", "", "");
  for (size_t r = 0; r < model.constraints().size(); ++r) {
    const Sense s = model.constraints()[r].sense;
    mps_line(out, s == Sense::kLessEqual ? "L" : s == Sense::kGreaterEqual ? "G" : "E", names[r], "",
             "");
  }
  out << "COLUMNS\n";
  out << "    MARKER                 'MARKER'                 'INTORG'\n";
  for (const Variable& v : model.variables()) {
    if (entries[v.id.index].empty()) entries[v.id.index].emplace_back("obj", 0);
    for (const auto& [row, coef] : entries[v.id.index]) {
      mps_line(out, "", v.name, row, std::to_string(coef));
    }
  }
  out << "    MARKER                 'MARKER'                 'INTEND'\n";
  out << "RHS\n";
  if (model.objective().constant() != 0) {
    mps_line(out, "", "RHS", "obj", std::to_string(-model.objective().constant()));
  }
  for (size_t r = 0; r < model.constraints().size(); ++r) {
    if (model.constraints()[r].rhs != 0) {
      mps_line(out, "", "RHS", names[r], std::to_string(model.constraints()[r].rhs));
    }
  }
  out << "BOUNDS\n";
  for (const Variable& v : model.variables()) {
    mps_line(out, "LO", "BND", v.name, std::to_string(v.lower));
    mps_line(out, "UP", "BND", v.name, std::to_string(v.upper));
  }
  out << "ENDATA\n";
}

void write_mps(const ModelIR& model, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_mps(model, out);
  finish(out, path);
}

ModelIR parse_mps(std::istream& in) {
  enum class Part { kNone, kRows, kColumns, kRhs, kBounds, kDone } part = Part::kNone;
  std::string objective_row;
  std::vector<PendingRow> rows;
  std::unordered_map<std::string, size_t> row_index;
  ParsedTerms objective;
  std::vector<VarDecl> vars;
  std::unordered_map<std::string, size_t> var_index;
  std::vector<bool> has_upper;
  bool integer_block = false;

  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '*') continue;
    const auto t = split_ws(line);
    if (t.empty()) continue;
    if (!std::isspace(static_cast<unsigned char>(line[0]))) {
      const std::string head = t[0];
      if (head == "NAME") continue;
      if (head == "ROWS") part = Part::kRows;
      else if (head == "COLUMNS") part = Part::kColumns;
      else if (head == "RHS") part = Part::kRhs;
      else if (head == "BOUNDS") part = Part::kBounds;
      else if (head == "ENDATA") part = Part::kDone;
      else throw Error("MPS: unsupported section " + head);
      continue;
    }
    switch (part) {
      case Part::kRows: {
        if (t.size() != 2) throw Error("MPS: bad ROWS line: " + line);
        if (t[0] == "N") {
          if (objective_row.empty()) objective_row = t[1];
          continue;
        }
        auto sense = t[0] == "L" ? Sense::kLessEqual
                     : t[0] == "G" ? Sense::kGreaterEqual
                     : t[0] == "E" ? Sense::kEqual
                                   : throw Error("MPS: bad row type " + t[0]);
        row_index[t[1]] = rows.size();
        rows.push_back({t[1], {}, sense, 0});
        break;
      }
      case Part::kColumns: {
        if (t.size() >= 3 && t[1] == "'MARKER'") {
          if (t[2] == "'INTORG'") integer_block = true;
          else if (t[2] == "'INTEND'") integer_block = false;
          continue;
        }
        if (t.size() != 3 && t.size() != 5) throw Error("MPS: bad COLUMNS line: " + line);
        if (!integer_block) throw Error("MPS: continuous column " + t[0] + " is not supported");
        if (!var_index.contains(t[0])) {
          var_index[t[0]] = vars.size();
          vars.push_back({t[0], 0, 0});
          has_upper.push_back(false);
        }
        for (size_t k = 1; k + 1 < t.size(); k += 2) {
          const int64_t coef = integer_token(t[k + 1], "MPS coefficient");
          if (t[k] == objective_row) {
            objective.terms.emplace_back(t[0], coef);
          } else {
            auto it = row_index.find(t[k]);
            if (it == row_index.end()) throw Error("MPS: unknown row " + t[k]);
            rows[it->second].lhs.terms.emplace_back(t[0], coef);
          }
        }
        break;
      }
      case Part::kRhs: {
        if (t.size() != 3 && t.size() != 5) throw Error("MPS: bad RHS line: " + line);
        for (size_t k = 1; k + 1 < t.size(); k += 2) {
          const int64_t v = integer_token(t[k + 1], "MPS right-hand side");
          if (t[k] == objective_row) {
            objective.constant = -v;
          } else {
            auto it = row_index.find(t[k]);
            if (it == row_index.end()) throw Error("MPS: unknown row " + t[k]);
            rows[it->second].rhs = v;
          }
        }
        break;
      }
      case Part::kBounds: {
        if (t.size() < 3) throw Error("MPS: bad BOUNDS line: " + line);
        auto it = var_index.find(t[2]);
        if (it == var_index.end()) throw Error("MPS: bound on unknown column " + t[2]);
        VarDecl& v = vars[it->second];
        const std::string& type = t[0];
        if (type == "BV") {
          v.lower = 0;
          v.upper = 1;
          has_upper[it->second] = true;
          continue;
        }
        if (t.size() != 4) throw Error("MPS: bad BOUNDS line: " + line);
        const int64_t value = integer_token(t[3], "MPS bound");
        if (type == "LO") {
          v.lower = value;
        } else if (type == "UP") {
          v.upper = value;
          has_upper[it->second] = true;
        } else if (type == "FX") {
          v.lower = v.upper = value;
          has_upper[it->second] = true;
        } else {
          throw Error("MPS: unsupported bound type " + type);
        }
        break;
      }
      default:
        throw Error("MPS: data outside of a section: " + line);
    }
  }
  for (size_t j = 0; j < vars.size(); ++j) {
    if (!has_upper[j]) throw Error("MPS: column " + vars[j].name + " has no upper bound");
  }
  return assemble(vars, {}, objective, rows);
}

ModelIR parse_mps(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_mps(in);
}

void write_opb(const ModelIR& model, std::ostream& out) {
  for (const Variable& v : model.variables()) {
    if (v.domain != Domain::kBinary) {
      throw Error("OPB needs binary variables only; '" + v.name + "' is integer");
    }
  }
  auto terms_text = [](const std::vector<Term>& terms, int64_t sign) {
    std::string s;
    for (const Term& t : terms) {
      const int64_t c = sign * t.coef;
      s += (c > 0 ? "+" : "") + std::to_string(c) + " x" + std::to_string(t.var.index + 1) + " ";
    }
    return s;
  };
  std::vector<std::string> lines;
  for (const Constraint& c : model.constraints()) {
    if (c.expr.terms().empty()) {
      if (!c.satisfied_by(0)) throw Error("OPB: empty row '" + c.name + "' is infeasible");
      continue;
    }
    if (c.sense != Sense::kLessEqual) {
      lines.push_back(terms_text(c.expr.terms(), 1) + ">= " + std::to_string(c.rhs) + " ;");
    }
    if (c.sense != Sense::kGreaterEqual) {
      lines.push_back(terms_text(c.expr.terms(), -1) + ">= " + std::to_string(-c.rhs) + " ;");
    }
  }
  out << "* #variable= " << model.num_variables() << " #constraint= " << lines.size() << '\n';
  if (model.objective().constant() != 0) {
    out << "* objective constant " << model.objective().constant() << '\n';
  }
  if (!model.objective().terms().empty()) {
    out << "min: " << terms_text(model.objective().terms(), 1) << ";\n";
  }
  for (const auto& line : lines) out << line << '\n';
}

void write_opb(const ModelIR& model, const std::filesystem::path& path) {
  {
    auto out = open_out(path);
    write_opb(model, out);
    finish(out, path);
  }
  std::filesystem::path map_path = path;
  map_path += ".map";
  auto map = open_out(map_path);
  for (const Variable& v : model.variables()) map << 'x' << v.id.index + 1 << ' ' << v.name << '\n';
  finish(map, map_path);
}

SolutionFile parse_solution(std::istream& in, const ModelIR& model) {
  SolutionFile sol;
  std::vector<std::optional<int64_t>> values(model.num_variables());
  auto set = [&](VarId id, int64_t v) { values[id.index] = v; };
  auto objective_from = [&](const std::string& token) {
    if (is_number(token)) sol.objective = std::stod(token);
  };

  size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto t = split_ws(line);
    if (t.empty()) continue;
    const std::string head = lower(t[0]);
    if (head == "c" || head == "s" || head[0] == '*') continue;
    if (head[0] == '#') {
      if (lower(line).find("objective") != std::string::npos) objective_from(t.back());
      continue;
    }
    if (head == "o" || head.starts_with("obj")) {
      objective_from(t.back());
      continue;
    }
    if (head == "v") {
      for (size_t k = 1; k < t.size(); ++k) {
        std::string lit = t[k];
        const bool negated = lit[0] == '-';
        if (negated) lit.erase(0, 1);
        if (lit.size() < 2 || lit[0] != 'x') throw Error("solution: bad literal '" + t[k] + "'");
        const auto idx = try_integer(lit.substr(1));
        if (!idx || *idx < 1 || static_cast<size_t>(*idx) > model.num_variables()) {
          throw Error("solution: unknown variable '" + lit + "'");
        }
        set(VarId{static_cast<int32_t>(*idx - 1)}, negated ? 0 : 1);
      }
      continue;
    }
    if (t.size() != 2) {
      throw Error("solution line " + std::to_string(line_no) + ": expected '<name> <value>'");
    }
    auto id = model.find(t[0]);
    if (!id) throw Error("solution: unknown variable '" + t[0] + "'");
    auto v = try_integer(t[1]);
    if (!v) throw Error("solution: non-integer value '" + t[1] + "' for " + t[0]);
    set(*id, *v);
  }

  size_t missing = 0;
  for (const Variable& v : model.variables()) {
    if (!values[v.id.index]) {
      if (missing++ == 0) log().warn("solution file has no value for '{}'; using its lower bound", v.name);
      values[v.id.index] = v.lower;
    }
    sol.assignments[v.name] = *values[v.id.index];
  }
  if (missing > 1) log().warn("{} variables defaulted to their lower bound", missing);
  return sol;
}

SolutionFile parse_solution(const std::filesystem::path& path, const ModelIR& model) {
  auto in = open_in(path);
  return parse_solution(in, model);
}

Assignment to_assignment(const SolutionFile& solution, const ModelIR& model) {
  Assignment a(model.num_variables());
  for (const Variable& v : model.variables()) {
    auto it = solution.assignments.find(v.name);
    a[v.id.index] = it == solution.assignments.end() ? v.lower : it->second;
  }
  return a;
}

void render_weights_pgm(const TrainedModel& model, size_t c, size_t width, size_t height,
                        std::ostream& out) {
  if (width * height != model.feature_count) {
    throw Error(std::to_string(width) + "x" + std::to_string(height) + " image does not fit " +
                std::to_string(model.feature_count) + " features");
  }
  if (c >= model.class_count) throw Error("class " + std::to_string(c) + " out of range");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  std::string raster(model.feature_count, '\0');
  for (size_t f = 0; f < model.feature_count; ++f) {
    const int w = model.weight(f, c);
    raster[f] = static_cast<char>(w > 0 ? 0 : w < 0 ? 255 : 128);
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

void render_weights_pgm(const TrainedModel& model, size_t c, size_t width, size_t height,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  render_weights_pgm(model, c, width, height, out);
  finish(out, path);
}

std::string model_to_json(const TrainedModel& model) {
  json w = json::array();
  for (size_t f = 0; f < model.feature_count; ++f) {
    json row = json::array();
    for (size_t c = 0; c < model.class_count; ++c) row.push_back(model.weight(f, c));
    w.push_back(std::move(row));
  }
  json j = {{"F_size", model.feature_count},
            {"C_size", model.class_count},
            {"W", std::move(w)},
            {"b", model.bias}};
  return j.dump();
}

TrainedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model JSON: ") + e.what());
  }
  auto count = [&](const char* key) -> size_t {
    if (!j.is_object() || !j.contains(key) || !j[key].is_number_unsigned()) {
      throw Error(std::string("model JSON: '") + key + "' must be a non-negative integer");
    }
    return j[key].get<size_t>();
  };
  TrainedModel model = TrainedModel::zeros(count("F_size"), count("C_size"));
  const json& w = j["W"];
  if (!w.is_array() || w.size() != model.feature_count) {
    throw Error("model JSON: 'W' must have F_size rows");
  }
  for (size_t f = 0; f < model.feature_count; ++f) {
    if (!w[f].is_array() || w[f].size() != model.class_count) {
      throw Error("model JSON: row " + std::to_string(f) + " of 'W' must have C_size entries");
    }
    for (size_t c = 0; c < model.class_count; ++c) {
      const json& v = w[f][c];
      if (!v.is_number_integer() || v.get<int64_t>() < -1 || v.get<int64_t>() > 1) {
        throw Error("model JSON: W[" + std::to_string(f) + "][" + std::to_string(c) +
                    "] = " + v.dump() + " is not in {-1, 0, 1}");
      }
      model.set_weight(f, c, v.get<int>());
    }
  }
  const json& b = j["b"];
  if (!b.is_array() || b.size() != model.class_count) {
    throw Error("model JSON: 'b' must have C_size entries");
  }
  for (size_t c = 0; c < model.class_count; ++c) {
    if (!b[c].is_number_integer()) throw Error("model JSON: b entries must be integers");
    model.bias[c] = b[c].get<int64_t>();
  }
  model.validate();
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_text(path, model_to_json(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

std::string report_to_json(const EvalReport& report) {
  json j = {{"accuracy", report.accuracy},
            {"correct", report.correct},
            {"total", report.total},
            {"mean_margin", report.mean_margin},
            {"reduction_pct", report.reduction_pct}};
  return j.dump();
}

std::string result_to_json(const MipResult& result, bool include_trace) {
  auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j = {{"status", to_string(result.status)},
            {"objective", result.objective ? json(*result.objective) : json(nullptr)},
            {"bound", finite(result.bound)},
            {"gap", finite(result.gap)},
            {"nodes", result.nodes},
            {"lp_iterations", result.lp_iterations},
            {"lp_failures", result.lp_failures},
            {"runtime_secs", result.runtime_secs}};
  if (include_trace) {
    json trace = json::array();
    for (const BoundSample& s : result.trace) {
      trace.push_back({{"time_secs", s.time_secs},
                       {"nodes", s.nodes},
                       {"incumbent", s.incumbent ? json(*s.incumbent) : json(nullptr)},
                       {"bound", finite(s.bound)}});
    }
    j["trace"] = std::move(trace);
  }
  return j.dump();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text << '\n';
  finish(out, path);
}

}  // namespace binreg
