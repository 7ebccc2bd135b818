#include "edgedel/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "edgedel/errors.hpp"

namespace edgedel {
namespace {

using json = nlohmann::ordered_json;

std::map<std::string, VarId> name_index(const BayesianNetwork& net) {
  std::map<std::string, VarId> idx;
  for (const Variable& v : net.variables) idx[v.name] = v.id;
  return idx;
}

VarId lookup(const std::map<std::string, VarId>& idx, const std::string& name,
             const std::string& what) {
  auto it = idx.find(name);
  if (it == idx.end())
    throw ParseError("unknown " + what + " '" + name + "'");
  return it->second;
}

// Accept exact rows, renormalize small drift with a warning, reject worse.
void normalize_rows(Factor& cpt, int child_card, const std::string& child,
                    std::vector<std::string>* warnings) {
  const std::size_t rows = cpt.table.size() / child_card;
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int x = 0; x < child_card; ++x) s += cpt.table[r * child_card + x];
    const double dev = std::abs(s - 1.0);
    if (dev <= 1e-9) continue;
    if (dev <= 1e-6) {
      for (int x = 0; x < child_card; ++x) cpt.table[r * child_card + x] /= s;
      if (warnings)
        warnings->push_back("renormalized row " + std::to_string(r) +
                            " of cpt '" + child + "' (sum was " +
                            std::to_string(s) + ")");
      continue;
    }
    std::ostringstream msg;
    msg << "cpt row " << r << " of '" << child << "' sums to " << s
        << ", beyond the 1e-6 tolerance";
    throw ParseError(msg.str());
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError(ex.what());  // carries the byte position
  }
}

// --- BIF subset ---

// Tokens: punctuation {}()[]|,; as single characters, double-quoted strings
// with the quotes stripped, every other whitespace-delimited run verbatim.
// C and C++ comments skipped.
class BifLexer {
 public:
  explicit BifLexer(const std::string& s) : s_(s) {}

  std::string next() {
    if (!pending_.empty()) {
      std::string t = std::move(pending_);
      pending_.clear();
      return t;
    }
    skip_space();
    if (i_ >= s_.size()) return {};
    const char c = s_[i_];
    if (std::string("{}()[]|,;").find(c) != std::string::npos) {
      ++i_;
      return std::string(1, c);
    }
    if (c == '"') {
      std::string t;
      for (++i_; i_ < s_.size() && s_[i_] != '"'; ++i_) t += s_[i_];
      if (i_ >= s_.size()) throw ParseError("unterminated string in BIF file");
      ++i_;
      return t;
    }
    std::string t;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) &&
           std::string("{}()[]|,;\"").find(s_[i_]) == std::string::npos)
      t += s_[i_++];
    return t;
  }

  const std::string& peek() {
    if (pending_.empty()) pending_ = next();
    return pending_;
  }

  std::string expect(const std::string& want, const std::string& where) {
    std::string t = next();
    if (t != want)
      throw ParseError("expected '" + want + "' in " + where + ", got '" + t +
                       "'");
    return t;
  }

 private:
  void skip_space() {
    for (;;) {
      while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
        ++i_;
      if (i_ + 1 < s_.size() && s_[i_] == '/' && s_[i_ + 1] == '/') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
        continue;
      }
      if (i_ + 1 < s_.size() && s_[i_] == '/' && s_[i_ + 1] == '*') {
        i_ += 2;
        while (i_ + 1 < s_.size() && !(s_[i_] == '*' && s_[i_ + 1] == '/'))
          ++i_;
        i_ = i_ + 2 <= s_.size() ? i_ + 2 : s_.size();
        continue;
      }
      return;
    }
  }

  const std::string& s_;
  std::size_t i_ = 0;
  std::string pending_;
};

double parse_real(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty())
    throw ParseError("expected a number in " + where + ", got '" + tok + "'");
  return v;
}

void skip_statement(BifLexer& lex) {
  for (std::string t = lex.next(); t != ";"; t = lex.next())
    if (t.empty()) throw ParseError("unterminated statement in BIF file");
}

}  // namespace

BayesianNetwork parse_network(const std::string& text,
                              std::vector<std::string>* warnings) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("network file must be a JSON object");

  BayesianNetwork net;
  net.name = doc.value("name", "");
  if (!doc.contains("variables") || !doc["variables"].is_array() ||
      doc["variables"].empty())
    throw ParseError("network needs a nonempty 'variables' array");

  std::map<std::string, VarId> idx;
  for (const json& jv : doc["variables"]) {
    Variable v;
    v.id = static_cast<VarId>(net.variables.size());
    if (!jv.is_object() || !jv.contains("name") || !jv["name"].is_string())
      throw ParseError("each variable needs a string 'name'");
    v.name = jv["name"].get<std::string>();
    if (!jv.contains("states") || !jv["states"].is_array())
      throw ParseError("variable '" + v.name + "' needs a 'states' array");
    for (const json& js : jv["states"]) {
      if (!js.is_string())
        throw ParseError("states of '" + v.name + "' must be strings");
      v.states.push_back(js.get<std::string>());
    }
    if (v.card() < 2)
      throw ParseError("variable '" + v.name + "' needs at least 2 states");
    if (!idx.emplace(v.name, v.id).second)
      throw ParseError("duplicate variable name '" + v.name + "'");
    net.variables.push_back(std::move(v));
  }

  const int n = net.num_vars();
  net.parents.resize(n);
  net.cpts.resize(n);
  std::vector<bool> have(n, false);
  if (!doc.contains("cpts") || !doc["cpts"].is_array())
    throw ParseError("network needs a 'cpts' array");
  for (const json& jc : doc["cpts"]) {
    if (!jc.is_object() || !jc.contains("child") || !jc["child"].is_string())
      throw ParseError("each cpt needs a string 'child'");
    const VarId child =
        lookup(idx, jc["child"].get<std::string>(), "cpt child");
    if (have[child])
      throw ParseError("duplicate cpt for '" + net.variables[child].name +
                       "'");
    have[child] = true;

    std::vector<VarId> ps;
    if (jc.contains("parents")) {
      if (!jc["parents"].is_array())
        throw ParseError("'parents' of '" + net.variables[child].name +
                         "' must be an array");
      for (const json& jp : jc["parents"])
        ps.push_back(lookup(idx, jp.get<std::string>(), "parent"));
    }

    Factor f;
    f.scope = ps;
    f.scope.push_back(child);
    const auto cards = net.cards();
    const std::size_t want = table_size(f.scope, cards);
    if (!jc.contains("table") || !jc["table"].is_array())
      throw ParseError("cpt of '" + net.variables[child].name +
                       "' needs a 'table' array");
    for (const json& jt : jc["table"]) {
      if (!jt.is_number())
        throw ParseError("cpt table of '" + net.variables[child].name +
                         "' must hold numbers");
      f.table.push_back(jt.get<double>());
    }
    if (f.table.size() != want)
      throw ParseError("cpt table of '" + net.variables[child].name +
                       "' has " + std::to_string(f.table.size()) +
                       " entries, expected " + std::to_string(want));
    normalize_rows(f, net.variables[child].card(), net.variables[child].name,
                   warnings);
    net.parents[child] = std::move(ps);
    net.cpts[child] = std::move(f);
  }
  for (VarId v = 0; v < n; ++v)
    if (!have[v])
      throw ParseError("missing cpt for variable '" + net.variables[v].name +
                       "'");
  net.validate();
  return net;
}

std::string serialize_network(const BayesianNetwork& net) {
  json doc;
  doc["name"] = net.name;
  doc["variables"] = json::array();
  for (const Variable& v : net.variables)
    doc["variables"].push_back({{"name", v.name}, {"states", v.states}});
  doc["cpts"] = json::array();
  for (VarId v = 0; v < net.num_vars(); ++v) {
    json jc;
    jc["child"] = net.variables[v].name;
    jc["parents"] = json::array();
    for (VarId p : net.parents[v])
      jc["parents"].push_back(net.variables[p].name);
    jc["table"] = net.cpts[v].table;
    doc["cpts"].push_back(std::move(jc));
  }
  return doc.dump(2) + "\n";
}

BayesianNetwork parse_bif(const std::string& text,
                          std::vector<std::string>* warnings) {
  BifLexer lex(text);
  BayesianNetwork net;
  std::map<std::string, VarId> idx;
  std::vector<bool> have;

  for (std::string tok = lex.next(); !tok.empty(); tok = lex.next()) {
    if (tok == "network") {
      net.name = lex.next();
      for (std::string t = lex.next(); t != "{"; t = lex.next())
        if (t.empty()) throw ParseError("unterminated network block");
      for (std::string t = lex.next(); t != "}"; t = lex.next()) {
        if (t == "property")
          skip_statement(lex);
        else
          throw ParseError("unsupported construct '" + t +
                           "' in network block");
      }
    } else if (tok == "variable") {
      Variable v;
      v.id = static_cast<VarId>(net.variables.size());
      v.name = lex.next();
      if (v.name.empty() || v.name == "{")
        throw ParseError("variable block without a name");
      lex.expect("{", "variable block");
      for (std::string t = lex.next(); t != "}"; t = lex.next()) {
        if (t == "property") {
          skip_statement(lex);
        } else if (t == "type") {
          const std::string kind = lex.next();
          if (kind != "discrete")
            throw ParseError("unsupported construct: '" + kind +
                             "' variable '" + v.name +
                             "' (only discrete is supported)");
          lex.expect("[", "variable type");
          const int want =
              static_cast<int>(parse_real(lex.next(), "state count"));
          lex.expect("]", "variable type");
          lex.expect("{", "state list");
          for (std::string s = lex.next(); s != "}"; s = lex.next()) {
            if (s == ",") continue;
            if (s.empty()) throw ParseError("unterminated state list");
            v.states.push_back(s);
          }
          lex.expect(";", "variable type");
          if (static_cast<int>(v.states.size()) != want)
            throw ParseError("variable '" + v.name + "' declares " +
                             std::to_string(want) + " states but lists " +
                             std::to_string(v.states.size()));
        } else {
          throw ParseError("unsupported construct '" + t +
                           "' in variable block of '" + v.name + "'");
        }
      }
      if (v.card() < 2)
        throw ParseError("variable '" + v.name + "' needs at least 2 states");
      if (!idx.emplace(v.name, v.id).second)
        throw ParseError("duplicate variable name '" + v.name + "'");
      net.variables.push_back(std::move(v));
      net.parents.emplace_back();
      net.cpts.emplace_back();
      have.push_back(false);
    } else if (tok == "probability") {
      lex.expect("(", "probability header");
      const VarId child = lookup(idx, lex.next(), "probability child");
      const std::string& cname = net.variables[child].name;
      if (have[child]) throw ParseError("duplicate cpt for '" + cname + "'");
      have[child] = true;
      std::vector<VarId> ps;
      {
        std::string t = lex.next();
        if (t == "|") {
          for (t = lex.next(); t != ")"; t = lex.next()) {
            if (t == ",") continue;
            ps.push_back(lookup(idx, t, "parent"));
          }
        } else if (t != ")") {
          throw ParseError("unsupported construct '" + t +
                           "' in probability header of '" + cname +
                           "' (multi-child blocks are not supported)");
        }
      }
      const auto cards = net.cards();
      const int xc = cards[child];
      Factor f;
      f.scope = ps;
      f.scope.push_back(child);
      const std::size_t want = table_size(f.scope, cards);
      f.table.assign(want, std::numeric_limits<double>::quiet_NaN());

      lex.expect("{", "probability block");
      for (std::string t = lex.next(); t != "}"; t = lex.next()) {
        if (t == "property") {
          skip_statement(lex);
        } else if (t == "table") {
          if (!ps.empty())
            throw ParseError(
                "unsupported construct: flat 'table' entry for the "
                "conditional cpt of '" +
                cname + "' (one parenthesized row per parent "
                "configuration is required)");
          for (std::size_t i = 0; i < want; ++i) {
            std::string v = lex.next();
            if (v == ",") v = lex.next();
            f.table[i] = parse_real(v, "cpt of '" + cname + "'");
          }
          lex.expect(";", "table entry");
        } else if (t == "(") {
          if (ps.empty())
            throw ParseError("row entry in the parentless cpt of '" + cname +
                             "'");
          std::size_t row = 0;
          for (std::size_t j = 0; j < ps.size(); ++j) {
            std::string lbl = lex.next();
            if (lbl == ",") lbl = lex.next();
            const auto& states = net.variables[ps[j]].states;
            auto it = std::find(states.begin(), states.end(), lbl);
            if (it == states.end())
              throw ParseError("unknown state '" + lbl + "' of parent '" +
                               net.variables[ps[j]].name + "' in cpt of '" +
                               cname + "'");
            row = row * states.size() + (it - states.begin());
          }
          lex.expect(")", "row entry");
          if (!std::isnan(f.table[row * xc]))
            throw ParseError("duplicate row in cpt of '" + cname + "'");
          for (int x = 0; x < xc; ++x) {
            std::string v = lex.next();
            if (v == ",") v = lex.next();
            f.table[row * xc + x] =
                parse_real(v, "cpt of '" + cname + "'");
          }
          lex.expect(";", "row entry");
        } else {
          throw ParseError("unsupported construct '" + t +
                           "' in probability block of '" + cname + "'");
        }
      }
      for (double x : f.table)
        if (std::isnan(x))
          throw ParseError("cpt of '" + cname +
                           "' is missing at least one parent-configuration "
                           "row");
      normalize_rows(f, xc, cname, warnings);
      net.parents[child] = std::move(ps);
      net.cpts[child] = std::move(f);
    } else {
      throw ParseError("unsupported construct '" + tok +
                       "' at the top level of the BIF file");
    }
  }

  for (VarId v = 0; v < net.num_vars(); ++v)
    if (!have[v])
      throw ParseError("missing probability block for variable '" +
                       net.variables[v].name + "'");
  if (net.num_vars() == 0) throw ParseError("BIF file declares no variables");
  net.validate();
  return net;
}

BayesianNetwork load_network_file(const std::string& path,
                                  std::vector<std::string>* warnings) {
  const std::string text = read_text_file(path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".bif")
    return parse_bif(text, warnings);
  return parse_network(text, warnings);
}

Evidence parse_evidence(const BayesianNetwork& net, const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object())
    throw ParseError("evidence file must be a JSON object");
  const auto idx = name_index(net);
  Evidence e;
  for (const auto& [name, val] : doc.items()) {
    const VarId v = lookup(idx, name, "evidence variable");
    int state = -1;
    if (val.is_string()) {
      const auto& states = net.variables[v].states;
      auto it = std::find(states.begin(), states.end(),
                          val.get<std::string>());
      if (it == states.end())
        throw ParseError("unknown state '" + val.get<std::string>() +
                         "' for evidence variable '" + name + "'");
      state = static_cast<int>(it - states.begin());
    } else if (val.is_number_integer()) {
      state = val.get<int>();
      if (state < 0 || state >= net.variables[v].card())
        throw ParseError("state index " + std::to_string(state) +
                         " out of range for evidence variable '" + name +
                         "'");
    } else {
      throw ParseError("evidence for '" + name +
                       "' must be a state label or index");
    }
    e.set(v, state);
  }
  return e;
}

std::string serialize_evidence(const BayesianNetwork& net, const Evidence& e) {
  json doc = json::object();
  for (const auto& [v, s] : e.assignments)
    doc[net.variables[v].name] = net.variables[v].states[s];
  return doc.dump(2) + "\n";
}

DeletionPlan parse_plan(const BayesianNetwork& net, const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("plan file must be a JSON object");
  const auto idx = name_index(net);
  DeletionPlan plan;
  plan.at_most_one_per_child = doc.value("at_most_one_per_child", true);
  if (!doc.contains("edges") || !doc["edges"].is_array())
    throw ParseError("plan needs an 'edges' array");
  for (const json& je : doc["edges"]) {
    if (!je.is_object() || !je.contains("parent") || !je.contains("child"))
      throw ParseError("each plan edge needs 'parent' and 'child'");
    EdgeRef ed;
    ed.parent = lookup(idx, je["parent"].get<std::string>(), "plan parent");
    ed.child = lookup(idx, je["child"].get<std::string>(), "plan child");
    plan.edges.push_back(ed);
    std::vector<double> repl;
    if (je.contains("replacement")) {
      if (!je["replacement"].is_array())
        throw ParseError("plan 'replacement' must be an array");
      for (const json& jr : je["replacement"]) repl.push_back(jr.get<double>());
    }
    plan.replacements.push_back(std::move(repl));
  }
  return plan;
}

std::string serialize_plan(const BayesianNetwork& net,
                           const DeletionPlan& plan) {
  json doc;
  doc["at_most_one_per_child"] = plan.at_most_one_per_child;
  doc["edges"] = json::array();
  for (std::size_t i = 0; i < plan.edges.size(); ++i) {
    json je;
    je["parent"] = net.variables[plan.edges[i].parent].name;
    je["child"] = net.variables[plan.edges[i].child].name;
    if (i < plan.replacements.size() && !plan.replacements[i].empty())
      je["replacement"] = plan.replacements[i];
    doc["edges"].push_back(std::move(je));
  }
  return doc.dump(2) + "\n";
}

std::string serialize_bound_report(const BoundReport& rep) {
  json doc;
  doc["log_ratio"] = rep.log_ratio;
  doc["entropy_sum"] = rep.entropy_sum;
  doc["bound"] = rep.bound;
  if (rep.exact_kl) {
    if (std::isinf(*rep.exact_kl))
      doc["exact_kl"] = "inf";
    else
      doc["exact_kl"] = *rep.exact_kl;
  }
  doc["equality_certified"] = rep.equality_certified;
  doc["hypothesis_met"] = rep.hypothesis_met;
  if (!rep.hypothesis_note.empty())
    doc["hypothesis_note"] = rep.hypothesis_note;
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file '" + path + "' for writing");
  out << content;
  if (!out) throw ParseError("failed writing file '" + path + "'");
}

}  // namespace edgedel
