#include "tygar/term.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace tygar {

std::size_t Term::applications() const {
  if (is_var()) return 0;
  std::size_t n = 1;
  for (const auto& a : args) n += a.applications();
  return n;
}

bool operator<(const Term& a, const Term& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.name != b.name) return a.name < b.name;
  return std::lexicographical_compare(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
}

std::string param_name(std::size_t i) { return "arg" + std::to_string(i); }

NormalForm make_normal_form(std::size_t arity, Term body) {
  NormalForm e;
  for (std::size_t i = 0; i < arity; ++i) e.params.push_back(param_name(i));
  e.body = std::move(body);
  return e;
}

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

bool is_operator_name(const std::string& name) {
  return !name.empty() && !std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_';
}

void render(const Term& t, std::string& out, bool nested) {
  if (t.is_var()) {
    out += t.name;
    return;
  }
  bool parens = nested && !t.args.empty();
  if (parens) out += '(';
  out += render_component_name(t.name);
  for (const auto& a : t.args) {
    out += ' ';
    render(a, out, true);
  }
  if (parens) out += ')';
}

class TermParser {
 public:
  TermParser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  Term parse() {
    Term t = application();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("term parse error at column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool at_atom_start() {
    skip_ws();
    return pos_ < s_.size() && (s_[pos_] == '(' || is_ident_char(s_[pos_]));
  }

  // head atom* ; a lone parenthesised application is also accepted.
  Term application() {
    Term head = atom();
    std::vector<Term> args;
    while (at_atom_start()) args.push_back(atom());
    if (args.empty()) return head;
    if (head.is_var()) fail("variable applied to arguments: " + head.name);
    if (!head.args.empty()) fail("application in head position");
    head.args = std::move(args);
    return head;
  }

  Term atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (s_[pos_] == '(') {
      std::size_t save = pos_;
      ++pos_;
      skip_ws();
      // `(op)` component name
      std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != ')' && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
             s_[pos_] != '(' && !std::isalnum(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '_')
        ++pos_;
      if (pos_ > start && pos_ < s_.size() && s_[pos_] == ')') {
        std::string op = s_.substr(start, pos_ - start);
        ++pos_;
        return Term::app(op);
      }
      pos_ = save + 1;
      Term inner = application();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    if (std::find(vars_.begin(), vars_.end(), name) != vars_.end()) return Term::var(name);
    return Term::app(name);
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string render_component_name(const std::string& name) {
  if (is_operator_name(name)) return "(" + name + ")";
  return name;
}

std::string render_term(const Term& t) {
  std::string out;
  render(t, out, false);
  return out;
}

std::string render_term(const NormalForm& e) { return render_term(e.body); }

std::string render_lambda(const NormalForm& e) {
  std::string out = "\\";
  for (std::size_t i = 0; i < e.params.size(); ++i) {
    if (i) out += ' ';
    out += e.params[i];
  }
  out += " -> ";
  out += render_term(e.body);
  return out;
}

Term parse_term(const std::string& text, const std::vector<std::string>& variables) {
  return TermParser(text, variables).parse();
}

}  // namespace tygar
