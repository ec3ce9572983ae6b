#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tygar {

/// Application term: a variable, or a fully applied component.
struct Term {
  enum class Kind { Var, App };

  Kind kind = Kind::Var;
  std::string name;
  std::vector<Term> args;

  static Term var(std::string name) { return Term{Kind::Var, std::move(name), {}}; }
  static Term app(std::string component, std::vector<Term> args = {}) {
    return Term{Kind::App, std::move(component), std::move(args)};
  }

  bool is_var() const { return kind == Kind::Var; }
  /// Number of component applications.
  std::size_t applications() const;

  friend bool operator==(const Term&, const Term&) = default;
  /// Structural order: kind, name, then arguments lexicographically.
  friend bool operator<(const Term& a, const Term& b);
};

/// Normal-form program: lambda over `params`, then an application term.
struct NormalForm {
  std::vector<std::string> params;
  Term body;

  friend bool operator==(const NormalForm&, const NormalForm&) = default;
  friend bool operator<(const NormalForm& a, const NormalForm& b) {
    if (a.params != b.params) return a.params < b.params;
    return a.body < b.body;
  }
};

/// Query parameter name for position `i`: arg0, arg1, ...
std::string param_name(std::size_t i);

/// Builds a normal form whose parameters are arg0..arg(n-1).
NormalForm make_normal_form(std::size_t arity, Term body);

/// Operator-named components print in parentheses: `($) arg0 arg1`.
std::string render_component_name(const std::string& name);

/// Body only, minimal parentheses: `f arg0 (l (c arg1))`.
std::string render_term(const Term& t);
std::string render_term(const NormalForm& e);

/// `\arg0 arg1 -> body`.
std::string render_lambda(const NormalForm& e);

/// Parses the rendered body syntax back (identifiers, `(op)` names,
/// parentheses). Throws std::invalid_argument on malformed text. Names listed
/// in `variables` become Var nodes, everything else App nodes.
Term parse_term(const std::string& text, const std::vector<std::string>& variables);

}  // namespace tygar
