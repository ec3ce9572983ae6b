#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tygar {

/// First-order base type: a type variable, a constructor applied to
/// arguments, or the distinguished bottom type.
///
/// Values are immutable and cheap to copy (shared node). Two types compare
/// equal iff they are structurally identical, variable names included; use
/// canonicalize() before comparing types up to alpha-renaming.
class Type {
 public:
  enum class Kind : std::uint8_t { Var, App, Bottom };

  Type();  // bottom

  static Type var(std::string name);
  static Type app(std::string ctor, std::vector<Type> args = {});
  static Type bottom();

  Kind kind() const;
  bool is_var() const { return kind() == Kind::Var; }
  bool is_app() const { return kind() == Kind::App; }
  bool is_bottom() const { return kind() == Kind::Bottom; }

  /// Variable name or constructor name; empty for bottom.
  const std::string& name() const;
  std::span<const Type> args() const;

  bool is_ground() const;
  /// Number of nodes.
  std::size_t size() const;
  /// Constructor nesting depth; variables and nullary constructors have depth 0.
  std::size_t depth() const;
  std::size_t hash() const;

  friend bool operator==(const Type& a, const Type& b);
  friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }
  /// Total structural order (bottom < var < app), used for deterministic sets.
  friend bool operator<(const Type& a, const Type& b);

 public:
  struct Node;  // opaque

 private:
  explicit Type(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

struct TypeHash {
  std::size_t operator()(const Type& t) const { return t.hash(); }
};

/// Renders with minimal parentheses, e.g. `List (Maybe t0)`; bottom is `_|_`.
std::string to_string(const Type& t);

/// Renames variables to t0, t1, ... in left-to-right first-occurrence order.
Type canonicalize(const Type& t);

/// Appends the variables of `t` in first-occurrence order (no duplicates).
void collect_vars(const Type& t, std::vector<std::string>& out);

/// Prefixes every variable name in `t`.
Type rename_vars(const Type& t, const std::string& prefix);

/// Uncurried first-order function type. `params` may be empty.
struct FnType {
  std::vector<Type> params;
  Type ret;

  std::size_t arity() const { return params.size(); }
  bool is_ground() const;
  friend bool operator==(const FnType&, const FnType&) = default;
};

std::string to_string(const FnType& t);

struct PolyType {
  std::vector<std::string> quantified;
  FnType body;

  /// Quantifies exactly the free variables of `body`, in first-occurrence order.
  static PolyType generalize(FnType body);
  friend bool operator==(const PolyType&, const PolyType&) = default;
};

/// Prints the body; quantifiers are implicit, as in signature files.
std::string to_string(const PolyType& p);

/// Finite map from variables to base types, or the bottom substitution.
class Substitution {
 public:
  Substitution() = default;

  static Substitution bottom();
  static Substitution of(std::map<std::string, Type> bindings);

  bool is_bottom() const { return bottom_; }
  const std::map<std::string, Type>& bindings() const { return bindings_; }
  std::optional<Type> lookup(const std::string& var) const;

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  bool bottom_ = false;
  std::map<std::string, Type> bindings_;
};

/// Simultaneous replacement; bottom substitution or bottom input yield bottom.
Type apply_subst(const Substitution& s, const Type& t);
FnType apply_subst(const Substitution& s, const FnType& t);

/// compose(s1, s2) applied to t equals s1 applied to (s2 applied to t).
Substitution compose(const Substitution& s1, const Substitution& s2);

/// Source of variable names that never collide with parsed identifiers.
/// Confined to one synthesis session.
class FreshSupply {
 public:
  std::string next();
  std::uint64_t issued() const { return counter_; }

 private:
  std::uint64_t counter_ = 0;
};

FnType fresh_instance(const PolyType& p, FreshSupply& supply);

}  // namespace tygar
