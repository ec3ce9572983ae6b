#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tygar/types.hpp"

namespace tygar {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Surface type as written in signature files: may contain arrows anywhere.
struct RichType {
  enum class Kind { Var, Con, Arrow };

  Kind kind = Kind::Var;
  std::string name;            // variable or constructor
  std::vector<RichType> args;  // constructor arguments; [from, to] for arrows

  static RichType var(std::string n) { return {Kind::Var, std::move(n), {}}; }
  static RichType con(std::string n, std::vector<RichType> a = {}) { return {Kind::Con, std::move(n), std::move(a)}; }
  static RichType arrow(RichType from, RichType to) {
    return {Kind::Arrow, "", {std::move(from), std::move(to)}};
  }

  friend bool operator==(const RichType&, const RichType&) = default;
};

struct ClassConstraint {
  std::string class_name;
  RichType argument;  // a type variable unless the constraint is malformed

  friend bool operator==(const ClassConstraint&, const ClassConstraint&) = default;
};

/// `name :: (C1 a, C2 b) => T`
struct RichSignature {
  std::string name;
  std::vector<ClassConstraint> constraints;
  RichType type;
};

std::string to_string(const RichType& t);

/// Parses a type with an optional constraint context (`Eq a => ...`).
/// `[a]` is `List a`, `(a, b)` is `Pair a b`, `(a, b, c)` is `Triple a b c`,
/// `String` is `List Char`, `()` is `Unit`. Arrows associate to the right.
std::pair<std::vector<ClassConstraint>, RichType> parse_rich_type(std::string_view text, std::size_t line = 1,
                                                                  std::size_t column_offset = 0);

/// Parses `name :: type`. Operator names are written `(op)` and stored bare.
RichSignature parse_rich_signature(std::string_view text, std::size_t line = 1);

struct Component {
  std::string name;
  PolyType type;
  /// Parameter positions introduced by dictionary passing.
  std::vector<std::size_t> dictionary_params;
};

/// Component library: constructor arities plus components in declaration order.
class Library {
 public:
  /// First declaration fixes the arity; a conflicting one throws.
  void declare_constructor(const std::string& name, std::size_t arity);
  /// Declares every constructor used in the signature, then adds it.
  /// Throws std::invalid_argument on duplicate names or arity conflicts.
  void add_component(Component c);

  std::optional<std::size_t> arity(const std::string& ctor) const;
  const std::map<std::string, std::size_t>& constructors() const { return constructors_; }

  std::span<const Component> components() const { return components_; }
  const Component* find(const std::string& name) const;
  const Component& at(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }
  std::size_t size() const { return components_.size(); }

  /// Throws if any constructor in `t` is undeclared or misapplied.
  void check_well_formed(const Type& t) const;

 private:
  void declare_in(const Type& t);

  std::map<std::string, std::size_t> constructors_;
  std::vector<Component> components_;
  std::map<std::string, std::size_t> index_;
};

/// Converts a first-order surface type; throws std::invalid_argument on arrows
/// nested in argument positions or variables applied to arguments.
Type to_base_type(const RichType& t);
FnType to_fn_type(const RichType& t);

/// First-order signature (no constraints, no higher-order arguments).
/// When `lib` is given, constructors must be declared there with the right arity.
std::pair<std::string, PolyType> parse_signature(std::string_view text, const Library* lib = nullptr,
                                                 std::size_t line = 1);

/// Base type in signature syntax, variables kept as written.
Type parse_base_type(std::string_view text);

/// Loads a file of first-order signatures (`--` comments, blank lines).
Library load_library(std::string_view text);

}  // namespace tygar
