#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tygar/lattice.hpp"
#include "tygar/signature.hpp"
#include "tygar/term.hpp"
#include "tygar/types.hpp"

namespace tygar {

/// Applies a component's type transformer one argument at a time, so callers
/// enumerating argument tuples can prune as soon as unification fails.
class PartialApplication {
 public:
  explicit PartialApplication(const PolyType& type);

  /// Unifies the next formal parameter with `arg`. Returns false once the
  /// result is bound to be bottom.
  bool push(const Type& arg);
  std::size_t pushed() const { return pushed_; }
  bool failed() const { return unifier_.failed(); }
  /// Canonical result type; requires every parameter pushed.
  Type result() const;

 private:
  const PolyType* type_;
  Unifier unifier_;
  std::size_t pushed_ = 0;
};

/// ⟦type⟧(args): unify the formals with the arguments (each renamed apart)
/// and return the instantiated result, canonical. Bottom if any argument is bottom.
Type apply_transformer(const PolyType& type, std::span<const Type> args);
/// Throws std::invalid_argument for unknown components and arity mismatches.
Type apply_transformer(const Library& lib, const std::string& component, std::span<const Type> args);

/// Ordered variable bindings; all types ground.
using Environment = std::vector<std::pair<std::string, Type>>;

/// Bottom-up inference under `cover` (identity abstraction for a concrete
/// cover). Never fails on well-formed terms but may return bottom.
/// Throws std::invalid_argument for unbound variables and unknown components.
Type infer(const Library& lib, const Environment& env, const AbstractCover& cover, const Term& e);

/// Binds the parameters at t.params and tests t.ret ⊑ inferred body type.
/// Throws std::invalid_argument on an arity mismatch.
bool check(const Library& lib, const AbstractCover& cover, const NormalForm& e, const FnType& t);

/// Environment binding E's parameters to the query parameter types.
Environment bind_params(const NormalForm& e, const FnType& t);

}  // namespace tygar
