#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tygar/types.hpp"

namespace tygar {

/// One-sided matching: the substitution s with s[general] == specific, if any.
/// Variables of `specific` are treated as rigid constants.
std::optional<Substitution> match(const Type& general, const Type& specific);

/// specific ⊑ general. Bottom is below everything; a lone variable is above everything.
bool subsumes(const Type& specific, const Type& general);

/// Mutual subsumption (alpha-equivalence for base types).
bool equivalent(const Type& a, const Type& b);

/// Incremental first-order unifier over a shared variable namespace.
/// Copy it to backtrack.
class Unifier {
 public:
  /// Returns false when no unifier exists; the state is then unusable.
  bool unify(const Type& a, const Type& b);
  /// Applies the accumulated bindings exhaustively.
  Type resolve(const Type& t) const;
  Substitution result() const;
  bool failed() const { return failed_; }

 private:
  Type walk(const Type& t) const;
  bool occurs(const std::string& v, const Type& t) const;

  std::unordered_map<std::string, Type> bind_;
  bool failed_ = false;
};

/// Most general unifier; the bottom substitution when none exists or either side is bottom.
Substitution mgu(const Type& a, const Type& b);
/// Simultaneous unifier of every pair.
Substitution mgu(const std::vector<std::pair<Type, Type>>& pairs);

/// Greatest lower bound after renaming the operands apart; canonical.
Type meet(const Type& a, const Type& b);

/// Meet-closed set of canonical types containing the top variable and bottom.
///
/// A cover flagged concrete stands for the full lattice: abstract() is the
/// identity, which turns abstract checking into concrete checking.
class AbstractCover {
 public:
  /// {τ, ⊥}
  AbstractCover();

  static AbstractCover top() { return AbstractCover(); }
  static AbstractCover concrete();

  bool is_concrete() const { return concrete_; }
  const std::vector<Type>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool contains(const Type& t) const;
  /// Bumped on every insertion.
  std::uint64_t version() const { return version_; }

  /// The most specific member above `b`.
  Type abstract(const Type& b) const;

  /// Inserts one type. The caller keeps the set meet-closed (see insertion_order).
  /// Returns false if it was already present.
  bool insert(const Type& t);

  /// Members strictly above `t` that are minimal w.r.t. ⊑ among those.
  std::vector<Type> parents(const Type& t) const;

  /// true iff every pairwise meet is a member.
  bool is_meet_closed() const;

  std::string to_string() const;

 private:
  std::vector<Type> members_;  // sorted by operator<
  bool concrete_ = false;
  std::uint64_t version_ = 0;
  mutable std::unordered_map<Type, Type, TypeHash> memo_;
};

/// Smallest meet-closed superset of `types` with τ and ⊥.
AbstractCover close_under_meet(const std::vector<Type>& types);

/// finer ⪯ coarser: coarser's members are all in finer.
bool refines(const AbstractCover& finer, const AbstractCover& coarser);

/// Members of `to` missing from `from`, ordered so that inserting them one by
/// one keeps every intermediate set meet-closed (more specific types first).
/// Requires both covers meet-closed and from ⊆ to.
std::vector<Type> insertion_order(const AbstractCover& from, const AbstractCover& to);

/// Each type obtained by replacing one ground subterm occurrence (the whole
/// type included, when ground) with a fresh variable. Post-order:
/// innermost first, left to right. Results are canonical.
std::vector<Type> weakenings(const Type& b);

/// Moves tried when generalizing a label: weakenings() plus, for each variable
/// occurring more than once, renaming one occurrence apart. Ordered by size of
/// the replaced subterm, largest first.
std::vector<Type> generalization_moves(const Type& b);

}  // namespace tygar
