#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tygar/lattice.hpp"
#include "tygar/signature.hpp"
#include "tygar/types.hpp"

namespace tygar {

/// One abstract component instance inside a transition: the component and
/// the place of each argument, in signature order.
struct Member {
  std::size_t component;           // index into the library
  std::vector<std::size_t> args;   // place ids
  friend bool operator==(const Member&, const Member&) = default;
  friend auto operator<=>(const Member&, const Member&) = default;
};

struct Transition {
  enum class Kind { Group, Copy };

  Kind kind = Kind::Group;
  /// (place, multiplicity), sorted by place.
  std::vector<std::pair<std::size_t, int>> inputs;
  std::size_t output = 0;
  /// 1 for component groups, 2 for copy transitions.
  int output_multiplicity = 1;
  /// Nonempty for groups, sorted; empty for copies.
  std::vector<Member> members;

  bool is_copy() const { return kind == Kind::Copy; }
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct NetOptions {
  bool coalesce = true;
};

/// Abstract transition net for (library, query, cover). Places are the
/// non-bottom cover members in type order; transitions are component groups
/// sorted by (output, inputs) followed by copy transitions.
class TransitionNet {
 public:
  const std::vector<Type>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<int>& initial() const { return initial_; }
  const std::vector<std::size_t>& finals() const { return finals_; }
  const AbstractCover& cover() const { return cover_; }
  const FnType& query() const { return query_; }
  const NetOptions& options() const { return options_; }
  std::uint64_t version() const { return version_; }
  /// Process-unique id of this net state; changes on every build or refine.
  std::uint64_t stamp() const { return stamp_; }

  std::size_t place_index(const Type& t) const;  // throws if absent
  bool is_final(std::size_t place) const;
  /// Number of component instances (ungrouped transitions).
  std::size_t instance_count() const { return instances_.size(); }

  /// Deterministic text rendering.
  std::string dump(const Library& lib) const;

  /// Same places, transitions, marking and finals.
  friend bool operator==(const TransitionNet& a, const TransitionNet& b);

 private:
  friend TransitionNet build_atn(const Library&, const FnType&, const AbstractCover&, NetOptions);
  friend void refine_atn(TransitionNet&, const Library&, const Type&);

  struct InstanceValue {
    Type raw;  // transformer result before abstraction
    Type out;  // abstracted output place type
  };
  using InstanceKey = std::pair<std::size_t, std::vector<Type>>;

  void derive();

  FnType query_;
  AbstractCover cover_;
  NetOptions options_;
  std::map<InstanceKey, InstanceValue> instances_;
  std::vector<Type> places_;
  std::vector<Transition> transitions_;
  std::vector<int> initial_;
  std::vector<std::size_t> finals_;
  std::uint64_t version_ = 0;
  std::uint64_t stamp_ = 0;
};

/// Builds the net from scratch. `t` must be ground.
TransitionNet build_atn(const Library& lib, const FnType& t, const AbstractCover& cover, NetOptions options = {});

/// Adds one type to the net's cover and updates the net in place: transitions
/// into a parent of `added` are re-routed where the abstraction changes, and
/// instances whose arguments mention `added` are enumerated. Throws
/// std::invalid_argument if `added` is already a member or the enlarged
/// cover is not meet-closed.
void refine_atn(TransitionNet& net, const Library& lib, const Type& added);

/// Refines the net up to `target` (a meet-closed superset of its cover),
/// one type at a time.
void refine_atn_to(TransitionNet& net, const Library& lib, const AbstractCover& target);

/// Final places, most specific first; ties by type order.
std::vector<std::size_t> final_place_order(const TransitionNet& net);

}  // namespace tygar
