#include "tygar/atn.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "tygar/typecheck.hpp"

namespace tygar {

namespace {

using Emit = std::function<void(const std::vector<Type>& args, const Type& raw)>;

// Enumerates argument tuples over `places` for one component, pruning a
// prefix as soon as unification fails. With `required`, only tuples that
// mention it at least once are produced.
void enumerate_tuples(const PolyType& type, const std::vector<Type>& places, const Type* required,
                      const Emit& emit) {
  std::size_t arity = type.body.params.size();
  std::vector<Type> tuple;
  tuple.reserve(arity);
  std::function<void(const PartialApplication&, bool)> go = [&](const PartialApplication& partial, bool used) {
    std::size_t i = tuple.size();
    if (i == arity) {
      if (required && !used) return;
      emit(tuple, partial.result());
      return;
    }
    bool last = i + 1 == arity;
    for (const auto& p : places) {
      bool is_required = required && p == *required;
      if (required && last && !used && !is_required) continue;
      PartialApplication next = partial;
      if (!next.push(p)) continue;
      tuple.push_back(p);
      go(next, used || is_required);
      tuple.pop_back();
    }
  };
  if (required && arity == 0) return;
  go(PartialApplication(type), false);
}

std::uint64_t next_stamp() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

std::vector<Type> place_types(const AbstractCover& cover) {
  std::vector<Type> out;
  for (const auto& m : cover.members())
    if (!m.is_bottom()) out.push_back(m);
  return out;
}

}  // namespace

std::size_t TransitionNet::place_index(const Type& t) const {
  auto it = std::lower_bound(places_.begin(), places_.end(), t);
  if (it == places_.end() || *it != t) throw std::invalid_argument("no place for type " + to_string(t));
  return static_cast<std::size_t>(it - places_.begin());
}

bool TransitionNet::is_final(std::size_t place) const {
  return std::binary_search(finals_.begin(), finals_.end(), place);
}

void TransitionNet::derive() {
  stamp_ = next_stamp();
  places_ = place_types(cover_);

  using GroupKey = std::pair<std::size_t, std::vector<std::pair<std::size_t, int>>>;
  std::map<GroupKey, std::vector<Member>> groups;
  std::vector<std::pair<GroupKey, Member>> singles;
  for (const auto& [key, value] : instances_) {
    Member m{key.first, {}};
    std::map<std::size_t, int> counts;
    for (const auto& a : key.second) {
      std::size_t id = place_index(a);
      m.args.push_back(id);
      ++counts[id];
    }
    GroupKey gk{place_index(value.out), {counts.begin(), counts.end()}};
    if (options_.coalesce)
      groups[gk].push_back(std::move(m));
    else
      singles.emplace_back(std::move(gk), std::move(m));
  }
  std::sort(singles.begin(), singles.end());

  transitions_.clear();
  auto add_group = [&](const GroupKey& gk, std::vector<Member> members) {
    Transition t;
    t.kind = Transition::Kind::Group;
    t.output = gk.first;
    t.inputs = gk.second;
    std::sort(members.begin(), members.end());
    t.members = std::move(members);
    transitions_.push_back(std::move(t));
  };
  for (auto& [gk, members] : groups) add_group(gk, std::move(members));
  for (auto& [gk, member] : singles) add_group(gk, {std::move(member)});

  initial_.assign(places_.size(), 0);
  for (const auto& p : query_.params) ++initial_[place_index(cover_.abstract(p))];

  finals_.clear();
  for (std::size_t i = 0; i < places_.size(); ++i)
    if (subsumes(query_.ret, places_[i])) finals_.push_back(i);

  for (std::size_t i = 0; i < places_.size(); ++i) {
    if (initial_[i] == 0) continue;
    Transition copy;
    copy.kind = Transition::Kind::Copy;
    copy.inputs = {{i, 1}};
    copy.output = i;
    copy.output_multiplicity = 2;
    transitions_.push_back(std::move(copy));
  }
}

bool operator==(const TransitionNet& a, const TransitionNet& b) {
  return a.places_ == b.places_ && a.transitions_ == b.transitions_ && a.initial_ == b.initial_ &&
         a.finals_ == b.finals_;
}

std::string TransitionNet::dump(const Library& lib) const {
  std::ostringstream out;
  out << "places\n";
  for (std::size_t i = 0; i < places_.size(); ++i) {
    out << "  p" << i << " " << to_string(places_[i]);
    if (initial_[i]) out << " init=" << initial_[i];
    if (is_final(i)) out << " final";
    out << "\n";
  }
  out << "transitions\n";
  for (std::size_t k = 0; k < transitions_.size(); ++k) {
    const Transition& t = transitions_[k];
    out << "  k" << k << " ";
    if (t.is_copy()) {
      out << "copy p" << t.output << "\n";
      continue;
    }
    for (std::size_t j = 0; j < t.members.size(); ++j) {
      if (j) out << " | ";
      const Member& m = t.members[j];
      out << lib.components()[m.component].name << "(";
      for (std::size_t a = 0; a < m.args.size(); ++a) out << (a ? "," : "") << "p" << m.args[a];
      out << ")";
    }
    out << " -> p" << t.output << "\n";
  }
  return out.str();
}

TransitionNet build_atn(const Library& lib, const FnType& t, const AbstractCover& cover, NetOptions options) {
  if (!t.is_ground()) throw std::invalid_argument("query type must be ground: " + to_string(t));
  TransitionNet net;
  net.query_ = t;
  net.cover_ = cover;
  net.options_ = options;
  std::vector<Type> places = place_types(cover);
  auto comps = lib.components();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    enumerate_tuples(comps[c].type, places, nullptr, [&](const std::vector<Type>& args, const Type& raw) {
      Type out = net.cover_.abstract(raw);
      if (out.is_bottom()) return;
      net.instances_.emplace(TransitionNet::InstanceKey{c, args}, TransitionNet::InstanceValue{raw, out});
    });
  }
  net.derive();
  return net;
}

void refine_atn(TransitionNet& net, const Library& lib, const Type& added_type) {
  Type added = canonicalize(added_type);
  if (added.is_bottom() || net.cover_.contains(added))
    throw std::invalid_argument("type " + to_string(added) + " is already in the cover");
  AbstractCover next = net.cover_;
  next.insert(added);
  for (const auto& m : next.members())
    if (!next.contains(meet(added, m)))
      throw std::invalid_argument("adding " + to_string(added) + " breaks meet-closure (missing " +
                                  to_string(meet(added, m)) + ")");

  std::vector<Type> parents = next.parents(added);
  net.cover_ = std::move(next);

  for (auto& [key, value] : net.instances_) {
    if (std::find(parents.begin(), parents.end(), value.out) == parents.end()) continue;
    value.out = net.cover_.abstract(value.raw);
  }

  std::vector<Type> places = place_types(net.cover_);
  auto comps = lib.components();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    enumerate_tuples(comps[c].type, places, &added, [&](const std::vector<Type>& args, const Type& raw) {
      Type out = net.cover_.abstract(raw);
      if (out.is_bottom()) return;
      net.instances_.emplace(TransitionNet::InstanceKey{c, args}, TransitionNet::InstanceValue{raw, out});
    });
  }
  ++net.version_;
  net.derive();
}

void refine_atn_to(TransitionNet& net, const Library& lib, const AbstractCover& target) {
  for (const auto& t : insertion_order(net.cover(), target)) refine_atn(net, lib, t);
}

std::vector<std::size_t> final_place_order(const TransitionNet& net) {
  std::vector<std::size_t> remaining = net.finals();  // already in type order
  std::vector<std::size_t> out;
  const auto& places = net.places();
  while (!remaining.empty()) {
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      bool minimal = true;
      for (std::size_t j = 0; j < remaining.size() && minimal; ++j)
        if (j != i && subsumes(places[remaining[j]], places[remaining[i]])) minimal = false;
      if (minimal) {
        out.push_back(remaining[i]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
        break;
      }
    }
  }
  return out;
}

}  // namespace tygar
