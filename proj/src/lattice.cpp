#include "tygar/lattice.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace tygar {

namespace {

bool match_into(const Type& general, const Type& specific, std::map<std::string, Type>& out) {
  switch (general.kind()) {
    case Type::Kind::Bottom:
      return specific.is_bottom();
    case Type::Kind::Var: {
      auto [it, inserted] = out.emplace(general.name(), specific);
      return inserted || it->second == specific;
    }
    case Type::Kind::App: {
      if (!specific.is_app() || specific.name() != general.name()) return false;
      auto ga = general.args();
      auto sa = specific.args();
      if (ga.size() != sa.size()) return false;
      if (general.is_ground()) return general == specific;
      for (std::size_t i = 0; i < ga.size(); ++i)
        if (!match_into(ga[i], sa[i], out)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<Substitution> match(const Type& general, const Type& specific) {
  if (specific.is_bottom()) return Substitution::bottom();
  std::map<std::string, Type> out;
  if (!match_into(general, specific, out)) return std::nullopt;
  return Substitution::of(std::move(out));
}

bool subsumes(const Type& specific, const Type& general) {
  if (specific.is_bottom() || general.is_var()) return true;
  if (general.is_bottom()) return false;
  if (general.is_ground()) return general == specific;
  std::map<std::string, Type> out;
  return match_into(general, specific, out);
}

bool equivalent(const Type& a, const Type& b) {
  if (a.size() != b.size()) return false;
  return canonicalize(a) == canonicalize(b);
}

// ----------------------------------------------------------------------------

Type Unifier::walk(const Type& t) const {
  Type cur = t;
  while (cur.is_var()) {
    auto it = bind_.find(cur.name());
    if (it == bind_.end()) break;
    cur = it->second;
  }
  return cur;
}

bool Unifier::occurs(const std::string& v, const Type& t) const {
  Type w = walk(t);
  if (w.is_var()) return w.name() == v;
  if (w.is_ground()) return false;
  for (const auto& a : w.args())
    if (occurs(v, a)) return true;
  return false;
}

bool Unifier::unify(const Type& a, const Type& b) {
  if (failed_) return false;
  if (a.is_bottom() || b.is_bottom()) return !(failed_ = true);
  std::vector<std::pair<Type, Type>> work{{a, b}};
  while (!work.empty()) {
    auto [x0, y0] = std::move(work.back());
    work.pop_back();
    Type x = walk(x0);
    Type y = walk(y0);
    if (x.is_var() && y.is_var() && x.name() == y.name()) continue;
    if (x.is_var() || y.is_var()) {
      if (!x.is_var()) std::swap(x, y);
      if (occurs(x.name(), y)) return !(failed_ = true);
      bind_.emplace(x.name(), y);
      continue;
    }
    if (x.name() != y.name() || x.args().size() != y.args().size()) return !(failed_ = true);
    if (x.is_ground() && y.is_ground()) {
      if (x == y) continue;
      return !(failed_ = true);
    }
    auto xa = x.args();
    auto ya = y.args();
    for (std::size_t i = xa.size(); i-- > 0;) work.emplace_back(xa[i], ya[i]);
  }
  return true;
}

Type Unifier::resolve(const Type& t) const {
  if (failed_) return Type::bottom();
  Type w = walk(t);
  if (!w.is_app() || w.is_ground()) return w;
  std::vector<Type> args;
  args.reserve(w.args().size());
  for (const auto& a : w.args()) args.push_back(resolve(a));
  return Type::app(w.name(), std::move(args));
}

Substitution Unifier::result() const {
  if (failed_) return Substitution::bottom();
  std::map<std::string, Type> out;
  for (const auto& [v, _] : bind_) out.emplace(v, resolve(Type::var(v)));
  return Substitution::of(std::move(out));
}

Substitution mgu(const Type& a, const Type& b) {
  Unifier u;
  if (!u.unify(a, b)) return Substitution::bottom();
  return u.result();
}

Substitution mgu(const std::vector<std::pair<Type, Type>>& pairs) {
  Unifier u;
  for (const auto& [a, b] : pairs)
    if (!u.unify(a, b)) return Substitution::bottom();
  return u.result();
}

Type meet(const Type& a, const Type& b) {
  if (a.is_bottom() || b.is_bottom()) return Type::bottom();
  if (a.is_var()) return canonicalize(b);
  if (b.is_var()) return canonicalize(a);
  Type l = a.is_ground() ? a : rename_vars(a, "l#");
  Type r = b.is_ground() ? b : rename_vars(b, "r#");
  Unifier u;
  if (!u.unify(l, r)) return Type::bottom();
  return canonicalize(u.resolve(l));
}

// ----------------------------------------------------------------------------

AbstractCover::AbstractCover() : members_{Type::bottom(), Type::var("t0")} {}

AbstractCover AbstractCover::concrete() {
  AbstractCover c;
  c.concrete_ = true;
  return c;
}

bool AbstractCover::contains(const Type& t) const {
  Type c = canonicalize(t);
  return std::binary_search(members_.begin(), members_.end(), c);
}

Type AbstractCover::abstract(const Type& b) const {
  if (concrete_ || b.is_bottom()) return b;
  Type key = canonicalize(b);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  // Meet-closure makes the minimum of the upper set unique, so a running
  // minimum over one scan finds it.
  Type best = Type::var("t0");
  for (const auto& m : members_) {
    if (m.is_bottom() || m.is_var()) continue;
    if (subsumes(key, m) && subsumes(m, best)) best = m;
  }
  memo_.emplace(key, best);
  return best;
}

bool AbstractCover::insert(const Type& t) {
  Type c = canonicalize(t);
  auto pos = std::lower_bound(members_.begin(), members_.end(), c);
  if (pos != members_.end() && *pos == c) return false;
  members_.insert(pos, c);
  ++version_;
  memo_.clear();
  return true;
}

std::vector<Type> AbstractCover::parents(const Type& t) const {
  Type c = canonicalize(t);
  std::vector<Type> uppers;
  for (const auto& m : members_)
    if (m != c && subsumes(c, m) && !subsumes(m, c)) uppers.push_back(m);
  std::vector<Type> out;
  for (const auto& u : uppers) {
    bool minimal = true;
    for (const auto& v : uppers)
      if (v != u && subsumes(v, u)) {
        minimal = false;
        break;
      }
    if (minimal) out.push_back(u);
  }
  return out;
}

bool AbstractCover::is_meet_closed() const {
  for (std::size_t i = 0; i < members_.size(); ++i)
    for (std::size_t j = i + 1; j < members_.size(); ++j)
      if (!std::binary_search(members_.begin(), members_.end(), meet(members_[i], members_[j]))) return false;
  return true;
}

std::string AbstractCover::to_string() const {
  if (concrete_) return "<concrete>";
  std::string out = "{";
  bool first = true;
  for (const auto& m : members_) {
    if (!first) out += ", ";
    first = false;
    out += tygar::to_string(m);
  }
  return out + "}";
}

AbstractCover close_under_meet(const std::vector<Type>& types) {
  std::set<Type> set{Type::bottom(), Type::var("t0")};
  std::vector<Type> work;
  for (const auto& t : types) {
    Type c = canonicalize(t);
    if (set.insert(c).second) work.push_back(c);
  }
  while (!work.empty()) {
    Type x = work.back();
    work.pop_back();
    std::vector<Type> snapshot(set.begin(), set.end());
    for (const auto& y : snapshot) {
      Type m = meet(x, y);
      if (set.insert(m).second) work.push_back(m);
    }
  }
  AbstractCover cover;
  for (const auto& t : set) cover.insert(t);
  return cover;
}

bool refines(const AbstractCover& finer, const AbstractCover& coarser) {
  if (coarser.is_concrete()) return finer.is_concrete();
  if (finer.is_concrete()) return true;
  const auto& f = finer.members();
  const auto& c = coarser.members();
  return std::includes(f.begin(), f.end(), c.begin(), c.end());
}

std::vector<Type> insertion_order(const AbstractCover& from, const AbstractCover& to) {
  std::vector<Type> remaining;
  for (const auto& m : to.members())
    if (!from.contains(m)) remaining.push_back(m);
  std::vector<Type> out;
  while (!remaining.empty()) {
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      bool minimal = true;
      for (std::size_t j = 0; j < remaining.size(); ++j)
        if (j != i && subsumes(remaining[j], remaining[i])) {
          minimal = false;
          break;
        }
      if (minimal) {
        out.push_back(remaining[i]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
        break;
      }
    }
  }
  return out;
}

// ----------------------------------------------------------------------------

namespace {

const char* const kHole = "w#";

using Position = std::vector<std::size_t>;

void ground_positions(const Type& t, Position& here, std::vector<Position>& out) {
  if (!t.is_app()) return;
  auto args = t.args();
  for (std::size_t i = 0; i < args.size(); ++i) {
    here.push_back(i);
    ground_positions(args[i], here, out);
    here.pop_back();
  }
  if (t.is_ground()) out.push_back(here);
}

void var_positions(const Type& t, Position& here, std::vector<std::pair<std::string, Position>>& out) {
  if (t.is_var()) {
    out.emplace_back(t.name(), here);
    return;
  }
  if (!t.is_app() || t.is_ground()) return;
  auto args = t.args();
  for (std::size_t i = 0; i < args.size(); ++i) {
    here.push_back(i);
    var_positions(args[i], here, out);
    here.pop_back();
  }
}

Type replace_at(const Type& t, const Position& pos, std::size_t depth, const Type& with) {
  if (depth == pos.size()) return with;
  std::vector<Type> args(t.args().begin(), t.args().end());
  args[pos[depth]] = replace_at(args[pos[depth]], pos, depth + 1, with);
  return Type::app(t.name(), std::move(args));
}

const Type& subterm_at(const Type& t, const Position& pos) {
  const Type* cur = &t;
  for (auto i : pos) cur = &cur->args()[i];
  return *cur;
}

}  // namespace

std::vector<Type> weakenings(const Type& b) {
  std::vector<Type> out;
  if (b.is_bottom()) return out;
  std::vector<Position> positions;
  Position here;
  ground_positions(b, here, positions);
  Type hole = Type::var(kHole);
  for (const auto& p : positions) out.push_back(canonicalize(replace_at(b, p, 0, hole)));
  return out;
}

std::vector<Type> generalization_moves(const Type& b) {
  std::vector<std::pair<std::size_t, Type>> moves;
  if (b.is_bottom()) return {};
  std::vector<Position> positions;
  Position here;
  ground_positions(b, here, positions);
  Type hole = Type::var(kHole);
  for (const auto& p : positions)
    moves.emplace_back(subterm_at(b, p).size(), canonicalize(replace_at(b, p, 0, hole)));

  std::vector<std::pair<std::string, Position>> occurrences;
  var_positions(b, here, occurrences);
  std::map<std::string, int> counts;
  for (const auto& [v, _] : occurrences) ++counts[v];
  for (const auto& [v, p] : occurrences)
    if (counts[v] > 1) moves.emplace_back(1, canonicalize(replace_at(b, p, 0, hole)));

  std::stable_sort(moves.begin(), moves.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<Type> out;
  for (auto& [_, t] : moves)
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  return out;
}

}  // namespace tygar
