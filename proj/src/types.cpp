#include "tygar/types.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace tygar {

struct Type::Node {
  Kind kind = Kind::Bottom;
  std::string name;
  std::vector<Type> args;
  std::size_t hash = 0;
  std::size_t size = 1;
  std::size_t depth = 0;
  bool ground = true;
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

const std::shared_ptr<const Type::Node>& bottom_node() {
  static const auto node = [] {
    auto n = std::make_shared<Type::Node>();
    n->kind = Type::Kind::Bottom;
    n->hash = 0x5bd1e995;
    return std::shared_ptr<const Type::Node>(std::move(n));
  }();
  return node;
}

}  // namespace

Type::Type() : node_(bottom_node()) {}
Type::Type(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Type Type::var(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->hash = mix(1, std::hash<std::string>{}(name));
  n->name = std::move(name);
  n->ground = false;
  return Type(std::move(n));
}

Type Type::app(std::string ctor, std::vector<Type> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::App;
  std::size_t h = mix(2, std::hash<std::string>{}(ctor));
  std::size_t depth = 0;
  for (const auto& a : args) {
    h = mix(h, a.hash());
    n->size += a.size();
    n->ground = n->ground && a.is_ground();
    depth = std::max(depth, a.depth() + 1);
  }
  n->hash = h;
  n->depth = depth;
  n->name = std::move(ctor);
  n->args = std::move(args);
  return Type(std::move(n));
}

Type Type::bottom() { return Type(); }

Type::Kind Type::kind() const { return node_->kind; }
const std::string& Type::name() const { return node_->name; }
std::span<const Type> Type::args() const { return node_->args; }
bool Type::is_ground() const { return node_->ground; }
std::size_t Type::size() const { return node_->size; }
std::size_t Type::depth() const { return node_->depth; }
std::size_t Type::hash() const { return node_->hash; }

bool operator==(const Type& a, const Type& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind() || a.size() != b.size()) return false;
  if (a.name() != b.name()) return false;
  auto as = a.args();
  auto bs = b.args();
  return std::equal(as.begin(), as.end(), bs.begin(), bs.end());
}

bool operator<(const Type& a, const Type& b) {
  if (a.node_ == b.node_) return false;
  if (a.kind() != b.kind()) return a.kind() == Type::Kind::Bottom ||
                                    (a.kind() == Type::Kind::Var && b.kind() == Type::Kind::App);
  if (a.name() != b.name()) return a.name() < b.name();
  auto as = a.args();
  auto bs = b.args();
  return std::lexicographical_compare(as.begin(), as.end(), bs.begin(), bs.end());
}

namespace {

void render(const Type& t, std::string& out, bool nested) {
  switch (t.kind()) {
    case Type::Kind::Bottom:
      out += "_|_";
      return;
    case Type::Kind::Var:
      out += t.name();
      return;
    case Type::Kind::App: {
      bool parens = nested && !t.args().empty();
      if (parens) out += '(';
      out += t.name();
      for (const auto& a : t.args()) {
        out += ' ';
        render(a, out, true);
      }
      if (parens) out += ')';
      return;
    }
  }
}

Type map_vars(const Type& t, const std::function<Type(const std::string&)>& f) {
  switch (t.kind()) {
    case Type::Kind::Bottom:
      return t;
    case Type::Kind::Var:
      return f(t.name());
    case Type::Kind::App: {
      if (t.is_ground()) return t;
      std::vector<Type> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(map_vars(a, f));
      return Type::app(t.name(), std::move(args));
    }
  }
  return t;
}

}  // namespace

std::string to_string(const Type& t) {
  std::string out;
  render(t, out, false);
  return out;
}

void collect_vars(const Type& t, std::vector<std::string>& out) {
  if (t.is_var()) {
    if (std::find(out.begin(), out.end(), t.name()) == out.end()) out.push_back(t.name());
    return;
  }
  if (t.is_ground()) return;
  for (const auto& a : t.args()) collect_vars(a, out);
}

Type canonicalize(const Type& t) {
  if (t.is_ground() || t.is_bottom()) return t;
  std::vector<std::string> vars;
  collect_vars(t, vars);
  bool already = true;
  for (std::size_t i = 0; i < vars.size() && already; ++i) already = vars[i] == "t" + std::to_string(i);
  if (already) return t;
  std::unordered_map<std::string, Type> renaming;
  for (std::size_t i = 0; i < vars.size(); ++i) renaming.emplace(vars[i], Type::var("t" + std::to_string(i)));
  return map_vars(t, [&](const std::string& v) { return renaming.at(v); });
}

Type rename_vars(const Type& t, const std::string& prefix) {
  return map_vars(t, [&](const std::string& v) { return Type::var(prefix + v); });
}

bool FnType::is_ground() const {
  return ret.is_ground() && std::all_of(params.begin(), params.end(), [](const Type& p) { return p.is_ground(); });
}

std::string to_string(const FnType& t) {
  std::string out;
  for (const auto& p : t.params) {
    // Base types never contain arrows, so parameters need no parentheses.
    out += to_string(p);
    out += " -> ";
  }
  out += to_string(t.ret);
  return out;
}

PolyType PolyType::generalize(FnType body) {
  PolyType p;
  for (const auto& t : body.params) collect_vars(t, p.quantified);
  collect_vars(body.ret, p.quantified);
  p.body = std::move(body);
  return p;
}

std::string to_string(const PolyType& p) { return to_string(p.body); }

Substitution Substitution::bottom() {
  Substitution s;
  s.bottom_ = true;
  return s;
}

Substitution Substitution::of(std::map<std::string, Type> bindings) {
  Substitution s;
  s.bindings_ = std::move(bindings);
  return s;
}

std::optional<Type> Substitution::lookup(const std::string& var) const {
  auto it = bindings_.find(var);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

Type apply_subst(const Substitution& s, const Type& t) {
  if (s.is_bottom() || t.is_bottom()) return Type::bottom();
  if (s.bindings().empty()) return t;
  return map_vars(t, [&](const std::string& v) {
    auto b = s.lookup(v);
    return b ? *b : Type::var(v);
  });
}

FnType apply_subst(const Substitution& s, const FnType& t) {
  FnType out;
  out.params.reserve(t.params.size());
  for (const auto& p : t.params) out.params.push_back(apply_subst(s, p));
  out.ret = apply_subst(s, t.ret);
  return out;
}

Substitution compose(const Substitution& s1, const Substitution& s2) {
  if (s1.is_bottom() || s2.is_bottom()) return Substitution::bottom();
  std::map<std::string, Type> out;
  for (const auto& [v, t] : s2.bindings()) out.emplace(v, apply_subst(s1, t));
  for (const auto& [v, t] : s1.bindings()) out.emplace(v, t);  // no-op where s2 already binds v
  return Substitution::of(std::move(out));
}

std::string FreshSupply::next() { return "?" + std::to_string(counter_++); }

FnType fresh_instance(const PolyType& p, FreshSupply& supply) {
  std::map<std::string, Type> renaming;
  for (const auto& v : p.quantified) renaming.emplace(v, Type::var(supply.next()));
  return apply_subst(Substitution::of(std::move(renaming)), p.body);
}

}  // namespace tygar
