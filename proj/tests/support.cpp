#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "tygar/pathgen.hpp"
#include "tygar/reach.hpp"
#include "tygar/tygar.hpp"
#include "tygar/typecheck.hpp"

namespace tygar::testing {

namespace {

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::vector<std::string> vars_of(const Type& t) {
  std::vector<std::string> v;
  collect_vars(t, v);
  return v;
}

// Independent of the library code: plain recursive matching of a pattern
// against a ground type.
bool ground_match(const Type& pattern, const Type& ground, std::map<std::string, Type>& bind) {
  if (pattern.is_var()) {
    auto [it, fresh] = bind.emplace(pattern.name(), ground);
    return fresh || it->second == ground;
  }
  if (!ground.is_app() || pattern.name() != ground.name() || pattern.args().size() != ground.args().size())
    return false;
  for (std::size_t i = 0; i < pattern.args().size(); ++i)
    if (!ground_match(pattern.args()[i], ground.args()[i], bind)) return false;
  return true;
}

Type plug(const Type& t, const std::map<std::string, Type>& bind) {
  if (t.is_var()) return bind.at(t.name());
  if (!t.is_app()) return t;
  std::vector<Type> args;
  for (const auto& a : t.args()) args.push_back(plug(a, bind));
  return Type::app(t.name(), std::move(args));
}

Substitution random_subst(Rng& rng, const Type& t, const std::vector<std::string>& into) {
  std::map<std::string, Type> m;
  for (const auto& v : vars_of(t)) m.emplace(v, random_type(rng, 2, into, 0.4));
  return Substitution::of(std::move(m));
}

// Unconstrained replacement of random subterms by fresh variables.
Type random_generalization(Rng& rng, const Type& t, const std::string& prefix, int& counter) {
  if (t.is_bottom()) return t;
  if (coin(rng, 0.25)) return Type::var(prefix + std::to_string(counter++));
  if (!t.is_app()) return t;
  std::vector<Type> args;
  for (const auto& a : t.args()) args.push_back(random_generalization(rng, a, prefix, counter));
  return Type::app(t.name(), std::move(args));
}

std::string str(const Type& t) { return to_string(t); }

bool relevant(const Term& e, std::size_t arity) {
  std::vector<bool> seen(arity, false);
  std::vector<const Term*> stack{&e};
  while (!stack.empty()) {
    const Term* t = stack.back();
    stack.pop_back();
    if (t->is_var()) {
      for (std::size_t i = 0; i < arity; ++i)
        if (t->name == param_name(i)) seen[i] = true;
    }
    for (const auto& a : t->args) stack.push_back(&a);
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

std::size_t var_occurrences(const Term& e) {
  if (e.is_var()) return 1;
  std::size_t n = 0;
  for (const auto& a : e.args) n += var_occurrences(a);
  return n;
}

struct NetCase {
  Library lib;
  FnType query;
  AbstractCover cover;
  TransitionNet net;
};

// Random small net: ≤6 places, ≤8 transitions, at least one transition.
NetCase random_net_case(Rng& rng, bool coalesce = true) {
  for (;;) {
    Library lib = random_library(rng, 2 + pick(rng, 3));
    FnType q = random_query(rng);
    AbstractCover cover = coin(rng, 0.3) ? initial_cover(InitialCover::Query, q) : random_cover(rng, 3);
    TransitionNet net = build_atn(lib, q, cover, NetOptions{coalesce});
    if (net.places().size() <= 6 && net.transitions().size() <= 8 && !net.transitions().empty())
      return NetCase{std::move(lib), std::move(q), std::move(cover), std::move(net)};
  }
}

}  // namespace

Library random_universe_library() {
  Library lib;
  lib.declare_constructor("A", 0);
  lib.declare_constructor("B", 0);
  lib.declare_constructor("L", 1);
  lib.declare_constructor("P", 2);
  return lib;
}

Type random_type(Rng& rng, std::size_t depth, const std::vector<std::string>& vars, double var_weight) {
  if (depth == 0 || coin(rng, 0.35)) {
    if (!vars.empty() && coin(rng, var_weight)) return Type::var(vars[pick(rng, vars.size())]);
    return Type::app(coin(rng, 0.5) ? "A" : "B");
  }
  if (coin(rng, 0.5)) return Type::app("L", {random_type(rng, depth - 1, vars, var_weight)});
  return Type::app("P", {random_type(rng, depth - 1, vars, var_weight), random_type(rng, depth - 1, vars, var_weight)});
}

Type random_ground(Rng& rng, std::size_t depth) { return random_type(rng, depth, {}, 0); }

std::vector<Type> ground_universe(std::size_t depth) {
  std::vector<Type> level{Type::app("A"), Type::app("B")};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<Type> next = level;
    for (const auto& x : level) next.push_back(Type::app("L", {x}));
    for (const auto& x : level)
      for (const auto& y : level) next.push_back(Type::app("P", {x, y}));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    level = std::move(next);
  }
  return level;
}

std::vector<Type> small_universe(std::size_t depth) {
  std::vector<Type> level{Type::app("A"), Type::var("t0"), Type::var("t1")};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<Type> next = level;
    for (const auto& x : level) next.push_back(Type::app("L", {x}));
    for (const auto& x : level)
      for (const auto& y : level) next.push_back(Type::app("P", {x, y}));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    level = std::move(next);
  }
  std::set<Type> canon;
  for (const auto& t : level) canon.insert(canonicalize(t));
  return {canon.begin(), canon.end()};
}

Library random_library(Rng& rng, std::size_t n) {
  Library lib = random_universe_library();
  const std::vector<std::string> vars{"a", "b"};
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arity = std::discrete_distribution<std::size_t>({3, 4, 3})(rng);
    FnType f;
    std::vector<std::string> bound;
    for (std::size_t j = 0; j < arity; ++j) {
      f.params.push_back(random_type(rng, 1, vars, 0.5));
      collect_vars(f.params.back(), bound);
    }
    f.ret = random_type(rng, 1, vars, 0.5);
    // At most one result-only variable, only in nullary components, and only under a constructor.
    std::vector<std::string> free;
    for (const auto& v : vars_of(f.ret))
      if (std::find(bound.begin(), bound.end(), v) == bound.end()) free.push_back(v);
    if (!free.empty()) {
      std::map<std::string, Type> fix;
      for (std::size_t k = 0; k < free.size(); ++k)
        if (arity > 0 || k > 0) fix.emplace(free[k], Type::app("A"));
      f.ret = apply_subst(Substitution::of(fix), f.ret);
      if (f.ret.is_var()) f.ret = Type::app("L", {f.ret});
    }
    lib.add_component(Component{"c" + std::to_string(i), PolyType::generalize(std::move(f)), {}});
  }
  return lib;
}

FnType random_query(Rng& rng) {
  FnType q;
  std::size_t n = 1 + pick(rng, 2);
  for (std::size_t i = 0; i < n; ++i) q.params.push_back(random_ground(rng, 1));
  q.ret = random_ground(rng, 1);
  return q;
}

AbstractCover random_cover(Rng& rng, std::size_t k) {
  std::vector<Type> ts;
  std::size_t n = pick(rng, k + 1);
  for (std::size_t i = 0; i < n; ++i) ts.push_back(random_type(rng, 2, {"a", "b"}, 0.35));
  return close_under_meet(ts);
}

std::vector<Term> enumerate_terms(const Library& lib, std::size_t arity, std::size_t max_apps) {
  std::vector<std::vector<Term>> by_size(max_apps + 1);
  for (std::size_t i = 0; i < arity; ++i) by_size[0].push_back(Term::var(param_name(i)));
  for (std::size_t s = 1; s <= max_apps; ++s) {
    for (const auto& c : lib.components()) {
      std::size_t n = c.type.body.params.size();
      std::vector<Term> chosen;
      // distribute s-1 applications over n arguments
      auto rec = [&](auto&& self, std::size_t j, std::size_t left) -> void {
        if (j == n) {
          if (left == 0) by_size[s].push_back(Term::app(c.name, chosen));
          return;
        }
        for (std::size_t k = 0; k <= left; ++k)
          for (const auto& t : by_size[k]) {
            chosen.push_back(t);
            self(self, j + 1, left - k);
            chosen.pop_back();
          }
      };
      rec(rec, 0, s - 1);
    }
  }
  std::vector<Term> out;
  for (auto& v : by_size)
    for (auto& t : v) out.push_back(std::move(t));
  return out;
}

DeclarativeOracle::DeclarativeOracle(const Library& lib, std::vector<Type> params)
    : lib_(lib), params_(std::move(params)), fill_(ground_universe(2)) {}

const std::set<Type>& DeclarativeOracle::types_of(const Term& e) {
  if (auto it = memo_.find(e); it != memo_.end()) return it->second;
  std::set<Type> out;
  if (e.is_var()) {
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (e.name == param_name(i)) out.insert(params_[i]);
  } else {
    const FnType& sig = lib_.at(e.name).type.body;
    std::vector<const std::set<Type>*> args;
    for (const auto& a : e.args) args.push_back(&types_of(a));
    std::vector<std::string> ret_vars = vars_of(sig.ret);
    auto finish = [&](std::map<std::string, Type> bind) {
      std::vector<std::string> open;
      for (const auto& v : ret_vars)
        if (!bind.count(v)) open.push_back(v);
      auto rec = [&](auto&& self, std::size_t k) -> void {
        if (k == open.size()) {
          out.insert(plug(sig.ret, bind));
          return;
        }
        for (const auto& g : fill_) {
          bind[open[k]] = g;
          self(self, k + 1);
        }
        bind.erase(open[k]);
      };
      rec(rec, 0);
    };
    auto rec = [&](auto&& self, std::size_t j, const std::map<std::string, Type>& bind) -> void {
      if (j == args.size()) {
        finish(bind);
        return;
      }
      for (const auto& g : *args[j]) {
        auto b = bind;
        if (ground_match(sig.params[j], g, b)) self(self, j + 1, b);
      }
    };
    rec(rec, 0, {});
  }
  return memo_.emplace(e, std::move(out)).first->second;
}

// ---- property runs ---------------------------------------------------------

Report check_lattice_laws(std::uint64_t seed, std::size_t pairs) {
  Rng rng(seed);
  Report r;
  const std::vector<std::string> vars{"a", "b", "c"};
  for (std::size_t i = 0; i < pairs; ++i) {
    ++r.cases;
    Type x = coin(rng, 0.05) ? Type::bottom() : random_type(rng, 3, vars, 0.35);
    Type y = coin(rng, 0.4) ? apply_subst(random_subst(rng, x, vars), x) : random_type(rng, 3, vars, 0.35);
    std::string ctx = "x=" + str(x) + " y=" + str(y);

    // partial order
    if (!subsumes(x, x)) r.fail("reflexivity " + ctx);
    if (subsumes(x, y) && subsumes(y, x) && canonicalize(x) != canonicalize(y)) r.fail("antisymmetry " + ctx);
    auto ws = weakenings(y);
    if (!ws.empty()) {
      Type z = ws[pick(rng, ws.size())];
      if (subsumes(x, y) && !subsumes(x, z)) r.fail("transitivity " + ctx + " z=" + str(z));
    }

    // mgu soundness
    Substitution s = mgu(x, y);
    if (!s.is_bottom() && apply_subst(s, x) != apply_subst(s, y)) r.fail("mgu soundness " + ctx);

    // mgu generality and meet lower bound: build a common instance g of two generalizations
    if (!x.is_bottom()) {
      Type g = apply_subst(random_subst(rng, x, {"u", "v"}), x);
      int counter = 0;
      Type ga = random_generalization(rng, g, "p", counter);
      Type gb = random_generalization(rng, g, "q", counter);
      Substitution sg = mgu(ga, gb);
      std::string gctx = "ga=" + str(ga) + " gb=" + str(gb) + " g=" + str(g);
      if (sg.is_bottom()) {
        r.fail("mgu missed a unifier " + gctx);
      } else {
        std::vector<std::string> vs;
        collect_vars(ga, vs);
        collect_vars(gb, vs);
        std::vector<Type> vt;
        for (const auto& v : vs) vt.push_back(Type::var(v));
        Type tup = Type::app("Tuple#", vt);
        auto rho_a = match(ga, g);
        auto rho_b = match(gb, g);
        if (!rho_a || !rho_b) {
          r.fail("generalization is not general " + gctx);
        } else {
          std::map<std::string, Type> rho = rho_a->bindings();
          for (const auto& [k, v] : rho_b->bindings()) rho.emplace(k, v);
          if (!match(apply_subst(sg, tup), apply_subst(Substitution::of(rho), tup)))
            r.fail("mgu not most general " + gctx);
        }
        if (!subsumes(g, meet(ga, gb))) r.fail("meet is not greatest " + gctx);
      }
    }

    // meet is a lower bound
    Type m = meet(x, y);
    if (!subsumes(m, x) || !subsumes(m, y)) r.fail("meet not a lower bound " + ctx);

    // weakenings strictly generalize
    for (const auto& w : weakenings(x))
      if (!subsumes(x, w) || subsumes(w, x)) r.fail("weakening not strict " + ctx + " w=" + str(w));

    // Galois insertion and monotone refinement
    AbstractCover cov = random_cover(rng, 4);
    Type ax = cov.abstract(x);
    if (!subsumes(x, ax)) r.fail("abstraction below its input " + ctx + " cover=" + cov.to_string());
    if (!cov.contains(ax)) r.fail("abstraction outside the cover " + ctx);
    const auto& mem = cov.members();
    const Type& mm = mem[pick(rng, mem.size())];
    if (cov.abstract(mm) != mm) r.fail("abstraction moves a member " + str(mm) + " cover=" + cov.to_string());
    std::vector<Type> more = mem;
    more.push_back(random_type(rng, 2, vars, 0.35));
    more.push_back(random_type(rng, 2, vars, 0.35));
    AbstractCover finer = close_under_meet(more);
    Type x2 = x.is_bottom() ? x : apply_subst(random_subst(rng, x, vars), x);
    if (!subsumes(finer.abstract(x2), ax))
      r.fail("abstraction not monotone " + ctx + " x2=" + str(x2) + " cover=" + cov.to_string());
    if (!cov.is_meet_closed() || !finer.is_meet_closed()) r.fail("closure not meet-closed");
  }
  return r;
}

Report check_meet_exhaustive() {
  Report r;
  std::vector<Type> u = small_universe(2);
  u.push_back(Type::bottom());
  std::size_t n = u.size();
  std::vector<std::vector<std::size_t>> below(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (subsumes(u[j], u[i])) below[i].push_back(j);
  std::vector<char> mark(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : below[i]) mark[j] = 1;
    for (std::size_t k = 0; k < n; ++k) {
      ++r.cases;
      Type m = meet(u[i], u[k]);
      if (!subsumes(m, u[i]) || !subsumes(m, u[k])) r.fail("meet not a lower bound of " + str(u[i]) + ", " + str(u[k]));
      for (std::size_t j : below[k])
        if (mark[j] && !subsumes(u[j], m))
          r.fail("lower bound " + str(u[j]) + " not below meet of " + str(u[i]) + ", " + str(u[k]));
    }
    for (std::size_t j : below[i]) mark[j] = 0;
  }
  return r;
}

Report check_oracle_agreement(std::uint64_t seed, std::size_t libraries) {
  Rng rng(seed);
  Report r;
  const std::vector<Type> targets = ground_universe(1);
  for (std::size_t l = 0; l < libraries; ++l) {
    Library lib = random_library(rng, 3 + pick(rng, 3));
    FnType q = random_query(rng);
    DeclarativeOracle oracle(lib, q.params);
    for (const auto& body : enumerate_terms(lib, q.params.size(), 3)) {
      NormalForm e = make_normal_form(q.params.size(), body);
      const auto& decl = oracle.types_of(body);
      Type inferred = infer(lib, bind_params(e, FnType{q.params, q.ret}), AbstractCover::concrete(), body);
      ++r.cases;
      if (inferred.is_bottom() != decl.empty())
        r.fail("typeability of " + render_term(body) + ": inferred " + str(inferred));
      for (const auto& b : targets) {
        ++r.cases;
        bool expect = decl.count(b) > 0;
        bool got = check(lib, AbstractCover::concrete(), e, FnType{q.params, b});
        if (expect != got)
          r.fail("check " + render_term(body) + " : " + str(b) + " oracle=" + (expect ? "yes" : "no") +
                 " inferred=" + str(inferred));
      }
    }
  }
  return r;
}

Report check_preservation(std::uint64_t seed, std::size_t libraries) {
  Rng rng(seed);
  Report r;
  const std::vector<Type> targets = ground_universe(1);
  for (std::size_t l = 0; l < libraries; ++l) {
    Library lib = random_library(rng, 3 + pick(rng, 3));
    FnType q = random_query(rng);
    AbstractCover coarse = random_cover(rng, 3);
    std::vector<Type> more = coarse.members();
    for (int k = 0; k < 3; ++k) more.push_back(random_type(rng, 2, {"a", "b"}, 0.35));
    if (coin(rng, 0.5))
      for (const auto& p : q.params) more.push_back(p);
    AbstractCover fine = close_under_meet(more);
    if (!refines(fine, coarse)) r.fail("closure of a superset does not refine");
    for (const auto& body : enumerate_terms(lib, q.params.size(), 3)) {
      NormalForm e = make_normal_form(q.params.size(), body);
      for (const auto& b : targets) {
        FnType t{q.params, b};
        bool concrete = check(lib, AbstractCover::concrete(), e, t);
        bool in_fine = check(lib, fine, e, t);
        bool in_coarse = check(lib, coarse, e, t);
        r.cases += 2;
        if (in_fine && !in_coarse)
          r.fail("preservation: " + render_term(body) + " : " + str(b) + " fine=" + fine.to_string() +
                 " coarse=" + coarse.to_string());
        if (concrete && (!in_fine || !in_coarse))
          r.fail("over-approximation: " + render_term(body) + " : " + str(b));
      }
    }
  }
  return r;
}

std::size_t final_place_of(const TransitionNet& net, const std::vector<std::size_t>& path) {
  auto ms = replay(net, path);
  const auto& m = ms->back();
  for (std::size_t p = 0; p < m.size(); ++p)
    if (m[p] == 1) return p;
  return m.size();
}

Library load_fixture(const std::string& name) {
  std::ifstream in(data_path(name));
  if (!in) throw std::runtime_error("cannot open " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_library(ss.str());
}

AbstractCover cover_of(std::initializer_list<const char*> types) {
  std::vector<Type> v;
  for (const char* t : types) v.push_back(parse_base_type(t));
  return close_under_meet(v);
}

std::vector<std::string> transition_labels(const TransitionNet& net, const Library& lib, const std::vector<std::size_t>& path) {
  std::vector<std::string> out;
  for (std::size_t id : path) {
    const Transition& tr = net.transitions().at(id);
    if (tr.is_copy()) {
      out.push_back("copy");
      continue;
    }
    std::vector<std::string> names;
    for (const auto& m : tr.members) names.push_back(lib.components()[m.component].name);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    std::string label;
    for (const auto& n : names) label += (label.empty() ? "" : "+") + n;
    out.push_back(label);
  }
  return out;
}

std::optional<std::size_t> find_transition(const TransitionNet& net, const Library& lib, const std::string& component,
                                           const std::vector<std::string>& input_types) {
  std::vector<std::size_t> want;
  for (const auto& t : input_types) want.push_back(net.place_index(parse_base_type(t)));
  std::sort(want.begin(), want.end());
  for (std::size_t id = 0; id < net.transitions().size(); ++id) {
    const Transition& tr = net.transitions()[id];
    for (const auto& m : tr.members) {
      if (lib.components()[m.component].name != component) continue;
      std::vector<std::size_t> args = m.args;
      std::sort(args.begin(), args.end());
      if (args == want) return id;
    }
  }
  return std::nullopt;
}

Report check_smt_bfs(std::uint64_t seed, std::size_t nets, const std::string& solver) {
  Rng rng(seed);
  Report r;
  SmtBackend smt(solver);
  smt.set_verify_models(true);
  for (std::size_t i = 0; i < nets; ++i) {
    NetCase nc = random_net_case(rng, coin(rng, 0.7));
    const TransitionNet& net = nc.net;
    std::set<Path> oracle = bfs_oracle(net, 4);
    for (std::size_t len = 0; len <= 4; ++len) {
      for (std::size_t f : net.finals()) {
        ++r.cases;
        std::set<Path> want;
        for (const auto& p : oracle)
          if (p.size() == len && final_place_of(net, p) == f) want.insert(p);
        std::set<Path> got;
        std::vector<Path> blocked;
        try {
          while (auto p = smt.find(net, len, f, blocked)) {
            if (!got.insert(*p).second) {
              r.fail("solver repeated a blocked path");
              break;
            }
            blocked.push_back(*p);
            if (got.size() > want.size() + 1) break;
          }
        } catch (const SolverError& e) {
          r.fail(std::string("solver: ") + e.what());
          continue;
        }
        if (got != want) {
          std::ostringstream s;
          s << "net " << i << " len " << len << " final p" << f << ": solver " << got.size() << " paths, bfs "
            << want.size() << "\n"
            << net.dump(nc.lib);
          r.fail(s.str());
        }
      }
    }
  }
  return r;
}

Report check_atn_theorems(std::uint64_t seed, std::size_t nets) {
  Rng rng(seed);
  Report r;
  for (std::size_t i = 0; i < nets; ++i) {
    bool coalesce = coin(rng, 0.7);
    NetCase nc = random_net_case(rng, coalesce);
    const TransitionNet& net = nc.net;
    std::size_t arity = nc.query.params.size();

    // coalescing transparency
    TransitionNet other = build_atn(nc.lib, nc.query, nc.cover, NetOptions{!coalesce});
    auto signatures = [](const TransitionNet& n) {
      std::multiset<std::tuple<std::size_t, std::vector<std::size_t>, std::size_t>> s;
      for (const auto& t : n.transitions())
        for (const auto& m : t.members) s.emplace(m.component, m.args, t.output);
      return s;
    };
    ++r.cases;
    if (net.places() != other.places() || signatures(net) != signatures(other))
      r.fail("coalescing changed the instance set\n" + net.dump(nc.lib));

    std::vector<Term> terms = enumerate_terms(nc.lib, arity, 3);
    std::size_t needed = 4;
    std::vector<const Term*> wanted;
    for (const auto& body : terms) {
      if (!relevant(body, arity)) continue;
      if (!check(nc.lib, nc.cover, make_normal_form(arity, body), nc.query)) continue;
      wanted.push_back(&body);
      needed = std::max(needed, body.applications() + var_occurrences(body) - arity);
    }
    std::set<Path> paths;
    try {
      paths = bfs_oracle(net, needed, 500'000);
    } catch (const StateSpaceExceeded&) {
      --i;
      continue;
    }
    std::set<Term> produced;
    for (const auto& p : paths) {
      bool typed = false;
      for (const auto& e : from_path(net, nc.lib, p)) {
        produced.insert(e.body);
        if (check(nc.lib, nc.cover, e, nc.query)) typed = true;
        if (!relevant(e.body, arity)) r.fail("irrelevant program " + render_term(e));
      }
      if (p.size() <= 4) {
        ++r.cases;
        if (!typed) r.fail("soundness: path without a well-typed program\n" + net.dump(nc.lib));
      }
    }
    for (const Term* body : wanted) {
      ++r.cases;
      if (!produced.count(*body)) r.fail("completeness: no path yields " + render_term(*body) + "\n" + net.dump(nc.lib));
    }
  }
  return r;
}

Report check_refine_contract(std::uint64_t seed, std::size_t candidates) {
  Rng rng(seed);
  Report r;
  std::size_t found = 0;
  while (found < candidates) {
    Library lib = random_library(rng, 3 + pick(rng, 3));
    FnType q = random_query(rng);
    AbstractCover cover = coin(rng, 0.5) ? initial_cover(InitialCover::Top, q) : random_cover(rng, 3);
    Library lib_r = with_result_checker(lib, q.ret);
    std::size_t here = 0;
    for (const auto& body : enumerate_terms(lib, q.params.size(), 3)) {
      if (here == 5 || found == candidates) break;
      NormalForm e = make_normal_form(q.params.size(), body);
      if (!check(lib, cover, e, q) || check(lib, AbstractCover::concrete(), e, q)) continue;
      ++here;
      ++found;
      ++r.cases;
      std::string ctx = render_term(e) + " : " + to_string(q) + " cover=" + cover.to_string();
      Environment env = bind_params(e, q);
      UntypeabilityProof init = initial_proof(lib_r, e, q);
      if (auto v = proof_violation(init, lib_r, env); !v.empty()) r.fail("initial proof: " + v + " " + ctx);
      std::size_t steps = 0;
      AbstractCover refined;
      try {
        refined = refine(cover, e, q, lib, [&](const UntypeabilityProof& u) {
          ++steps;
          if (auto v = proof_violation(u, lib_r, env); !v.empty()) r.fail("after a step: " + v + " " + ctx);
        });
      } catch (const std::exception& ex) {
        r.fail(std::string("refine threw: ") + ex.what() + " " + ctx);
        continue;
      }
      if (check(lib, refined, e, q)) r.fail("still accepted: " + ctx + " refined=" + refined.to_string());
      if (!refines(refined, cover) || refined.size() <= cover.size()) r.fail("not a strict refinement: " + ctx);
      if (!refined.is_meet_closed()) r.fail("refined cover not meet-closed: " + ctx);
    }
  }
  return r;
}

Report check_incremental(std::uint64_t seed, std::size_t steps) {
  Rng rng(seed);
  Report r;
  while (r.cases < steps) {
    Library lib = random_library(rng, 2 + pick(rng, 4));
    FnType q = random_query(rng);
    AbstractCover cover = initial_cover(coin(rng, 0.5) ? InitialCover::Top : InitialCover::Query, q);
    NetOptions opts{coin(rng, 0.6)};
    TransitionNet net = build_atn(lib, q, cover, opts);
    for (int k = 0; k < 5; ++k) {
      std::vector<Type> more = cover.members();
      more.push_back(coin(rng, 0.5) ? random_ground(rng, 2) : random_type(rng, 2, {"a", "b"}, 0.35));
      AbstractCover next = close_under_meet(more);
      if (next.size() == cover.size()) continue;
      ++r.cases;
      try {
        refine_atn_to(net, lib, next);
      } catch (const std::exception& ex) {
        r.fail(std::string("refine_atn threw: ") + ex.what());
        break;
      }
      TransitionNet scratch = build_atn(lib, q, next, opts);
      if (!(net == scratch))
        r.fail("incremental differs from scratch\nincremental:\n" + net.dump(lib) + "scratch:\n" + scratch.dump(lib));
      cover = next;
    }
  }
  return r;
}

std::string data_path(const std::string& name) { return std::string(TYGAR_DATA_DIR) + "/" + name; }

}  // namespace tygar::testing
