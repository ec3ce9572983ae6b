#include "tygar/tygar.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "tygar/pathgen.hpp"

namespace tygar {

const char* const kResultChecker = "%r";

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Baseline: return "baseline";
    case Variant::Nogar: return "nogar";
    case Variant::Tygar0: return "tygar0";
    case Variant::TygarQ: return "tygarq";
    case Variant::TygarQB: return "tygarqb";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (Variant v : {Variant::Baseline, Variant::Nogar, Variant::Tygar0, Variant::TygarQ, Variant::TygarQB})
    if (to_string(v) == lower) return v;
  return std::nullopt;
}

std::string to_string(SynthStatus s) {
  switch (s) {
    case SynthStatus::Done: return "done";
    case SynthStatus::NoSolution: return "no-solution";
    case SynthStatus::Exhausted: return "exhausted";
  }
  return "?";
}

// ---- refinement ------------------------------------------------------------

namespace {

const Term& subterm(const Term& root, const Position& p) {
  const Term* cur = &root;
  for (auto i : p) cur = &cur->args.at(i);
  return *cur;
}

Type label_concrete(const Library& lib_r, const Environment& env, const Term& e, Position& here,
                    std::map<Position, Type>& out) {
  Type result;
  if (e.is_var()) {
    result = infer(lib_r, env, AbstractCover::concrete(), e);
  } else {
    std::vector<Type> args;
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      here.push_back(i);
      args.push_back(label_concrete(lib_r, env, e.args[i], here, out));
      here.pop_back();
    }
    result = apply_transformer(lib_r, e.name, args);
  }
  out[here] = result;
  return result;
}

std::vector<Type> child_labels(const UntypeabilityProof& u, const Position& p, std::size_t n) {
  std::vector<Type> out;
  Position c = p;
  c.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    c.back() = i;
    out.push_back(u.labels.at(c));
  }
  return out;
}

void generalize_at(UntypeabilityProof& u, const Library& lib_r, const Position& p, const ProofObserver& obs) {
  const Term& e = subterm(u.root, p);
  if (e.is_var()) return;
  const Type target = u.labels.at(p);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 0; j < e.args.size(); ++j) {
      Position c = p;
      c.push_back(j);
      while (true) {
        std::vector<Type> args = child_labels(u, p, e.args.size());
        bool accepted = false;
        for (const auto& w : generalization_moves(args[j])) {
          std::vector<Type> trial = args;
          trial[j] = w;
          if (subsumes(apply_transformer(lib_r, e.name, trial), target)) {
            u.labels[c] = w;
            accepted = changed = true;
            if (obs) obs(u);
            break;
          }
        }
        if (!accepted) break;
      }
    }
  }
  for (std::size_t j = 0; j < e.args.size(); ++j) {
    Position c = p;
    c.push_back(j);
    generalize_at(u, lib_r, c, obs);
  }
}

}  // namespace

std::vector<Type> UntypeabilityProof::range() const {
  std::set<Type> s;
  for (const auto& [_, t] : labels) s.insert(canonicalize(t));
  return {s.begin(), s.end()};
}

Library with_result_checker(const Library& lib, const Type& ret) {
  Library out = lib;
  out.add_component(Component{kResultChecker, PolyType::generalize(FnType{{ret}, ret}), {}});
  return out;
}

UntypeabilityProof initial_proof(const Library& lib_r, const NormalForm& e, const FnType& t) {
  UntypeabilityProof u;
  u.root = Term::app(kResultChecker, {e.body});
  Environment env = bind_params(e, t);
  Position here;
  label_concrete(lib_r, env, u.root, here, u.labels);
  return u;
}

void generalize(UntypeabilityProof& u, const Library& lib_r, const ProofObserver& after_step) {
  generalize_at(u, lib_r, {}, after_step);
}

std::string proof_violation(const UntypeabilityProof& u, const Library& lib_r, const Environment& env) {
  std::map<Position, Type> concrete;
  Position here;
  label_concrete(lib_r, env, u.root, here, concrete);
  for (const auto& [p, c] : concrete) {
    auto it = u.labels.find(p);
    if (it == u.labels.end()) return "missing label";
    if (!subsumes(c, it->second))
      return "I1: concrete type " + to_string(c) + " not below label " + to_string(it->second);
    const Term& e = subterm(u.root, p);
    if (!e.is_var()) {
      Type out = apply_transformer(lib_r, e.name, child_labels(u, p, e.args.size()));
      if (!subsumes(out, it->second))
        return "I2: transformer output " + to_string(out) + " not below label " + to_string(it->second);
    }
  }
  if (!u.labels.at({}).is_bottom()) return "I3: root label is " + to_string(u.labels.at({}));
  return {};
}

AbstractCover refine(const AbstractCover& cover, const NormalForm& e, const FnType& t, const Library& lib,
                     const ProofObserver& after_step) {
  if (check(lib, AbstractCover::concrete(), e, t))
    throw std::invalid_argument("refine: program is well-typed: " + render_term(e));
  if (!check(lib, cover, e, t)) throw std::invalid_argument("refine: program is already rejected by the cover");
  Library lib_r = with_result_checker(lib, t.ret);
  UntypeabilityProof u = initial_proof(lib_r, e, t);
  generalize(u, lib_r, after_step);
  std::vector<Type> all = cover.members();
  for (const auto& r : u.range()) all.push_back(r);
  return close_under_meet(all);
}

// ---- covers and search -----------------------------------------------------

AbstractCover initial_cover(InitialCover kind, const FnType& t) {
  if (kind == InitialCover::Top) return AbstractCover::top();
  std::vector<Type> types = t.params;
  types.push_back(t.ret);
  return close_under_meet(types);
}

std::optional<NormalForm> syn_abstract(const Library& lib, const FnType& t, const AbstractCover& cover,
                                       const SynthConfig& cfg) {
  TransitionNet net = build_atn(lib, t, cover, NetOptions{cfg.coalesce});
  auto backend = make_backend(cfg.solver);
  PathFinder finder(*backend, cfg.max_len);
  while (auto path = finder.next(net)) {
    std::optional<NormalForm> found;
    from_path(net, lib, *path, [&](const NormalForm& e) {
      if (!check(lib, net.cover(), e, t)) return true;
      found = e;
      return false;
    });
    if (found) return found;
    finder.block(*path);
  }
  return std::nullopt;
}

Term strip_instance_names(const Term& t) {
  if (t.is_var()) return t;
  Term out = t;
  auto at = out.name.rfind('@');
  if (at != std::string::npos && at + 1 < out.name.size() &&
      std::all_of(out.name.begin() + static_cast<std::ptrdiff_t>(at) + 1, out.name.end(),
                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    out.name.resize(at);
  for (auto& a : out.args) a = strip_instance_names(a);
  return out;
}

namespace {

void collect_ctors(const Type& t, std::map<std::string, std::size_t>& out) {
  if (!t.is_app()) return;
  out.emplace(t.name(), t.args().size());
  for (const auto& a : t.args()) collect_ctors(a, out);
}

void collect_ground(const Type& t, std::set<Type>& out) {
  if (t.is_ground()) out.insert(t);
}

}  // namespace

Library monomorphise(const Library& lib, const FnType& t, std::size_t budget) {
  std::map<std::string, std::size_t> ctors = lib.constructors();
  for (const auto& p : t.params) collect_ctors(p, ctors);
  collect_ctors(t.ret, ctors);

  std::vector<Type> nullary;
  for (const auto& [c, n] : ctors)
    if (n == 0) nullary.push_back(Type::app(c));
  std::vector<Type> universe = nullary;
  for (const auto& [c, n] : ctors) {
    if (n == 0) continue;
    std::vector<std::size_t> idx(n, 0);
    if (nullary.empty()) break;
    while (true) {
      std::vector<Type> args;
      for (auto i : idx) args.push_back(nullary[i]);
      universe.push_back(Type::app(c, std::move(args)));
      std::size_t k = 0;
      while (k < n && ++idx[k] == nullary.size()) idx[k++] = 0;
      if (k == n) break;
    }
  }

  std::size_t total = 0;
  for (const auto& c : lib.components()) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < c.type.quantified.size(); ++i) {
      count *= universe.size();
      if (count > budget) break;
    }
    total += count;
    if (total > budget || universe.empty())
      throw std::length_error("monomorphisation needs more than " + std::to_string(budget) + " instances over " +
                              std::to_string(universe.size()) + " ground types");
  }

  Library out;
  for (const auto& c : lib.components()) {
    const auto& vars = c.type.quantified;
    std::vector<std::size_t> idx(vars.size(), 0);
    std::size_t k = 0;
    while (true) {
      std::map<std::string, Type> s;
      for (std::size_t i = 0; i < vars.size(); ++i) s.emplace(vars[i], universe[idx[i]]);
      FnType body = apply_subst(Substitution::of(std::move(s)), c.type.body);
      out.add_component(Component{c.name + "@" + std::to_string(k++), PolyType::generalize(std::move(body)), {}});
      std::size_t i = 0;
      while (i < vars.size() && ++idx[i] == universe.size()) idx[i++] = 0;
      if (i == vars.size()) break;
    }
  }
  return out;
}

// ---- the synthesis loop ----------------------------------------------------

namespace {

class Session {
 public:
  Session(const Library& lib, const FnType& t, const SynthConfig& cfg, const SynthObserver& observer)
      : lib_(lib), t_(t), cfg_(cfg), observer_(observer), start_(Clock::now()) {
    deadline_ = Deadline{start_ + cfg.timeout};
  }

  SynthResult run() {
    try {
      switch (cfg_.variant) {
        case Variant::Tygar0: return loop(lib_, initial_cover(InitialCover::Top, t_), true);
        case Variant::TygarQ:
        case Variant::TygarQB: {
          AbstractCover c = initial_cover(InitialCover::Query, t_);
          if (cfg_.variant == Variant::TygarQB && cfg_.cover_bound < c.size())
            throw std::invalid_argument("cover bound " + std::to_string(cfg_.cover_bound) +
                                        " is smaller than the query cover (" + std::to_string(c.size()) + ")");
          return loop(lib_, c, true);
        }
        case Variant::Nogar: return loop(lib_, initial_cover(InitialCover::Query, t_), false);
        case Variant::Baseline: return baseline();
      }
    } catch (const SolverTimeout& e) {
      result_.status = SynthStatus::Exhausted;
      result_.diagnostic = std::string("timeout: ") + e.what();
      return finish();
    }
    return finish();
  }

 private:
  SynthResult baseline() {
    Library mono;
    try {
      mono = monomorphise(lib_, t_, cfg_.baseline_budget);
    } catch (const std::length_error& e) {
      result_.status = SynthStatus::Exhausted;
      result_.diagnostic = std::string("baseline: ") + e.what();
      note(result_.diagnostic);
      return finish();
    }
    std::set<Type> ground;
    for (const auto& c : mono.components()) {
      for (const auto& p : c.type.body.params) collect_ground(p, ground);
      collect_ground(c.type.body.ret, ground);
    }
    for (const auto& p : t_.params) ground.insert(p);
    ground.insert(t_.ret);
    note("baseline: " + std::to_string(mono.size()) + " instances, " + std::to_string(ground.size()) +
         " ground types");
    // Distinct ground types only meet at bottom, so this is already closed.
    AbstractCover cover;
    for (const auto& g : ground) cover.insert(g);
    return loop(mono, cover, false);
  }

  SynthResult loop(const Library& lib, AbstractCover cover, bool refining) {
    auto backend = make_backend(cfg_.solver);
    backend->set_deadline(deadline_);
    PathFinder finder(*backend, cfg_.max_len);
    TransitionNet net = build_atn(lib, t_, cover, NetOptions{cfg_.coalesce});
    result_.final_cover = net.cover();
    std::set<Term> emitted;

    while (true) {
      if (deadline_.expired()) throw SolverTimeout("synthesis timed out");
      auto path = finder.next(net);
      ++result_.iterations;
      if (!path) {
        result_.status = result_.solutions.empty() ? SynthStatus::NoSolution : SynthStatus::Exhausted;
        if (!result_.solutions.empty()) result_.diagnostic = "search space exhausted";
        break;
      }
      emit({SynthEvent::Kind::Iteration, result_.iterations, net.cover().size(), path->size(), "", ""});

      std::vector<NormalForm> spurious;
      bool any_typed = false;
      bool done = false;
      std::size_t visited = 0;
      from_path(net, lib, *path, [&](const NormalForm& e) {
        if (++visited % 256 == 0 && deadline_.expired()) throw SolverTimeout("synthesis timed out");
        if (!check(lib, net.cover(), e, t_)) return true;
        NormalForm shown{e.params, strip_instance_names(e.body)};
        if (check(lib, AbstractCover::concrete(), e, t_)) {
          any_typed = true;
          if (!emitted.insert(shown.body).second) {
            candidate(shown, path->size(), net, "duplicate");
            return true;
          }
          candidate(shown, path->size(), net, "solution");
          add_solution(shown);
          if (cfg_.max_solutions && result_.solutions.size() >= cfg_.max_solutions) {
            done = true;
            return false;
          }
          return true;
        }
        candidate(shown, path->size(), net, "spurious");
        spurious.push_back(e);
        return true;
      });
      if (done) {
        result_.status = SynthStatus::Done;
        break;
      }

      bool may_refine = refining && !any_typed && !spurious.empty() &&
                        (cfg_.variant != Variant::TygarQB || net.cover().size() < cfg_.cover_bound);
      if (!may_refine) {
        finder.block(*path);
        continue;
      }

      // Proofs do not depend on the cover, so each candidate is refined
      // against the current cover and the results are merged.
      std::vector<Type> merged = net.cover().members();
      for (const auto& e : spurious) {
        AbstractCover r = refine(net.cover(), e, t_, lib);
        merged.insert(merged.end(), r.members().begin(), r.members().end());
      }
      AbstractCover next = close_under_meet(merged);
      std::vector<Type> added = insertion_order(net.cover(), next);
      if (added.empty()) {
        finder.block(*path);  // defensive: refinement made no progress
        continue;
      }
      ++result_.refinements;
      result_.cover_trace.push_back(added);
      std::string text;
      for (const auto& a : added) text += (text.empty() ? "" : ", ") + to_string(a);
      emit({SynthEvent::Kind::Refined, result_.iterations, next.size(), path->size(), text, ""});
      if (cfg_.incremental)
        refine_atn_to(net, lib, next);
      else
        net = build_atn(lib, t_, next, NetOptions{cfg_.coalesce});
      result_.final_cover = net.cover();
      finder.clear_blocks();
    }
    return finish();
  }

  void add_solution(const NormalForm& e) {
    Solution s;
    s.program = e;
    s.applications = e.body.applications();
    s.millis = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    s.iteration = result_.iterations;
    result_.solutions.push_back(std::move(s));
    emit({SynthEvent::Kind::Solution, result_.iterations, 0, 0, render_term(e), "solution"});
  }

  void candidate(const NormalForm& e, std::size_t len, const TransitionNet& net, const char* verdict) {
    emit({SynthEvent::Kind::Candidate, result_.iterations, net.cover().size(), len, render_term(e), verdict});
  }

  void note(const std::string& text) { emit({SynthEvent::Kind::Note, result_.iterations, 0, 0, text, ""}); }

  void emit(const SynthEvent& ev) {
    if (observer_) observer_(ev);
  }

  SynthResult finish() {
    std::stable_sort(result_.solutions.begin(), result_.solutions.end(),
                     [](const Solution& a, const Solution& b) { return a.applications < b.applications; });
    for (std::size_t i = 0; i < result_.solutions.size(); ++i) result_.solutions[i].rank = i + 1;
    return result_;
  }

  const Library& lib_;
  const FnType& t_;
  const SynthConfig& cfg_;
  const SynthObserver& observer_;
  Clock::time_point start_;
  Deadline deadline_;
  SynthResult result_;
};

}  // namespace

SynthResult synthesize(const Library& lib, const FnType& t, const SynthConfig& cfg, const SynthObserver& observer) {
  if (!t.is_ground()) throw std::invalid_argument("query type must be ground: " + to_string(t));
  return Session(lib, t, cfg, observer).run();
}

}  // namespace tygar
