#include "tygar/typecheck.hpp"

#include <stdexcept>

namespace tygar {

namespace {

std::string arg_prefix(std::size_t i) { return std::to_string(i) + "#"; }

}  // namespace

PartialApplication::PartialApplication(const PolyType& type) : type_(&type) {}

bool PartialApplication::push(const Type& arg) {
  if (pushed_ >= type_->body.params.size()) throw std::invalid_argument("too many arguments");
  const Type& formal = type_->body.params[pushed_];
  Type actual = arg.is_ground() || arg.is_bottom() ? arg : rename_vars(arg, arg_prefix(pushed_));
  ++pushed_;
  return unifier_.unify(formal, actual);
}

Type PartialApplication::result() const {
  if (unifier_.failed()) return Type::bottom();
  if (pushed_ != type_->body.params.size()) throw std::logic_error("partial application is incomplete");
  return canonicalize(unifier_.resolve(type_->body.ret));
}

Type apply_transformer(const PolyType& type, std::span<const Type> args) {
  if (args.size() != type.body.params.size())
    throw std::invalid_argument("expected " + std::to_string(type.body.params.size()) + " arguments, got " +
                                std::to_string(args.size()));
  for (const auto& a : args)
    if (a.is_bottom()) return Type::bottom();
  PartialApplication p(type);
  for (const auto& a : args)
    if (!p.push(a)) return Type::bottom();
  return p.result();
}

Type apply_transformer(const Library& lib, const std::string& component, std::span<const Type> args) {
  const Component* c = lib.find(component);
  if (!c) throw std::invalid_argument("unknown component '" + component + "'");
  try {
    return apply_transformer(c->type, args);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("component '" + component + "': " + e.what());
  }
}

Type infer(const Library& lib, const Environment& env, const AbstractCover& cover, const Term& e) {
  if (e.is_var()) {
    for (const auto& [name, type] : env)
      if (name == e.name) return cover.abstract(type);
    throw std::invalid_argument("unbound variable '" + e.name + "'");
  }
  std::vector<Type> args;
  args.reserve(e.args.size());
  for (const auto& a : e.args) args.push_back(infer(lib, env, cover, a));
  return cover.abstract(apply_transformer(lib, e.name, args));
}

Environment bind_params(const NormalForm& e, const FnType& t) {
  if (e.params.size() != t.params.size())
    throw std::invalid_argument("program takes " + std::to_string(e.params.size()) + " parameters, query has " +
                                std::to_string(t.params.size()));
  Environment env;
  for (std::size_t i = 0; i < e.params.size(); ++i) env.emplace_back(e.params[i], t.params[i]);
  return env;
}

bool check(const Library& lib, const AbstractCover& cover, const NormalForm& e, const FnType& t) {
  Environment env = bind_params(e, t);
  return subsumes(t.ret, infer(lib, env, cover, e.body));
}

}  // namespace tygar
