#include "tygar/signature.hpp"

#include <cctype>
#include <sstream>

namespace tygar {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Op, LParen, RParen, LBracket, RBracket, Comma, Arrow, FatArrow, DoubleColon, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t column;  // 1-based
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }
bool op_char(char c) { return std::string_view("!#$%&*+./<=>?@\\^|-~:").find(c) != std::string_view::npos; }

std::vector<Token> tokenize(std::string_view s, std::size_t line, std::size_t col0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    std::size_t col = col0 + i + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), col});
      i = j;
      continue;
    }
    switch (c) {
      case '(': out.push_back({Tok::LParen, "(", col}); ++i; continue;
      case ')': out.push_back({Tok::RParen, ")", col}); ++i; continue;
      case '[': out.push_back({Tok::LBracket, "[", col}); ++i; continue;
      case ']': out.push_back({Tok::RBracket, "]", col}); ++i; continue;
      case ',': out.push_back({Tok::Comma, ",", col}); ++i; continue;
      default: break;
    }
    if (op_char(c)) {
      std::size_t j = i;
      while (j < s.size() && (op_char(s[j]) || s[j] == '\'')) ++j;
      std::string op(s.substr(i, j - i));
      Tok k = Tok::Op;
      if (op == "->") k = Tok::Arrow;
      else if (op == "=>") k = Tok::FatArrow;
      else if (op == "::") k = Tok::DoubleColon;
      out.push_back({k, op, col});
      i = j;
      continue;
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", col0 + s.size() + 1});
  return out;
}

bool is_type_var(const std::string& name) {
  return !name.empty() && (std::islower(static_cast<unsigned char>(name[0])) || name[0] == '_');
}

class TypeParser {
 public:
  TypeParser(std::vector<Token> toks, std::size_t line) : toks_(std::move(toks)), line_(line) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at(Tok k) const { return peek().kind == k; }
  std::size_t pos() const { return pos_; }
  void reset(std::size_t p) { pos_ = p; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, peek().column, msg); }

  void expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what + (at(Tok::End) ? " at end of input" : ", found '" + peek().text + "'"));
    take();
  }

  // context? type
  std::pair<std::vector<ClassConstraint>, RichType> qualified() {
    std::vector<ClassConstraint> ctx;
    if (has_fat_arrow()) {
      ctx = context();
      expect(Tok::FatArrow, "'=>'");
    }
    RichType t = type();
    return {std::move(ctx), std::move(t)};
  }

  RichType type() {
    RichType lhs = btype();
    if (at(Tok::Arrow)) {
      take();
      return RichType::arrow(std::move(lhs), type());
    }
    return lhs;
  }

 private:
  bool has_fat_arrow() const {
    for (std::size_t i = pos_; i < toks_.size(); ++i)
      if (toks_[i].kind == Tok::FatArrow) return true;
    return false;
  }

  std::vector<ClassConstraint> context() {
    std::vector<ClassConstraint> out;
    if (at(Tok::LParen)) {
      take();
      if (at(Tok::RParen)) {
        take();
        return out;
      }
      out.push_back(constraint());
      while (at(Tok::Comma)) {
        take();
        out.push_back(constraint());
      }
      expect(Tok::RParen, "')'");
      return out;
    }
    out.push_back(constraint());
    return out;
  }

  ClassConstraint constraint() {
    if (!at(Tok::Ident) || is_type_var(peek().text)) fail("expected a class name");
    ClassConstraint c;
    c.class_name = take().text;
    c.argument = btype();
    return c;
  }

  bool at_atype() const {
    switch (peek().kind) {
      case Tok::Ident:
      case Tok::LParen:
      case Tok::LBracket: return true;
      default: return false;
    }
  }

  RichType btype() {
    if (!at_atype()) fail(at(Tok::End) ? "unexpected end of type" : "unexpected '" + peek().text + "'");
    std::size_t col = peek().column;
    RichType head = atype();
    std::vector<RichType> args;
    while (at_atype()) args.push_back(atype());
    if (args.empty()) return head;
    if (head.kind == RichType::Kind::Var)
      throw ParseError(line_, col, "type variable '" + head.name +
                                     "' applied to arguments: higher-kinded type variables are beyond the scope of this synthesizer");
    if (head.kind != RichType::Kind::Con) throw ParseError(line_, col, "cannot apply a function type");
    for (auto& a : args) head.args.push_back(std::move(a));
    return head;
  }

  RichType atype() {
    Token t = take();
    switch (t.kind) {
      case Tok::Ident:
        if (is_type_var(t.text)) return RichType::var(t.text);
        if (t.text == "String") return RichType::con("List", {RichType::con("Char")});
        return RichType::con(t.text);
      case Tok::LBracket: {
        RichType inner = type();
        expect(Tok::RBracket, "']'");
        return RichType::con("List", {std::move(inner)});
      }
      case Tok::LParen: {
        if (at(Tok::RParen)) {
          take();
          return RichType::con("Unit");
        }
        std::vector<RichType> parts{type()};
        while (at(Tok::Comma)) {
          take();
          parts.push_back(type());
        }
        expect(Tok::RParen, "')'");
        if (parts.size() == 1) return std::move(parts[0]);
        if (parts.size() == 2) return RichType::con("Pair", std::move(parts));
        if (parts.size() == 3) return RichType::con("Triple", std::move(parts));
        throw ParseError(line_, t.column, "tuples wider than 3 are not supported");
      }
      default:
        throw ParseError(line_, t.column, t.kind == Tok::End ? "unexpected end of type" : "unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

void render_rich(const RichType& t, std::string& out, int prec) {
  switch (t.kind) {
    case RichType::Kind::Var:
      out += t.name;
      return;
    case RichType::Kind::Con: {
      bool parens = prec > 1 && !t.args.empty();
      if (parens) out += '(';
      out += t.name;
      for (const auto& a : t.args) {
        out += ' ';
        render_rich(a, out, 2);
      }
      if (parens) out += ')';
      return;
    }
    case RichType::Kind::Arrow: {
      bool parens = prec > 0;
      if (parens) out += '(';
      render_rich(t.args[0], out, 1);
      out += " -> ";
      render_rich(t.args[1], out, 0);
      if (parens) out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const RichType& t) {
  std::string out;
  render_rich(t, out, 0);
  return out;
}

std::pair<std::vector<ClassConstraint>, RichType> parse_rich_type(std::string_view text, std::size_t line,
                                                                  std::size_t column_offset) {
  TypeParser p(tokenize(text, line, column_offset), line);
  auto result = p.qualified();
  if (!p.at(Tok::End)) p.fail("unexpected '" + p.peek().text + "' after type");
  return result;
}

RichSignature parse_rich_signature(std::string_view text, std::size_t line) {
  auto toks = tokenize(text, line, 0);
  std::size_t i = 0;
  RichSignature sig;
  if (toks[0].kind == Tok::Ident) {
    sig.name = toks[0].text;
    i = 1;
  } else if (toks[0].kind == Tok::LParen && toks.size() > 2 && toks[1].kind == Tok::Op && toks[2].kind == Tok::RParen) {
    sig.name = toks[1].text;
    i = 3;
  } else if (toks[0].kind == Tok::LParen && toks.size() > 2 &&
             (toks[1].kind == Tok::Arrow || toks[1].kind == Tok::FatArrow) && toks[2].kind == Tok::RParen) {
    sig.name = toks[1].text;
    i = 3;
  } else {
    throw ParseError(line, toks[0].column, "expected a component name");
  }
  if (toks[i].kind != Tok::DoubleColon) throw ParseError(line, toks[i].column, "expected '::'");
  std::size_t type_col = toks[i].column + 1;  // 1-based column just after '::'
  std::string_view rest = text.substr(type_col);
  auto [ctx, type] = parse_rich_type(rest, line, type_col);
  sig.constraints = std::move(ctx);
  sig.type = std::move(type);
  return sig;
}

void Library::declare_constructor(const std::string& name, std::size_t arity) {
  auto [it, inserted] = constructors_.emplace(name, arity);
  if (!inserted && it->second != arity)
    throw std::invalid_argument("constructor '" + name + "' used with arity " + std::to_string(arity) +
                                " but previously declared with arity " + std::to_string(it->second));
}

void Library::declare_in(const Type& t) {
  if (!t.is_app()) return;
  declare_constructor(t.name(), t.args().size());
  for (const auto& a : t.args()) declare_in(a);
}

void Library::add_component(Component c) {
  if (index_.count(c.name)) throw std::invalid_argument("duplicate component '" + c.name + "'");
  for (const auto& p : c.type.body.params) declare_in(p);
  declare_in(c.type.body.ret);
  index_.emplace(c.name, components_.size());
  components_.push_back(std::move(c));
}

std::optional<std::size_t> Library::arity(const std::string& ctor) const {
  auto it = constructors_.find(ctor);
  if (it == constructors_.end()) return std::nullopt;
  return it->second;
}

const Component* Library::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &components_[it->second];
}

const Component& Library::at(const std::string& name) const {
  const Component* c = find(name);
  if (!c) throw std::invalid_argument("unknown component '" + name + "'");
  return *c;
}

std::size_t Library::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown component '" + name + "'");
  return it->second;
}

void Library::check_well_formed(const Type& t) const {
  if (!t.is_app()) return;
  auto a = arity(t.name());
  if (!a) throw std::invalid_argument("undeclared constructor '" + t.name() + "'");
  if (*a != t.args().size())
    throw std::invalid_argument("constructor '" + t.name() + "' expects " + std::to_string(*a) + " arguments, got " +
                                std::to_string(t.args().size()));
  for (const auto& x : t.args()) check_well_formed(x);
}

Type to_base_type(const RichType& t) {
  switch (t.kind) {
    case RichType::Kind::Var:
      return Type::var(t.name);
    case RichType::Kind::Con: {
      std::vector<Type> args;
      for (const auto& a : t.args) args.push_back(to_base_type(a));
      return Type::app(t.name, std::move(args));
    }
    case RichType::Kind::Arrow:
      throw std::invalid_argument("higher-order type '" + to_string(t) + "' requires desugaring");
  }
  return Type::bottom();
}

FnType to_fn_type(const RichType& t) {
  FnType f;
  const RichType* cur = &t;
  while (cur->kind == RichType::Kind::Arrow) {
    f.params.push_back(to_base_type(cur->args[0]));
    cur = &cur->args[1];
  }
  f.ret = to_base_type(*cur);
  return f;
}

std::pair<std::string, PolyType> parse_signature(std::string_view text, const Library* lib, std::size_t line) {
  RichSignature sig = parse_rich_signature(text, line);
  if (!sig.constraints.empty())
    throw ParseError(line, 1, "class constraints in '" + sig.name + "' require desugaring");
  FnType fn;
  try {
    fn = to_fn_type(sig.type);
    if (lib) {
      for (const auto& p : fn.params) lib->check_well_formed(p);
      lib->check_well_formed(fn.ret);
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, 1, e.what());
  }
  return {sig.name, PolyType::generalize(std::move(fn))};
}

Type parse_base_type(std::string_view text) {
  auto [ctx, t] = parse_rich_type(text);
  if (!ctx.empty()) throw ParseError(1, 1, "unexpected class constraint");
  return to_base_type(t);
}

Library load_library(std::string_view text) {
  Library lib;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto cut = raw.find("--");
    // `-->` style operators are not supported; a `--` always starts a comment
    std::string line = raw.substr(0, cut);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string_view sv(line);
    auto first = sv.find_first_not_of(" \t");
    if (sv.substr(first).starts_with("class ") || sv.substr(first).starts_with("instance ") ||
        sv.substr(first).starts_with("@"))
      throw ParseError(line_no, first + 1, "class, instance and pragma lines need the desugaring frontend");
    auto [name, poly] = parse_signature(line, nullptr, line_no);
    try {
      lib.add_component(Component{name, std::move(poly), {}});
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, 1, e.what());
    }
  }
  return lib;
}

}  // namespace tygar
