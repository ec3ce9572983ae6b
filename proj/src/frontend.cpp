#include "tygar/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace tygar {

const char* const kFunctionCtor = "F";

std::string dictionary_ctor(const std::string& class_name) { return class_name + "D"; }

// ---- parsing ---------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

std::string strip_where(std::string s) {
  static const std::regex where_re("\\s+where\\s*$");
  return std::regex_replace(s, where_re, "");
}

ClassDecl parse_class(const std::string& rest, std::size_t line, std::size_t col) {
  auto [ctx, head] = parse_rich_type(strip_where(rest), line, col);
  if (head.kind != RichType::Kind::Con || head.args.size() != 1 || head.args[0].kind != RichType::Kind::Var)
    throw ParseError(line, col + 1, "expected `class C a`");
  ClassDecl c{head.name, head.args[0].name, {}};
  for (const auto& s : ctx) {
    if (s.argument.kind != RichType::Kind::Var || s.argument.name != c.variable)
      throw ParseError(line, col + 1, "superclass constraints must mention the class variable");
    c.superclasses.push_back(s.class_name);
  }
  return c;
}

InstanceDecl parse_instance(const std::string& rest, std::size_t line, std::size_t col) {
  auto [ctx, head] = parse_rich_type(strip_where(rest), line, col);
  if (head.kind != RichType::Kind::Con || head.args.size() != 1) throw ParseError(line, col + 1, "expected `instance C T`");
  return InstanceDecl{head.name, head.args[0], ctx};
}

}  // namespace

void parse_rich_library(std::string_view text, RichLibrary& out) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find("--"));
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t col = line.find_first_not_of(" \t");
    if (t.rfind("class ", 0) == 0) {
      out.classes.push_back(parse_class(t.substr(6), line_no, col + 6));
    } else if (t.rfind("instance ", 0) == 0) {
      out.instances.push_back(parse_instance(t.substr(9), line_no, col + 9));
    } else if (t.rfind("@hof", 0) == 0) {
      std::istringstream names(t.substr(4));
      std::string n;
      while (names >> n) {
        if (n.size() > 2 && n.front() == '(' && n.back() == ')') n = n.substr(1, n.size() - 2);
        out.hof.insert(n);
      }
    } else {
      out.signatures.push_back(parse_rich_signature(line, line_no));
    }
  }
}

RichLibrary parse_rich_library(std::string_view text) {
  RichLibrary out;
  parse_rich_library(text, out);
  return out;
}

RichLibrary load_rich_files(const std::vector<std::string>& paths) {
  RichLibrary out;
  for (const auto& p : paths) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error(p + ": cannot open");
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      parse_rich_library(ss.str(), out);
    } catch (const ParseError& e) {
      throw std::runtime_error(p + ":" + e.what());
    }
  }
  return out;
}

// ---- desugaring ------------------------------------------------------------

Type to_base(const RichType& t) {
  switch (t.kind) {
    case RichType::Kind::Var: return Type::var(t.name);
    case RichType::Kind::Con: {
      std::vector<Type> args;
      for (const auto& a : t.args) args.push_back(to_base(a));
      return Type::app(t.name, std::move(args));
    }
    case RichType::Kind::Arrow: return Type::app(kFunctionCtor, {to_base(t.args[0]), to_base(t.args[1])});
  }
  return Type::bottom();
}

namespace {

const std::string& dict_of(const DesugaredLibrary& d, const std::string& cls) {
  auto it = d.classes.find(cls);
  if (it == d.classes.end()) throw std::invalid_argument("undeclared class '" + cls + "'");
  return it->second;
}

// Constraint dictionaries first, then the F-encoded parameters.
FnType desugar_type(const DesugaredLibrary& d, const std::vector<ClassConstraint>& ctx, const RichType& t) {
  FnType f;
  for (const auto& c : ctx) f.params.push_back(Type::app(dict_of(d, c.class_name), {to_base(c.argument)}));
  const RichType* cur = &t;
  while (cur->kind == RichType::Kind::Arrow) {
    f.params.push_back(to_base(cur->args[0]));
    cur = &cur->args[1];
  }
  f.ret = to_base(*cur);
  return f;
}

bool uses_ctor_with_other_arity(const RichType& t, const std::string& name, std::size_t arity) {
  if (t.kind == RichType::Kind::Con && t.name == name && t.args.size() != arity) return true;
  for (const auto& a : t.args)
    if (uses_ctor_with_other_arity(a, name, arity)) return true;
  return false;
}

std::string head_name(const Type& t) { return t.is_app() ? t.name() : "Var"; }

void add(DesugaredLibrary& d, Component c) { d.library.add_component(std::move(c)); }

}  // namespace

DesugaredLibrary desugar_library(const RichLibrary& rich, const std::set<std::string>& hof) {
  DesugaredLibrary d;
  // A library with its own F of another arity keeps it; arrows then fail to desugar.
  bool own_f = std::any_of(rich.signatures.begin(), rich.signatures.end(), [](const RichSignature& s) {
    return uses_ctor_with_other_arity(s.type, kFunctionCtor, 2);
  });
  if (!own_f) d.library.declare_constructor(kFunctionCtor, 2);

  for (const auto& c : rich.classes) {
    if (!d.classes.emplace(c.name, dictionary_ctor(c.name)).second)
      throw std::invalid_argument("duplicate class '" + c.name + "'");
    d.library.declare_constructor(dictionary_ctor(c.name), 1);
  }
  for (const auto& c : rich.classes) {
    for (const auto& s : c.superclasses) {
      Type v = Type::var(c.variable);
      FnType f{{Type::app(dict_of(d, c.name), {v})}, Type::app(dict_of(d, s), {v})};
      add(d, Component{lower_first(s) + "Of" + c.name, PolyType::generalize(std::move(f)), {}});
    }
  }
  for (const auto& inst : rich.instances) {
    Type head = to_base(inst.head);
    FnType f;
    for (const auto& c : inst.context) f.params.push_back(Type::app(dict_of(d, c.class_name), {to_base(c.argument)}));
    f.ret = Type::app(dict_of(d, inst.class_name), {head});
    std::string name = lower_first(inst.class_name) + head_name(head);
    if (d.library.contains(name) && head.is_app())
      for (const auto& a : head.args()) name += head_name(a);
    add(d, Component{name, PolyType::generalize(std::move(f)), {}});
  }

  std::map<std::string, const RichSignature*> by_name;
  for (const auto& s : rich.signatures) {
    FnType f = desugar_type(d, s.constraints, s.type);
    std::vector<std::size_t> dicts;
    for (std::size_t i = 0; i < s.constraints.size(); ++i) dicts.push_back(i);
    add(d, Component{s.name, PolyType::generalize(std::move(f)), std::move(dicts)});
    by_name.emplace(s.name, &s);
  }

  std::set<std::string> wanted = rich.hof;
  wanted.insert(hof.begin(), hof.end());
  for (const auto& n : wanted) {
    auto it = by_name.find(n);
    if (it == by_name.end()) throw std::invalid_argument("@hof names unknown component '" + n + "'");
    const RichSignature& s = *it->second;
    RichType full = s.type;
    for (auto c = s.constraints.rbegin(); c != s.constraints.rend(); ++c)
      full = RichType::arrow(RichType::con(dictionary_ctor(c->class_name), {c->argument}), std::move(full));
    std::string vname = n + "'";
    add(d, Component{vname, PolyType::generalize(FnType{{}, to_base(full)}), {}});
    d.variants.emplace(vname, n);
  }
  return d;
}

// ---- queries ---------------------------------------------------------------

FnType freeze_query(const PolyType& q) {
  std::map<std::string, Type> s;
  for (const auto& v : q.quantified) s.emplace(v, Type::app(v));
  return apply_subst(Substitution::of(std::move(s)), q.body);
}

Query parse_query(std::string_view text, const DesugaredLibrary& lib) {
  auto [ctx, type] = parse_rich_type(text);
  Query q;
  q.text = std::string(text);
  FnType f = desugar_type(lib, ctx, type);
  for (std::size_t i = 0; i < ctx.size(); ++i) q.dictionary_params.push_back(i);
  q.type = freeze_query(PolyType::generalize(std::move(f)));
  return q;
}

// ---- surface rendering -----------------------------------------------------

namespace {

class SurfaceRenderer {
 public:
  SurfaceRenderer(const Query& q, const DesugaredLibrary& lib) : lib_(lib) {
    std::size_t next = 0;
    for (std::size_t i = 0; i < q.type.params.size(); ++i) {
      bool dict = std::find(q.dictionary_params.begin(), q.dictionary_params.end(), i) != q.dictionary_params.end();
      if (!dict) rename_[param_name(i)] = param_name(next++);
    }
  }

  std::string render(const Term& t, bool nested) const {
    if (t.is_var()) {
      auto it = rename_.find(t.name);
      return it == rename_.end() ? t.name : it->second;
    }
    std::string name = t.name;
    if (auto v = lib_.variants.find(name); v != lib_.variants.end()) name = v->second;
    std::vector<const Term*> kept;
    const Component* c = lib_.library.find(t.name);
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      bool dict = c && std::find(c->dictionary_params.begin(), c->dictionary_params.end(), i) !=
                           c->dictionary_params.end();
      if (!dict) kept.push_back(&t.args[i]);
    }
    std::vector<std::string> parts;
    if (name == "$" && !kept.empty()) {
      for (const Term* a : kept) parts.push_back(render(*a, true));
    } else {
      parts.push_back(render_component_name(name));
      for (const Term* a : kept) parts.push_back(render(*a, true));
    }
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
    if (nested && parts.size() > 1) out = "(" + out + ")";
    return out;
  }

 private:
  const DesugaredLibrary& lib_;
  std::map<std::string, std::string> rename_;
};

std::vector<std::string> surface_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '(') {
      // `(op)` is one atom
      std::size_t j = i + 1;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')' &&
             !std::isalnum(static_cast<unsigned char>(s[j])) && s[j] != '_')
        ++j;
      if (j > i + 1 && j < s.size() && s[j] == ')') {
        out.push_back(s.substr(i, j - i + 1));
        i = j + 1;
        continue;
      }
      out.emplace_back("(");
      ++i;
      continue;
    }
    if (c == ')') {
      out.emplace_back(")");
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_param(const std::string& s) {
  static const std::regex re("arg[0-9]+");
  return std::regex_match(s, re);
}

}  // namespace

std::string render_surface(const NormalForm& e, const Query& q, const DesugaredLibrary& lib) {
  return SurfaceRenderer(q, lib).render(e.body, false);
}

bool same_modulo_params(const std::string& a, const std::string& b) {
  auto ta = surface_tokens(a);
  auto tb = surface_tokens(b);
  if (ta.size() != tb.size()) return false;
  std::map<std::string, std::string> fwd, back;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    bool pa = is_param(ta[i]);
    bool pb = is_param(tb[i]);
    if (pa != pb) return false;
    if (!pa) {
      if (ta[i] != tb[i]) return false;
      continue;
    }
    auto [f, fi] = fwd.emplace(ta[i], tb[i]);
    auto [r, ri] = back.emplace(tb[i], ta[i]);
    if (f->second != tb[i] || r->second != ta[i]) return false;
  }
  return true;
}

// ---- benchmarks ------------------------------------------------------------

BenchmarkSuite load_suite(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  namespace fs = std::filesystem;
  fs::path base = fs::path(path).parent_path();
  BenchmarkSuite s;
  for (const auto& l : j.value("libraries", nlohmann::json::array())) {
    fs::path p = l.get<std::string>();
    s.libraries.push_back((p.is_absolute() ? p : base / p).string());
  }
  for (const auto& h : j.value("hof", nlohmann::json::array())) s.hof.insert(h.get<std::string>());
  for (const auto& c : j.value("cases", nlohmann::json::array())) {
    BenchmarkCase bc;
    bc.id = c.at("id").get<std::string>();
    bc.query = c.at("query").get<std::string>();
    for (const auto& e : c.value("expected", nlohmann::json::array())) bc.expected.push_back(e.get<std::string>());
    if (c.contains("within_rank")) bc.within_rank = c["within_rank"].get<std::size_t>();
    if (c.contains("variant")) {
      bc.variant = parse_variant(c["variant"].get<std::string>());
      if (!bc.variant) throw std::runtime_error(path + ": case " + bc.id + ": unknown variant");
    }
    if (c.contains("max_len")) bc.max_len = c["max_len"].get<std::size_t>();
    if (c.contains("timeout")) bc.timeout_seconds = c["timeout"].get<double>();
    s.cases.push_back(std::move(bc));
  }
  return s;
}

std::vector<BenchmarkOutcome> run_bench(const BenchmarkSuite& suite, const SynthConfig& base, int runs) {
  std::vector<BenchmarkOutcome> out;
  if (suite.cases.empty()) return out;
  DesugaredLibrary lib = desugar_library(load_rich_files(suite.libraries), suite.hof);
  for (const auto& c : suite.cases) {
    BenchmarkOutcome o;
    o.id = c.id;
    SynthConfig cfg = base;
    if (c.variant) cfg.variant = *c.variant;
    if (c.max_len) cfg.max_len = *c.max_len;
    if (c.timeout_seconds) cfg.timeout = std::chrono::milliseconds(static_cast<long long>(*c.timeout_seconds * 1000));
    o.variant = to_string(cfg.variant);
    try {
      Query q = parse_query(c.query, lib);
      std::vector<double> firsts;
      for (int r = 0; r < std::max(1, runs); ++r) {
        SynthResult res = synthesize(lib.library, q.type, cfg);
        if (r == 0) {
          o.status = to_string(res.status);
          for (const auto& s : res.solutions) o.solutions.push_back(render_surface(s.program, q, lib));
        }
        if (!res.solutions.empty()) {
          double first = res.solutions.front().millis;
          for (const auto& s : res.solutions) first = std::min(first, s.millis);
          firsts.push_back(first);
        }
      }
      if (!firsts.empty()) {
        std::sort(firsts.begin(), firsts.end());
        o.first_millis = firsts[firsts.size() / 2];
      }
      for (std::size_t i = 0; i < o.solutions.size() && !o.matched_rank; ++i)
        for (const auto& e : c.expected)
          if (same_modulo_params(o.solutions[i], e)) {
            o.matched_rank = i + 1;
            break;
          }
      if (c.expected.empty())
        o.passed = !o.solutions.empty();
      else
        o.passed = o.matched_rank && (!c.within_rank || *o.matched_rank <= *c.within_rank);
    } catch (const std::exception& e) {
      o.status = "error";
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

void write_bench_table(std::ostream& out, const std::vector<BenchmarkOutcome>& outcomes) {
  out << std::left << std::setw(16) << "case" << std::setw(10) << "variant" << std::setw(13) << "status"
      << std::setw(12) << "first(ms)" << std::setw(7) << "rank" << "result\n";
  for (const auto& o : outcomes) {
    std::ostringstream ms;
    if (o.first_millis) ms << std::fixed << std::setprecision(1) << *o.first_millis;
    else ms << "-";
    out << std::left << std::setw(16) << o.id << std::setw(10) << o.variant << std::setw(13) << o.status
        << std::setw(12) << ms.str() << std::setw(7) << (o.matched_rank ? std::to_string(*o.matched_rank) : "-")
        << (o.passed ? "ok" : "FAIL");
    if (!o.error.empty()) out << "  " << o.error;
    out << "\n";
  }
}

std::string bench_json(const std::vector<BenchmarkOutcome>& outcomes) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& o : outcomes) {
    nlohmann::json c{{"id", o.id},           {"variant", o.variant}, {"status", o.status},
                     {"solutions", o.solutions}, {"passed", o.passed}};
    c["first_millis"] = o.first_millis ? nlohmann::json(*o.first_millis) : nlohmann::json(nullptr);
    c["matched_rank"] = o.matched_rank ? nlohmann::json(*o.matched_rank) : nlohmann::json(nullptr);
    if (!o.error.empty()) c["error"] = o.error;
    j.push_back(std::move(c));
  }
  return j.dump(2);
}

// ---- command line ----------------------------------------------------------

namespace {

std::string event_line(const SynthEvent& ev) {
  std::ostringstream s;
  switch (ev.kind) {
    case SynthEvent::Kind::Iteration:
      s << "[iter " << ev.iteration << "] cover=" << ev.cover_size << " len=" << ev.path_length;
      break;
    case SynthEvent::Kind::Candidate:
      s << "[iter " << ev.iteration << "]   " << ev.verdict << ": " << ev.text;
      break;
    case SynthEvent::Kind::Refined:
      s << "[iter " << ev.iteration << "] refine +{" << ev.text << "} cover=" << ev.cover_size;
      break;
    case SynthEvent::Kind::Solution:
      s << "[iter " << ev.iteration << "] solution " << ev.text;
      break;
    case SynthEvent::Kind::Note:
      s << "[note] " << ev.text;
      break;
  }
  return s.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Type-guided component-based program synthesis"};
  app.name("tygar");
  std::vector<std::string> libs;
  std::string query_text;
  std::string variant_text = "tygar0";
  std::size_t bound = 10;
  std::size_t max_len = 6;
  std::size_t solutions = 5;
  double timeout = 60;
  std::string solver;
  std::string format = "text";
  bool trace = false;
  std::string bench;
  std::vector<std::string> hof;
  int runs = 3;

  app.add_option("--lib", libs, "Signature file (repeatable)");
  app.add_option("--query", query_text, "Query type, e.g. \"a -> [Maybe a] -> a\"");
  app.add_option("--variant", variant_text, "baseline|nogar|tygar0|tygarq|tygarqb")->capture_default_str();
  app.add_option("--bound", bound, "Cover bound for tygarqb")->capture_default_str();
  app.add_option("--max-len", max_len, "Maximum path length")->capture_default_str();
  app.add_option("--solutions", solutions, "Number of solutions to report")->capture_default_str();
  app.add_option("--timeout", timeout, "Timeout in seconds")->capture_default_str();
  app.add_option("--solver", solver, "SMT solver command, or \"builtin\" (default: $TYGAR_SOLVER, else \"z3 -in\")");
  app.add_option("--format", format, "text|json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  app.add_flag("--trace", trace, "Print progress events to stderr");
  app.add_option("--bench", bench, "Run a benchmark suite (JSON)");
  app.add_option("--hof", hof, "Add a nullary variant for this component (repeatable)");
  app.add_option("--runs", runs, "Runs per benchmark case")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  auto variant = parse_variant(variant_text);
  if (!variant) {
    err << "error: unknown variant '" << variant_text << "'\n" << app.help();
    return 2;
  }
  SynthConfig cfg;
  cfg.variant = *variant;
  cfg.cover_bound = bound;
  cfg.max_len = max_len;
  cfg.max_solutions = solutions;
  cfg.timeout = std::chrono::milliseconds(static_cast<long long>(timeout * 1000));
  cfg.solver = resolve_solver_command(solver);

  if (!bench.empty()) {
    try {
      BenchmarkSuite suite = load_suite(bench);
      suite.hof.insert(hof.begin(), hof.end());
      auto outcomes = run_bench(suite, cfg, runs);
      if (format == "json")
        out << bench_json(outcomes) << "\n";
      else
        write_bench_table(out, outcomes);
      bool all = std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.passed; });
      return all ? 0 : 1;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
  }

  if (query_text.empty() || libs.empty()) {
    err << "error: " << (query_text.empty() ? "--query" : "--lib") << " is required\n" << app.help();
    return 2;
  }

  DesugaredLibrary lib;
  Query query;
  try {
    lib = desugar_library(load_rich_files(libs), {hof.begin(), hof.end()});
    query = parse_query(query_text, lib);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  SynthObserver observer;
  if (trace) observer = [&](const SynthEvent& ev) { err << event_line(ev) << "\n"; };

  SynthResult res;
  try {
    res = synthesize(lib.library, query.type, cfg, observer);
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (format == "json") {
    nlohmann::json j;
    j["query"] = query_text;
    j["variant"] = to_string(cfg.variant);
    j["solutions"] = nlohmann::json::array();
    for (const auto& s : res.solutions)
      j["solutions"].push_back({{"rank", s.rank},
                                {"term", render_surface(s.program, query, lib)},
                                {"core", render_term(s.program)},
                                {"apps", s.applications},
                                {"millis", s.millis}});
    j["iterations"] = res.iterations;
    j["refinements"] = res.refinements;
    j["cover_size"] = res.final_cover.size();
    j["status"] = to_string(res.status);
    if (!res.diagnostic.empty()) j["diagnostic"] = res.diagnostic;
    out << j.dump(2) << "\n";
  } else {
    out << "query: " << query_text << "\n";
    out << "desugared: " << to_string(query.type) << "\n";
    if (res.solutions.empty()) out << "no solution";
    if (res.solutions.empty() && !res.diagnostic.empty()) out << " (" << res.diagnostic << ")";
    if (res.solutions.empty()) out << "\n";
    for (const auto& s : res.solutions)
      out << s.rank << ". " << render_surface(s.program, query, lib) << "    [" << s.applications << " apps, "
          << std::fixed << std::setprecision(1) << s.millis << " ms]\n";
    out << "status: " << to_string(res.status) << ", iterations: " << res.iterations
        << ", refinements: " << res.refinements << ", cover size: " << res.final_cover.size() << "\n";
  }
  return res.solutions.empty() ? 1 : 0;
}

}  // namespace tygar
