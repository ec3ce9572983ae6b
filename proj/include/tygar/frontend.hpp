#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tygar/signature.hpp"
#include "tygar/term.hpp"
#include "tygar/tygar.hpp"

namespace tygar {

struct ClassDecl {
  std::string name;
  std::string variable;
  std::vector<std::string> superclasses;
};

struct InstanceDecl {
  std::string class_name;
  RichType head;  // the instance type, e.g. List a
  std::vector<ClassConstraint> context;
};

/// Parsed contents of one or more signature files.
struct RichLibrary {
  std::vector<ClassDecl> classes;
  std::vector<InstanceDecl> instances;
  std::vector<RichSignature> signatures;
  /// Names listed in `@hof` pragmas.
  std::set<std::string> hof;
};

/// Appends the declarations in `text` to `out`. Lines: `name :: type`,
/// `class [ctx =>] C a`, `instance [ctx =>] C T`, `@hof name...`, `--` comments.
void parse_rich_library(std::string_view text, RichLibrary& out);
RichLibrary parse_rich_library(std::string_view text);

/// Type constructor encoding function types.
extern const char* const kFunctionCtor;

/// `<Class>D`
std::string dictionary_ctor(const std::string& class_name);

/// toBase: arrows become F applications; list/tuple sugar is already resolved by the parser.
Type to_base(const RichType& t);

struct DesugaredLibrary {
  Library library;
  /// Names of nullary variants (`c'`) mapped to their original component.
  std::map<std::string, std::string> variants;
  /// Class name to its dictionary constructor.
  std::map<std::string, std::string> classes;
};

/// Dictionary passing for classes and instances, F-encoding of higher-order
/// parameters, and nullary variants for names in `hof` (plus the library's
/// own `@hof` pragmas). Throws std::invalid_argument on undeclared classes,
/// duplicate names and unknown `@hof` names.
DesugaredLibrary desugar_library(const RichLibrary& rich, const std::set<std::string>& hof = {});

/// Query after desugaring and freezing.
struct Query {
  std::string text;
  FnType type;  // ground
  /// Parameter positions holding dictionaries.
  std::vector<std::size_t> dictionary_params;
};

/// Replaces every quantified variable with a nullary constructor of the same name.
FnType freeze_query(const PolyType& q);

/// Parses, desugars against the library's classes, and freezes a query type.
Query parse_query(std::string_view text, const DesugaredLibrary& lib);

/// Source-level rendering: dictionary arguments and parameters are erased
/// and the remaining parameters renumbered, `($) f x` prints as `f x`, and
/// nullary variants print under their original names.
std::string render_surface(const NormalForm& e, const Query& q, const DesugaredLibrary& lib);

/// Equality of two rendered terms up to a consistent renaming of the argN parameters.
bool same_modulo_params(const std::string& a, const std::string& b);

/// Reads and concatenates signature files. Throws std::runtime_error with the path on I/O or parse errors.
RichLibrary load_rich_files(const std::vector<std::string>& paths);

struct BenchmarkCase {
  std::string id;
  std::string query;
  std::vector<std::string> expected;
  /// If set, some expected solution must appear at rank ≤ this.
  std::optional<std::size_t> within_rank;
  std::optional<Variant> variant;
  std::optional<std::size_t> max_len;
  std::optional<double> timeout_seconds;
};

struct BenchmarkSuite {
  std::vector<std::string> libraries;  // resolved paths
  std::set<std::string> hof;
  std::vector<BenchmarkCase> cases;
};

/// Suite JSON: {"libraries": [...], "hof": [...], "cases": [{"id", "query", "expected", "within_rank", "variant", "max_len", "timeout"}]}.
/// Library paths are resolved relative to the suite file.
BenchmarkSuite load_suite(const std::string& path);

struct BenchmarkOutcome {
  std::string id;
  std::string variant;
  std::string status;
  std::optional<double> first_millis;  // median over runs
  std::vector<std::string> solutions;
  std::optional<std::size_t> matched_rank;
  bool passed = false;
  std::string error;
};

/// Runs every case `runs` times; per-case errors are recorded, not thrown.
std::vector<BenchmarkOutcome> run_bench(const BenchmarkSuite& suite, const SynthConfig& base, int runs = 3);

void write_bench_table(std::ostream& out, const std::vector<BenchmarkOutcome>& outcomes);
std::string bench_json(const std::vector<BenchmarkOutcome>& outcomes);

/// The command-line program. Returns 0 with solutions, 1 when none were
/// found, 2 on usage or solver errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tygar
