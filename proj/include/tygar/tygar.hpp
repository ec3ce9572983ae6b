#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tygar/atn.hpp"
#include "tygar/lattice.hpp"
#include "tygar/reach.hpp"
#include "tygar/signature.hpp"
#include "tygar/term.hpp"
#include "tygar/typecheck.hpp"

namespace tygar {

enum class Variant { Baseline, Nogar, Tygar0, TygarQ, TygarQB };

std::string to_string(Variant v);
/// Accepts baseline, nogar, tygar0, tygarq, tygarqb (case-insensitive).
std::optional<Variant> parse_variant(std::string_view s);

struct SynthConfig {
  Variant variant = Variant::Tygar0;
  std::size_t cover_bound = 10;  // tygarQB
  std::size_t max_len = 6;
  std::size_t max_solutions = 5;
  std::string solver = "z3 -in";  // or "builtin"
  std::chrono::milliseconds timeout{60'000};
  bool coalesce = true;
  /// Update the net in place after refinement instead of rebuilding it.
  bool incremental = true;
  /// Largest monomorphised library the baseline variant will build.
  std::size_t baseline_budget = 20'000;
};

// ---- refinement ------------------------------------------------------------

/// Name of the component added by refine to check the result type. The
/// signature parser cannot produce it.
extern const char* const kResultChecker;

/// Subterm address: child indices from the root.
using Position = std::vector<std::size_t>;

/// Labels on the subterms of r(body) proving that the program is ill-typed.
struct UntypeabilityProof {
  Term root;
  std::map<Position, Type> labels;

  const Type& at(const Position& p) const { return labels.at(p); }
  std::vector<Type> range() const;
};

/// `lib` plus the result checker r :: ret -> ret.
Library with_result_checker(const Library& lib, const Type& ret);

/// Concrete inference on every subterm of r(body). `lib_r` includes the result checker.
UntypeabilityProof initial_proof(const Library& lib_r, const NormalForm& e, const FnType& t);

/// Observer called after every accepted weakening step.
using ProofObserver = std::function<void(const UntypeabilityProof&)>;

/// Weakens argument labels top-down while the parent's label still bounds
/// the transformer output.
void generalize(UntypeabilityProof& u, const Library& lib_r, const ProofObserver& after_step = {});

/// Empty when I1 (labels bound concrete types), I2 (labels bound transformer
/// outputs) and I3 (the root is bottom) hold; otherwise a description of the first violation.
std::string proof_violation(const UntypeabilityProof& u, const Library& lib_r, const Environment& env);

/// Cover closed over `cover` and the generalized proof labels. Throws
/// std::invalid_argument if `e` type-checks concretely or fails the abstract check.
AbstractCover refine(const AbstractCover& cover, const NormalForm& e, const FnType& t, const Library& lib,
                     const ProofObserver& after_step = {});

// ---- covers and search -----------------------------------------------------

enum class InitialCover { Top, Query };

/// {τ, ⊥}, or the closure of the query's parameter and result types.
AbstractCover initial_cover(InitialCover kind, const FnType& t);

/// Shortest valid path's first abstractly well-typed program, or nullopt
/// when no valid path up to cfg.max_len exists.
std::optional<NormalForm> syn_abstract(const Library& lib, const FnType& t, const AbstractCover& cover,
                                       const SynthConfig& cfg);

struct SynthEvent {
  enum class Kind { Iteration, Candidate, Refined, Solution, Note };
  Kind kind;
  std::size_t iteration = 0;
  std::size_t cover_size = 0;
  std::size_t path_length = 0;
  std::string text;     // candidate, added types, or note
  std::string verdict;  // for candidates: "solution", "duplicate", "spurious", "ill-typed"
};

using SynthObserver = std::function<void(const SynthEvent&)>;

struct Solution {
  NormalForm program;
  std::size_t applications = 0;
  double millis = 0;  // since the start of synthesis
  std::size_t iteration = 0;
  std::size_t rank = 0;  // 1-based, by (applications, emission order)
};

enum class SynthStatus { Done, NoSolution, Exhausted };
std::string to_string(SynthStatus s);

struct SynthResult {
  SynthStatus status = SynthStatus::NoSolution;
  std::vector<Solution> solutions;  // ranked
  std::size_t iterations = 0;       // SynAbstract calls
  std::size_t refinements = 0;
  /// Types added by each refinement, in order.
  std::vector<std::vector<Type>> cover_trace;
  AbstractCover final_cover;
  std::string diagnostic;  // reason for Exhausted, when known
};

/// `t` must be ground (freeze query variables first). Solver failures other
/// than timeouts propagate as SolverError.
SynthResult synthesize(const Library& lib, const FnType& t, const SynthConfig& cfg, const SynthObserver& observer = {});

/// Instances of every component over ground types of constructor depth ≤ 1,
/// named `name@k`. Throws std::length_error past `budget` instances.
Library monomorphise(const Library& lib, const FnType& t, std::size_t budget);

/// Drops `@k` instance suffixes from component names.
Term strip_instance_names(const Term& t);

}  // namespace tygar
