#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tygar/atn.hpp"
#include "tygar/lattice.hpp"
#include "tygar/signature.hpp"
#include "tygar/term.hpp"
#include "tygar/types.hpp"

namespace tygar::testing {

using Rng = std::mt19937_64;

// Constructors used by every random generator: A/0, B/0, L/1, P/2.
Library random_universe_library();

/// Random type of depth ≤ `depth` over A, B, L, P and variables drawn from `vars`.
Type random_type(Rng& rng, std::size_t depth, const std::vector<std::string>& vars, double var_weight = 0.3);
Type random_ground(Rng& rng, std::size_t depth);

/// Every ground type of depth ≤ `depth`.
std::vector<Type> ground_universe(std::size_t depth);

/// Every canonical type of depth ≤ `depth` over the given nullary/unary/binary
/// constructors with variables t0, t1.
std::vector<Type> small_universe(std::size_t depth);

/// Random library of `n` components. Parameters and results have depth ≤ 1.
/// A result variable missing from the parameters sits under a constructor,
/// and there is at most one such variable per component.
Library random_library(Rng& rng, std::size_t n);

/// Ground query with 1-2 parameters of depth ≤ 1.
FnType random_query(Rng& rng);

/// Random cover: closure of up to `k` random types of depth ≤ 2.
AbstractCover random_cover(Rng& rng, std::size_t k);

/// All terms with 1..max_apps component applications over the parameters
/// arg0..arg{arity-1}; parameters count as zero applications. Ordered by size.
std::vector<Term> enumerate_terms(const Library& lib, std::size_t arity, std::size_t max_apps);

/// Declarative typing by brute force: the set of ground types a term can be
/// given when every component occurrence is instantiated with ground types.
/// Variables fixed by the arguments are read off them; variables only in a
/// result range over ground types of depth ≤ 2.
class DeclarativeOracle {
 public:
  DeclarativeOracle(const Library& lib, std::vector<Type> params);
  const std::set<Type>& types_of(const Term& e);

 private:
  const Library& lib_;
  std::vector<Type> params_;
  std::vector<Type> fill_;
  std::map<Term, std::set<Type>> memo_;
};

/// Counts of a property run.
struct Report {
  std::size_t cases = 0;
  std::size_t violations = 0;
  std::string first;  // first counterexample

  void fail(const std::string& what) {
    if (violations++ == 0) first = what;
  }
  bool ok() const { return violations == 0; }
};

Report check_lattice_laws(std::uint64_t seed, std::size_t pairs);
Report check_meet_exhaustive();
Report check_oracle_agreement(std::uint64_t seed, std::size_t libraries);
Report check_preservation(std::uint64_t seed, std::size_t libraries);
Report check_smt_bfs(std::uint64_t seed, std::size_t nets, const std::string& solver);
Report check_atn_theorems(std::uint64_t seed, std::size_t nets);
Report check_refine_contract(std::uint64_t seed, std::size_t candidates);
Report check_incremental(std::uint64_t seed, std::size_t steps);

/// Path to a file under the data/ directory of the source tree.
std::string data_path(const std::string& name);

/// Final place of a valid path.
std::size_t final_place_of(const TransitionNet& net, const std::vector<std::size_t>& path);

/// First-order library from a file under data/.
Library load_fixture(const std::string& name);

/// Closure of the parsed types.
AbstractCover cover_of(std::initializer_list<const char*> types);

/// Component names of each transition, '+'-joined for groups, "copy" for copies.
std::vector<std::string> transition_labels(const TransitionNet& net, const Library& lib, const std::vector<std::size_t>& path);

/// Id of the group transition containing `component` with the given input places.
std::optional<std::size_t> find_transition(const TransitionNet& net, const Library& lib, const std::string& component,
                                           const std::vector<std::string>& input_types);

}  // namespace tygar::testing

namespace tygar {
inline void PrintTo(const Type& t, std::ostream* os) { *os << to_string(t); }
inline void PrintTo(const FnType& t, std::ostream* os) { *os << to_string(t); }
}  // namespace tygar
