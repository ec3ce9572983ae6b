#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tygar/atn.hpp"

namespace tygar {

/// Transition ids in firing order.
using Path = std::vector<std::size_t>;

/// Solver process failure: spawn, protocol, `unknown`, or timeout.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverTimeout : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Raised by bfs_oracle when the state cap is hit.
class StateSpaceExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

struct Deadline {
  std::optional<Clock::time_point> at;

  static Deadline none() { return {}; }
  static Deadline after(std::chrono::milliseconds d) { return {Clock::now() + d}; }
  bool expired() const { return at && Clock::now() >= *at; }
};

// ---- net semantics ---------------------------------------------------------

using Marking = std::vector<int>;

bool fireable(const TransitionNet& net, const Marking& m, std::size_t transition);
Marking fire(const TransitionNet& net, const Marking& m, std::size_t transition);
/// Exactly one token, in a final place.
bool is_valid_final(const TransitionNet& net, const Marking& m);
/// Markings after each prefix (size path.size()+1), or nullopt if some step is not fireable.
std::optional<std::vector<Marking>> replay(const TransitionNet& net, const Path& path);
bool is_valid_path(const TransitionNet& net, const Path& path);

// ---- encoding --------------------------------------------------------------

std::string tok_var(std::size_t place, std::size_t step);
std::string fire_var(std::size_t step);

/// Complete QF_LIA script deciding whether a path of exactly `len`
/// transitions ends with its single token in `final_place`. Ends with `(check-sat)`.
std::string encode(const TransitionNet& net, std::size_t len, std::size_t final_place);

// ---- backends --------------------------------------------------------------

class ReachBackend {
 public:
  virtual ~ReachBackend() = default;
  virtual std::string name() const = 0;
  /// A path of exactly `len` transitions ending with one token in
  /// `final_place` that is not in `blocked` (all of length `len`).
  virtual std::optional<Path> find(const TransitionNet& net, std::size_t len, std::size_t final_place,
                                   const std::vector<Path>& blocked) = 0;
  virtual void set_deadline(Deadline d) { deadline_ = d; }

 protected:
  Deadline deadline_;
};

/// Explicit-state depth-first search; paths come out in lexicographic order
/// of transition ids.
class BuiltinBackend : public ReachBackend {
 public:
  std::string name() const override { return "builtin"; }
  std::optional<Path> find(const TransitionNet& net, std::size_t len, std::size_t final_place,
                           const std::vector<Path>& blocked) override;
};

/// SMT-LIB 2 solver subprocess speaking over stdin/stdout.
class SmtBackend : public ReachBackend {
 public:
  /// `command` runs under /bin/sh -c, e.g. "z3 -in".
  explicit SmtBackend(std::string command);
  ~SmtBackend() override;
  SmtBackend(const SmtBackend&) = delete;
  SmtBackend& operator=(const SmtBackend&) = delete;

  std::string name() const override { return command_; }
  std::optional<Path> find(const TransitionNet& net, std::size_t len, std::size_t final_place,
                           const std::vector<Path>& blocked) override;

  /// Cross-check every model: fetch the token counts too and compare them
  /// with a replay of the decoded path.
  void set_verify_models(bool on) { verify_ = on; }
  std::uint64_t checks() const { return checks_; }

 private:
  struct Process;

  void ensure_started();
  void stop();
  void send(const std::string& text);
  std::string read_sexpr();
  void sync();
  void open_session(const TransitionNet& net, std::size_t len);

  std::string command_;
  std::unique_ptr<Process> proc_;
  bool verify_ = false;
  bool assuming_supported_ = true;
  std::uint64_t checks_ = 0;
  std::uint64_t syncs_ = 0;

  // current session
  std::uint64_t session_net_ = 0;
  std::size_t session_len_ = 0;
  bool session_open_ = false;
  std::vector<Path> session_blocked_;
  std::string session_base_;  // re-sent when assumptions are unsupported
};

/// "builtin" selects the explicit-state backend; anything else is a solver command.
std::unique_ptr<ReachBackend> make_backend(const std::string& command);

/// --solver value if given, else $TYGAR_SOLVER, else "z3 -in".
std::string resolve_solver_command(const std::string& flag);

// ---- search ----------------------------------------------------------------

/// Iterative deepening over path length, with blocked paths.
class PathFinder {
 public:
  PathFinder(ReachBackend& backend, std::size_t max_len) : backend_(backend), max_len_(max_len) {}

  /// Shortest unblocked valid path of the net, trying final places most
  /// specific first. Lengths below the last length found are skipped: they
  /// are known to be exhausted.
  std::optional<Path> next(const TransitionNet& net);
  void block(const Path& p);
  /// Forget blocked paths (transition ids change when the net is refined).
  void clear_blocks();
  std::size_t current_length() const { return start_; }
  std::size_t max_len() const { return max_len_; }

 private:
  ReachBackend& backend_;
  std::size_t max_len_;
  std::size_t start_ = 0;
  std::vector<std::vector<Path>> blocked_;
};

/// Convenience: one unblocked search from length 0.
std::optional<Path> shortest_valid_path(const TransitionNet& net, std::size_t max_len, ReachBackend& backend);

/// Every valid path of length ≤ max_len, by explicit-state search.
/// Throws StateSpaceExceeded after visiting `state_cap` search nodes.
std::set<Path> bfs_oracle(const TransitionNet& net, std::size_t max_len, std::size_t state_cap = 2'000'000);

}  // namespace tygar
