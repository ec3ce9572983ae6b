#include "tygar/reach.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <map>
#include <sstream>

namespace tygar {

// ---- net semantics ---------------------------------------------------------

bool fireable(const TransitionNet& net, const Marking& m, std::size_t transition) {
  const Transition& t = net.transitions().at(transition);
  for (const auto& [p, k] : t.inputs)
    if (m[p] < k) return false;
  return true;
}

Marking fire(const TransitionNet& net, const Marking& m, std::size_t transition) {
  const Transition& t = net.transitions().at(transition);
  Marking out = m;
  for (const auto& [p, k] : t.inputs) out[p] -= k;
  out[t.output] += t.output_multiplicity;
  return out;
}

bool is_valid_final(const TransitionNet& net, const Marking& m) {
  int total = 0;
  std::size_t where = 0;
  for (std::size_t p = 0; p < m.size(); ++p) {
    total += m[p];
    if (m[p]) where = p;
  }
  return total == 1 && net.is_final(where);
}

std::optional<std::vector<Marking>> replay(const TransitionNet& net, const Path& path) {
  std::vector<Marking> out{net.initial()};
  for (auto t : path) {
    if (t >= net.transitions().size() || !fireable(net, out.back(), t)) return std::nullopt;
    out.push_back(fire(net, out.back(), t));
  }
  return out;
}

bool is_valid_path(const TransitionNet& net, const Path& path) {
  auto ms = replay(net, path);
  return ms && is_valid_final(net, ms->back());
}

// ---- encoding --------------------------------------------------------------

std::string tok_var(std::size_t place, std::size_t step) {
  return "tok_" + std::to_string(place) + "_" + std::to_string(step);
}

std::string fire_var(std::size_t step) { return "fire_" + std::to_string(step); }

namespace {

std::string fin_var(std::size_t place) { return "fin_" + std::to_string(place); }

// Constraints 1 to 5 plus declarations.
std::string encode_base(const TransitionNet& net, std::size_t len) {
  const auto& places = net.places();
  const auto& ts = net.transitions();
  std::ostringstream s;
  s << "(set-option :produce-models true)\n(set-logic QF_LIA)\n";
  for (std::size_t k = 0; k <= len; ++k)
    for (std::size_t p = 0; p < places.size(); ++p) s << "(declare-const " << tok_var(p, k) << " Int)\n";
  for (std::size_t k = 0; k < len; ++k) s << "(declare-const " << fire_var(k) << " Int)\n";

  // Each firing adds at most one token overall; the upper bounds are redundant but help the solver.
  int total = 0;
  for (int n : net.initial()) total += n;
  for (std::size_t k = 0; k <= len; ++k)
    for (std::size_t p = 0; p < places.size(); ++p)
      s << "(assert (and (>= " << tok_var(p, k) << " 0) (<= " << tok_var(p, k) << " " << total + static_cast<int>(k)
        << ")))\n";

  // which transitions touch each place
  std::vector<std::vector<std::size_t>> touching(places.size());
  for (std::size_t t = 0; t < ts.size(); ++t) {
    for (const auto& [p, _] : ts[t].inputs) touching[p].push_back(t);
    if (touching[ts[t].output].empty() || touching[ts[t].output].back() != t) touching[ts[t].output].push_back(t);
  }

  for (std::size_t k = 0; k < len; ++k) {
    // (1) a valid transition is fired
    s << "(assert (and (<= 0 " << fire_var(k) << ") (< " << fire_var(k) << " " << ts.size() << ")))\n";
    for (std::size_t t = 0; t < ts.size(); ++t) {
      std::map<std::size_t, int> delta;
      for (const auto& [p, m] : ts[t].inputs) delta[p] -= m;
      delta[ts[t].output] += ts[t].output_multiplicity;
      s << "(assert (=> (= " << fire_var(k) << " " << t << ") (and";
      // (2) enough tokens in every input place
      for (const auto& [p, m] : ts[t].inputs) s << " (>= " << tok_var(p, k) << " " << m << ")";
      // (3) touched places are updated
      for (const auto& [p, d] : delta) {
        s << " (= " << tok_var(p, k + 1) << " ";
        if (d > 0)
          s << "(+ " << tok_var(p, k) << " " << d << ")";
        else if (d < 0)
          s << "(- " << tok_var(p, k) << " " << -d << ")";
        else
          s << tok_var(p, k);
        s << ")";
      }
      s << ")))\n";
    }
    // (4) untouched places keep their marking
    for (std::size_t p = 0; p < places.size(); ++p) {
      s << "(assert (or";
      for (auto t : touching[p]) s << " (= " << fire_var(k) << " " << t << ")";
      s << " (= " << tok_var(p, k + 1) << " " << tok_var(p, k) << ")))\n";
    }
  }
  // (5) initial marking
  for (std::size_t p = 0; p < places.size(); ++p)
    s << "(assert (= " << tok_var(p, 0) << " " << net.initial()[p] << "))\n";
  return s.str();
}

// (6) the final marking has its only token in `final_place`
std::string final_condition(const TransitionNet& net, std::size_t len, std::size_t final_place) {
  std::ostringstream s;
  s << "(and";
  for (std::size_t p = 0; p < net.places().size(); ++p)
    s << " (= " << tok_var(p, len) << " " << (p == final_place ? 1 : 0) << ")";
  s << ")";
  return s.str();
}

std::string blocking_clause(const Path& path) {
  if (path.empty()) return "(assert false)\n";
  std::ostringstream s;
  s << "(assert (not (and";
  for (std::size_t k = 0; k < path.size(); ++k) s << " (= " << fire_var(k) << " " << path[k] << ")";
  s << ")))\n";
  return s.str();
}

}  // namespace

std::string encode(const TransitionNet& net, std::size_t len, std::size_t final_place) {
  return encode_base(net, len) + "(assert " + final_condition(net, len, final_place) + ")\n(check-sat)\n";
}

// ---- builtin backend -------------------------------------------------------

namespace {

struct MarkingKey {
  Marking m;
  std::size_t remaining;
  bool operator<(const MarkingKey& o) const { return remaining != o.remaining ? remaining < o.remaining : m < o.m; }
};

class ExactSearch {
 public:
  ExactSearch(const TransitionNet& net, std::size_t final_place, const std::vector<Path>& blocked)
      : net_(net), final_(final_place), blocked_(blocked.begin(), blocked.end()) {
    for (const auto& t : net.transitions()) {
      int in = 0;
      for (const auto& [_, k] : t.inputs) in += k;
      max_drop_ = std::max(max_drop_, in - t.output_multiplicity);
      max_gain_ = std::max(max_gain_, t.output_multiplicity - in);
    }
  }

  enum class Result { None, OnlyBlocked, Found };

  Result run(const Marking& m, std::size_t remaining, Path& path, const Deadline& deadline) {
    if (remaining == 0) {
      if (!at_target(m)) return Result::None;
      return blocked_.count(path) ? Result::OnlyBlocked : Result::Found;
    }
    if (++visits_ % 4096 == 0 && deadline.expired()) throw SolverTimeout("reachability search timed out");
    int total = 0;
    for (int x : m) total += x;
    if (total - 1 > static_cast<int>(remaining) * max_drop_) return Result::None;
    if (total + static_cast<int>(remaining) * max_gain_ < 1) return Result::None;
    MarkingKey key{m, remaining};
    if (dead_.count(key)) return Result::None;
    bool any = false;
    for (std::size_t t = 0; t < net_.transitions().size(); ++t) {
      if (!fireable(net_, m, t)) continue;
      path.push_back(t);
      Result r = run(fire(net_, m, t), remaining - 1, path, deadline);
      if (r == Result::Found) return r;
      path.pop_back();
      any = any || r == Result::OnlyBlocked;
    }
    if (!any) dead_.insert(std::move(key));
    return any ? Result::OnlyBlocked : Result::None;
  }

 private:
  bool at_target(const Marking& m) const {
    for (std::size_t p = 0; p < m.size(); ++p)
      if (m[p] != (p == final_ ? 1 : 0)) return false;
    return true;
  }

  const TransitionNet& net_;
  std::size_t final_;
  std::set<Path> blocked_;
  std::set<MarkingKey> dead_;
  int max_drop_ = 0;
  int max_gain_ = 0;
  std::uint64_t visits_ = 0;
};

}  // namespace

std::optional<Path> BuiltinBackend::find(const TransitionNet& net, std::size_t len, std::size_t final_place,
                                         const std::vector<Path>& blocked) {
  if (deadline_.expired()) throw SolverTimeout("reachability search timed out");
  ExactSearch search(net, final_place, blocked);
  Path path;
  if (search.run(net.initial(), len, path, deadline_) == ExactSearch::Result::Found) return path;
  return std::nullopt;
}

// ---- SMT backend -----------------------------------------------------------

struct SmtBackend::Process {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string buffer;
};

SmtBackend::SmtBackend(std::string command) : command_(std::move(command)) {}

SmtBackend::~SmtBackend() { stop(); }

void SmtBackend::ensure_started() {
  if (proc_) return;
  static const bool sigpipe_ignored = [] {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &sa, nullptr);
    return true;
  }();
  (void)sigpipe_ignored;

  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw SolverError(std::string("pipe: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw SolverError(std::string("pipe: ") + std::strerror(errno));
  }
  pid_t pid = fork();
  if (pid < 0) throw SolverError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  proc_ = std::make_unique<Process>();
  proc_->pid = pid;
  proc_->to_child = in_pipe[1];
  proc_->from_child = out_pipe[0];
  session_open_ = false;
}

void SmtBackend::stop() {
  if (!proc_) return;
  if (proc_->to_child >= 0) {
    const char bye[] = "(exit)\n";
    [[maybe_unused]] auto n = write(proc_->to_child, bye, sizeof bye - 1);
    close(proc_->to_child);
  }
  if (proc_->from_child >= 0) close(proc_->from_child);
  if (proc_->pid > 0) {
    int status = 0;
    // give the solver a moment to exit on its own
    for (int i = 0; i < 20; ++i) {
      if (waitpid(proc_->pid, &status, WNOHANG) == proc_->pid) {
        proc_.reset();
        session_open_ = false;
        return;
      }
      usleep(5000);
    }
    kill(proc_->pid, SIGKILL);
    waitpid(proc_->pid, &status, 0);
  }
  proc_.reset();
  session_open_ = false;
}

void SmtBackend::send(const std::string& text) {
  const char* p = text.data();
  std::size_t left = text.size();
  while (left > 0) {
    ssize_t n = write(proc_->to_child, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      stop();
      throw SolverError("solver process '" + command_ + "' is not accepting input (" + std::strerror(errno) + ")");
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

namespace {

// Length of the first complete s-expression in `buf` after `start`, or 0.
std::size_t complete_sexpr(const std::string& buf, std::size_t start) {
  std::size_t i = start;
  if (i >= buf.size()) return 0;
  if (buf[i] != '(') {
    while (i < buf.size() && !std::isspace(static_cast<unsigned char>(buf[i])) && buf[i] != '(' && buf[i] != ')') {
      if (buf[i] == '"') {
        ++i;
        while (i < buf.size() && buf[i] != '"') ++i;
        if (i >= buf.size()) return 0;
      }
      ++i;
    }
    return i < buf.size() ? i - start : 0;  // an atom needs a delimiter after it
  }
  int depth = 0;
  for (; i < buf.size(); ++i) {
    char c = buf[i];
    if (c == '"') {
      ++i;
      while (i < buf.size() && buf[i] != '"') ++i;
      if (i >= buf.size()) return 0;
    } else if (c == '|') {
      ++i;
      while (i < buf.size() && buf[i] != '|') ++i;
      if (i >= buf.size()) return 0;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (--depth == 0) return i + 1 - start;
    }
  }
  return 0;
}

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

SExpr parse_sexpr(const std::string& s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  SExpr e;
  if (i < s.size() && s[i] == '(') {
    e.is_list = true;
    ++i;
    while (true) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size()) throw SolverError("unterminated s-expression from solver");
      if (s[i] == ')') {
        ++i;
        break;
      }
      e.list.push_back(parse_sexpr(s, i));
    }
    return e;
  }
  std::size_t start = i;
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')') ++i;
  e.atom = s.substr(start, i - start);
  return e;
}

long long sexpr_int(const SExpr& e) {
  if (!e.is_list) return std::stoll(e.atom);
  if (e.list.size() == 2 && !e.list[0].is_list && e.list[0].atom == "-") return -sexpr_int(e.list[1]);
  throw SolverError("unexpected value in solver model");
}

std::map<std::string, long long> parse_values(const std::string& text) {
  std::size_t i = 0;
  SExpr e = parse_sexpr(text, i);
  if (!e.is_list) throw SolverError("unexpected get-value response: " + text);
  std::map<std::string, long long> out;
  for (const auto& pair : e.list) {
    if (!pair.is_list || pair.list.size() != 2 || pair.list[0].is_list)
      throw SolverError("unexpected get-value response: " + text);
    out[pair.list[0].atom] = sexpr_int(pair.list[1]);
  }
  return out;
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::string SmtBackend::read_sexpr() {
  auto& buf = proc_->buffer;
  while (true) {
    std::size_t start = 0;
    while (start < buf.size() && std::isspace(static_cast<unsigned char>(buf[start]))) ++start;
    if (std::size_t n = complete_sexpr(buf, start)) {
      std::string out = buf.substr(start, n);
      buf.erase(0, start + n);
      return out;
    }
    int wait_ms = -1;
    if (deadline_.at) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline_.at - Clock::now()).count();
      if (left <= 0) {
        stop();
        throw SolverTimeout("solver timed out");
      }
      wait_ms = static_cast<int>(std::min<long long>(left, 1 << 30));
    }
    pollfd pfd{proc_->from_child, POLLIN, 0};
    int r = poll(&pfd, 1, wait_ms);
    if (r < 0) {
      if (errno == EINTR) continue;
      stop();
      throw SolverError(std::string("poll: ") + std::strerror(errno));
    }
    if (r == 0) {
      stop();
      throw SolverTimeout("solver timed out");
    }
    char chunk[65536];
    ssize_t n = read(proc_->from_child, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      std::string tail = buf;
      stop();
      throw SolverError("solver process '" + command_ + "' exited unexpectedly" +
                        (tail.empty() ? std::string() : ": " + tail));
    }
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

// Sends an echo marker and drains responses up to it, failing on errors.
void SmtBackend::sync() {
  std::string marker = "tygar-sync-" + std::to_string(++syncs_);
  send("(echo \"" + marker + "\")\n");
  while (true) {
    std::string r = read_sexpr();
    if (strip_quotes(r) == marker) return;
    if (r.rfind("(error", 0) == 0) throw SolverError("solver error: " + r);
  }
}

void SmtBackend::open_session(const TransitionNet& net, std::size_t len) {
  ensure_started();
  std::string script = encode_base(net, len);
  for (auto f : net.finals())
    script += "(declare-const " + fin_var(f) + " Bool)\n(assert (=> " + fin_var(f) + " " +
              final_condition(net, len, f) + "))\n";
  session_base_ = script;
  send("(reset)\n" + script);
  sync();
  session_net_ = net.stamp();
  session_len_ = len;
  session_open_ = true;
  session_blocked_.clear();
}

std::optional<Path> SmtBackend::find(const TransitionNet& net, std::size_t len, std::size_t final_place,
                                     const std::vector<Path>& blocked) {
  if (!net.is_final(final_place)) throw std::invalid_argument("place is not final");
  if (deadline_.expired()) throw SolverTimeout("solver timed out");
  bool reuse = session_open_ && proc_ && session_net_ == net.stamp() && session_len_ == len &&
               session_blocked_.size() <= blocked.size() &&
               std::equal(session_blocked_.begin(), session_blocked_.end(), blocked.begin());
  if (!reuse) open_session(net, len);
  if (session_blocked_.size() < blocked.size()) {
    std::string clauses;
    for (std::size_t i = session_blocked_.size(); i < blocked.size(); ++i) {
      if (blocked[i].size() != len) throw std::invalid_argument("blocked path has the wrong length");
      clauses += blocking_clause(blocked[i]);
      session_blocked_.push_back(blocked[i]);
    }
    send(clauses);
  }

  ++checks_;
  std::string answer;
  if (assuming_supported_) {
    send("(check-sat-assuming (" + fin_var(final_place) + "))\n");
    answer = read_sexpr();
    if (answer.rfind("(error", 0) == 0 || answer == "unsupported") assuming_supported_ = false;
  }
  if (!assuming_supported_) {
    // Re-assert from scratch with the final place fixed; the session cannot be reused afterwards.
    std::string script = "(reset)\n" + session_base_;
    for (const auto& b : session_blocked_) script += blocking_clause(b);
    script += "(assert " + fin_var(final_place) + ")\n(check-sat)\n";
    send(script);
    answer = read_sexpr();
    session_open_ = false;
  }
  if (answer == "unsat") return std::nullopt;
  if (answer == "unknown") throw SolverError("solver returned unknown");
  if (answer != "sat") throw SolverError("unexpected solver response: " + answer);

  Path path;
  if (len > 0 || verify_) {
    std::string vars;
    for (std::size_t k = 0; k < len; ++k) vars += " " + fire_var(k);
    if (verify_)
      for (std::size_t k = 0; k <= len; ++k)
        for (std::size_t p = 0; p < net.places().size(); ++p) vars += " " + tok_var(p, k);
    send("(get-value (" + vars.substr(vars.empty() ? 0 : 1) + "))\n");
    std::string resp = read_sexpr();
    if (resp.rfind("(error", 0) == 0) throw SolverError("solver error: " + resp);
    auto values = parse_values(resp);
    for (std::size_t k = 0; k < len; ++k) {
      auto it = values.find(fire_var(k));
      if (it == values.end()) throw SolverError("model lacks " + fire_var(k));
      if (it->second < 0 || static_cast<std::size_t>(it->second) >= net.transitions().size())
        throw SolverError("model fires an unknown transition");
      path.push_back(static_cast<std::size_t>(it->second));
    }
    auto markings = replay(net, path);
    if (!markings || !is_valid_final(net, markings->back()))
      throw SolverError("solver model does not decode to a valid path");
    if (verify_) {
      for (std::size_t k = 0; k <= len; ++k)
        for (std::size_t p = 0; p < net.places().size(); ++p)
          if (values.at(tok_var(p, k)) != (*markings)[k][p])
            throw SolverError("solver model disagrees with replay at " + tok_var(p, k));
    }
  }
  return path;
}

std::unique_ptr<ReachBackend> make_backend(const std::string& command) {
  if (command == "builtin") return std::make_unique<BuiltinBackend>();
  return std::make_unique<SmtBackend>(command);
}

std::string resolve_solver_command(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TYGAR_SOLVER"); env && *env) return env;
  return "z3 -in";
}

// ---- search ----------------------------------------------------------------

std::optional<Path> PathFinder::next(const TransitionNet& net) {
  if (blocked_.size() < max_len_ + 1) blocked_.resize(max_len_ + 1);
  std::vector<std::size_t> order = final_place_order(net);
  for (std::size_t len = start_; len <= max_len_; ++len) {
    for (auto f : order) {
      if (auto p = backend_.find(net, len, f, blocked_[len])) {
        start_ = len;
        return p;
      }
    }
  }
  return std::nullopt;
}

void PathFinder::block(const Path& p) {
  if (blocked_.size() < max_len_ + 1) blocked_.resize(max_len_ + 1);
  if (p.size() <= max_len_) blocked_[p.size()].push_back(p);
}

void PathFinder::clear_blocks() {
  for (auto& b : blocked_) b.clear();
}

std::optional<Path> shortest_valid_path(const TransitionNet& net, std::size_t max_len, ReachBackend& backend) {
  PathFinder finder(backend, max_len);
  return finder.next(net);
}

// ---- oracle ----------------------------------------------------------------

namespace {

class Enumerator {
 public:
  Enumerator(const TransitionNet& net, std::size_t cap) : net_(net), cap_(cap) {}

  // Returns whether some valid marking is reachable within `remaining` steps.
  bool run(const Marking& m, std::size_t remaining, Path& path, std::set<Path>& out) {
    if (++visits_ > cap_) throw StateSpaceExceeded("state space exceeds " + std::to_string(cap_) + " nodes");
    bool live = false;
    if (is_valid_final(net_, m)) {
      out.insert(path);
      live = true;
    }
    if (remaining == 0) return live;
    MarkingKey key{m, remaining};
    if (dead_.count(key)) return live;
    for (std::size_t t = 0; t < net_.transitions().size(); ++t) {
      if (!fireable(net_, m, t)) continue;
      path.push_back(t);
      live = run(fire(net_, m, t), remaining - 1, path, out) || live;
      path.pop_back();
    }
    if (!live) dead_.insert(std::move(key));
    return live;
  }

 private:
  const TransitionNet& net_;
  std::size_t cap_;
  std::size_t visits_ = 0;
  std::set<MarkingKey> dead_;
};

}  // namespace

std::set<Path> bfs_oracle(const TransitionNet& net, std::size_t max_len, std::size_t state_cap) {
  std::set<Path> out;
  Path path;
  Enumerator(net, state_cap).run(net.initial(), max_len, path, out);
  return out;
}

}  // namespace tygar
