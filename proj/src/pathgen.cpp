#include "tygar/pathgen.hpp"

#include <set>
#include <stdexcept>

namespace tygar {

namespace {

struct Token {
  std::size_t place;
  Term term;
};

class Replayer {
 public:
  Replayer(const TransitionNet& net, const Library& lib, const Path& path, const ProgramVisitor& visit)
      : net_(net), lib_(lib), path_(path), visit_(visit) {}

  void run() {
    std::vector<Token> tokens;
    const FnType& q = net_.query();
    for (std::size_t i = 0; i < q.params.size(); ++i)
      tokens.push_back({net_.place_index(net_.cover().abstract(q.params[i])), Term::var(param_name(i))});
    step(0, tokens);
  }

 private:
  // Returns false once the visitor asked to stop.
  bool step(std::size_t k, const std::vector<Token>& tokens) {
    if (k == path_.size()) {
      if (tokens.size() != 1) return true;
      NormalForm e = make_normal_form(net_.query().params.size(), tokens[0].term);
      if (!seen_.insert(e.body).second) return true;
      return visit_(e);
    }
    const Transition& t = net_.transitions()[path_[k]];
    if (t.is_copy()) {
      std::vector<const Term*> tried;
      for (const auto& tok : tokens) {
        if (tok.place != t.output || already(tried, tok.term)) continue;
        tried.push_back(&tok.term);
        std::vector<Token> next = tokens;
        next.push_back(tok);
        if (!step(k + 1, next)) return false;
      }
      return true;
    }
    for (const auto& m : t.members) {
      std::vector<bool> used(tokens.size(), false);
      std::vector<Term> chosen;
      if (!assign(k, tokens, m, 0, used, chosen)) return false;
    }
    return true;
  }

  bool assign(std::size_t k, const std::vector<Token>& tokens, const Member& m, std::size_t j,
              std::vector<bool>& used, std::vector<Term>& chosen) {
    if (j == m.args.size()) {
      std::vector<Token> next;
      for (std::size_t i = 0; i < tokens.size(); ++i)
        if (!used[i]) next.push_back(tokens[i]);
      const Transition& t = net_.transitions()[path_[k]];
      next.push_back({t.output, Term::app(lib_.components()[m.component].name, chosen)});
      return step(k + 1, next);
    }
    // Tokens with equal terms are interchangeable; try each term once.
    std::vector<const Term*> tried;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (used[i] || tokens[i].place != m.args[j] || already(tried, tokens[i].term)) continue;
      tried.push_back(&tokens[i].term);
      used[i] = true;
      chosen.push_back(tokens[i].term);
      bool go_on = assign(k, tokens, m, j + 1, used, chosen);
      chosen.pop_back();
      used[i] = false;
      if (!go_on) return false;
    }
    return true;
  }

  static bool already(const std::vector<const Term*>& tried, const Term& t) {
    for (const Term* x : tried)
      if (*x == t) return true;
    return false;
  }

  const TransitionNet& net_;
  const Library& lib_;
  const Path& path_;
  const ProgramVisitor& visit_;
  std::set<Term> seen_;
};

}  // namespace

void from_path(const TransitionNet& net, const Library& lib, const Path& path, const ProgramVisitor& visit) {
  if (!is_valid_path(net, path)) throw std::invalid_argument("path is not a valid path of the net");
  Replayer(net, lib, path, visit).run();
}

std::vector<NormalForm> from_path(const TransitionNet& net, const Library& lib, const Path& path) {
  std::vector<NormalForm> out;
  from_path(net, lib, path, [&](const NormalForm& e) {
    out.push_back(e);
    return true;
  });
  return out;
}

}  // namespace tygar
