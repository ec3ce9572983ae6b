#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"
#include "tygar/pathgen.hpp"
#include "tygar/reach.hpp"

using namespace tygar;
using tygar::testing::cover_of;
using tygar::testing::load_fixture;

namespace {

Type T(const std::string& s) { return parse_base_type(s); }

const FnType kQuery{{T("A"), T("L (M A)")}, T("A")};

std::vector<std::string> render_all(const std::vector<NormalForm>& es) {
  std::vector<std::string> out;
  for (const auto& e : es) out.push_back(render_term(e));
  return out;
}

bool uses_every_param(const Term& t, std::size_t arity) {
  std::set<std::string> seen;
  std::function<void(const Term&)> walk = [&](const Term& x) {
    if (x.is_var()) seen.insert(x.name);
    for (const auto& a : x.args) walk(a);
  };
  walk(t);
  for (std::size_t i = 0; i < arity; ++i)
    if (!seen.count(param_name(i))) return false;
  return true;
}

}  // namespace

TEST(FromPath, SwapsUnderTop) {
  Library lib = load_fixture("tiny.sig");
  TransitionNet net = build_atn(lib, kQuery, AbstractCover::top());
  auto got = render_all(from_path(net, lib, {1}));
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<std::string>{"f arg0 arg1", "f arg1 arg0"}));
}

TEST(FromPath, SingletonUnderExactCover) {
  Library lib = load_fixture("tiny.sig");
  TransitionNet net = build_atn(lib, kQuery, cover_of({"A", "L (M A)", "L A", "M A", "M (M A)"}));
  BuiltinBackend b;
  auto p = shortest_valid_path(net, 6, b);
  ASSERT_TRUE(p);
  EXPECT_EQ(render_all(from_path(net, lib, *p)), std::vector<std::string>{"f arg0 (l (c arg1))"});
}

TEST(FromPath, EmptyPath) {
  Library lib = load_fixture("tiny.sig");
  TransitionNet net = build_atn(lib, FnType{{T("A")}, T("A")}, cover_of({"A"}));
  EXPECT_EQ(render_all(from_path(net, lib, {})), std::vector<std::string>{"arg0"});
}

TEST(FromPath, InvalidPathThrows) {
  Library lib = load_fixture("tiny.sig");
  TransitionNet net = build_atn(lib, kQuery, AbstractCover::top());
  EXPECT_THROW(from_path(net, lib, {1, 1}), std::invalid_argument);
  EXPECT_THROW(from_path(net, lib, {}), std::invalid_argument);
}

TEST(FromPath, DeterministicRelevantAndSized) {
  Library lib = load_fixture("tiny.sig");
  TransitionNet net = build_atn(lib, kQuery, AbstractCover::top());
  for (const Path& p : bfs_oracle(net, 3)) {
    auto a = from_path(net, lib, p);
    EXPECT_EQ(render_all(a), render_all(from_path(net, lib, p)));
    std::size_t groups = std::count_if(p.begin(), p.end(), [&](std::size_t t) { return !net.transitions()[t].is_copy(); });
    std::set<std::string> distinct;
    for (const auto& e : a) {
      EXPECT_TRUE(uses_every_param(e.body, 2)) << render_term(e);
      // a copied subterm contributes its applications twice
      EXPECT_GE(e.body.applications(), groups) << render_term(e);
      if (std::none_of(p.begin(), p.end(), [&](std::size_t t) { return net.transitions()[t].is_copy(); })) {
        EXPECT_EQ(e.body.applications(), groups) << render_term(e);
      }
      distinct.insert(render_term(e));
    }
    EXPECT_EQ(distinct.size(), a.size());
    EXPECT_FALSE(a.empty());
  }
}

TEST(FromPath, VisitorCanStop) {
  Library lib = load_fixture("tiny.sig");
  TransitionNet net = build_atn(lib, kQuery, AbstractCover::top());
  std::size_t n = 0;
  from_path(net, lib, {1}, [&](const NormalForm&) {
    ++n;
    return false;
  });
  EXPECT_EQ(n, 1u);
}

TEST(FromPath, CopiesShareATerm) {
  Library lib = load_fixture("tiny.sig");
  FnType q{{T("A")}, T("A")};
  TransitionNet net = build_atn(lib, q, AbstractCover::top());
  std::optional<std::size_t> copy, f;
  for (std::size_t i = 0; i < net.transitions().size(); ++i) {
    const auto& tr = net.transitions()[i];
    if (tr.is_copy()) copy = i;
    else if (lib.components()[tr.members[0].component].name == "f") f = i;
  }
  ASSERT_TRUE(copy && f);
  EXPECT_EQ(render_all(from_path(net, lib, {*copy, *f})), std::vector<std::string>{"f arg0 arg0"});
}
