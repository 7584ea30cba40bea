#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <json.hpp>
#include <set>

#include "brute_si.hpp"
#include "corpus.hpp"
#include "jessy/criteria.hpp"
#include "jessy/enumerate.hpp"
#include "jessy/error.hpp"
#include "jessy/history_io.hpp"

namespace jessy {
namespace {

using Expect = std::map<Criterion, bool>;

void expect_classification(std::string_view text, const Expect& expected) {
  History h = parse_history(text);
  for (auto [c, holds] : expected) {
    Verdict v = check(h, c);
    EXPECT_EQ(v.holds, holds) << to_string(c) << " on " << text << ": " << v.detail;
  }
}

Expect all_but(std::initializer_list<Criterion> failing) {
  Expect e;
  for (Criterion c : kAllCriteria) e[c] = true;
  for (Criterion c : failing) e[c] = false;
  return e;
}

TEST(Golden, H3HoldsEverything) { expect_classification(testing::kH3, all_but({})); }

TEST(Golden, H4FailsCons) {
  expect_classification(testing::kH4, {{Criterion::kCons, false},
                                       {Criterion::kAca, true},
                                       {Criterion::kWcf, true},
                                       {Criterion::kNmsi, false},
                                       {Criterion::kSiDecomp, false},
                                       {Criterion::kSiOracle, false}});
  History h = parse_linear(testing::kH4);
  Verdict v = check(h, Criterion::kCons);
  ASSERT_EQ(v.txns.size(), 2u);
  EXPECT_EQ(h.txn_label(v.txns[0]), "a");
  EXPECT_EQ(h.txn_label(v.txns[1]), "1");
  EXPECT_EQ(render_op(h, v.ops[0]), "ra(x0)");
}

TEST(Golden, H5FailsOnlySconsA) {
  expect_classification(testing::kH5,
                        all_but({Criterion::kSconsA, Criterion::kScons, Criterion::kSiDecomp, Criterion::kSiOracle}));
}

TEST(Golden, H6FailsOnlySconsB) {
  expect_classification(testing::kH6,
                        all_but({Criterion::kSconsB, Criterion::kScons, Criterion::kSiDecomp, Criterion::kSiOracle}));
}

TEST(Golden, WcfExampleFailsOnlyWcf) {
  expect_classification(testing::kWcfExample,
                        all_but({Criterion::kWcf, Criterion::kNmsi, Criterion::kSiDecomp, Criterion::kSiOracle}));
}

TEST(Golden, H8H9H10AreSnapshotIsolated) {
  for (auto text : {testing::kH8, testing::kH9, testing::kH10}) expect_classification(text, all_but({}));
  EXPECT_TRUE(testing::brute_force_si(parse_linear(testing::kH8)));
  EXPECT_TRUE(testing::brute_force_si(parse_linear(testing::kH9)));
}

TEST(Golden, EmptyHistoryHoldsEverything) { expect_classification("", all_but({})); }

TEST(Criteria, AcaOnUncommittedAndAbortedReads) {
  expect_classification("r1(x0).w1(x).r2(x1).c1.c2", {{Criterion::kAca, false}});
  expect_classification("r1(x0).w1(x).r2(x1).a1.a2", {{Criterion::kAca, false}});
  expect_classification("r1(x0).w1(x).c1.r2(x1).c2", {{Criterion::kAca, true}});
}

TEST(Criteria, MonCycleNeedsFourTransactions) {
  // Two readers observe the two updates in opposite orders.
  constexpr std::string_view crossed =
      "r1(x0).w1(x1).c1.rb(x1).r2(y0).w2(y2).c2.ra(y2).ra(x0).rb(y0).ca.cb";
  History h = parse_linear(crossed);
  Verdict mon = check(h, Criterion::kMon);
  EXPECT_FALSE(mon.holds);
  EXPECT_EQ(mon.txns.size(), 2u);
  EXPECT_FALSE(si_oracle(h).holds);
}

TEST(Criteria, OneCommittedUpdateIsSnapshotIsolated) {
  EXPECT_TRUE(si_oracle(parse_linear("r1(x0).w1(x).c1")).holds);
}

TEST(Criteria, NamesRoundTrip) {
  for (Criterion c : kAllCriteria) EXPECT_EQ(parse_criterion(flag_name(c)), c);
  EXPECT_FALSE(parse_criterion("serializable"));
}

TEST(Criteria, VerdictJson) {
  History h = parse_linear(testing::kH4);
  auto doc = nlohmann::json::parse(verdict_json(h, check(h, Criterion::kCons)));
  EXPECT_EQ(doc["criterion"], "CONS");
  EXPECT_EQ(doc["holds"], false);
  EXPECT_FALSE(doc["witness"].empty());
  auto ok = nlohmann::json::parse(verdict_json(h, check(h, Criterion::kAca)));
  EXPECT_TRUE(ok["witness"].empty());
}

// Re-derives each base criterion's violation from its witness alone.
void expect_witness_violates(const History& h, const Verdict& v) {
  ASSERT_FALSE(v.holds);
  for (std::size_t op : v.ops) ASSERT_LT(op, h.op_count());
  for (TxnId t : v.txns) ASSERT_LT(t.value, h.txn_count());
  switch (v.criterion) {
    case Criterion::kAca: {
      const Operation& r = h.op(v.ops.at(0));
      ASSERT_EQ(r.kind, OpKind::kRead);
      EXPECT_FALSE(h.commit_precedes_op(r.read_version, v.ops[0]));
      break;
    }
    case Criterion::kCons: {
      const Operation& r = h.op(v.ops.at(0));
      const Operation& w = h.op(v.ops.at(1));
      EXPECT_TRUE(h.depends(r.txn, w.txn));
      EXPECT_EQ(r.object, w.object);
      EXPECT_FALSE(h.version_at_or_before(r.object, w.txn, r.read_version));
      break;
    }
    case Criterion::kSconsA: {
      const Operation& ry = h.op(v.ops.at(1));
      EXPECT_EQ(h.op(v.ops[0]).txn, ry.txn);
      EXPECT_EQ(*h.terminator(ry.read_version), v.ops.at(2));
      EXPECT_TRUE(h.precedes(v.ops[0], v.ops[2]));
      break;
    }
    case Criterion::kSconsB: {
      const Operation& rx = h.op(v.ops.at(0));
      const TxnId tk = v.txns.at(1);
      const TxnId tl = h.op(v.ops.at(1)).read_version;
      EXPECT_TRUE(h.writes(tk, rx.object));
      EXPECT_TRUE(h.commit_precedes(tk, tl));
      EXPECT_FALSE(h.commit_precedes(tk, rx.read_version));
      break;
    }
    case Criterion::kMon: {
      ASSERT_GE(v.txns.size(), 2u);
      for (std::size_t i = 0; i < v.txns.size(); ++i)
        EXPECT_TRUE(h.snapshot_precedes(v.txns[i], v.txns[(i + 1) % v.txns.size()]));
      break;
    }
    case Criterion::kWcf: {
      const TxnId a = v.txns.at(0);
      const TxnId b = v.txns.at(1);
      EXPECT_TRUE(h.committed(a) && h.committed(b));
      EXPECT_FALSE(h.depends(a, b) || h.depends(b, a));
      EXPECT_EQ(h.op(v.ops.at(0)).object, h.op(v.ops.at(1)).object);
      break;
    }
    default:
      break;
  }
}

TEST(Exhaustive, OracleMatchesDecompositionAndBruteForce) {
  std::size_t si = 0;
  const std::size_t total = enumerate_histories({3, 2, 7, 1'000'000}, [&](const History& h) {
    const bool oracle = si_oracle(h).holds;
    const bool decomp = check(h, Criterion::kSiDecomp).holds;
    const bool brute = testing::brute_force_si(h);
    ASSERT_EQ(oracle, decomp) << render_linear(h);
    ASSERT_EQ(oracle, brute) << render_linear(h);
    if (decomp) {
      ++si;
      ASSERT_TRUE(check(h, Criterion::kNmsi).holds) << render_linear(h);
    }
  });
  EXPECT_GT(total, 1000u);
  EXPECT_GT(si, 0u);
  EXPECT_LT(si, total);
}

TEST(Exhaustive, WitnessesViolateTheirCriterion) {
  const Criterion base[] = {Criterion::kAca,   Criterion::kCons, Criterion::kSconsA,
                            Criterion::kSconsB, Criterion::kMon,  Criterion::kWcf};
  enumerate_histories({3, 2, 7, 1'000'000}, [&](const History& h) {
    for (Criterion c : base) {
      Verdict v = check(h, c);
      if (v.holds) {
        EXPECT_TRUE(v.ops.empty() && v.txns.empty());
      } else {
        expect_witness_violates(h, v);
      }
    }
  });
}

TEST(Exhaustive, ViolationsAreStableUnderExtension) {
  enumerate_histories({3, 2, 7, 1'000'000}, [&](const History& h) {
    const std::string text = render_linear(h);
    std::size_t dot = 0;
    while ((dot = text.find('.', dot + 1)) != std::string::npos) {
      History prefix = parse_linear(text.substr(0, dot));
      for (Criterion c : {Criterion::kAca, Criterion::kWcf, Criterion::kCons})
        if (!check(prefix, c).holds) ASSERT_FALSE(check(h, c).holds) << to_string(c) << " " << text;
    }
  });
}

TEST(Enumerate, SmallCases) {
  auto empty = enumerate_histories({0, 0, 0});
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0].op_count(), 0u);

  std::vector<std::string> one;
  for (const History& h : enumerate_histories({1, 1, 3})) one.push_back(render_linear(h));
  std::sort(one.begin(), one.end());
  EXPECT_EQ(one, (std::vector<std::string>{"", "r1(x0).a1", "r1(x0).c1", "r1(x0).w1(x).a1", "r1(x0).w1(x).c1"}));

  bool found = false;
  enumerate_histories({2, 2, 6}, [&](const History& h) { found = found || render_linear(h) == "r1(x0).w1(x).c1.r2(x1).c2"; });
  EXPECT_TRUE(found);
}

TEST(Enumerate, Budget) {
  EXPECT_THROW(enumerate_histories({3, 2, 7, 10}), BudgetError);
  EXPECT_THROW(enumerate_histories({12, 2, 7}), BudgetError);
}

TEST(Enumerate, HistoriesAreDistinctAndValid) {
  auto all = enumerate_histories({3, 2, 6});
  std::set<std::string> seen;
  for (const History& h : all) {
    EXPECT_TRUE(h.is_total());
    for (std::uint32_t t = 1; t < h.txn_count(); ++t) EXPECT_NE(h.status(TxnId{t}), TxnStatus::kPending);
    EXPECT_TRUE(seen.insert(render_linear(h)).second);
  }
}

}  // namespace
}  // namespace jessy
