#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "birdcall/error.hpp"
#include "birdcall/evaluation.hpp"
#include "test_support.hpp"

using namespace birdcall;

namespace {

double mann_whitney(const std::vector<double>& s, const std::vector<bool>& pos) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (pos[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

std::vector<std::vector<double>> one_hot(const std::vector<std::size_t>& pred, std::size_t classes) {
  std::vector<std::vector<double>> p;
  for (auto c : pred) {
    std::vector<double> row(classes, 0.0);
    row[c] = 1.0;
    p.push_back(row);
  }
  return p;
}

}  // namespace

TEST(PerClass, WorkedExample) {
  const auto m = per_class_metrics({3, 5, 1, 1}, 10);
  EXPECT_DOUBLE_EQ(m.precision, 0.75);
  EXPECT_DOUBLE_EQ(m.recall, 0.75);
  EXPECT_DOUBLE_EQ(m.fnr, 0.25);
  EXPECT_NEAR(m.specificity, 5.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.f1, 0.75);
  EXPECT_DOUBLE_EQ(m.f2, 0.75);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.8);
}

TEST(PerClass, ZeroDenominatorsAreZero) {
  const auto m = per_class_metrics({0, 1, 0, 0}, 1);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.fnr, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_EQ(m.specificity, 1.0);
  EXPECT_EQ(f_beta(0.0, 0.0, 2.0), 0.0);
}

TEST(Confusion, SingleWrongSample) {
  const std::vector<std::size_t> truth = {1};
  const std::vector<std::size_t> pred = {0};
  const auto c = confusion_counts(truth, pred, 2);
  EXPECT_EQ(c.matrix[1][0], 1u);
  EXPECT_EQ(c.per_class[0].fp, 1u);
  EXPECT_EQ(c.per_class[1].fn, 1u);
  EXPECT_EQ(c.correct(), 0u);
}

TEST(Confusion, BruteForceAgreement) {
  birdcall::Rng rng(8);
  std::vector<std::size_t> truth(50);
  std::vector<std::size_t> pred(50);
  for (auto& t : truth) t = rng.below(4);
  for (auto& p : pred) p = rng.below(4);
  const auto c = confusion_counts(truth, pred, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    ClassCounts o;
    for (std::size_t i = 0; i < 50; ++i) {
      const bool t = truth[i] == k;
      const bool p = pred[i] == k;
      o.tp += t && p;
      o.tn += !t && !p;
      o.fp += !t && p;
      o.fn += t && !p;
    }
    EXPECT_EQ(c.per_class[k].tp, o.tp);
    EXPECT_EQ(c.per_class[k].tn, o.tn);
    EXPECT_EQ(c.per_class[k].fp, o.fp);
    EXPECT_EQ(c.per_class[k].fn, o.fn);
    EXPECT_EQ(o.tp + o.tn + o.fp + o.fn, 50u);
  }
}

TEST(Confusion, RejectsBadInput) {
  const std::vector<std::size_t> a = {0, 1};
  const std::vector<std::size_t> b = {0};
  const std::vector<std::size_t> c = {0, 5};
  EXPECT_THROW(confusion_counts(a, b, 2), InvalidArgument);
  EXPECT_THROW(confusion_counts(a, c, 2), InvalidArgument);
}

TEST(Auc, Extremes) {
  const std::vector<double> s = {0.9, 0.8, 0.2, 0.1};
  const std::vector<bool> pos = {true, true, false, false};
  EXPECT_DOUBLE_EQ(auc_roc(s, pos), 1.0);
  const std::vector<bool> inverted = {false, false, true, true};
  EXPECT_DOUBLE_EQ(auc_roc(s, inverted), 0.0);
  const std::vector<double> flat(4, 0.5);
  EXPECT_DOUBLE_EQ(auc_roc(flat, pos), 0.5);
  EXPECT_THROW(auc_roc(s, std::vector<bool>(4, true)), UndefinedMetricError);
}

TEST(Auc, MatchesPairCountingOracle) {
  birdcall::Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s(20);
    std::vector<bool> pos(20);
    for (std::size_t i = 0; i < 20; ++i) {
      s[i] = std::round(rng.uniform() * 8.0) / 8.0;  // plenty of ties
      pos[i] = i < 7 || rng.uniform() < 0.3;
    }
    EXPECT_NEAR(auc_roc(s, pos), mann_whitney(s, pos), 1e-12);
  }
}

TEST(Auc, InvariantUnderMonotoneTransformAndPermutation) {
  birdcall::Rng rng(13);
  std::vector<double> s(30);
  std::vector<bool> pos(30);
  for (std::size_t i = 0; i < 30; ++i) {
    s[i] = rng.uniform();
    pos[i] = rng.uniform() < 0.5;
  }
  pos[0] = true;
  pos[1] = false;
  const double base = auc_roc(s, pos);
  std::vector<double> t(s);
  for (auto& v : t) v = std::exp(3.0 * v) - 7.0;
  EXPECT_NEAR(auc_roc(t, pos), base, 1e-12);

  std::vector<std::size_t> order(30);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<double> ps;
  std::vector<bool> pp;
  for (auto i : order) {
    ps.push_back(s[i]);
    pp.push_back(pos[i]);
  }
  EXPECT_NEAR(auc_roc(ps, pp), base, 1e-12);
}

TEST(Report, AlwaysFirstClassModel) {
  const std::vector<std::size_t> truth = {0, 0, 1, 1};
  const std::vector<std::size_t> pred = {0, 0, 0, 0};
  const auto r = build_report(truth, pred, one_hot(pred, 2), {"a", "b"});
  EXPECT_DOUBLE_EQ(r.micro.accuracy, 0.5);
  EXPECT_EQ(r.classes[0].specificity, 0.0);
  EXPECT_EQ(r.classes[0].recall, 1.0);
  EXPECT_EQ(r.classes[1].recall, 0.0);
  EXPECT_EQ(r.classes[0].auc, 0.5);
}

TEST(Report, MacroIsMeanAndIdentitiesHold) {
  birdcall::Rng rng(14);
  std::vector<std::size_t> truth(40);
  std::vector<std::size_t> pred(40);
  std::vector<std::vector<double>> probs;
  for (std::size_t i = 0; i < 40; ++i) {
    truth[i] = i % 3;
    std::vector<double> p = {rng.uniform(), rng.uniform(), rng.uniform()};
    p[truth[i]] += 0.6;
    const double sum = p[0] + p[1] + p[2];
    for (auto& v : p) v /= sum;
    pred[i] = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    probs.push_back(p);
  }
  const auto r = build_report(truth, pred, probs, {"x", "y", "z"});
  double f1 = 0.0;
  for (const auto& row : r.classes) {
    f1 += row.f1;
    EXPECT_NEAR(row.recall + row.fnr, 1.0, 1e-12);
    EXPECT_GE(row.auc, 0.0);
    EXPECT_LE(row.auc, 1.0);
  }
  EXPECT_NEAR(r.macro.f1, f1 / 3.0, 1e-12);
  EXPECT_EQ(r.micro.accuracy, static_cast<double>(r.counts.correct()) / 40.0);
}

TEST(Report, TableAndCsvColumns) {
  const std::vector<std::size_t> truth = {0, 1, 1, 0};
  const std::vector<std::size_t> pred = {0, 1, 0, 0};
  const auto r = build_report(truth, pred, one_hot(pred, 2), {"owl", "wren"});
  const auto table = r.to_table();
  for (auto col : kTableColumns) EXPECT_NE(table.find(col), std::string::npos) << col;
  EXPECT_NE(table.find("owl"), std::string::npos);
  EXPECT_NE(table.find("macro"), std::string::npos);
  EXPECT_NE(table.find("micro"), std::string::npos);
  const auto csv = r.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class,Accuracy,Specificity,F1,FNR,AUC,Precision,Recall,F2");
}

TEST(Report, UndefinedAucReportedAsZero) {
  const std::vector<std::size_t> truth = {0, 0};
  const std::vector<std::size_t> pred = {0, 1};
  const auto r = build_report(truth, pred, one_hot(pred, 2), {"a", "b"});
  EXPECT_EQ(r.classes[0].auc, 0.0);
}

TEST(Evaluate, EmptyTestSetThrows) {
  TrainedModel m;
  m.arch.class_count = 2;
  m.class_names = {"a", "b"};
  EXPECT_THROW(evaluate(m, {}), InvalidArgument);
}
