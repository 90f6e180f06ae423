#include "birdcall/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "birdcall/error.hpp"

namespace birdcall {
namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

MetricRow metrics_from(double tp, double tn, double fp, double fn, double accuracy) {
  MetricRow r;
  r.accuracy = accuracy;
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.fnr = ratio(fn, fn + tp);
  r.specificity = ratio(tn, tn + fp);
  r.f1 = f_beta(r.precision, r.recall, 1.0);
  r.f2 = f_beta(r.precision, r.recall, 2.0);
  return r;
}

std::vector<double MetricRow::*> row_fields() {
  return {&MetricRow::accuracy, &MetricRow::specificity, &MetricRow::f1, &MetricRow::fnr,
          &MetricRow::auc,      &MetricRow::precision,   &MetricRow::recall, &MetricRow::f2};
}

}  // namespace

std::size_t ConfusionCounts::correct() const noexcept {
  std::size_t n = 0;
  for (const auto& c : per_class) n += c.tp;
  return n;
}

ConfusionCounts confusion_counts(std::span<const std::size_t> truth,
                                 std::span<const std::size_t> predicted, std::size_t classes) {
  if (truth.size() != predicted.size()) throw InvalidArgument("label sequences differ in length");
  ConfusionCounts c;
  c.total = truth.size();
  c.matrix.assign(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= classes || predicted[i] >= classes) throw InvalidArgument("label out of range");
    ++c.matrix[truth[i]][predicted[i]];
  }
  c.per_class.resize(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    std::size_t row = 0;
    std::size_t col = 0;
    for (std::size_t j = 0; j < classes; ++j) {
      row += c.matrix[k][j];
      col += c.matrix[j][k];
    }
    auto& pc = c.per_class[k];
    pc.tp = c.matrix[k][k];
    pc.fn = row - pc.tp;
    pc.fp = col - pc.tp;
    pc.tn = c.total - pc.tp - pc.fn - pc.fp;
  }
  return c;
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  return ratio((1.0 + b2) * precision * recall, b2 * precision + recall);
}

MetricRow per_class_metrics(const ClassCounts& c, std::size_t total, std::string label) {
  const double tp = static_cast<double>(c.tp);
  const double tn = static_cast<double>(c.tn);
  MetricRow r = metrics_from(tp, tn, static_cast<double>(c.fp), static_cast<double>(c.fn),
                             ratio(tp + tn, static_cast<double>(total)));
  r.label = std::move(label);
  return r;
}

double auc_roc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw InvalidArgument("scores and labels differ in length");
  const auto pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double neg = static_cast<double>(positive.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw UndefinedMetricError("AUC needs both positive and negative examples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double area = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    double group_tp = 0.0;
    double group_fp = 0.0;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (positive[order[j]] ? group_tp : group_fp) += 1.0;
      ++j;
    }
    area += group_fp * (tp + 0.5 * group_tp);
    tp += group_tp;
    fp += group_fp;
    i = j;
  }
  return area / (pos * neg);
}

MetricsReport build_report(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                           std::span<const std::vector<double>> probabilities,
                           const std::vector<std::string>& class_names) {
  const std::size_t classes = class_names.size();
  if (truth.empty()) throw InvalidArgument("cannot report on an empty test set");
  if (probabilities.size() != truth.size()) throw InvalidArgument("probability rows differ from label count");

  MetricsReport report;
  report.counts = confusion_counts(truth, predicted, classes);
  const std::size_t n = report.counts.total;

  std::vector<double> pooled_scores;
  std::vector<bool> pooled_truth;
  for (std::size_t k = 0; k < classes; ++k) {
    MetricRow row = per_class_metrics(report.counts.per_class[k], n, class_names[k]);
    std::vector<double> scores(n);
    std::vector<bool> is_pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = probabilities[i].at(k);
      is_pos[i] = truth[i] == k;
    }
    pooled_scores.insert(pooled_scores.end(), scores.begin(), scores.end());
    pooled_truth.insert(pooled_truth.end(), is_pos.begin(), is_pos.end());
    try {
      row.auc = auc_roc(scores, is_pos);
    } catch (const UndefinedMetricError&) {
      spdlog::warn("AUC undefined for class '{}' (test set lacks positives or negatives); reported as 0",
                   class_names[k]);
      row.auc = 0.0;
    }
    report.classes.push_back(std::move(row));
  }

  report.macro.label = "macro";
  for (auto field : row_fields()) {
    double sum = 0.0;
    for (const auto& row : report.classes) sum += row.*field;
    report.macro.*field = sum / static_cast<double>(classes);
  }

  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (const auto& c : report.counts.per_class) {
    tp += static_cast<double>(c.tp);
    tn += static_cast<double>(c.tn);
    fp += static_cast<double>(c.fp);
    fn += static_cast<double>(c.fn);
  }
  report.micro = metrics_from(tp, tn, fp, fn, ratio(static_cast<double>(report.counts.correct()), static_cast<double>(n)));
  report.micro.label = "micro";
  try {
    report.micro.auc = auc_roc(pooled_scores, pooled_truth);
  } catch (const UndefinedMetricError&) {
    report.micro.auc = 0.0;
  }
  return report;
}

std::string MetricsReport::to_table() const {
  std::ostringstream os;
  std::size_t width = 8;
  for (const auto& r : classes) width = std::max(width, r.label.size() + 2);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), "class");
  os << buf;
  std::vector<std::string> headings(kTableColumns.begin(), kTableColumns.end());
  headings.insert(headings.end(), {"Recall", "F2"});
  for (const auto& h : headings) {
    std::snprintf(buf, sizeof buf, "%13s", h.c_str());
    os << buf;
  }
  os << '\n';
  const auto emit = [&](const MetricRow& r) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), r.label.c_str());
    os << buf;
    for (auto field : row_fields()) {
      std::snprintf(buf, sizeof buf, "%13.2f", 100.0 * (r.*field));
      os << buf;
    }
    os << '\n';
  };
  for (const auto& r : classes) emit(r);
  emit(macro);
  emit(micro);
  os << "values in %; macro = unweighted mean over classes, micro = pooled one-vs-rest counts\n";
  return os.str();
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "class";
  for (auto c : kTableColumns) os << ',' << c;
  os << ",Recall,F2\n";
  char buf[32];
  const auto emit = [&](const MetricRow& r) {
    os << r.label;
    for (auto field : row_fields()) {
      std::snprintf(buf, sizeof buf, ",%.6f", r.*field);
      os << buf;
    }
    os << '\n';
  };
  for (const auto& r : classes) emit(r);
  emit(macro);
  emit(micro);
  return os.str();
}

MetricsReport evaluate(const TrainedModel& model, const std::vector<LabeledRecord>& test_records) {
  if (test_records.empty()) throw InvalidArgument("cannot evaluate on an empty test set");
  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
  std::vector<std::vector<double>> probabilities;
  for (const auto& r : test_records) {
    const auto p = model.predict(r.features);
    truth.push_back(static_cast<std::size_t>(r.label));
    predicted.push_back(p.predicted_class);
    probabilities.push_back(p.probabilities);
  }
  return build_report(truth, predicted, probabilities, model.class_names);
}

}  // namespace birdcall
