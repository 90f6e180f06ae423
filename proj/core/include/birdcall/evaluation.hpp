#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "birdcall/model_io.hpp"
#include "birdcall/windowing.hpp"

namespace birdcall {

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct ConfusionCounts {
  std::size_t total = 0;
  std::vector<std::vector<std::size_t>> matrix;  // [true][predicted]
  std::vector<ClassCounts> per_class;            // one-vs-rest

  std::size_t classes() const noexcept { return per_class.size(); }
  std::size_t correct() const noexcept;
};

ConfusionCounts confusion_counts(std::span<const std::size_t> truth,
                                 std::span<const std::size_t> predicted, std::size_t classes);

// Report column order: the six headline metrics, then recall and F2.
struct MetricRow {
  std::string label;
  double accuracy = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double fnr = 0.0;
  double auc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f2 = 0.0;
};

inline constexpr std::array<std::string_view, 6> kTableColumns = {"Accuracy", "Specificity", "F1",
                                                                  "FNR",      "AUC",         "Precision"};

// (1 + b^2) P R / (b^2 P + R); 0 when the denominator vanishes.
double f_beta(double precision, double recall, double beta);

// Ratios with a zero denominator are reported as 0. AUC is left at 0.
MetricRow per_class_metrics(const ClassCounts& counts, std::size_t total, std::string label = {});

// Trapezoidal ROC area with tied scores grouped, i.e. the Mann-Whitney
// statistic. Throws UndefinedMetricError unless both classes are present.
double auc_roc(std::span<const double> scores, const std::vector<bool>& positive);

struct MetricsReport {
  std::vector<MetricRow> classes;
  MetricRow macro;
  MetricRow micro;
  ConfusionCounts counts;

  // Human-readable aligned table, values in percent.
  std::string to_table() const;
  // One row per class plus macro and micro rows, values as fractions.
  std::string to_csv() const;
};

// `probabilities` holds one record-level vector per sample (row-major N x C).
MetricsReport build_report(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                           std::span<const std::vector<double>> probabilities,
                           const std::vector<std::string>& class_names);

MetricsReport evaluate(const TrainedModel& model, const std::vector<LabeledRecord>& test_records);

}  // namespace birdcall
