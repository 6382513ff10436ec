#pragma once

#include "clonewatch/cascade.hpp"

namespace clonewatch::weaklabel {

using forest::BinaryMetrics;
using forest::CascadeConfig;
using forest::CascadeModel;
using forest::TabularDataset;

struct WeakLabelConfig {
  double fraction = 1.0;
  /// Train the student on clean plus weak labels instead of weak labels only.
  bool include_clean = false;
  /// Share of each stage's labelled data held out for cascade growth decisions.
  double validation_fraction = 0.2;
  CascadeConfig cascade;
  std::uint64_t seed = 0;
  void validate() const;
};

struct WeakLabels {
  TabularDataset data;                      ///< sampled rows with teacher labels
  std::vector<Eigen::Index> source_rows;    ///< row of each sample in the unlabeled set, ascending
};

/// Labels a uniform sample of round(fraction * N) unlabeled rows with the
/// teacher's argmax prediction.
WeakLabels generate_weak_labels(const CascadeModel& teacher, const TabularDataset& unlabeled, double fraction,
                                std::uint64_t seed);

struct StageReport {
  BinaryMetrics validation;
  std::size_t train_rows = 0;
  std::size_t valid_rows = 0;
  double seconds = 0;
};

struct WeakRun {
  CascadeModel teacher;
  CascadeModel student;
  WeakLabels weak;
  StageReport teacher_stage, student_stage;
  double fraction = 1.0;
};

/// Teacher on `clean`, weak labels for `unlabeled`, then a fresh student.
WeakRun train_weakly_supervised(const TabularDataset& clean, const TabularDataset& unlabeled,
                                const WeakLabelConfig& config);

struct SweepRow {
  double fraction;
  std::size_t weak_rows;
  BinaryMetrics student_validation;
  BinaryMetrics test;
};

/// One teacher, then one student per fraction, each scored on `test`.
std::vector<SweepRow> fraction_sweep(const TabularDataset& clean, const TabularDataset& unlabeled,
                                     const TabularDataset& test, const std::vector<double>& fractions,
                                     const WeakLabelConfig& config);

nlohmann::json report_json(const WeakRun& run, const WeakLabelConfig& config);
nlohmann::json sweep_json(const std::vector<SweepRow>& rows, const WeakLabelConfig& config);

}  // namespace clonewatch::weaklabel
