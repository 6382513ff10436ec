#include "clonewatch/weaklabel.hpp"

#include <chrono>

#include "clonewatch/errors.hpp"
#include "clonewatch/rng.hpp"

namespace clonewatch::weaklabel {

void WeakLabelConfig::validate() const {
  if (!(fraction > 0 && fraction <= 1)) throw ConfigError("weak-label fraction must lie in (0, 1]");
  if (!(validation_fraction > 0 && validation_fraction < 1))
    throw ConfigError("validation fraction must lie in (0, 1)");
  cascade.validate();
}

WeakLabels generate_weak_labels(const CascadeModel& teacher, const TabularDataset& unlabeled, double fraction,
                                std::uint64_t seed) {
  if (!(fraction > 0 && fraction <= 1)) throw ConfigError("weak-label fraction must lie in (0, 1]");
  if (unlabeled.rows() == 0) throw ValidationError("unlabeled set is empty");
  const auto n = static_cast<std::size_t>(unlabeled.rows());
  const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (take == 0) throw ValidationError("fraction selects no unlabeled rows");
  Rng rng(derive_seed(seed, 0x3eab));
  auto picked = sample_without_replacement(rng, n, take);
  std::sort(picked.begin(), picked.end());

  WeakLabels out;
  out.source_rows.assign(picked.begin(), picked.end());
  out.data.X.resize(static_cast<Eigen::Index>(take), unlabeled.cols());
  for (std::size_t i = 0; i < take; ++i)
    out.data.X.row(static_cast<Eigen::Index>(i)) = unlabeled.X.row(out.source_rows[i]);
  out.data.y = teacher.predict(out.data.X).labels;
  return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::pair<CascadeModel, StageReport> train_stage(const TabularDataset& data, const WeakLabelConfig& config,
                                                 std::uint64_t stage) {
  const auto t0 = std::chrono::steady_clock::now();
  auto [train, valid] = forest::stratified_split(data, config.validation_fraction, derive_seed(config.seed, stage));
  CascadeConfig cc = config.cascade;
  cc.seed = derive_seed(config.cascade.seed, stage);
  auto model = forest::train_cascade(train, valid, cc);
  StageReport r;
  r.validation = forest::evaluate(valid.labels(), model.predict(valid.X).labels);
  r.train_rows = static_cast<std::size_t>(train.rows());
  r.valid_rows = static_cast<std::size_t>(valid.rows());
  r.seconds = seconds_since(t0);
  return {std::move(model), r};
}

TabularDataset concat(const TabularDataset& a, const TabularDataset& b) {
  TabularDataset out;
  out.X.resize(a.rows() + b.rows(), a.cols());
  out.X << a.X, b.X;
  out.y = a.labels();
  out.y->insert(out.y->end(), b.labels().begin(), b.labels().end());
  return out;
}

}  // namespace

WeakRun train_weakly_supervised(const TabularDataset& clean, const TabularDataset& unlabeled,
                                const WeakLabelConfig& config) {
  config.validate();
  clean.validate();
  unlabeled.validate();
  const auto& y = clean.labels();
  const auto pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size()))
    throw ValidationError("clean set must contain both classes");
  if (clean.cols() != unlabeled.cols()) throw DimensionError("clean and unlabeled widths differ");

  auto [teacher, teacher_stage] = train_stage(clean, config, 1);
  auto weak = generate_weak_labels(teacher, unlabeled, config.fraction, derive_seed(config.seed, 2));
  const TabularDataset student_data = config.include_clean ? concat(clean, weak.data) : weak.data;
  auto [student, student_stage] = train_stage(student_data, config, 3);
  return {std::move(teacher), std::move(student), std::move(weak), teacher_stage, student_stage, config.fraction};
}

std::vector<SweepRow> fraction_sweep(const TabularDataset& clean, const TabularDataset& unlabeled,
                                     const TabularDataset& test, const std::vector<double>& fractions,
                                     const WeakLabelConfig& config) {
  config.validate();
  auto [teacher, teacher_stage] = train_stage(clean, config, 1);
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    auto weak = generate_weak_labels(teacher, unlabeled, f, derive_seed(config.seed, 2));
    const TabularDataset student_data = config.include_clean ? concat(clean, weak.data) : weak.data;
    auto [student, stage] = train_stage(student_data, config, 3);
    rows.push_back({f, weak.source_rows.size(), stage.validation,
                    forest::evaluate(test.labels(), student.predict(test.X).labels)});
  }
  return rows;
}

namespace {
nlohmann::json stage_json(const StageReport& s) {
  return {{"validation", forest::to_json(s.validation)},
          {"train_rows", s.train_rows},
          {"valid_rows", s.valid_rows},
          {"seconds", s.seconds}};
}
}  // namespace

nlohmann::json report_json(const WeakRun& run, const WeakLabelConfig& config) {
  return {{"fraction", run.fraction},
          {"weak_rows", run.weak.source_rows.size()},
          {"include_clean", config.include_clean},
          {"seed", config.seed},
          {"teacher", stage_json(run.teacher_stage)},
          {"student", stage_json(run.student_stage)},
          {"teacher_layers", run.teacher.layers().size()},
          {"student_layers", run.student.layers().size()}};
}

nlohmann::json sweep_json(const std::vector<SweepRow>& rows, const WeakLabelConfig& config) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows)
    table.push_back({{"fraction", r.fraction},
                     {"weak_rows", r.weak_rows},
                     {"student_validation", forest::to_json(r.student_validation)},
                     {"test", forest::to_json(r.test)}});
  return {{"seed", config.seed}, {"rows", std::move(table)}};
}

}  // namespace clonewatch::weaklabel
