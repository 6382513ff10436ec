#include <doctest.h>

#include "clonewatch/errors.hpp"
#include "clonewatch/weaklabel.hpp"
#include "datasets.hpp"

using namespace clonewatch;
using namespace clonewatch::weaklabel;
using namespace clonewatch::testdata;

namespace {

WeakLabelConfig quick(std::uint64_t seed = 1) {
  WeakLabelConfig c;
  c.cascade.forest.trees = 12;
  c.cascade.max_layers = 4;
  c.cascade.seed = seed;
  c.seed = seed;
  return c;
}

CascadeModel teacher_for(const TabularDataset& data, std::uint64_t seed = 1) {
  const auto [train, valid] = forest::stratified_split(data, 0.25, seed);
  return forest::train_cascade(train, valid, quick(seed).cascade);
}

TabularDataset unlabeled(TabularDataset d) {
  d.y.reset();
  return d;
}

}  // namespace

TEST_CASE("full fraction labels every row with the teacher's argmax") {
  const auto teacher = teacher_for(two_moons(300, 0.2, 1));
  const auto pool = unlabeled(two_moons(120, 0.2, 2));
  const auto weak = generate_weak_labels(teacher, pool, 1.0, 3);
  REQUIRE(weak.data.rows() == 120);
  CHECK(weak.source_rows.size() == 120);
  CHECK(weak.data.X == pool.X);
  CHECK(*weak.data.y == teacher.predict(pool.X).labels);
}

TEST_CASE("partial fraction samples round(fraction * N) distinct rows") {
  const auto teacher = teacher_for(two_moons(300, 0.2, 1));
  const auto pool = unlabeled(two_moons(100, 0.2, 4));
  const auto weak = generate_weak_labels(teacher, pool, 0.5, 5);
  CHECK(weak.data.rows() == 50);
  CHECK(std::is_sorted(weak.source_rows.begin(), weak.source_rows.end()));
  CHECK(std::adjacent_find(weak.source_rows.begin(), weak.source_rows.end()) == weak.source_rows.end());
  const auto labels = teacher.predict(pool.X).labels;
  for (std::size_t i = 0; i < weak.source_rows.size(); ++i) {
    CHECK(weak.data.X.row(static_cast<Eigen::Index>(i)) == pool.X.row(weak.source_rows[i]));
    CHECK((*weak.data.y)[i] == labels[static_cast<std::size_t>(weak.source_rows[i])]);
  }
  CHECK(generate_weak_labels(teacher, pool, 0.5, 5).source_rows == weak.source_rows);
  CHECK(generate_weak_labels(teacher, pool, 0.5, 6).source_rows != weak.source_rows);
  CHECK(generate_weak_labels(teacher, pool, 0.666, 5).data.rows() == 67);
}

TEST_CASE("a teacher that only sees class 1 propagates class 1") {
  const auto teacher = teacher_for(blobs(200, 2, 8.0, 7));
  TabularDataset pool{Eigen::MatrixXd::Constant(30, 2, 20.0), std::nullopt};
  const auto weak = generate_weak_labels(teacher, pool, 1.0, 1);
  CHECK(*weak.data.y == std::vector<int>(30, 1));
}

TEST_CASE("weak label preconditions") {
  const auto teacher = teacher_for(two_moons(200, 0.2, 8));
  CHECK_THROWS_AS(generate_weak_labels(teacher, {Eigen::MatrixXd(0, 2), std::nullopt}, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(generate_weak_labels(teacher, unlabeled(two_moons(10, 0.2, 1)), 0.0, 1), ConfigError);
  CHECK_THROWS_AS(generate_weak_labels(teacher, unlabeled(two_moons(10, 0.2, 1)), 1.5, 1), ConfigError);
}

TEST_CASE("single-class clean set is rejected") {
  auto clean = two_moons(100, 0.2, 9);
  for (auto& v : *clean.y) v = 1;
  CHECK_THROWS_AS(train_weakly_supervised(clean, unlabeled(two_moons(50, 0.2, 10)), quick()), ValidationError);
}

TEST_CASE("student trained on weak labels only matches a separable teacher") {
  const auto clean = blobs(300, 3, 8.0, 11);
  const auto run = train_weakly_supervised(clean, unlabeled(clean), quick());
  CHECK(run.weak.data.rows() == clean.rows());
  CHECK(run.student_stage.train_rows + run.student_stage.valid_rows == run.weak.data.rows());
  CHECK(std::abs(run.student_stage.validation.f1 - run.teacher_stage.validation.f1) <= 0.02);
  CHECK(run.fraction == 1.0);
}

TEST_CASE("include_clean adds the clean rows to the student") {
  const auto clean = two_moons(200, 0.2, 12);
  auto cfg = quick();
  cfg.include_clean = true;
  cfg.fraction = 0.5;
  const auto run = train_weakly_supervised(clean, unlabeled(two_moons(100, 0.2, 13)), cfg);
  CHECK(run.student_stage.train_rows + run.student_stage.valid_rows == 250);
}

TEST_CASE("noisy clean labels degrade the student gracefully") {
  auto clean = two_moons(600, 0.2, 14);
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u;
  for (auto& v : *clean.y)
    if (u(rng) < 0.1) v = 1 - v;
  const auto test = two_moons(400, 0.2, 16);
  const auto run = train_weakly_supervised(clean, unlabeled(two_moons(1200, 0.2, 17)), quick());
  const double teacher_f1 = forest::evaluate(*test.y, run.teacher.predict(test.X).labels).f1;
  const double student_f1 = forest::evaluate(*test.y, run.student.predict(test.X).labels).f1;
  CHECK(student_f1 >= teacher_f1 - 0.05);
}

TEST_CASE("fraction sweep reports one student per fraction") {
  const auto clean = two_moons(240, 0.25, 18);
  const auto test = two_moons(200, 0.25, 19);
  const std::vector<double> fractions{0.6, 0.7, 0.8, 0.9, 1.0};
  const auto rows = fraction_sweep(clean, unlabeled(two_moons(200, 0.25, 20)), test, fractions, quick());
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].fraction == fractions[i]);
    CHECK(rows[i].weak_rows == static_cast<std::size_t>(std::lround(fractions[i] * 200)));
    CHECK(rows[i].test.f1 > 0.5);
  }
  const auto report = sweep_json(rows, quick());
  CHECK(report["rows"].size() == 5);
}

TEST_CASE("run report carries per-stage metrics") {
  const auto clean = two_moons(200, 0.2, 21);
  const auto cfg = quick();
  const auto run = train_weakly_supervised(clean, unlabeled(two_moons(100, 0.2, 22)), cfg);
  const auto j = report_json(run, cfg);
  CHECK(j.contains("teacher"));
  CHECK(j.contains("student"));
  CHECK(j["student"]["validation"].contains("f1"));
  CHECK(j["fraction"] == 1.0);
}
