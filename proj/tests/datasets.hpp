#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "clonewatch/forest.hpp"

namespace clonewatch::testdata {

using forest::TabularDataset;

// Quadrant XOR on the first two columns plus `noise` uniform columns.
inline TabularDataset xor_data(int n, int noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TabularDataset d{Eigen::MatrixXd(n, 2 + noise), std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 2 + noise; ++j) d.X(i, j) = u(rng);
    (*d.y)[static_cast<std::size_t>(i)] = (d.X(i, 0) > 0) != (d.X(i, 1) > 0);
  }
  return d;
}

// Two interleaved half circles with Gaussian jitter.
inline TabularDataset two_moons(int n, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, noise);
  TabularDataset d{Eigen::MatrixXd(n, 2), std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const double t = angle(rng);
    d.X(i, 0) = (label ? 1.0 - std::cos(t) : std::cos(t)) + jitter(rng);
    d.X(i, 1) = (label ? 0.5 - std::sin(t) : std::sin(t)) + jitter(rng);
    (*d.y)[static_cast<std::size_t>(i)] = label;
  }
  return d;
}

// Two Gaussian blobs centred at -gap/2 and +gap/2 along every axis.
inline TabularDataset blobs(int n, int dims, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  TabularDataset d{Eigen::MatrixXd(n, dims), std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    for (int j = 0; j < dims; ++j) d.X(i, j) = g(rng) + (label ? 0.5 : -0.5) * gap;
    (*d.y)[static_cast<std::size_t>(i)] = label;
  }
  return d;
}

inline double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == predicted[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace clonewatch::testdata
