#pragma once

#include <cstdint>
#include <span>

#include "clonewatch/bytes.hpp"
#include "clonewatch/rng.hpp"

namespace clonewatch {

/// Byte source for key material, nonces and challenges.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
  Bytes bytes(std::size_t n) {
    Bytes b(n);
    fill(b);
    return b;
  }
};

/// OpenSSL's CSPRNG.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible stream for tests and simulations. Not for real keys.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : rng_(seed) {}
  void fill(std::span<std::uint8_t> out) override {
    for (auto& b : out) b = static_cast<std::uint8_t>(rng_() >> 56);
  }

 private:
  Rng rng_;
};

}  // namespace clonewatch
