#pragma once

#include <gmpxx.h>

#include "clonewatch/bytes.hpp"
#include "clonewatch/errors.hpp"

namespace clonewatch::detail {

inline mpz_class from_be(ByteView b) {
  mpz_class v;
  if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return v;
}

/// Fixed-width big-endian; throws if v does not fit.
inline Bytes to_be(const mpz_class& v, std::size_t width) {
  const std::size_t need = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (sgn(v) < 0 || need > width) throw Error("integer does not fit its encoding width");
  Bytes out(width, 0);
  if (sgn(v) != 0) {
    std::size_t written = 0;
    mpz_export(out.data() + (width - need), &written, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

inline std::size_t byte_width(const mpz_class& v) { return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8; }

inline mpz_class hex(const char* s) { return mpz_class(s, 16); }

}  // namespace clonewatch::detail
