#pragma once

#include "clonewatch/bytes.hpp"
#include "clonewatch/randomness.hpp"

namespace clonewatch::aead {

inline constexpr std::size_t kKeyBytes = 16;
inline constexpr std::size_t kNonceBytes = 12;
inline constexpr std::size_t kTagBytes = 16;

/// AES-128-GCM with a fresh random nonce: nonce || ciphertext || tag.
Bytes wrap(ByteView key, ByteView payload, RandomSource& rng);

/// Throws AuthenticationError on a tag mismatch and DecodeError when the
/// input is too short to hold a nonce and tag.
Bytes unwrap(ByteView key, ByteView wrapped);

}  // namespace clonewatch::aead
