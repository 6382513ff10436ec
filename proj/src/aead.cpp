#include "clonewatch/aead.hpp"

#include <openssl/evp.h>

#include <memory>

#include "clonewatch/errors.hpp"

namespace clonewatch::aead {
namespace {

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

CipherCtx new_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
  return ctx;
}

void check_key(ByteView key) {
  if (key.size() != kKeyBytes) throw ValidationError("session key must be 128 bits");
}

void ok(int rc, const char* what) {
  if (rc != 1) throw Error(std::string("AES-GCM: ") + what + " failed");
}

}  // namespace

Bytes wrap(ByteView key, ByteView payload, RandomSource& rng) {
  check_key(key);
  Bytes out = rng.bytes(kNonceBytes);
  out.resize(kNonceBytes + payload.size() + kTagBytes);
  auto ctx = new_ctx();
  ok(EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, nullptr, nullptr), "init");
  ok(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(kNonceBytes), nullptr), "ivlen");
  ok(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), out.data()), "key");
  int len = 0;
  if (!payload.empty())
    ok(EVP_EncryptUpdate(ctx.get(), out.data() + kNonceBytes, &len, payload.data(), static_cast<int>(payload.size())),
       "update");
  int tail = 0;
  ok(EVP_EncryptFinal_ex(ctx.get(), out.data() + kNonceBytes + len, &tail), "final");
  ok(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(kTagBytes),
                         out.data() + kNonceBytes + payload.size()),
     "tag");
  return out;
}

Bytes unwrap(ByteView key, ByteView wrapped) {
  check_key(key);
  if (wrapped.size() < kNonceBytes + kTagBytes) throw DecodeError("wrapped key too short");
  const std::size_t body = wrapped.size() - kNonceBytes - kTagBytes;
  Bytes out(body);
  auto ctx = new_ctx();
  ok(EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, nullptr, nullptr), "init");
  ok(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(kNonceBytes), nullptr), "ivlen");
  ok(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), wrapped.data()), "key");
  int len = 0;
  if (body)
    ok(EVP_DecryptUpdate(ctx.get(), out.data(), &len, wrapped.data() + kNonceBytes, static_cast<int>(body)), "update");
  Bytes tag(wrapped.end() - static_cast<std::ptrdiff_t>(kTagBytes), wrapped.end());
  ok(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(kTagBytes), tag.data()), "set tag");
  int tail = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &tail) != 1)
    throw AuthenticationError("session-key unwrap failed authentication");
  return out;
}

}  // namespace clonewatch::aead
