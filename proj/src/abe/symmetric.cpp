#include "privlocker/abe/symmetric.hpp"

#include <sodium.h>

#include "privlocker/error.hpp"

namespace privlocker::abe::symmetric {

static_assert(kNonceSize == crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);
static_assert(kTagSize == crypto_aead_xchacha20poly1305_ietf_ABYTES);

Key derive_key(ByteView encoded_element) {
  ensure_sodium();
  Key key{};
  crypto_generichash(key.data(), key.size(), encoded_element.data(), encoded_element.size(),
                     reinterpret_cast<const unsigned char*>(kKdfTag.data()), kKdfTag.size());
  return key;
}

Bytes seal(const Key& key, ByteView plaintext, RandomSource& rng) {
  ensure_sodium();
  Bytes out(kNonceSize + plaintext.size() + kTagSize);
  rng.fill(std::span(out.data(), kNonceSize));
  unsigned long long written = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(
      out.data() + kNonceSize, &written, plaintext.data(), plaintext.size(),
      reinterpret_cast<const unsigned char*>(kPayloadAd.data()), kPayloadAd.size(), nullptr, out.data(),
      key.data());
  out.resize(kNonceSize + written);
  return out;
}

Bytes open(const Key& key, ByteView sealed) {
  ensure_sodium();
  if (sealed.size() < kNonceSize + kTagSize) {
    throw Error(ErrorCode::authentication_failed, "sealed payload too short");
  }
  Bytes out(sealed.size() - kNonceSize - kTagSize);
  unsigned long long written = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(
          out.data(), &written, nullptr, sealed.data() + kNonceSize, sealed.size() - kNonceSize,
          reinterpret_cast<const unsigned char*>(kPayloadAd.data()), kPayloadAd.size(), sealed.data(),
          key.data()) != 0) {
    throw Error(ErrorCode::authentication_failed, "document authentication failed");
  }
  out.resize(written);
  return out;
}

}  // namespace privlocker::abe::symmetric
