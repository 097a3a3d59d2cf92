#pragma once

// FIPS 202 SHA3-256 / SHA3-512 and RFC 2104 HMAC over SHA3-512.

#include <array>
#include <cstdint>
#include <span>

#include "gazechain/bytes.hpp"

namespace gazechain::crypto {

namespace detail {

inline constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// Rotation offsets and lane permutation for the combined rho/pi step, walking
// the 24-cycle that starts at lane (1, 0).
inline constexpr std::array<int, 24> kRho = {1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
                                             27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44};
inline constexpr std::array<int, 24> kPi = {10, 7,  11, 17, 18, 3, 5,  16, 8,  21, 24, 4,
                                            15, 23, 19, 13, 12, 2, 20, 14, 22, 9,  6,  1};

inline constexpr std::uint64_t rotl(std::uint64_t x, int n) noexcept {
  return (x << n) | (x >> (64 - n));
}

inline void keccak_f1600(std::array<std::uint64_t, 25>& a) noexcept {
  for (std::uint64_t rc : kRoundConstants) {
    std::array<std::uint64_t, 5> c{};
    for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x) {
      std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 25; y += 5) a[y + x] ^= d;
    }

    std::uint64_t carried = a[1];
    for (int i = 0; i < 24; ++i) {
      int j = kPi[i];
      std::uint64_t tmp = a[j];
      a[j] = rotl(carried, kRho[i]);
      carried = tmp;
    }

    for (int y = 0; y < 25; y += 5) {
      std::array<std::uint64_t, 5> row{a[y], a[y + 1], a[y + 2], a[y + 3], a[y + 4]};
      for (int x = 0; x < 5; ++x) a[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
    }

    a[0] ^= rc;
  }
}

}  // namespace detail

/// Incremental SHA3 sponge; DigestBytes is 32 or 64.
template <std::size_t DigestBytes>
class Sha3 {
  static_assert(DigestBytes == 32 || DigestBytes == 64);

 public:
  static constexpr std::size_t kDigestSize = DigestBytes;
  static constexpr std::size_t kRate = 200 - 2 * DigestBytes;

  Sha3& update(ByteView data) noexcept {
    for (std::uint8_t byte : data) {
      absorb_byte(byte);
    }
    return *this;
  }

  FixedBytes<DigestBytes> finish() noexcept {
    absorb_byte_no_permute(0x06);
    xor_byte(kRate - 1, 0x80);
    detail::keccak_f1600(state_);
    FixedBytes<DigestBytes> out{};
    for (std::size_t i = 0; i < DigestBytes; ++i) {
      out[i] = static_cast<std::uint8_t>(state_[i / 8] >> (8 * (i % 8)));
    }
    return out;
  }

 private:
  void xor_byte(std::size_t pos, std::uint8_t byte) noexcept {
    state_[pos / 8] ^= static_cast<std::uint64_t>(byte) << (8 * (pos % 8));
  }

  void absorb_byte(std::uint8_t byte) noexcept {
    xor_byte(offset_, byte);
    if (++offset_ == kRate) {
      detail::keccak_f1600(state_);
      offset_ = 0;
    }
  }

  // Padding byte goes in at the current offset, which is always < kRate here.
  void absorb_byte_no_permute(std::uint8_t byte) noexcept { xor_byte(offset_, byte); }

  std::array<std::uint64_t, 25> state_{};
  std::size_t offset_ = 0;
};

using Sha3_256 = Sha3<32>;
using Sha3_512 = Sha3<64>;

inline Hash32 sha3_256(ByteView data) noexcept { return Sha3_256{}.update(data).finish(); }
inline FixedBytes<64> sha3_512(ByteView data) noexcept { return Sha3_512{}.update(data).finish(); }

/// HMAC with the SHA3-512 block size (its 72-byte rate) as the pad length.
inline FixedBytes<64> hmac_sha3_512(ByteView key, ByteView message) noexcept {
  constexpr std::size_t kBlock = Sha3_512::kRate;
  std::array<std::uint8_t, kBlock> block{};
  if (key.size() > kBlock) {
    auto digest = sha3_512(key);
    std::copy(digest.begin(), digest.end(), block.begin());
  } else {
    std::copy(key.begin(), key.end(), block.begin());
  }

  std::array<std::uint8_t, kBlock> ipad{};
  std::array<std::uint8_t, kBlock> opad{};
  for (std::size_t i = 0; i < kBlock; ++i) {
    ipad[i] = block[i] ^ 0x36;
    opad[i] = block[i] ^ 0x5c;
  }

  auto inner = Sha3_512{}.update(ipad).update(message).finish();
  return Sha3_512{}.update(opad).update(inner).finish();
}

/// Examines every byte regardless of where the first difference is.
inline bool constant_time_equal(ByteView a, ByteView b) noexcept {
  if (a.size() != b.size()) return false;
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<std::uint8_t>(a[i] ^ b[i]);
  return diff == 0;
}

}  // namespace gazechain::crypto
