#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <random>
#include <string>
#include <string_view>

#include "gazechain/bytes.hpp"
#include "gazechain/error.hpp"
#include "gazechain/gaze_data.hpp"
#include "gazechain/sha3.hpp"

namespace gazechain {

/// Format tag at the head of every serialized recording. Bump on any layout change.
inline constexpr std::array<std::uint8_t, 8> kRecordingMagic = {'G', 'Z', 'R', 'E', 'C', '0', '1', '\0'};

// Layout after the magic, all little-endian:
//   session_id[16] | alias_len u32 | alias bytes | sample_rate_hz u32 | count u64 |
//   count x (timestamp_us i64 | dir x f64 | dir y f64 | dir z f64 | confidence f64 | is_valid u8)
inline Bytes canonical_serialize(const GazeRecording& recording) {
  if (auto violation = find_invariant_violation(recording); !violation.empty()) {
    throw Error(ErrorKind::Serialization, violation);
  }
  if (recording.subject_alias.size() > UINT32_MAX) throw Error(ErrorKind::Serialization, "alias too long");

  ByteWriter w;
  w.raw(kRecordingMagic);
  w.raw(recording.session_id);
  w.u32(static_cast<std::uint32_t>(recording.subject_alias.size()));
  w.raw(as_bytes(recording.subject_alias));
  w.u32(recording.sample_rate_hz);
  w.u64(recording.samples.size());
  for (const GazeSample& s : recording.samples) {
    w.i64(s.timestamp_us);
    for (double c : s.gaze_dir) w.f64(c);
    w.f64(s.confidence);
    w.u8(s.is_valid ? 1 : 0);
  }
  return std::move(w).take();
}

/// Strict inverse of canonical_serialize: rejects bad magic, truncation,
/// trailing bytes and any recording that breaks the invariants.
inline GazeRecording deserialize_recording(ByteView bytes) {
  ByteReader r(bytes);
  if (r.remaining() < kRecordingMagic.size()) throw Error(ErrorKind::Serialization, "missing recording magic");
  auto magic = r.raw(kRecordingMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kRecordingMagic.begin())) {
    throw Error(ErrorKind::Serialization, "unrecognised recording format");
  }

  GazeRecording rec;
  auto id = r.raw(rec.session_id.size());
  std::copy(id.begin(), id.end(), rec.session_id.begin());
  std::uint32_t alias_len = r.u32();
  auto alias = r.raw(alias_len);
  rec.subject_alias.assign(alias.begin(), alias.end());
  rec.sample_rate_hz = r.u32();
  std::uint64_t count = r.u64();
  constexpr std::size_t kSampleBytes = 8 + 3 * 8 + 8 + 1;
  if (count > r.remaining() / kSampleBytes) throw Error(ErrorKind::Serialization, "sample count exceeds payload");
  rec.samples.resize(count);
  for (GazeSample& s : rec.samples) {
    s.timestamp_us = r.i64();
    for (double& c : s.gaze_dir) c = r.f64();
    s.confidence = r.f64();
    std::uint8_t flag = r.u8();
    if (flag > 1) throw Error(ErrorKind::Serialization, "validity flag must be 0 or 1");
    s.is_valid = flag == 1;
  }
  if (r.remaining() != 0) throw Error(ErrorKind::Serialization, "trailing bytes after recording");
  if (auto violation = find_invariant_violation(rec); !violation.empty()) {
    throw Error(ErrorKind::Serialization, violation);
  }
  return rec;
}

/// 32-byte HMAC key. Its textual representation is always redacted.
class SecretKey {
 public:
  static constexpr std::size_t kSize = 32;

  explicit SecretKey(const FixedBytes<kSize>& bytes) noexcept : bytes_(bytes) {}

  static SecretKey from_bytes(ByteView bytes) {
    if (bytes.size() != kSize) throw Error(ErrorKind::Parameter, "secret key must be exactly 32 bytes");
    FixedBytes<kSize> k{};
    std::copy(bytes.begin(), bytes.end(), k.begin());
    return SecretKey(k);
  }

  static SecretKey from_hex(std::string_view hex) { return from_bytes(gazechain::from_hex(hex)); }

  /// Per-session key, reproducible from the session seed.
  static SecretKey derive_for_session(std::uint64_t seed) {
    ByteWriter w;
    w.raw(as_bytes("gazechain/session-key/v1"));
    w.u64(seed);
    return SecretKey(crypto::sha3_256(w.bytes()));
  }

  static SecretKey random() {
    std::random_device rd;
    FixedBytes<kSize> k{};
    for (auto& b : k) b = static_cast<std::uint8_t>(rd());
    return SecretKey(k);
  }

  ByteView bytes() const noexcept { return bytes_; }
  std::string to_hex() const { return gazechain::to_hex(bytes_); }

  bool operator==(const SecretKey& o) const noexcept { return crypto::constant_time_equal(bytes_, o.bytes_); }

  friend std::ostream& operator<<(std::ostream& os, const SecretKey&) { return os << "SecretKey(<redacted>)"; }

 private:
  FixedBytes<kSize> bytes_;
};

struct AttestationTag {
  static constexpr std::size_t kSize = 64;
  FixedBytes<kSize> bytes{};

  static AttestationTag from_bytes(ByteView raw) {
    if (raw.size() != kSize) throw Error(ErrorKind::Parameter, "attestation tag must be exactly 64 bytes");
    AttestationTag t;
    std::copy(raw.begin(), raw.end(), t.bytes.begin());
    return t;
  }

  static AttestationTag from_hex(std::string_view hex) { return from_bytes(gazechain::from_hex(hex)); }

  /// Lowercase, 128 characters.
  std::string to_hex() const { return gazechain::to_hex(bytes); }

  bool operator==(const AttestationTag&) const = default;
};

inline AttestationTag attest_bytes(ByteView canonical, const SecretKey& key) {
  return AttestationTag{crypto::hmac_sha3_512(key.bytes(), canonical)};
}

inline AttestationTag attest(const GazeRecording& recording, const SecretKey& key) {
  return attest_bytes(canonical_serialize(recording), key);
}

/// Constant-time comparison of the recomputed tag; a recording that cannot be
/// serialized simply fails.
inline bool verify(const GazeRecording& recording, const AttestationTag& tag, const SecretKey& key) {
  Bytes canonical;
  try {
    canonical = canonical_serialize(recording);
  } catch (const Error&) {
    return false;
  }
  return crypto::constant_time_equal(attest_bytes(canonical, key).bytes, tag.bytes);
}

/// The only handle the subject-side application receives: it can compute tags
/// but offers no way to read the key back.
class KeyProvider {
 public:
  explicit KeyProvider(SecretKey key) noexcept : key_(std::move(key)) {}

  AttestationTag attest(const GazeRecording& recording) const { return gazechain::attest(recording, key_); }

 private:
  SecretKey key_;
};

inline void write_recording_file(const std::filesystem::path& path, const GazeRecording& recording) {
  Bytes bytes = canonical_serialize(recording);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Configuration, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace gazechain
