#pragma once

// Test-only oracles. Nothing here calls into the code path it checks.

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "gazechain/gazechain.hpp"

namespace gazechain::test {

inline Bytes openssl_hmac_sha3_512(ByteView key, ByteView message) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  static const std::uint8_t kEmpty = 0;
  if (!HMAC(EVP_sha3_512(), key.empty() ? &kEmpty : key.data(), static_cast<int>(key.size()),
            message.empty() ? &kEmpty : message.data(), message.size(), out.data(), &len)) {
    throw std::runtime_error("OpenSSL HMAC failed");
  }
  out.resize(len);
  return out;
}

inline Bytes openssl_digest(const EVP_MD* md, ByteView message) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  if (!EVP_Digest(message.data(), message.size(), out.data(), &len, md, nullptr)) {
    throw std::runtime_error("OpenSSL digest failed");
  }
  out.resize(len);
  return out;
}

/// Recount of the quality metrics straight from the definition.
inline QualityReport recount_quality(const GazeRecording& r, const QualityThresholds& t) {
  std::vector<double> valid_confidences;
  for (const auto& s : r.samples) {
    if (s.is_valid) valid_confidences.push_back(s.confidence);
  }
  QualityReport q;
  q.sample_count = r.samples.size();
  double denom = r.samples.empty() ? 1.0 : static_cast<double>(r.samples.size());
  q.tracking_ratio = static_cast<double>(valid_confidences.size()) / denom;
  q.mean_confidence = valid_confidences.empty()
                          ? 0.0
                          : std::accumulate(valid_confidences.begin(), valid_confidences.end(), 0.0) /
                                static_cast<double>(valid_confidences.size());
  q.is_reportable = !(q.tracking_ratio < t.min_tracking_ratio) && !(q.mean_confidence < t.min_mean_confidence) &&
                    q.sample_count >= t.min_sample_count;
  return q;
}

struct ReplayResult {
  std::map<Address, Amount> balances;
  Amount burned;
};

/// Sequential replay of a sealed chain: block 0 credits allocations, every
/// later transaction debits value + fee and credits value.
inline ReplayResult replay_chain(std::span<const Block> chain) {
  ReplayResult r;
  for (const Block& b : chain) {
    for (const Transaction& tx : b.transactions) {
      if (b.index != 0) {
        r.balances[tx.from] = r.balances[tx.from] - tx.value - tx.fee;
        r.burned += tx.fee;
      }
      r.balances[tx.to] = r.balances[tx.to] + tx.value;
    }
  }
  return r;
}

/// Random well-formed recording drawn independently of generate_synthetic.
inline GazeRecording random_recording(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  GazeRecording r;
  for (auto& b : r.session_id) b = static_cast<std::uint8_t>(byte(rng));
  std::size_t alias_len = 1 + rng() % 12;
  for (std::size_t i = 0; i < alias_len; ++i) r.subject_alias.push_back(static_cast<char>('a' + rng() % 26));
  r.sample_rate_hz = static_cast<std::uint32_t>(30 + rng() % 500);
  std::int64_t t = static_cast<std::int64_t>(rng() % 1000);
  for (std::size_t i = 0; i < n; ++i) {
    GazeSample s;
    s.timestamp_us = t;
    t += 1 + static_cast<std::int64_t>(rng() % 20000);
    s.is_valid = unit(rng) < 0.8;
    std::array<double, 3> d{normal(rng), normal(rng), normal(rng)};
    double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (s.is_valid) {
      s.gaze_dir = {d[0] / len, d[1] / len, d[2] / len};
    } else {
      s.gaze_dir = {0.0, 0.0, 0.0};
    }
    s.confidence = unit(rng);
    r.samples.push_back(s);
  }
  return r;
}

inline SecretKey random_key(std::mt19937_64& rng) {
  FixedBytes<32> k{};
  for (auto& b : k) b = static_cast<std::uint8_t>(rng());
  return SecretKey(k);
}

}  // namespace gazechain::test
