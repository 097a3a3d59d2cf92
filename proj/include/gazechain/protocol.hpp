#pragma once

#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazechain/attestation.hpp"
#include "gazechain/escrow.hpp"
#include "gazechain/gaze_data.hpp"
#include "gazechain/ledger.hpp"

namespace gazechain {

// ---------------------------------------------------------------------------
// Tampering

enum class MutationField { SessionId, SubjectAlias, SampleRate, Timestamp, GazeDirection, Confidence, Validity, DropSample };

inline constexpr std::array kAllMutationFields = {
    MutationField::SessionId,     MutationField::SubjectAlias, MutationField::SampleRate, MutationField::Timestamp,
    MutationField::GazeDirection, MutationField::Confidence,   MutationField::Validity,   MutationField::DropSample,
};

constexpr std::string_view to_string(MutationField f) noexcept {
  switch (f) {
    case MutationField::SessionId: return "session_id";
    case MutationField::SubjectAlias: return "subject_alias";
    case MutationField::SampleRate: return "sample_rate_hz";
    case MutationField::Timestamp: return "timestamp_us";
    case MutationField::GazeDirection: return "gaze_dir";
    case MutationField::Confidence: return "confidence";
    case MutationField::Validity: return "is_valid";
    case MutationField::DropSample: return "drop_sample";
  }
  return "?";
}

/// Which field to alter and where; offset selects the byte, character or sample
/// (taken modulo the available count).
struct Mutation {
  MutationField field = MutationField::Confidence;
  std::size_t offset = 0;
};

/// Smallest edit to the chosen field that leaves the recording well-formed, so
/// the tampered file still parses and only the tag can expose it.
inline void apply_mutation(GazeRecording& r, const Mutation& m) {
  const std::size_t n = r.samples.size();
  if (n == 0 && m.field != MutationField::SessionId && m.field != MutationField::SubjectAlias &&
      m.field != MutationField::SampleRate) {
    r.samples.push_back(GazeSample{});
    return;
  }
  const std::size_t k = n == 0 ? 0 : m.offset % n;

  switch (m.field) {
    case MutationField::SessionId:
      r.session_id[m.offset % r.session_id.size()] ^= 0x01;
      break;
    case MutationField::SubjectAlias:
      if (r.subject_alias.empty()) {
        r.subject_alias = "x";
      } else {
        r.subject_alias[m.offset % r.subject_alias.size()] ^= 0x01;
      }
      break;
    case MutationField::SampleRate:
      r.sample_rate_hz = r.sample_rate_hz == UINT32_MAX ? r.sample_rate_hz - 1 : r.sample_rate_hz + 1;
      break;
    case MutationField::Timestamp: {
      bool room_after = k + 1 == n || r.samples[k].timestamp_us + 1 < r.samples[k + 1].timestamp_us;
      if (room_after) {
        r.samples[k].timestamp_us += 1;
      } else {
        for (std::size_t i = k; i < n; ++i) r.samples[i].timestamp_us += 1;
      }
      break;
    }
    case MutationField::GazeDirection: {
      double& c = r.samples[k].gaze_dir[(m.offset / n) % 3];
      c = std::nextafter(c, c < 1.0 ? 2.0 : 0.0);
      break;
    }
    case MutationField::Confidence: {
      double& c = r.samples[k].confidence;
      c = std::nextafter(c, c == 0.5 ? 1.0 : 0.5);
      break;
    }
    case MutationField::Validity: {
      GazeSample& s = r.samples[k];
      s.is_valid = !s.is_valid;
      if (s.is_valid && std::abs(norm(s.gaze_dir) - 1.0) > kUnitNormTolerance) s.gaze_dir = {0.0, 0.0, 1.0};
      break;
    }
    case MutationField::DropSample:
      r.samples.erase(r.samples.begin() + static_cast<std::ptrdiff_t>(k));
      break;
  }
}

// ---------------------------------------------------------------------------
// Actors and configuration

struct SubjectStrategy {
  enum class Kind {
    Honest,
    TamperAfterHash,
    SubmitNoisyData,
    WrongAnchor,
    AbortAfterCreate,
    StallAfterLock,
    DeclineNoisy,  // honest subject whose session failed the gate
  };

  Kind kind = Kind::Honest;
  Mutation mutation{};
  NoiseProfile noisy_profile = kNoisyProfile;

  static SubjectStrategy honest() { return {}; }
  static SubjectStrategy tamper(Mutation m = {}) { return {Kind::TamperAfterHash, m}; }
  static SubjectStrategy submit_noisy() { return {Kind::SubmitNoisyData}; }
  static SubjectStrategy wrong_anchor() { return {Kind::WrongAnchor}; }
  static SubjectStrategy abort_after_create() { return {Kind::AbortAfterCreate}; }
  static SubjectStrategy stall_after_lock() { return {Kind::StallAfterLock}; }
  static SubjectStrategy decline_noisy() { return {Kind::DeclineNoisy}; }

  bool behaves_honestly() const noexcept { return kind == Kind::Honest || kind == Kind::DeclineNoisy; }
};

enum class CollectorPolicy { Honest, NeverConfirm, ConfirmWithoutVerify };

constexpr std::string_view to_string(SubjectStrategy::Kind k) noexcept {
  using K = SubjectStrategy::Kind;
  switch (k) {
    case K::Honest: return "honest";
    case K::TamperAfterHash: return "tamper";
    case K::SubmitNoisyData: return "noisy";
    case K::WrongAnchor: return "wrong-anchor";
    case K::AbortAfterCreate: return "abort";
    case K::StallAfterLock: return "stall";
    case K::DeclineNoisy: return "nosend";
  }
  return "?";
}

constexpr std::string_view to_string(CollectorPolicy p) noexcept {
  switch (p) {
    case CollectorPolicy::Honest: return "honest";
    case CollectorPolicy::NeverConfirm: return "never-confirm";
    case CollectorPolicy::ConfirmWithoutVerify: return "confirm-without-verify";
  }
  return "?";
}

inline constexpr std::array kAllSubjectKinds = {
    SubjectStrategy::Kind::Honest,           SubjectStrategy::Kind::TamperAfterHash,
    SubjectStrategy::Kind::SubmitNoisyData,  SubjectStrategy::Kind::WrongAnchor,
    SubjectStrategy::Kind::AbortAfterCreate, SubjectStrategy::Kind::StallAfterLock,
    SubjectStrategy::Kind::DeclineNoisy,
};

inline constexpr std::array kAllCollectorPolicies = {
    CollectorPolicy::Honest,
    CollectorPolicy::NeverConfirm,
    CollectorPolicy::ConfirmWithoutVerify,
};

inline std::optional<SubjectStrategy::Kind> parse_subject_kind(std::string_view name) {
  for (auto k : kAllSubjectKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

inline std::optional<CollectorPolicy> parse_collector_policy(std::string_view name) {
  for (auto p : kAllCollectorPolicies) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

struct SessionConfig {
  Amount compensation_x = Amount::parse_eth("0.025");
  Amount fee;
  QualityThresholds thresholds;
  std::uint64_t seed = 42;
  std::size_t n_samples = 1000;
  NoiseProfile noise_profile;
  Amount initial_balance = Amount::eth(1);

  void validate() const {
    if (compensation_x <= Amount{}) throw Error(ErrorKind::Parameter, "compensation X must be positive");
    if (fee < Amount{}) throw Error(ErrorKind::Parameter, "fee must be non-negative");
    if (initial_balance < Amount{}) throw Error(ErrorKind::Parameter, "initial balance must be non-negative");
    thresholds.validate();
    noise_profile.validate();
  }
};

inline const Address& subject_address() {
  static const Address a = Address::from_seed("gazechain/subject");
  return a;
}

inline const Address& collector_address() {
  static const Address a = Address::from_seed("gazechain/collector");
  return a;
}

// ---------------------------------------------------------------------------
// Step 4: anchoring

/// Self-transaction carrying the tag in input_data; submitted and sealed.
inline Hash32 anchor_tag(Ledger& ledger, const Address& subject, const AttestationTag& tag, Amount fee) {
  Hash32 h = ledger.submit_transaction(
      ledger.build(subject, subject, Amount{}, fee, Bytes(tag.bytes.begin(), tag.bytes.end())));
  ledger.seal_block();
  return h;
}

// ---------------------------------------------------------------------------
// Step 5: direct channel

struct Delivery {
  Bytes recording_file;
  Hash32 anchor_tx_hash{};
};

struct DeliveryReceipt {
  std::uint64_t bytes_sent = 0;
  Hash32 content_digest{};
};

/// Reliable, confidential point-to-point link between subject and collector.
class DirectChannel {
 public:
  DeliveryReceipt send(const GazeRecording& recording, const Hash32& anchor_tx_hash) {
    if (closed_) throw Error(ErrorKind::Delivery, "channel closed");
    Delivery d{canonical_serialize(recording), anchor_tx_hash};
    DeliveryReceipt receipt{d.recording_file.size(), crypto::sha3_256(d.recording_file)};
    queue_.push_back(std::move(d));
    return receipt;
  }

  std::optional<Delivery> receive() {
    if (queue_.empty()) return std::nullopt;
    Delivery d = std::move(queue_.front());
    queue_.pop_front();
    return d;
  }

  void close() noexcept { closed_ = true; }
  bool is_closed() const noexcept { return closed_; }

 private:
  std::deque<Delivery> queue_;
  bool closed_ = false;
};

inline DeliveryReceipt deliver_data(DirectChannel& channel, const GazeRecording& recording, const Hash32& anchor_tx_hash) {
  return channel.send(recording, anchor_tx_hash);
}

// ---------------------------------------------------------------------------
// Step 6: collector-side verification

enum class VerificationVerdict { Pass, Fail, NotPerformed };
enum class QualityVerdict { Reportable, Rejected };

constexpr std::string_view to_string(VerificationVerdict v) noexcept {
  switch (v) {
    case VerificationVerdict::Pass: return "Pass";
    case VerificationVerdict::Fail: return "Fail";
    case VerificationVerdict::NotPerformed: return "NotPerformed";
  }
  return "?";
}

constexpr std::string_view to_string(QualityVerdict v) noexcept {
  return v == QualityVerdict::Reportable ? "Reportable" : "Rejected";
}

struct VerificationResult {
  VerificationVerdict verdict = VerificationVerdict::Fail;
  std::string reason;
};

/// Checks a received recording against the tag stored in an anchor transaction,
/// then re-runs the quality gate.
inline VerificationResult check_against_anchor(const Transaction& anchor, const GazeRecording& received,
                                               const SecretKey& key, const QualityThresholds& thresholds,
                                               const std::optional<Address>& expected_subject = std::nullopt) {
  if (!anchor.is_self_transaction()) return {VerificationVerdict::Fail, "anchor is not a self-transaction"};
  if (expected_subject && anchor.from != *expected_subject) {
    return {VerificationVerdict::Fail, "anchor was not sent by the subject"};
  }
  if (anchor.input_data.size() != AttestationTag::kSize) {
    return {VerificationVerdict::Fail, "anchor input_data is not a 64-byte tag"};
  }
  if (!verify(received, AttestationTag::from_bytes(anchor.input_data), key)) {
    return {VerificationVerdict::Fail, "recording does not match the anchored tag"};
  }
  QualityReport q = validate_quality(received, thresholds);
  if (!q.is_reportable) return {VerificationVerdict::Fail, "recording fails the quality gate"};
  return {VerificationVerdict::Pass, "recording matches anchored tag and passes the quality gate"};
}

inline VerificationResult collector_verify(const Ledger& ledger, const GazeRecording& received, const Hash32& anchor_tx_hash,
                                           const SecretKey& key, const QualityThresholds& thresholds,
                                           const std::optional<Address>& expected_subject = std::nullopt) {
  try {
    return check_against_anchor(ledger.get_transaction(anchor_tx_hash), received, key, thresholds, expected_subject);
  } catch (const Error& e) {
    return {VerificationVerdict::Fail, e.what()};
  }
}

/// Variant for raw received bytes: anything that does not parse fails.
inline VerificationResult collector_verify(const Ledger& ledger, ByteView received_file, const Hash32& anchor_tx_hash,
                                           const SecretKey& key, const QualityThresholds& thresholds,
                                           const std::optional<Address>& expected_subject = std::nullopt) {
  GazeRecording rec;
  try {
    rec = deserialize_recording(received_file);
  } catch (const Error& e) {
    return {VerificationVerdict::Fail, e.what()};
  }
  return collector_verify(ledger, rec, anchor_tx_hash, key, thresholds, expected_subject);
}

// ---------------------------------------------------------------------------
// Session

struct StepRecord {
  int step = 0;
  std::string description;
  std::optional<std::uint64_t> block_index;
};

struct SessionOutcome {
  std::optional<EscrowState> terminal_contract_state;  // nullopt: contract never created
  VerificationVerdict verification_verdict = VerificationVerdict::NotPerformed;
  std::string verification_reason;
  QualityVerdict quality_verdict = QualityVerdict::Rejected;
  QualityReport quality;
  Address subject;
  Address collector;
  std::map<Address, Amount> final_balances;
  Amount subject_net;
  Amount collector_net;
  std::shared_ptr<const Ledger> ledger;
  std::optional<EscrowContract> contract;
  std::optional<Hash32> anchor_tx_hash;
  std::optional<std::uint64_t> anchor_block;
  std::optional<DeliveryReceipt> receipt;
  Bytes delivered_file;  // what the collector received, empty if nothing arrived
  bool stalled = false;
  std::string failure;
  std::vector<StepRecord> steps;
};

namespace detail {

inline AttestationTag forged_tag(std::uint64_t seed) {
  ByteWriter w;
  w.raw(as_bytes("gazechain/forged-tag"));
  w.u64(seed);
  return AttestationTag{crypto::sha3_512(w.bytes())};
}

}  // namespace detail

/// Runs the six steps between one subject and one collector on a fresh ledger.
/// Never throws for protocol-level failures; they are recorded in the outcome.
inline SessionOutcome run_session(const SessionConfig& config, const SubjectStrategy& strategy, CollectorPolicy policy) {
  config.validate();
  using Kind = SubjectStrategy::Kind;

  SessionOutcome out;
  out.subject = subject_address();
  out.collector = collector_address();
  auto ledger = std::make_shared<Ledger>(
      Ledger::genesis({{out.subject, config.initial_balance}, {out.collector, config.initial_balance}}));

  auto record = [&](int step, std::string text, bool on_chain) {
    std::optional<std::uint64_t> block;
    if (on_chain) block = ledger->chain().back().index;
    out.steps.push_back({step, std::move(text), block});
  };

  // The collector keeps the key; the subject's application only gets an attesting handle.
  const SecretKey collector_key = SecretKey::derive_for_session(config.seed);
  const KeyProvider application(collector_key);
  const Amount two_x = 2 * config.compensation_x;
  std::optional<EscrowContract> contract;

  auto execute = [&] {
    // (1) experiment and quality gate
    const bool noisy = strategy.kind == Kind::SubmitNoisyData || strategy.kind == Kind::DeclineNoisy;
    GazeRecording recording =
        generate_synthetic(config.seed, config.n_samples, noisy ? strategy.noisy_profile : config.noise_profile);
    out.quality = validate_quality(recording, config.thresholds);
    out.quality_verdict = out.quality.is_reportable ? QualityVerdict::Reportable : QualityVerdict::Rejected;
    if (!out.quality.is_reportable && strategy.kind != Kind::SubmitNoisyData) {
      record(1, "recording rejected by quality gate; subject does not report", false);
      return;
    }
    record(1, out.quality.is_reportable ? "recording reportable" : "quality gate bypassed", false);
    const AttestationTag tag = application.attest(recording);
    record(1, "attestation tag computed", false);

    // (2) subject opens the escrow with 2X
    contract = EscrowContract::create(*ledger, out.subject, two_x, config.fee);
    ledger->seal_block();
    record(2, "escrow created, subject staked 2X", true);

    if (strategy.kind == Kind::AbortAfterCreate) {
      contract->abort(*ledger, out.subject, config.fee);
      ledger->seal_block();
      record(2, "subject aborted before the collector joined", true);
      return;
    }

    // (3) collector joins with 2X; the contract address came over the direct channel
    contract->confirm_collect(*ledger, out.collector, two_x, config.fee);
    ledger->seal_block();
    record(3, "collector staked 2X, contract locked", true);

    if (strategy.kind == Kind::StallAfterLock) {
      out.stalled = true;
      record(4, "subject stalled after lock", false);
      return;
    }

    // (4) anchor the tag
    const AttestationTag anchored = strategy.kind == Kind::WrongAnchor ? detail::forged_tag(config.seed) : tag;
    out.anchor_tx_hash = anchor_tag(*ledger, out.subject, anchored, config.fee);
    out.anchor_block = ledger->block_of(*out.anchor_tx_hash);
    record(4, "tag anchored in self-transaction", true);

    // (5) direct transfer of data and anchor hash
    DirectChannel channel;
    GazeRecording sent = recording;
    if (strategy.kind == Kind::TamperAfterHash) apply_mutation(sent, strategy.mutation);
    out.receipt = deliver_data(channel, sent, *out.anchor_tx_hash);
    record(5, "recording and anchor hash delivered", false);

    // (6) collector checks and confirms
    std::optional<Delivery> received = channel.receive();
    if (!received) {
      out.stalled = true;
      record(6, "nothing received", false);
      return;
    }
    out.delivered_file = received->recording_file;

    bool confirm = false;
    if (policy == CollectorPolicy::ConfirmWithoutVerify) {
      out.verification_verdict = VerificationVerdict::NotPerformed;
      out.verification_reason = "collector confirmed without checking";
      confirm = true;
    } else {
      VerificationResult v = collector_verify(*ledger, ByteView(received->recording_file), received->anchor_tx_hash,
                                              collector_key, config.thresholds, out.subject);
      out.verification_verdict = v.verdict;
      out.verification_reason = v.reason;
      confirm = policy == CollectorPolicy::Honest && v.verdict == VerificationVerdict::Pass;
    }
    record(6, "collector verification: " + std::string(to_string(out.verification_verdict)), false);

    if (confirm) {
      contract->confirm_data_valid(*ledger, out.collector, config.fee);
      ledger->seal_block();
      record(6, "collector confirmed, contract paid 3X / X", true);
    } else {
      record(6, "collector did not confirm; stakes stay locked", false);
    }
  };

  try {
    execute();
  } catch (const Error& e) {
    out.failure = e.what();
    record(0, std::string("session failed: ") + e.what(), false);
  }

  if (contract) out.terminal_contract_state = contract->state();
  out.contract = contract;
  out.final_balances = ledger->balances();
  out.subject_net = ledger->balance(out.subject) - config.initial_balance;
  out.collector_net = ledger->balance(out.collector) - config.initial_balance;
  out.ledger = std::move(ledger);
  return out;
}

struct MatrixCell {
  SubjectStrategy::Kind strategy;
  CollectorPolicy policy;
  SessionOutcome outcome;
};

/// Every strategy against every policy, in declaration order.
inline std::vector<MatrixCell> run_matrix(const SessionConfig& config) {
  std::vector<MatrixCell> cells;
  for (auto kind : kAllSubjectKinds) {
    SubjectStrategy strategy;
    strategy.kind = kind;
    for (auto policy : kAllCollectorPolicies) {
      cells.push_back({kind, policy, run_session(config, strategy, policy)});
    }
  }
  return cells;
}

}  // namespace gazechain
