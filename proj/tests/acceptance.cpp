// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "vectors.hpp"

namespace fs = std::filesystem;
using namespace gazechain;
using Kind = SubjectStrategy::Kind;

namespace {

// Pinned sizes and tolerances.
constexpr auto kMaxHonestRuntime = std::chrono::milliseconds(1000);
constexpr int kFeePairs = 20;
constexpr int kTamperRecordings = 1000;
constexpr std::size_t kMinHmacVectors = 10;
constexpr int kRandomHmacChecks = 200;
constexpr int kChains = 500;
constexpr int kQualityRecordings = 1000;

struct Result {
  bool ok = true;
  std::string detail;
};

struct Failures {
  int count = 0;
  std::string first;
  void add(const std::string& what) {
    if (count++ == 0) first = what;
  }
  Result result(std::string summary) const {
    if (count == 0) return {true, std::move(summary)};
    return {false, summary + "; " + std::to_string(count) + " failure(s), first: " + first};
  }
};

Amount subject_fees_paid(const SessionOutcome& o) {
  Amount f;
  for (const Block& b : o.ledger->chain().subspan(1)) {
    for (const Transaction& tx : b.transactions) {
      if (tx.from == o.subject) f += tx.fee;
    }
  }
  return f;
}

std::string cell_name(Kind k, CollectorPolicy p) {
  return std::string(to_string(k)) + "/" + std::string(to_string(p));
}

// 1 -------------------------------------------------------------------------
Result reference_balances() {
  const auto start = std::chrono::steady_clock::now();
  SessionConfig cfg;
  cfg.compensation_x = Amount::parse_eth("0.025");
  cfg.fee = Amount{};
  auto o = run_session(cfg, SubjectStrategy::honest(), CollectorPolicy::Honest);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const auto ms = std::chrono::duration<double, std::milli>(elapsed).count();

  const Amount s = o.ledger->balance(o.subject);
  const Amount c = o.ledger->balance(o.collector);
  std::ostringstream d;
  d << "state=" << contract_state_name(o.terminal_contract_state) << " subject=" << s.to_eth_string()
    << " collector=" << c.to_eth_string() << " runtime=" << ms << "ms";
  bool ok = o.terminal_contract_state == EscrowState::Complete && s == Amount::parse_eth("1.025") &&
            c == Amount::parse_eth("0.975") && elapsed < kMaxHonestRuntime;
  return {ok, d.str()};
}

// 2 -------------------------------------------------------------------------
Result fee_generalisation() {
  std::mt19937_64 rng(2002);
  Failures f;
  for (int i = 0; i < kFeePairs; ++i) {
    SessionConfig cfg;
    cfg.compensation_x = Amount::units(1 + static_cast<Amount::Rep>(rng() % 200'000'000'000'000'000ULL));
    cfg.fee = Amount::units(static_cast<Amount::Rep>(rng() % 1'000'000'000'000'000ULL));
    cfg.seed = rng();
    auto o = run_session(cfg, SubjectStrategy::honest(), CollectorPolicy::Honest);
    auto replay = test::replay_chain(o.ledger->chain());
    const Amount one = Amount::eth(1);
    const std::string tag = "X=" + cfg.compensation_x.to_eth_string() + " fee=" + cfg.fee.to_eth_string();
    if (o.terminal_contract_state != EscrowState::Complete) f.add(tag + " not Complete");
    if (replay.balances[o.subject] != one + cfg.compensation_x - 2 * cfg.fee) f.add(tag + " subject");
    if (replay.balances[o.collector] != one - cfg.compensation_x - 2 * cfg.fee) f.add(tag + " collector");
    if (replay.balances != o.ledger->balances()) f.add(tag + " ledger differs from replay");
  }
  return f.result(std::to_string(kFeePairs) + " (X, fee) pairs replayed");
}

// 3 -------------------------------------------------------------------------
Result incentive_matrix() {
  Failures f;
  const Amount fees[] = {Amount{}, Amount::parse_eth("0.0004")};
  const std::vector<CollectorPolicy> checking{CollectorPolicy::Honest, CollectorPolicy::NeverConfirm};
  const std::vector<Kind> cheats{Kind::TamperAfterHash, Kind::WrongAnchor, Kind::SubmitNoisyData};
  int cells = 0;
  int lazy_paid = 0;

  for (Amount fee : fees) {
    SessionConfig cfg;
    cfg.fee = fee;
    const Amount x = cfg.compensation_x;
    for (const MatrixCell& m : run_matrix(cfg)) {
      const auto& o = m.outcome;
      const std::string where = cell_name(m.strategy, m.policy) + " fee=" + fee.to_eth_string();
      const bool is_cheat = std::find(cheats.begin(), cheats.end(), m.strategy) != cheats.end();

      if (m.policy == CollectorPolicy::ConfirmWithoutVerify) {
        // A collector that skips verification pays deviators without a check.
        if (is_cheat) {
          if (o.terminal_contract_state != EscrowState::Complete ||
              o.verification_verdict != VerificationVerdict::NotPerformed || o.subject_net != x - 2 * fee) {
            f.add(where + " lazy-collector outcome unexpected");
          }
          ++lazy_paid;
        }
        continue;
      }
      ++cells;
      if (o.subject_net > Amount{} && m.strategy != Kind::Honest) f.add(where + " deviator profits");
      if (is_cheat) {
        const Amount paid = subject_fees_paid(o);
        if (o.terminal_contract_state != EscrowState::Locked) f.add(where + " not Locked");
        if (o.subject_net != -(2 * x) - paid) f.add(where + " net != -2X - fees");
        if (paid != 2 * fee) f.add(where + " fee count");
      }
    }
    // Each mutation class as its own tampering strategy.
    for (auto field : kAllMutationFields) {
      for (auto p : checking) {
        auto o = run_session(cfg, SubjectStrategy::tamper({field, 5}), p);
        ++cells;
        if (o.terminal_contract_state != EscrowState::Locked ||
            o.subject_net != -(2 * x) - subject_fees_paid(o)) {
          f.add("tamper:" + std::string(to_string(field)) + "/" + std::string(to_string(p)));
        }
      }
    }
  }
  return f.result(std::to_string(cells) + " cells under checking collectors; confirm-without-verify paid " +
                  std::to_string(lazy_paid) + " deviating cells with verdict NotPerformed");
}

// 4 -------------------------------------------------------------------------
Result tamper_detection() {
  std::mt19937_64 rng(4004);
  Failures f;
  int tampered = 0;
  int controls = 0;
  const QualityThresholds permissive{0.0, 0.0, 1};
  for (int i = 0; i < kTamperRecordings; ++i) {
    // Alternate generator output under the default gate with independently drawn recordings.
    GazeRecording r;
    QualityThresholds t;
    if (i % 2 == 0) {
      r = generate_synthetic(rng(), 200 + rng() % 200, {});
    } else {
      r = test::random_recording(rng, 1 + rng() % 200);
      t = permissive;
    }
    const SecretKey key = test::random_key(rng);
    Ledger ledger = Ledger::genesis({{subject_address(), Amount::eth(1)}});
    const Hash32 anchor = anchor_tag(ledger, subject_address(), attest(r, key), Amount{});

    ++controls;
    auto control = collector_verify(ledger, ByteView(canonical_serialize(r)), anchor, key, t, subject_address());
    if (control.verdict != VerificationVerdict::Pass) f.add("control " + std::to_string(i) + ": " + control.reason);

    for (auto field : kAllMutationFields) {
      GazeRecording m = r;
      apply_mutation(m, {field, static_cast<std::size_t>(rng())});
      ++tampered;
      auto v = collector_verify(ledger, ByteView(canonical_serialize(m)), anchor, key, t, subject_address());
      if (v.verdict != VerificationVerdict::Fail) f.add("recording " + std::to_string(i) + " " + std::string(to_string(field)));
    }
  }
  return f.result(std::to_string(tampered) + " mutations over " + std::to_string(kAllMutationFields.size()) +
                  " field classes rejected, " + std::to_string(controls) + " controls accepted");
}

// 5 -------------------------------------------------------------------------
Result hmac_correctness() {
  Failures f;
  std::size_t vectors = 0;
  for (const auto& v : test::kHmacSha3_512Vectors) {
    Bytes key = from_hex(v.key_hex);
    Bytes msg = from_hex(v.message_hex);
    ++vectors;
    if (to_hex(crypto::hmac_sha3_512(key, msg)) != v.tag_hex) f.add("frozen vector " + std::to_string(vectors));
    if (to_hex(test::openssl_hmac_sha3_512(key, msg)) != v.tag_hex) f.add("OpenSSL disagrees with frozen vector");
  }
  std::mt19937_64 rng(5005);
  for (int i = 0; i < kRandomHmacChecks; ++i) {
    auto r = test::random_recording(rng, rng() % 40);
    auto k = test::random_key(rng);
    if (to_hex(attest(r, k).bytes) != to_hex(test::openssl_hmac_sha3_512(k.bytes(), canonical_serialize(r)))) {
      f.add("random attestation " + std::to_string(i));
    }
  }
  if (vectors < kMinHmacVectors) f.add("too few vectors");
  return f.result(std::to_string(vectors) + " frozen vectors + " + std::to_string(kRandomHmacChecks) +
                  " attestations against OpenSSL, byte-exact");
}

// 6 -------------------------------------------------------------------------
enum class Injection {
  BlockIndex, BlockTimestamp, BlockPrevHash, BlockHash, BlockSwap,
  TxValue, TxFee, TxNonce, TxFrom, TxTo, TxHash, TxValueRehashed, TxDropped, TxDuplicated, InputData,
};
constexpr Injection kAllInjections[] = {
    Injection::BlockIndex, Injection::BlockTimestamp, Injection::BlockPrevHash, Injection::BlockHash,
    Injection::BlockSwap,  Injection::TxValue,        Injection::TxFee,         Injection::TxNonce,
    Injection::TxFrom,     Injection::TxTo,           Injection::TxHash,        Injection::TxValueRehashed,
    Injection::TxDropped,  Injection::TxDuplicated,   Injection::InputData,
};

void inject(std::vector<Block>& chain, Injection what, std::mt19937_64& rng) {
  Block& b = chain[rng() % chain.size()];
  auto pick_tx = [&]() -> Transaction& {
    std::vector<Transaction*> candidates;
    for (Block& blk : chain) {
      for (Transaction& tx : blk.transactions) candidates.push_back(&tx);
    }
    return *candidates[rng() % candidates.size()];
  };
  auto pick_block_with_tx = [&]() -> Block& {
    std::vector<Block*> candidates;
    for (Block& blk : chain) {
      if (!blk.transactions.empty()) candidates.push_back(&blk);
    }
    return *candidates[rng() % candidates.size()];
  };
  switch (what) {
    case Injection::BlockIndex: b.index += 1 + rng() % 5; break;
    case Injection::BlockTimestamp: b.timestamp += 1; break;
    case Injection::BlockPrevHash: b.prev_hash[rng() % 32] ^= 0x80; break;
    case Injection::BlockHash: b.block_hash[rng() % 32] ^= 0x01; break;
    case Injection::BlockSwap: {
      std::size_t i = rng() % (chain.size() - 1);
      std::swap(chain[i], chain[i + 1]);
      break;
    }
    case Injection::TxValue: pick_tx().value += Amount::units(1); break;
    case Injection::TxFee: pick_tx().fee += Amount::units(1); break;
    case Injection::TxNonce: pick_tx().nonce += 1; break;
    case Injection::TxFrom: pick_tx().from.bytes[rng() % 20] ^= 0x04; break;
    case Injection::TxTo: pick_tx().to.bytes[rng() % 20] ^= 0x10; break;
    case Injection::TxHash: pick_tx().tx_hash[rng() % 32] ^= 0x02; break;
    case Injection::TxValueRehashed: {
      Transaction& tx = pick_tx();
      tx.value += Amount::eth(1);
      tx.tx_hash = tx.compute_hash();
      break;
    }
    case Injection::TxDropped: {
      Block& blk = pick_block_with_tx();
      blk.transactions.erase(blk.transactions.begin() + static_cast<std::ptrdiff_t>(rng() % blk.transactions.size()));
      break;
    }
    case Injection::TxDuplicated: {
      Block& blk = pick_block_with_tx();
      blk.transactions.push_back(blk.transactions[rng() % blk.transactions.size()]);
      break;
    }
    case Injection::InputData: {
      std::vector<Transaction*> anchored;
      for (Block& blk : chain) {
        for (Transaction& tx : blk.transactions) {
          if (!tx.input_data.empty()) anchored.push_back(&tx);
        }
      }
      if (anchored.empty()) {
        pick_tx().input_data.push_back(0x00);
      } else {
        Transaction& tx = *anchored[rng() % anchored.size()];
        tx.input_data[rng() % tx.input_data.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
      }
      break;
    }
  }
}

Result ledger_integrity() {
  std::mt19937_64 rng(6006);
  Failures f;
  int injected = 0;
  int detected = 0;
  int seals = 0;
  for (int c = 0; c < kChains; ++c) {
    std::vector<std::pair<Address, Amount>> alloc;
    const std::size_t n_accounts = 2 + rng() % 4;
    Amount total;
    for (std::size_t a = 0; a < n_accounts; ++a) {
      Amount v = Amount::units(static_cast<Amount::Rep>(rng() % 5'000'000'000'000'000'000ULL));
      alloc.emplace_back(Address::from_seed("chain" + std::to_string(c) + "/" + std::to_string(a)), v);
      total += v;
    }
    Ledger l = Ledger::genesis(alloc);
    const std::size_t blocks = 2 + rng() % 8;
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t txs = rng() % 6;
      for (std::size_t t = 0; t < txs; ++t) {
        const Address& from = alloc[rng() % n_accounts].first;
        const Address& to = alloc[rng() % n_accounts].first;
        Amount bal = l.balance(from);
        Amount value = Amount::units(bal.raw() > 0 ? static_cast<Amount::Rep>(rng() % static_cast<std::uint64_t>(bal.raw() / 4 + 1)) : 0);
        Amount fee = Amount::units(static_cast<Amount::Rep>(rng() % 100'000));
        Bytes input;
        if (rng() % 3 == 0) {
          input.resize(64);
          for (auto& x : input) x = static_cast<std::uint8_t>(rng());
        }
        try {
          l.submit_transaction(l.build(from, to, value, fee, input));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Funds) f.add(std::string("unexpected submit error: ") + e.what());
        }
      }
      l.seal_block();
      ++seals;
      Amount sum = l.burned_fees();
      for (const auto& [addr, amount] : l.balances()) sum += amount;
      if (sum != total || !l.conservation_holds()) f.add("conservation broken in chain " + std::to_string(c));
    }
    if (!l.verify_chain()) f.add("honest chain " + std::to_string(c) + " fails verification");

    const std::vector<Block> pristine(l.chain().begin(), l.chain().end());
    for (Injection what : kAllInjections) {
      std::vector<Block> copy = pristine;
      inject(copy, what, rng);
      ++injected;
      if (!verify_chain(copy)) {
        ++detected;
      } else {
        f.add("undetected injection " + std::to_string(static_cast<int>(what)) + " in chain " + std::to_string(c));
      }
    }
  }
  return f.result(std::to_string(detected) + "/" + std::to_string(injected) + " injections detected across " +
                  std::to_string(kChains) + " chains; conservation exact after " + std::to_string(seals) + " seals");
}

// 7 -------------------------------------------------------------------------
Result quality_gate() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Failures f;
  for (int i = 0; i < kQualityRecordings; ++i) {
    GazeRecording r = i % 2 == 0 ? test::random_recording(rng, rng() % 500)
                                 : generate_synthetic(rng(), rng() % 500, {unit(rng), unit(rng), unit(rng) * 0.3});
    QualityThresholds t{unit(rng), unit(rng), 1 + rng() % 400};
    if (!(validate_quality(r, t) == test::recount_quality(r, t))) f.add("recording " + std::to_string(i));
  }
  int rejected_sessions = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const char* fee : {"0", "0.0005"}) {
      SessionConfig cfg;
      cfg.seed = seed;
      cfg.fee = Amount::parse_eth(fee);
      SessionConfig strict = cfg;
      strict.thresholds.min_sample_count = cfg.n_samples + 1;
      for (auto [c, s] : {std::pair{cfg, SubjectStrategy::decline_noisy()}, std::pair{strict, SubjectStrategy::honest()}}) {
        for (auto p : kAllCollectorPolicies) {
          auto o = run_session(c, s, p);
          ++rejected_sessions;
          if (o.quality_verdict != QualityVerdict::Rejected) f.add("session not rejected");
          if (o.ledger->chain().size() != 1 || o.subject_net != Amount{} || o.collector_net != Amount{}) {
            f.add("rejected session moved funds");
          }
        }
      }
    }
  }
  return f.result(std::to_string(kQualityRecordings) + " recordings match the recount; " +
                  std::to_string(rejected_sessions) + " rejected sessions moved nothing");
}

// 8 -------------------------------------------------------------------------
std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    files[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  return files;
}

Result determinism() {
  const fs::path base = fs::temp_directory_path() / "gazechain-acceptance-determinism";
  fs::remove_all(base);
  cli::CliConfig cfg;
  cfg.fee_eth = "0.0003";
  std::ostringstream sink;
  cfg.output_dir = (base / "a").string();
  cli::cmd_matrix(cfg, sink);
  cfg.output_dir = (base / "b").string();
  cli::cmd_matrix(cfg, sink);
  auto a = read_dir(base / "a");
  auto b = read_dir(base / "b");
  fs::remove_all(base);

  std::size_t reports = 0, dumps = 0;
  for (const auto& [name, _] : a) {
    reports += name.starts_with("report-");
    dumps += name.starts_with("ledger-");
  }
  const std::size_t cells = kAllSubjectKinds.size() * kAllCollectorPolicies.size();
  std::string detail = std::to_string(a.size()) + " files (" + std::to_string(reports) + " reports, " +
                       std::to_string(dumps) + " ledger dumps) byte-identical across two runs";
  // Identical cells share content-addressed names, so at least one of each kind is required.
  bool ok = a == b && reports > 0 && dumps > 0 && reports <= cells;
  return {ok, ok ? detail : "run outputs differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"reference balance reproduction", reference_balances},
      {"fee generalisation", fee_generalisation},
      {"incentive-soundness matrix", incentive_matrix},
      {"tamper detection", tamper_detection},
      {"HMAC-SHA3-512 correctness", hmac_correctness},
      {"ledger integrity", ledger_integrity},
      {"quality gate", quality_gate},
      {"matrix determinism", determinism},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += r.ok ? 0 : 1;
    std::cout << (r.ok ? "PASS" : "FAIL") << "  [" << n << "] " << name << ": " << r.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
