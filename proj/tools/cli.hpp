#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gazechain/gazechain.hpp"

namespace gazechain::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFail = 1;  // verify: Fail; run: session failed before a contract existed
inline constexpr int kUsage = 2;
inline constexpr int kQualityRejected = 10;
inline constexpr int kLockedDeadlock = 11;
inline constexpr int kAborted = 12;
inline constexpr int kCompleteUnverified = 13;
}  // namespace exit_code

struct CliConfig {
  std::string compensation_eth = "0.025";
  std::string fee_eth = "0";
  std::uint64_t seed = 42;
  std::size_t samples = 1000;
  double min_tracking_ratio = 0.9;
  double min_confidence = 0.8;
  std::uint64_t min_samples = 100;
  std::string output_dir = ".";

  QualityThresholds thresholds() const {
    QualityThresholds t{min_tracking_ratio, min_confidence, min_samples};
    t.validate();
    return t;
  }

  SessionConfig session() const {
    SessionConfig c;
    c.compensation_x = Amount::parse_eth(compensation_eth);
    c.fee = Amount::parse_eth(fee_eth);
    c.seed = seed;
    c.n_samples = samples;
    c.thresholds = thresholds();
    c.validate();
    return c;
  }
};

inline int exit_code_for(const SessionOutcome& o) {
  if (!o.terminal_contract_state) {
    return o.quality_verdict == QualityVerdict::Rejected && o.failure.empty() ? exit_code::kQualityRejected
                                                                               : exit_code::kFail;
  }
  switch (*o.terminal_contract_state) {
    case EscrowState::Complete:
      return o.verification_verdict == VerificationVerdict::Pass ? exit_code::kOk : exit_code::kCompleteUnverified;
    case EscrowState::Locked: return exit_code::kLockedDeadlock;
    case EscrowState::Aborted: return exit_code::kAborted;
    case EscrowState::Created: return exit_code::kFail;
  }
  return exit_code::kFail;
}

/// Writes `content` as <prefix>-<first 8 hex of SHA3-256(content)><ext> and returns the path.
inline std::filesystem::path write_content_addressed(const std::filesystem::path& dir, std::string_view prefix,
                                                     std::string_view ext, ByteView content) {
  std::filesystem::create_directories(dir);
  Hash32 h = crypto::sha3_256(content);
  auto path = dir / (std::string(prefix) + "-" + to_hex(ByteView(h).first(4)) + std::string(ext));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Configuration, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(content.data()), static_cast<std::streamsize>(content.size()));
  return path;
}

struct WrittenSession {
  std::filesystem::path report;
  std::filesystem::path ledger_dump;
  std::optional<std::filesystem::path> recording;
};

inline WrittenSession write_session_files(const std::filesystem::path& dir, const SessionConfig& config,
                                          const SubjectStrategy& strategy, CollectorPolicy policy,
                                          const SessionOutcome& o) {
  WrittenSession w;
  std::string ledger_text = dump_session_ledger(o);
  w.ledger_dump = write_content_addressed(dir, "ledger", ".json", as_bytes(ledger_text));
  if (!o.delivered_file.empty()) w.recording = write_content_addressed(dir, "recording", ".gzrec", o.delivered_file);

  Json report = outcome_to_json(config, strategy, policy, o);
  report["files"] = Json{{"ledger_dump", w.ledger_dump.filename().string()},
                         {"recording", w.recording ? Json(w.recording->filename().string()) : Json(nullptr)}};
  std::string report_text = report.dump(2) + "\n";
  w.report = write_content_addressed(dir, "report", ".json", as_bytes(report_text));
  return w;
}

inline void add_session_flags(CLI::App& cmd, CliConfig& cfg) {
  cmd.add_option("--x", cfg.compensation_eth, "Compensation X in ETH (decimal, <= 18 fractional digits)")
      ->envname("GAZECHAIN_X");
  cmd.add_option("--fee", cfg.fee_eth, "Flat fee per transaction in ETH")->envname("GAZECHAIN_FEE");
  cmd.add_option("--seed", cfg.seed, "Session seed")->envname("GAZECHAIN_SEED");
  cmd.add_option("--samples", cfg.samples, "Number of synthetic gaze samples")->envname("GAZECHAIN_SAMPLES");
  cmd.add_option("--out", cfg.output_dir, "Output directory for reports")->envname("GAZECHAIN_OUT");
}

inline void add_threshold_flags(CLI::App& cmd, CliConfig& cfg) {
  cmd.add_option("--min-tracking-ratio", cfg.min_tracking_ratio, "Quality gate: minimum tracking ratio")
      ->envname("GAZECHAIN_MIN_TRACKING_RATIO");
  cmd.add_option("--min-confidence", cfg.min_confidence, "Quality gate: minimum mean confidence")
      ->envname("GAZECHAIN_MIN_CONFIDENCE");
  cmd.add_option("--min-samples", cfg.min_samples, "Quality gate: minimum sample count")
      ->envname("GAZECHAIN_MIN_SAMPLES");
}

inline int cmd_run(const CliConfig& cfg, const std::string& strategy_name, const std::string& policy_name,
                   const std::string& mutation_name, std::size_t mutation_offset, std::ostream& out, std::ostream& err) {
  auto kind = parse_subject_kind(strategy_name);
  if (!kind) {
    err << "unknown strategy '" << strategy_name << "'\n";
    return exit_code::kUsage;
  }
  auto policy = parse_collector_policy(policy_name);
  if (!policy) {
    err << "unknown policy '" << policy_name << "'\n";
    return exit_code::kUsage;
  }
  SubjectStrategy strategy;
  strategy.kind = *kind;
  strategy.mutation.offset = mutation_offset;
  bool found = false;
  for (auto f : kAllMutationFields) {
    if (to_string(f) == mutation_name) {
      strategy.mutation.field = f;
      found = true;
    }
  }
  if (!found) {
    err << "unknown mutation field '" << mutation_name << "'\n";
    return exit_code::kUsage;
  }

  SessionConfig config = cfg.session();
  SessionOutcome o = run_session(config, strategy, *policy);
  WrittenSession files = write_session_files(cfg.output_dir, config, strategy, *policy, o);

  // The key goes to the collector's own key file, never into reports or output.
  SecretKey key = SecretKey::derive_for_session(config.seed);
  std::string key_hex = key.to_hex() + "\n";
  auto key_path = write_content_addressed(cfg.output_dir, "collector-key", ".hex", as_bytes(key_hex));

  out << "strategy=" << to_string(strategy.kind) << " policy=" << to_string(*policy) << "\n"
      << "state=" << contract_state_name(o.terminal_contract_state)
      << " verification=" << to_string(o.verification_verdict) << " quality=" << to_string(o.quality_verdict) << "\n"
      << "subject=" << o.final_balances[o.subject].to_eth_string() << " ETH"
      << " collector=" << o.final_balances[o.collector].to_eth_string() << " ETH\n";
  if (o.anchor_tx_hash) out << "anchor_tx=" << to_hex(*o.anchor_tx_hash) << "\n";
  if (!o.failure.empty()) out << "failure=" << o.failure << "\n";
  out << "report=" << files.report.string() << "\n" << "ledger=" << files.ledger_dump.string() << "\n";
  if (files.recording) out << "recording=" << files.recording->string() << "\n";
  out << "collector_key_file=" << key_path.string() << "\n";
  return exit_code_for(o);
}

inline int cmd_matrix(const CliConfig& cfg, std::ostream& out) {
  SessionConfig config = cfg.session();
  std::vector<MatrixCell> cells = run_matrix(config);

  Json rows = Json::array();
  out << std::left << std::setw(14) << "strategy" << std::setw(24) << "policy" << std::setw(12) << "state"
      << std::setw(14) << "verification" << std::setw(24) << "subject_net" << "collector_net\n";
  for (const MatrixCell& cell : cells) {
    SubjectStrategy strategy;
    strategy.kind = cell.strategy;
    WrittenSession files = write_session_files(cfg.output_dir, config, strategy, cell.policy, cell.outcome);
    const SessionOutcome& o = cell.outcome;
    rows.push_back(Json{
        {"strategy", std::string(to_string(cell.strategy))},
        {"policy", std::string(to_string(cell.policy))},
        {"terminal_contract_state", contract_state_name(o.terminal_contract_state)},
        {"verification_verdict", std::string(to_string(o.verification_verdict))},
        {"subject_net", amount_json(o.subject_net)},
        {"collector_net", amount_json(o.collector_net)},
        {"report", files.report.filename().string()},
        {"ledger_dump", files.ledger_dump.filename().string()},
    });
    out << std::setw(14) << to_string(cell.strategy) << std::setw(24) << to_string(cell.policy) << std::setw(12)
        << contract_state_name(o.terminal_contract_state) << std::setw(14) << to_string(o.verification_verdict)
        << std::setw(24) << o.subject_net.to_eth_string() << o.collector_net.to_eth_string() << "\n";
  }
  Json matrix{{"format", "gazechain-matrix/1"},
              {"compensation_x", amount_json(config.compensation_x)},
              {"fee", amount_json(config.fee)},
              {"seed", config.seed},
              {"rows", std::move(rows)}};
  std::string text = matrix.dump(2) + "\n";
  auto path = write_content_addressed(cfg.output_dir, "matrix", ".json", as_bytes(text));
  out << "matrix=" << path.string() << "\n";
  return exit_code::kOk;
}

inline int cmd_verify(const std::string& recording_path, const std::string& dump_path, const std::string& tx_hex,
                      const std::string& key_hex, const QualityThresholds& thresholds, std::ostream& out,
                      std::ostream& err) {
  Bytes recording_file;
  LedgerDump dump;
  Hash32 tx_hash{};
  std::optional<SecretKey> key;
  try {
    recording_file = read_file_bytes(recording_path);
    Bytes dump_bytes = read_file_bytes(dump_path);
    dump = load_ledger_dump(std::string_view(reinterpret_cast<const char*>(dump_bytes.data()), dump_bytes.size()));
    tx_hash = fixed_from_hex<32>(tx_hex);
    key = SecretKey::from_hex(key_hex);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code::kUsage;
  }

  const Transaction* anchor = find_transaction(dump.chain, tx_hash);
  if (!anchor) {
    err << "transaction " << to_hex(tx_hash) << " not present in ledger dump\n";
    return exit_code::kUsage;
  }
  if (!verify_chain(dump.chain)) {
    out << "FAIL: ledger dump does not verify as a hash chain\n";
    return exit_code::kFail;
  }

  GazeRecording received;
  try {
    received = deserialize_recording(recording_file);
  } catch (const Error& e) {
    out << "FAIL: " << e.what() << "\n";
    return exit_code::kFail;
  }
  VerificationResult v = check_against_anchor(*anchor, received, *key, thresholds);
  out << (v.verdict == VerificationVerdict::Pass ? "PASS: " : "FAIL: ") << v.reason << "\n";
  return v.verdict == VerificationVerdict::Pass ? exit_code::kOk : exit_code::kFail;
}

inline int cmd_ledger(const std::string& action, const std::string& dump_path, std::ostream& out, std::ostream& err) {
  LedgerDump dump;
  try {
    Bytes bytes = read_file_bytes(dump_path);
    dump = load_ledger_dump(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code::kUsage;
  }
  if (action == "dump") {
    out << render_chain_text(dump.chain);
    for (const auto& [addr, amount] : dump.balances) {
      out << "balance " << addr.to_hex() << " " << amount.to_eth_string() << " ETH\n";
    }
    for (const Json& c : dump.contracts) {
      out << "contract " << c.at("address").get<std::string>() << " state=" << c.at("state").get<std::string>()
          << " X=" << Amount::parse_units(c.at("compensation_x").get<std::string>()).to_eth_string() << " ETH\n";
    }
    return exit_code::kOk;
  }
  bool ok = verify_chain(dump.chain);
  out << (ok ? "chain OK (" : "chain BROKEN (") << dump.chain.size() << " blocks)\n";
  return ok ? exit_code::kOk : exit_code::kFail;
}

inline int cmd_export(const std::string& recording_path, std::ostream& out, std::ostream& err) {
  try {
    out << export_text(deserialize_recording(read_file_bytes(recording_path)));
    return exit_code::kOk;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code::kUsage;
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Simulated escrow protocol for remote eye-tracking data collection"};
  app.require_subcommand(1);

  CliConfig cfg;
  std::string strategy = "honest";
  std::string policy = "honest";
  std::string mutation = "confidence";
  std::size_t mutation_offset = 0;

  auto* run = app.add_subcommand("run", "Run one session and write report, ledger dump and recording");
  add_session_flags(*run, cfg);
  add_threshold_flags(*run, cfg);
  run->add_option("--strategy", strategy,
                  "Subject strategy: honest, tamper, noisy, wrong-anchor, abort, stall, nosend")
      ->envname("GAZECHAIN_STRATEGY");
  run->add_option("--policy", policy, "Collector policy: honest, never-confirm, confirm-without-verify")
      ->envname("GAZECHAIN_POLICY");
  run->add_option("--mutation", mutation, "Field altered by the tamper strategy")->envname("GAZECHAIN_MUTATION");
  run->add_option("--mutation-offset", mutation_offset, "Sample / byte index for the mutation");

  auto* matrix = app.add_subcommand("matrix", "Run every strategy x policy cell");
  add_session_flags(*matrix, cfg);
  add_threshold_flags(*matrix, cfg);

  std::string recording_path, dump_path, tx_hex, key_hex;
  auto* verify = app.add_subcommand("verify", "Check a recording against an anchored tag in a ledger dump");
  verify->add_option("recording", recording_path, "Recording file (.gzrec)")->required();
  verify->add_option("ledger_dump", dump_path, "Ledger dump JSON")->required();
  verify->add_option("tx_hash", tx_hex, "Anchor transaction hash (hex)")->required();
  verify->add_option("key", key_hex, "Collector secret key (hex)")->required();
  add_threshold_flags(*verify, cfg);

  auto* ledger = app.add_subcommand("ledger", "Inspect a ledger dump");
  ledger->require_subcommand(1);
  std::string ledger_file;
  auto* ledger_dump = ledger->add_subcommand("dump", "Print the chain as text");
  ledger_dump->add_option("file", ledger_file)->required();
  auto* ledger_verify = ledger->add_subcommand("verify", "Recompute hashes and linkage");
  ledger_verify->add_option("file", ledger_file)->required();

  auto* recording = app.add_subcommand("recording", "Inspect a recording file");
  recording->require_subcommand(1);
  std::string export_file;
  recording->add_subcommand("export", "Line-delimited debug text")->add_option("file", export_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_code::kOk : exit_code::kUsage;
  }

  try {
    if (*run) return cmd_run(cfg, strategy, policy, mutation, mutation_offset, out, err);
    if (*matrix) return cmd_matrix(cfg, out);
    if (*verify) return cmd_verify(recording_path, dump_path, tx_hex, key_hex, cfg.thresholds(), out, err);
    if (*ledger) return cmd_ledger(*ledger_dump ? "dump" : "verify", ledger_file, out, err);
    if (*recording) return cmd_export(export_file, out, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code::kUsage;
  }
  return exit_code::kUsage;
}

}  // namespace gazechain::cli
