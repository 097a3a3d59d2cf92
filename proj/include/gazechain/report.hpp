#pragma once

// Structured-text exports: ledger dumps, session reports and matrix tables.
// Object keys are sorted, so identical inputs give byte-identical output.

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazechain/escrow.hpp"
#include "gazechain/ledger.hpp"
#include "gazechain/protocol.hpp"

namespace gazechain {

using Json = nlohmann::json;

inline constexpr std::string_view kLedgerDumpFormat = "gazechain-ledger-dump/1";
inline constexpr std::string_view kSessionReportFormat = "gazechain-session-report/1";

inline Json contract_to_json(const EscrowContract& c) {
  return Json{
      {"address", c.contract_addr().to_hex()},
      {"state", std::string(to_string(c.state()))},
      {"subject", c.subject().to_hex()},
      {"collector", c.collector() ? Json(c.collector()->to_hex()) : Json(nullptr)},
      {"compensation_x", c.compensation_x().to_units_string()},
      {"staked_subject", c.staked_subject().to_units_string()},
      {"staked_collector", c.staked_collector().to_units_string()},
      {"paid_out", c.paid_out().to_units_string()},
  };
}

inline Json transaction_to_json(const Transaction& tx) {
  return Json{
      {"from", tx.from.to_hex()},   {"to", tx.to.to_hex()},           {"value", tx.value.to_units_string()},
      {"fee", tx.fee.to_units_string()}, {"nonce", tx.nonce},        {"input_data", to_hex(tx.input_data)},
      {"tx_hash", to_hex(tx.tx_hash)},
  };
}

inline Json ledger_to_json(const Ledger& ledger, std::span<const EscrowContract> contracts = {}) {
  Json chain = Json::array();
  for (const Block& b : ledger.chain()) {
    Json txs = Json::array();
    for (const Transaction& tx : b.transactions) txs.push_back(transaction_to_json(tx));
    chain.push_back(Json{
        {"index", b.index},
        {"timestamp", b.timestamp},
        {"prev_hash", to_hex(b.prev_hash)},
        {"block_hash", to_hex(b.block_hash)},
        {"transactions", std::move(txs)},
    });
  }
  Json balances = Json::object();
  for (const auto& [addr, amount] : ledger.balances()) balances[addr.to_hex()] = amount.to_units_string();
  Json contract_list = Json::array();
  for (const EscrowContract& c : contracts) contract_list.push_back(contract_to_json(c));
  return Json{
      {"format", kLedgerDumpFormat},
      {"chain", std::move(chain)},
      {"balances", std::move(balances)},
      {"burned_fees", ledger.burned_fees().to_units_string()},
      {"genesis_total", ledger.genesis_total().to_units_string()},
      {"contracts", std::move(contract_list)},
  };
}

inline std::string dump_ledger(const Ledger& ledger, std::span<const EscrowContract> contracts = {}) {
  return ledger_to_json(ledger, contracts).dump(2) + "\n";
}

/// Chain contents recovered from a dump. Hashes are taken as written, so
/// verify_chain over `chain` audits the dump itself.
struct LedgerDump {
  std::vector<Block> chain;
  std::map<Address, Amount> balances;
  Json contracts;
};

inline LedgerDump load_ledger_dump(std::string_view text) {
  try {
    Json j = Json::parse(text);
    if (j.at("format").get<std::string>() != kLedgerDumpFormat) {
      throw Error(ErrorKind::Parse, "not a ledger dump (format tag mismatch)");
    }
    LedgerDump dump;
    for (const Json& jb : j.at("chain")) {
      Block b;
      b.index = jb.at("index").get<std::uint64_t>();
      b.timestamp = jb.at("timestamp").get<std::uint64_t>();
      b.prev_hash = fixed_from_hex<32>(jb.at("prev_hash").get<std::string>());
      b.block_hash = fixed_from_hex<32>(jb.at("block_hash").get<std::string>());
      for (const Json& jt : jb.at("transactions")) {
        Transaction tx;
        tx.from = Address::from_hex(jt.at("from").get<std::string>());
        tx.to = Address::from_hex(jt.at("to").get<std::string>());
        tx.value = Amount::parse_units(jt.at("value").get<std::string>());
        tx.fee = Amount::parse_units(jt.at("fee").get<std::string>());
        tx.nonce = jt.at("nonce").get<std::uint64_t>();
        tx.input_data = from_hex(jt.at("input_data").get<std::string>());
        tx.tx_hash = fixed_from_hex<32>(jt.at("tx_hash").get<std::string>());
        b.transactions.push_back(std::move(tx));
      }
      dump.chain.push_back(std::move(b));
    }
    for (const auto& [addr, units] : j.at("balances").items()) {
      dump.balances[Address::from_hex(addr)] = Amount::parse_units(units.get<std::string>());
    }
    dump.contracts = j.at("contracts");
    return dump;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed ledger dump: ") + e.what());
  }
}

/// Human-readable rendering of a chain for the terminal.
inline std::string render_chain_text(std::span<const Block> chain) {
  std::ostringstream out;
  for (const Block& b : chain) {
    out << "block " << b.index << "  t=" << b.timestamp << "  hash=" << to_hex(b.block_hash)
        << "\n  prev=" << to_hex(b.prev_hash) << "\n";
    for (const Transaction& tx : b.transactions) {
      out << "  tx " << to_hex(tx.tx_hash) << "\n"
          << "     " << tx.from.to_hex() << " -> " << tx.to.to_hex() << (tx.is_self_transaction() ? " (self)" : "")
          << "\n     value=" << tx.value.to_eth_string() << " ETH fee=" << tx.fee.to_eth_string()
          << " ETH nonce=" << tx.nonce << "\n";
      if (!tx.input_data.empty()) out << "     input=" << to_hex(tx.input_data) << "\n";
    }
  }
  return out.str();
}

inline Json amount_json(Amount a) { return Json{{"units", a.to_units_string()}, {"eth", a.to_eth_string()}}; }

inline std::string contract_state_name(const std::optional<EscrowState>& s) {
  return s ? std::string(to_string(*s)) : "NotCreated";
}

inline Json outcome_to_json(const SessionConfig& config, const SubjectStrategy& strategy, CollectorPolicy policy,
                            const SessionOutcome& o) {
  Json balances = Json::object();
  for (const auto& [addr, amount] : o.final_balances) balances[addr.to_hex()] = amount.to_units_string();
  Json steps = Json::array();
  for (const StepRecord& s : o.steps) {
    steps.push_back(Json{{"step", s.step},
                         {"description", s.description},
                         {"block", s.block_index ? Json(*s.block_index) : Json(nullptr)}});
  }
  return Json{
      {"format", kSessionReportFormat},
      {"config",
       Json{{"compensation_x", amount_json(config.compensation_x)},
            {"fee", amount_json(config.fee)},
            {"initial_balance", amount_json(config.initial_balance)},
            {"seed", config.seed},
            {"n_samples", config.n_samples},
            {"thresholds", Json{{"min_tracking_ratio", config.thresholds.min_tracking_ratio},
                                {"min_mean_confidence", config.thresholds.min_mean_confidence},
                                {"min_sample_count", config.thresholds.min_sample_count}}},
            {"noise_profile", Json{{"valid_fraction", config.noise_profile.valid_fraction},
                                   {"confidence_mean", config.noise_profile.confidence_mean},
                                   {"confidence_spread", config.noise_profile.confidence_spread}}}}},
      {"strategy", std::string(to_string(strategy.kind))},
      {"policy", std::string(to_string(policy))},
      {"terminal_contract_state", contract_state_name(o.terminal_contract_state)},
      {"verification_verdict", std::string(to_string(o.verification_verdict))},
      {"verification_reason", o.verification_reason},
      {"quality_verdict", std::string(to_string(o.quality_verdict))},
      {"quality", Json{{"tracking_ratio", o.quality.tracking_ratio},
                       {"mean_confidence", o.quality.mean_confidence},
                       {"sample_count", o.quality.sample_count},
                       {"is_reportable", o.quality.is_reportable}}},
      {"subject", o.subject.to_hex()},
      {"collector", o.collector.to_hex()},
      {"contract", o.contract ? contract_to_json(*o.contract) : Json(nullptr)},
      {"final_balances", std::move(balances)},
      {"subject_balance", amount_json(o.final_balances.count(o.subject) ? o.final_balances.at(o.subject) : Amount{})},
      {"collector_balance",
       amount_json(o.final_balances.count(o.collector) ? o.final_balances.at(o.collector) : Amount{})},
      {"subject_net", amount_json(o.subject_net)},
      {"collector_net", amount_json(o.collector_net)},
      {"anchor_tx_hash", o.anchor_tx_hash ? Json(to_hex(*o.anchor_tx_hash)) : Json(nullptr)},
      {"anchor_block", o.anchor_block ? Json(*o.anchor_block) : Json(nullptr)},
      {"stalled", o.stalled},
      {"failure", o.failure},
      {"ledger_head", o.ledger ? to_hex(o.ledger->chain().back().block_hash) : std::string()},
      {"steps", std::move(steps)},
  };
}

inline std::string dump_session_ledger(const SessionOutcome& o) {
  std::vector<EscrowContract> contracts;
  if (o.contract) contracts.push_back(*o.contract);
  return dump_ledger(*o.ledger, contracts);
}

}  // namespace gazechain
