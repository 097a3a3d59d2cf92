#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gazechain/amount.hpp"
#include "gazechain/bytes.hpp"
#include "gazechain/error.hpp"
#include "gazechain/sha3.hpp"

namespace gazechain {

struct Address {
  FixedBytes<20> bytes{};

  /// Last 20 bytes of SHA3-256 over the seed string.
  static Address from_seed(std::string_view seed) {
    Hash32 h = crypto::sha3_256(as_bytes(seed));
    Address a;
    std::copy(h.end() - 20, h.end(), a.bytes.begin());
    return a;
  }

  static Address from_hex(std::string_view hex) { return Address{fixed_from_hex<20>(hex)}; }

  std::string to_hex() const { return "0x" + gazechain::to_hex(bytes); }
  bool is_zero() const noexcept { return *this == Address{}; }

  auto operator<=>(const Address&) const = default;
  friend std::ostream& operator<<(std::ostream& os, const Address& a) { return os << a.to_hex(); }
};

struct Transaction {
  Address from;
  Address to;
  Amount value;
  Amount fee;
  std::uint64_t nonce = 0;
  Bytes input_data;
  Hash32 tx_hash{};

  static Transaction make(Address from, Address to, Amount value, Amount fee, std::uint64_t nonce, Bytes input = {}) {
    Transaction tx{from, to, value, fee, nonce, std::move(input), {}};
    tx.tx_hash = tx.compute_hash();
    return tx;
  }

  Hash32 compute_hash() const {
    ByteWriter w;
    w.raw(from.bytes);
    w.raw(to.bytes);
    w.i128(value.raw());
    w.i128(fee.raw());
    w.u64(nonce);
    w.u64(input_data.size());
    w.raw(input_data);
    return crypto::sha3_256(w.bytes());
  }

  bool is_self_transaction() const noexcept { return from == to; }

  bool operator==(const Transaction&) const = default;
};

struct Block {
  std::uint64_t index = 0;
  std::uint64_t timestamp = 0;
  Hash32 prev_hash{};
  std::vector<Transaction> transactions;
  Hash32 block_hash{};

  Hash32 compute_hash() const {
    ByteWriter w;
    w.u64(index);
    w.u64(timestamp);
    w.raw(prev_hash);
    w.u64(transactions.size());
    for (const Transaction& tx : transactions) w.raw(tx.tx_hash);
    return crypto::sha3_256(w.bytes());
  }

  bool operator==(const Block&) const = default;
};

/// True iff every transaction hash and block hash recomputes, indices are
/// consecutive from 0, and each prev_hash links to its predecessor.
inline bool verify_chain(std::span<const Block> chain) {
  if (chain.empty()) return false;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Block& b = chain[i];
    if (b.index != i) return false;
    Hash32 expected_prev = i == 0 ? Hash32{} : chain[i - 1].block_hash;
    if (b.prev_hash != expected_prev) return false;
    for (const Transaction& tx : b.transactions) {
      if (tx.compute_hash() != tx.tx_hash) return false;
    }
    if (b.compute_hash() != b.block_hash) return false;
  }
  return true;
}

/// Linear scan of sealed history.
inline const Transaction* find_transaction(std::span<const Block> chain, const Hash32& tx_hash) {
  for (const Block& b : chain) {
    for (const Transaction& tx : b.transactions) {
      if (tx.tx_hash == tx_hash) return &tx;
    }
  }
  return nullptr;
}

class EscrowContract;

/// Capability only EscrowContract can construct; required to move funds out of
/// a contract account.
class ContractPass {
  ContractPass() = default;
  friend class EscrowContract;
};

/// Single-writer simulated chain. Genesis allocations appear in block 0 as
/// credit-only transactions from the zero address; fees are burned.
class Ledger {
 public:
  using Allocation = std::pair<Address, Amount>;

  static Ledger genesis(const std::vector<Allocation>& allocations) {
    Ledger ledger;
    Block block;
    std::set<Address> seen;
    std::uint64_t nonce = 0;
    for (const auto& [addr, amount] : allocations) {
      if (addr.is_zero()) throw Error(ErrorKind::Configuration, "the zero address cannot hold an allocation");
      if (!seen.insert(addr).second) throw Error(ErrorKind::Configuration, "duplicate genesis address " + addr.to_hex());
      if (amount < Amount{}) throw Error(ErrorKind::Configuration, "negative genesis allocation");
      ledger.balances_[addr] = amount;
      ledger.genesis_total_ += amount;
      block.transactions.push_back(Transaction::make(Address{}, addr, amount, Amount{}, nonce++));
    }
    block.block_hash = block.compute_hash();
    ledger.index_block(block);
    ledger.chain_.push_back(std::move(block));
    return ledger;
  }

  /// Builds a transaction with the sender's next nonce; does not submit it.
  Transaction build(Address from, Address to, Amount value, Amount fee, Bytes input = {}) const {
    return Transaction::make(from, to, value, fee, next_nonce(from), std::move(input));
  }

  Hash32 submit_transaction(Transaction tx) {
    if (contracts_.contains(tx.from)) {
      throw Error(ErrorKind::Authorization, "contract account " + tx.from.to_hex() + " can only be spent by its contract");
    }
    return admit(std::move(tx));
  }

  Hash32 submit_contract_transaction(ContractPass, Transaction tx) {
    if (!contracts_.contains(tx.from)) throw Error(ErrorKind::Authorization, "sender is not a contract account");
    return admit(std::move(tx));
  }

  void register_contract(ContractPass, Address addr) {
    if (addr.is_zero()) throw Error(ErrorKind::Configuration, "contract cannot live at the zero address");
    contracts_.insert(addr);
  }

  bool is_contract(const Address& addr) const { return contracts_.contains(addr); }

  /// Applies every pending transaction in submission order and appends the block.
  const Block& seal_block() {
    Block block;
    block.index = chain_.size();
    block.timestamp = chain_.back().timestamp + 1;
    block.prev_hash = chain_.back().block_hash;
    for (Transaction& tx : pending_) {
      balances_[tx.from] -= tx.value + tx.fee;
      balances_[tx.to] += tx.value;
      burned_ += tx.fee;
    }
    block.transactions = std::move(pending_);
    pending_.clear();
    pending_outflow_.clear();
    block.block_hash = block.compute_hash();
    index_block(block);
    chain_.push_back(std::move(block));
    return chain_.back();
  }

  const Transaction& get_transaction(const Hash32& tx_hash) const {
    if (auto it = sealed_index_.find(tx_hash); it != sealed_index_.end()) {
      return chain_[it->second.first].transactions[it->second.second];
    }
    for (const Transaction& tx : pending_) {
      if (tx.tx_hash == tx_hash) throw Error(ErrorKind::NotYetFinal, "transaction " + to_hex(tx_hash) + " is not sealed yet");
    }
    throw Error(ErrorKind::NotFound, "unknown transaction " + to_hex(tx_hash));
  }

  /// Block index holding a sealed transaction.
  std::optional<std::uint64_t> block_of(const Hash32& tx_hash) const {
    if (auto it = sealed_index_.find(tx_hash); it != sealed_index_.end()) return it->second.first;
    return std::nullopt;
  }

  bool verify_chain() const { return gazechain::verify_chain(chain_); }

  Amount balance(const Address& addr) const {
    auto it = balances_.find(addr);
    return it == balances_.end() ? Amount{} : it->second;
  }

  std::uint64_t next_nonce(const Address& addr) const {
    auto it = next_nonce_.find(addr);
    return it == next_nonce_.end() ? 0 : it->second;
  }

  std::span<const Block> chain() const noexcept { return chain_; }
  std::span<const Transaction> pending() const noexcept { return pending_; }
  const std::map<Address, Amount>& balances() const noexcept { return balances_; }
  const std::set<Address>& contracts() const noexcept { return contracts_; }
  Amount burned_fees() const noexcept { return burned_; }
  Amount genesis_total() const noexcept { return genesis_total_; }

  bool conservation_holds() const {
    Amount total = burned_;
    for (const auto& [addr, amount] : balances_) {
      if (amount < Amount{}) return false;
      total += amount;
    }
    return total == genesis_total_;
  }

 private:
  Ledger() = default;

  Hash32 admit(Transaction tx) {
    if (tx.from.is_zero()) throw Error(ErrorKind::Authorization, "the zero address cannot send");
    if (tx.compute_hash() != tx.tx_hash) throw Error(ErrorKind::Integrity, "tx_hash does not match transaction contents");
    if (tx.value < Amount{} || tx.fee < Amount{}) throw Error(ErrorKind::Parameter, "value and fee must be non-negative");
    std::uint64_t expected = next_nonce(tx.from);
    if (tx.nonce != expected) {
      throw Error(ErrorKind::Ordering, "nonce " + std::to_string(tx.nonce) + " from " + tx.from.to_hex() +
                                           ", expected " + std::to_string(expected));
    }
    Amount committed = pending_outflow_[tx.from];
    if (balance(tx.from) - committed < tx.value + tx.fee) {
      throw Error(ErrorKind::Funds, tx.from.to_hex() + " cannot cover " + (tx.value + tx.fee).to_eth_string() + " ETH");
    }
    pending_outflow_[tx.from] = committed + tx.value + tx.fee;
    next_nonce_[tx.from] = expected + 1;
    pending_.push_back(std::move(tx));
    return pending_.back().tx_hash;
  }

  void index_block(const Block& block) {
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      sealed_index_[block.transactions[i].tx_hash] = {block.index, i};
    }
  }

  std::vector<Block> chain_;
  std::map<Address, Amount> balances_;
  std::vector<Transaction> pending_;
  std::map<Address, Amount> pending_outflow_;
  std::map<Address, std::uint64_t> next_nonce_;
  std::set<Address> contracts_;
  std::map<Hash32, std::pair<std::uint64_t, std::size_t>> sealed_index_;
  Amount burned_;
  Amount genesis_total_;
};

}  // namespace gazechain
