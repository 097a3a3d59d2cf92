#pragma once

#include <optional>
#include <string_view>

#include "gazechain/amount.hpp"
#include "gazechain/error.hpp"
#include "gazechain/ledger.hpp"

namespace gazechain {

enum class EscrowState { Created, Locked, Complete, Aborted };

constexpr std::string_view to_string(EscrowState s) noexcept {
  switch (s) {
    case EscrowState::Created: return "Created";
    case EscrowState::Locked: return "Locked";
    case EscrowState::Complete: return "Complete";
    case EscrowState::Aborted: return "Aborted";
  }
  return "?";
}

namespace escrow_calls {
inline constexpr std::string_view kCreate = "escrow:create";
inline constexpr std::string_view kConfirmCollect = "escrow:confirmCollect";
inline constexpr std::string_view kConfirmDataValid = "escrow:confirmDataValid";
inline constexpr std::string_view kAbort = "escrow:abort";
inline constexpr std::string_view kPayout = "escrow:payout";
inline constexpr std::string_view kRefund = "escrow:refund";
}  // namespace escrow_calls

/// Double-stake purchase escrow.
///
/// The subject opens the contract with 2X, the collector locks it with another
/// 2X, and only the collector's confirmation releases 3X to the subject and X
/// back to the collector. Before the collector joins, the subject may abort and
/// recover the stake. There is no exit from Locked other than confirmation.
///
/// Operations only submit transactions; the caller seals. Payout and refund
/// need the stakes to be sealed already.
class EscrowContract {
 public:
  static EscrowContract create(Ledger& ledger, const Address& subject, Amount stake, Amount fee) {
    if (stake <= Amount{}) throw Error(ErrorKind::Parameter, "stake must be positive");
    if (stake.raw() % 2 != 0) throw Error(ErrorKind::Parameter, "stake must be even so that compensation is exactly half");
    if (ledger.is_contract(subject)) throw Error(ErrorKind::Authorization, "a contract cannot open an escrow");

    EscrowContract c;
    c.contract_addr_ = derive_address(subject, ledger.next_nonce(subject));
    c.subject_ = subject;
    c.compensation_x_ = Amount::units(stake.raw() / 2);
    ledger.submit_transaction(ledger.build(subject, c.contract_addr_, stake, fee, call_data(escrow_calls::kCreate)));
    ledger.register_contract(ContractPass{}, c.contract_addr_);
    c.staked_subject_ = stake;
    return c;
  }

  void confirm_collect(Ledger& ledger, const Address& collector, Amount stake, Amount fee) {
    require_state(EscrowState::Created, "confirm_collect");
    if (collector == subject_) throw Error(ErrorKind::Authorization, "the subject cannot act as collector");
    if (stake != 2 * compensation_x_) {
      throw Error(ErrorKind::Parameter, "collector stake must equal 2X = " + (2 * compensation_x_).to_eth_string() + " ETH");
    }
    ledger.submit_transaction(ledger.build(collector, contract_addr_, stake, fee, call_data(escrow_calls::kConfirmCollect)));
    collector_ = collector;
    staked_collector_ = stake;
    state_ = EscrowState::Locked;
  }

  void confirm_data_valid(Ledger& ledger, const Address& caller, Amount fee) {
    require_state(EscrowState::Locked, "confirm_data_valid");
    if (caller != *collector_) throw Error(ErrorKind::Authorization, "only the collector can confirm the data");
    require_custody(ledger, staked_subject_ + staked_collector_);

    ledger.submit_transaction(ledger.build(caller, contract_addr_, Amount{}, fee, call_data(escrow_calls::kConfirmDataValid)));
    pay(ledger, subject_, 3 * compensation_x_, escrow_calls::kPayout);
    pay(ledger, *collector_, compensation_x_, escrow_calls::kPayout);
    state_ = EscrowState::Complete;
  }

  void abort(Ledger& ledger, const Address& caller, Amount fee) {
    require_state(EscrowState::Created, "abort");
    if (caller != subject_) throw Error(ErrorKind::Authorization, "only the subject can abort");
    require_custody(ledger, staked_subject_);

    ledger.submit_transaction(ledger.build(caller, contract_addr_, Amount{}, fee, call_data(escrow_calls::kAbort)));
    pay(ledger, subject_, staked_subject_, escrow_calls::kRefund);
    state_ = EscrowState::Aborted;
  }

  const Address& contract_addr() const noexcept { return contract_addr_; }
  const Address& subject() const noexcept { return subject_; }
  const std::optional<Address>& collector() const noexcept { return collector_; }
  Amount compensation_x() const noexcept { return compensation_x_; }
  EscrowState state() const noexcept { return state_; }
  Amount staked_subject() const noexcept { return staked_subject_; }
  Amount staked_collector() const noexcept { return staked_collector_; }
  Amount paid_out() const noexcept { return paid_out_; }

  /// What the contract account should hold once every submitted transfer is sealed.
  Amount expected_custody() const noexcept { return staked_subject_ + staked_collector_ - paid_out_; }

 private:
  EscrowContract() = default;

  static Address derive_address(const Address& creator, std::uint64_t nonce) {
    ByteWriter w;
    w.raw(as_bytes("gazechain/escrow"));
    w.raw(creator.bytes);
    w.u64(nonce);
    Hash32 h = crypto::sha3_256(w.bytes());
    Address a;
    std::copy(h.end() - 20, h.end(), a.bytes.begin());
    return a;
  }

  static Bytes call_data(std::string_view name) {
    auto b = as_bytes(name);
    return Bytes(b.begin(), b.end());
  }

  void require_state(EscrowState expected, std::string_view op) const {
    if (state_ != expected) {
      throw Error(ErrorKind::State, std::string(op) + " requires " + std::string(to_string(expected)) +
                                        ", contract is " + std::string(to_string(state_)));
    }
  }

  void require_custody(const Ledger& ledger, Amount needed) const {
    if (ledger.balance(contract_addr_) < needed) {
      throw Error(ErrorKind::State, "stakes are not sealed yet; contract holds " +
                                        ledger.balance(contract_addr_).to_eth_string() + " ETH");
    }
  }

  void pay(Ledger& ledger, const Address& to, Amount value, std::string_view call) {
    ledger.submit_contract_transaction(ContractPass{}, ledger.build(contract_addr_, to, value, Amount{}, call_data(call)));
    paid_out_ += value;
  }

  Address contract_addr_;
  Address subject_;
  std::optional<Address> collector_;
  Amount compensation_x_;
  EscrowState state_ = EscrowState::Created;
  Amount staked_subject_;
  Amount staked_collector_;
  Amount paid_out_;
};

}  // namespace gazechain
