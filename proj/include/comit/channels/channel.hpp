// Copyright 2026 The comit-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "comit/chainlab/ledger.hpp"

#include <optional>

namespace comit::channels {

using chainlab::HashFnId;
using chainlab::KeyPair;
using chainlab::Ledger;
using chainlab::Outpoint;
using chainlab::PubKey;
using chainlab::Transaction;

enum class Side : std::uint8_t
{
    A = 0,
    B = 1,
};

constexpr Side other(Side s)
{
    return s == Side::A ? Side::B : Side::A;
}

std::string_view to_string(Side s);

/// The offering party of an HTLC.
enum class Direction : std::uint8_t
{
    AtoB,
    BtoA,
};

constexpr Side offerer(Direction d)
{
    return d == Direction::AtoB ? Side::A : Side::B;
}

constexpr Side receiver(Direction d)
{
    return other(offerer(d));
}

using ChannelId = Outpoint;

struct Htlc
{
    std::uint64_t htlc_id = 0;
    Direction direction = Direction::AtoB;
    Amount amount = 0;
    HashFnId hash_fn = HashFnId::Sha256;
    Hash32 payment_hash{};
    Height expiry_height = 0;
};

struct CommitmentState
{
    std::uint64_t commitment_number = 0;
    Amount balance_a = 0;
    Amount balance_b = 0;
    std::vector<Htlc> pending_htlcs;
    Hash32 revocation_hash_a{};
    Hash32 revocation_hash_b{};

    Amount balance(Side s) const { return s == Side::A ? balance_a : balance_b; }
    Amount& balance(Side s) { return s == Side::A ? balance_a : balance_b; }
    const Hash32& revocation_hash(Side s) const { return s == Side::A ? revocation_hash_a : revocation_hash_b; }
    Amount htlc_total() const;
    const Htlc* find_htlc(std::uint64_t id) const;
};

enum class PhaseKind
{
    Opening,
    Open,
    CooperativeClosing,
    UnilateralClosed,
    Breached,
    Settled,
};

std::string_view to_string(PhaseKind k);

struct ChannelPhase
{
    PhaseKind kind = PhaseKind::Opening;
    /// Broadcaster for UnilateralClosed / Breached.
    Side by = Side::A;
    Height at_height = 0;
};

enum class ChannelErrc
{
    InsufficientFunds,
    FundingConflict,
    InsufficientBalance,
    UnsupportedHashFunction,
    StalePhase,
    BadPreimage,
    UnknownHtlc,
    PendingHtlcs,
    WindowExpired,
    NotRevoked,
    UnknownCommitment,
    BelowDust,
    ExpiryTooSoon,
    UpdateInProgress,
    Rejected,
};

std::string_view to_string(ChannelErrc e);

class ChannelError : public std::runtime_error
{
public:
    explicit ChannelError(ChannelErrc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}
    ChannelErrc code() const { return code_; }

private:
    ChannelErrc code_;
};

struct ChannelConfig
{
    Height csv_delay = 6;
    /// HTLCs smaller than this are refused.
    Amount dust_threshold = 0;
};

/// Commitment updates are a two-step exchange: both sides sign the new
/// commitment, then both reveal the invalidation keys of the previous one.
enum class ExchangeStage
{
    Signed,
    Revoked,
};

struct OutputRole
{
    enum class Kind
    {
        ToLocal,
        ToRemote,
        HtlcOutput,
    };
    Kind kind = Kind::ToLocal;
    Side owner = Side::A;
    std::uint64_t htlc_id = 0;
};

/// A party's commitment transaction for one commitment number, fully signed.
struct Commitment
{
    Side holder = Side::A;
    std::uint64_t number = 0;
    Transaction tx;
    std::vector<OutputRole> roles;

    std::optional<std::uint32_t> output_of(OutputRole::Kind kind, std::uint64_t htlc_id = 0) const;
};

struct Closing
{
    enum class Kind
    {
        Cooperative,
        Commitment,
    };
    Kind kind = Kind::Cooperative;
    Hash32 txid{};
    std::optional<Commitment> commitment;
    bool revoked = false;
};

/// Bidirectional payment channel between parties A and B on one chain.
///
/// The funding output is Multisig2of2(A, B). Each party holds its own
/// commitment per number: its balance is locked by
/// Or(TimeLockRel(csv_delay, self), HashLock(revocation_hash_self, peer)), the
/// peer's balance is PayToKey(peer), and every HTLC output is
/// Or(Htlc(...), HashLock(revocation_hash_self, peer)). Revealing the
/// invalidation key of a commitment therefore hands the peer every output the
/// broadcaster could otherwise claim.
///
/// Party A funds the on-chain fees of commitments and cooperative closes and
/// must keep at least that much balance.
class Channel
{
public:
    /// Builds, submits and (when `confirm`) mines the funding transaction.
    static Channel open(Ledger& ledger, const KeyPair& party_a, const KeyPair& party_b, Amount fund_a,
                        Amount fund_b, ChannelConfig cfg = {}, bool confirm = true);
    /// As open(), funding from the given outpoints of each party.
    static Channel open_with_coins(Ledger& ledger, const KeyPair& party_a, const KeyPair& party_b,
                                   const std::vector<Outpoint>& coins_a, const std::vector<Outpoint>& coins_b,
                                   Amount fund_a, Amount fund_b, ChannelConfig cfg = {}, bool confirm = true);

    const ChannelId& id() const { return id_; }
    const std::string& chain_id() const { return chain_.chain_id; }
    const PubKey& pubkey(Side s) const { return keys(s).pub; }
    Amount funding_amount() const { return funding_amount_; }
    const ChannelConfig& config() const { return cfg_; }
    const ChannelPhase& phase() const { return phase_; }
    const CommitmentState& state() const { return history_.back(); }
    const CommitmentState& state_at(std::uint64_t n) const;
    std::uint64_t latest_number() const { return history_.back().commitment_number; }
    bool revocation_pending() const { return revocation_pending_; }
    const std::optional<Closing>& closing() const { return closing_; }

    /// Invalidation keys `s` has revealed to its peer, indexed by number.
    const std::vector<Hash32>& revealed_keys(Side s) const { return revealed_[static_cast<int>(s)]; }
    bool is_revoked(Side holder, std::uint64_t n) const { return n < revealed_keys(holder).size(); }

    std::uint64_t add_htlc(const Ledger& ledger, Direction direction, Amount amount, HashFnId hash_fn,
                           const Hash32& payment_hash, Height expiry_height,
                           ExchangeStage stop_after = ExchangeStage::Revoked);
    const CommitmentState& fulfill_htlc(std::uint64_t htlc_id, std::span<const std::uint8_t> preimage,
                                        ExchangeStage stop_after = ExchangeStage::Revoked);
    const CommitmentState& fail_htlc(std::uint64_t htlc_id, ExchangeStage stop_after = ExchangeStage::Revoked);

    /// Second half of an interrupted exchange.
    void complete_revocation();

    Transaction cooperative_close(Ledger& ledger);
    Transaction unilateral_close(Ledger& ledger, Side party, std::uint64_t commitment_number);
    Transaction punish_breach(Ledger& ledger, Side honest_party);

    Commitment commitment(Side holder, std::uint64_t n) const;

    /// Resolves on-chain outcomes: funding confirmation, closes initiated by
    /// anyone, and settlement once every non-final output is spent.
    void observe(const Ledger& ledger);

    /// On-chain spends of the confirmed/pending closing commitment. Each returns
    /// nothing when the output is absent, spent by a confirmed transaction or
    /// worth less than the fee.
    std::optional<Transaction> sweep_to_local(const Ledger& ledger) const;
    std::optional<Transaction> claim_htlc_output(const Ledger& ledger, std::uint64_t htlc_id,
                                                 std::span<const std::uint8_t> preimage) const;
    std::optional<Transaction> refund_htlc_output(const Ledger& ledger, std::uint64_t htlc_id) const;

    /// Invalidation key of `s` for commitment `n`.
    Hash32 invalidation_key(Side s, std::uint64_t n) const;

private:
    Channel() = default;

    const KeyPair& keys(Side s) const { return s == Side::A ? key_a_ : key_b_; }
    HashFnId revocation_fn() const { return *chain_.hash_fns.begin(); }
    Hash32 revocation_hash(Side s, std::uint64_t n) const;
    void require_open() const;
    void apply_update(CommitmentState next, ExchangeStage stop_after);
    std::optional<Transaction> spend_output(const Ledger& ledger, std::uint32_t index, Side beneficiary,
                                            std::uint8_t branch, std::vector<Bytes> preimages,
                                            Height locktime) const;
    std::optional<Closing> identify_close(const Ledger& ledger, const Hash32& txid) const;

    chainlab::ChainParams chain_;
    KeyPair key_a_;
    KeyPair key_b_;
    ChannelConfig cfg_;
    ChannelId id_;
    Amount funding_amount_ = 0;
    Hash32 seed_a_{};
    Hash32 seed_b_{};
    std::vector<CommitmentState> history_;
    std::vector<Hash32> revealed_[2];
    bool revocation_pending_ = false;
    std::uint64_t next_htlc_id_ = 0;
    ChannelPhase phase_;
    std::optional<Closing> closing_;
    std::optional<Transaction> coop_tx_;
};

} // namespace comit::channels
