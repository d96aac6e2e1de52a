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

#include "comit/chainlab/transaction.hpp"

#include <map>
#include <memory>
#include <string>

namespace comit::chainlab {

struct ChainParams
{
    std::string chain_id;
    std::string asset_id;
    HashFnSet hash_fns;
    /// Simulated ticks per block; informational for the ledger itself.
    Height block_interval = 1;
    /// Flat fee every transaction must leave unclaimed (burned on mining).
    Amount flat_fee = 0;
};

enum class RejectReason
{
    None,
    Malformed,
    Conflict,
    UnknownOutpoint,
    InvalidWitness,
    ValueOverflow,
    InsufficientValue,
    LocktimeNotMet,
};

std::string_view to_string(RejectReason r);

struct SubmitResult
{
    RejectReason reason = RejectReason::None;
    /// Mempool transactions evicted because this one replaced them.
    std::vector<Hash32> replaced;

    bool accepted() const { return reason == RejectReason::None; }
    explicit operator bool() const { return accepted(); }
};

struct UtxoEntry
{
    Amount amount = 0;
    Script script;
    Height confirmation_height = 0;
};

struct ConfirmedTx
{
    Hash32 txid{};
    Transaction tx;
    Height height = 0;
    Amount fee = 0;
};

/// A simulated UTXO chain. Transactions enter a mempool on submission and are
/// confirmed by mine_blocks() in submission order once their locktime and
/// script time conditions hold. Single owner; not thread-safe.
///
/// Mempool policy: a conflicting submission is rejected unless every mempool
/// transaction it conflicts with cannot enter the next block (time conditions
/// unmet) while the new transaction can; in that case the blocked transactions
/// and their mempool descendants are evicted.
class Ledger
{
public:
    Ledger(ChainParams params, std::shared_ptr<const KeyRegistry> keys, Height start_height = 0);

    const ChainParams& params() const { return params_; }
    Height height() const { return height_; }
    const KeyRegistry& keys() const { return *keys_; }

    /// Genesis allocation: creates a confirmed output without a spending input.
    Outpoint credit_genesis(const Script& script, Amount amount);

    SubmitResult submit_tx(const Transaction& tx);

    /// Mines `n` blocks (n >= 1) and returns the new height.
    Height mine_blocks(std::size_t n);

    const std::map<Outpoint, UtxoEntry>& utxos() const { return utxos_; }
    const UtxoEntry* utxo(const Outpoint& op) const;

    /// Output lookup across confirmed history, genesis and mempool.
    std::optional<TxOut> find_output(const Outpoint& op) const;

    /// Transaction by id, confirmed or pending.
    const Transaction* find_tx(const Hash32& txid) const;
    std::optional<Height> confirmation_height(const Hash32& txid) const;
    bool in_mempool(const Hash32& txid) const;

    /// Txid of the transaction spending `op`, confirmed first, then mempool.
    std::optional<Hash32> spender(const Outpoint& op) const;
    std::optional<Hash32> confirmed_spender(const Outpoint& op) const;

    const std::vector<ConfirmedTx>& history() const { return history_; }
    std::size_t mempool_size() const { return mempool_.size(); }

    /// Confirmed PayToKey outputs of `key` that no mempool transaction spends.
    std::vector<std::pair<Outpoint, Amount>> spendable(const PubKey& key) const;
    Amount balance(const PubKey& key) const;

    Amount genesis_total() const { return genesis_total_; }
    Amount burned_fees() const { return burned_; }
    Amount utxo_total() const;

private:
    struct PendingTx
    {
        Hash32 txid{};
        Transaction tx;
    };

    struct Resolved
    {
        Amount amount = 0;
        const Script* script = nullptr;
        std::optional<Height> confirmation_height; // empty: produced by a mempool tx
    };

    std::optional<Resolved> resolve(const Outpoint& op) const;
    bool ready_for_block(const PendingTx& p, Height h, std::map<Hash32, bool>& memo) const;
    void evict_with_descendants(const Hash32& txid, std::vector<Hash32>& evicted);
    void rebuild_mempool_index();

    ChainParams params_;
    std::shared_ptr<const KeyRegistry> keys_;
    Height height_;
    std::map<Outpoint, UtxoEntry> utxos_;
    std::vector<PendingTx> mempool_;
    std::map<Outpoint, Hash32> mempool_spent_;
    std::map<Hash32, std::size_t> mempool_index_;
    std::map<Outpoint, Hash32> confirmed_spent_;
    std::vector<ConfirmedTx> history_;
    std::map<Hash32, std::size_t> history_index_;
    std::map<Outpoint, TxOut> genesis_outputs_;
    std::uint64_t genesis_count_ = 0;
    Amount genesis_total_ = 0;
    Amount burned_ = 0;
};

} // namespace comit::chainlab
