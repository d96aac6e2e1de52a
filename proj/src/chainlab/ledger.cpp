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

#include "comit/chainlab/ledger.hpp"

#include <algorithm>
#include <set>

namespace comit::chainlab {

std::string_view to_string(RejectReason r)
{
    switch (r)
    {
    case RejectReason::None:
        return "accepted";
    case RejectReason::Malformed:
        return "malformed";
    case RejectReason::Conflict:
        return "conflict";
    case RejectReason::UnknownOutpoint:
        return "unknown-outpoint";
    case RejectReason::InvalidWitness:
        return "invalid-witness";
    case RejectReason::ValueOverflow:
        return "value-overflow";
    case RejectReason::InsufficientValue:
        return "insufficient-value";
    case RejectReason::LocktimeNotMet:
        return "locktime-not-met";
    }
    return "unknown";
}

Ledger::Ledger(ChainParams params, std::shared_ptr<const KeyRegistry> keys, Height start_height)
    : params_(std::move(params)), keys_(std::move(keys)), height_(start_height)
{
    if (params_.hash_fns.empty())
        throw std::invalid_argument("chain " + params_.chain_id + " must support at least one hash function");
    if (!keys_)
        throw std::invalid_argument("ledger requires a key registry");
}

Outpoint Ledger::credit_genesis(const Script& script, Amount amount)
{
    Writer w;
    w.str("comit/genesis");
    w.str(params_.chain_id);
    w.u64(genesis_count_++);
    Outpoint op{sha256(w.bytes()), 0};
    genesis_total_ = checked_add(genesis_total_, amount);
    utxos_[op] = UtxoEntry{amount, script, height_};
    genesis_outputs_[op] = TxOut{amount, script};
    return op;
}

const UtxoEntry* Ledger::utxo(const Outpoint& op) const
{
    auto it = utxos_.find(op);
    return it == utxos_.end() ? nullptr : &it->second;
}

std::optional<Ledger::Resolved> Ledger::resolve(const Outpoint& op) const
{
    if (auto it = utxos_.find(op); it != utxos_.end())
        return Resolved{it->second.amount, &it->second.script, it->second.confirmation_height};
    if (auto it = mempool_index_.find(op.txid); it != mempool_index_.end())
    {
        const auto& tx = mempool_[it->second].tx;
        if (op.index < tx.outputs.size())
            return Resolved{tx.outputs[op.index].amount, &tx.outputs[op.index].script, std::nullopt};
    }
    return std::nullopt;
}

std::optional<TxOut> Ledger::find_output(const Outpoint& op) const
{
    if (auto it = genesis_outputs_.find(op); it != genesis_outputs_.end())
        return it->second;
    if (const auto* tx = find_tx(op.txid); tx && op.index < tx->outputs.size())
        return tx->outputs[op.index];
    return std::nullopt;
}

const Transaction* Ledger::find_tx(const Hash32& txid) const
{
    if (auto it = history_index_.find(txid); it != history_index_.end())
        return &history_[it->second].tx;
    if (auto it = mempool_index_.find(txid); it != mempool_index_.end())
        return &mempool_[it->second].tx;
    return nullptr;
}

std::optional<Height> Ledger::confirmation_height(const Hash32& txid) const
{
    if (auto it = history_index_.find(txid); it != history_index_.end())
        return history_[it->second].height;
    return std::nullopt;
}

bool Ledger::in_mempool(const Hash32& txid) const
{
    return mempool_index_.contains(txid);
}

std::optional<Hash32> Ledger::confirmed_spender(const Outpoint& op) const
{
    if (auto it = confirmed_spent_.find(op); it != confirmed_spent_.end())
        return it->second;
    return std::nullopt;
}

std::optional<Hash32> Ledger::spender(const Outpoint& op) const
{
    if (auto c = confirmed_spender(op))
        return c;
    if (auto it = mempool_spent_.find(op); it != mempool_spent_.end())
        return it->second;
    return std::nullopt;
}

std::vector<std::pair<Outpoint, Amount>> Ledger::spendable(const PubKey& key) const
{
    std::vector<std::pair<Outpoint, Amount>> out;
    for (const auto& [op, entry] : utxos_)
    {
        const auto* p2k = std::get_if<PayToKey>(&entry.script.node);
        if (p2k && p2k->key == key && !mempool_spent_.contains(op))
            out.emplace_back(op, entry.amount);
    }
    return out;
}

Amount Ledger::balance(const PubKey& key) const
{
    Amount total = 0;
    for (const auto& [op, entry] : utxos_)
    {
        const auto* p2k = std::get_if<PayToKey>(&entry.script.node);
        if (p2k && p2k->key == key)
            total = checked_add(total, entry.amount);
    }
    return total;
}

Amount Ledger::utxo_total() const
{
    Amount total = 0;
    for (const auto& [op, entry] : utxos_)
        total = checked_add(total, entry.amount);
    return total;
}

bool Ledger::ready_for_block(const PendingTx& p, Height h, std::map<Hash32, bool>& memo) const
{
    if (auto it = memo.find(p.txid); it != memo.end())
        return it->second;
    bool ok = p.tx.locktime <= h;
    for (std::size_t i = 0; ok && i < p.tx.inputs.size(); ++i)
    {
        const auto& in = p.tx.inputs[i];
        auto prev = resolve(in.prevout);
        if (!prev)
        {
            ok = false;
            break;
        }
        Height conf = h;
        if (prev->confirmation_height)
            conf = *prev->confirmation_height;
        else
            ok = ready_for_block(mempool_[mempool_index_.at(in.prevout.txid)], h, memo);
        ok = ok && verify_script(*prev->script, in.witness, VerifyContext{h, conf, p.txid}, *keys_);
    }
    memo[p.txid] = ok;
    return ok;
}

SubmitResult Ledger::submit_tx(const Transaction& tx)
{
    SubmitResult result;
    auto reject = [&](RejectReason r) {
        result.reason = r;
        return result;
    };

    if (tx.inputs.empty() || tx.outputs.empty())
        return reject(RejectReason::Malformed);
    std::set<Outpoint> seen;
    for (const auto& in : tx.inputs)
        if (!seen.insert(in.prevout).second)
            return reject(RejectReason::Malformed);
    for (const auto& out : tx.outputs)
        if (!well_formed(out.script))
            return reject(RejectReason::Malformed);

    const Hash32 txid = tx.txid();
    if (history_index_.contains(txid) || mempool_index_.contains(txid))
        return reject(RejectReason::Conflict);

    std::set<Hash32> conflicts;
    Amount in_total = 0;
    Amount out_total = 0;
    try
    {
        for (const auto& in : tx.inputs)
        {
            if (confirmed_spent_.contains(in.prevout))
                return reject(RejectReason::Conflict);
            auto prev = resolve(in.prevout);
            if (!prev)
                return reject(RejectReason::UnknownOutpoint);
            if (auto it = mempool_spent_.find(in.prevout); it != mempool_spent_.end())
                conflicts.insert(it->second);
            in_total = checked_add(in_total, prev->amount);

            VerifyContext ctx{kAnyHeight, prev->confirmation_height.value_or(height_ + 1), txid};
            if (!verify_script(*prev->script, in.witness, ctx, *keys_))
                return reject(RejectReason::InvalidWitness);
        }
        out_total = tx.output_total();
        checked_add(out_total, params_.flat_fee);
    }
    catch (const AmountOverflow&)
    {
        return reject(RejectReason::ValueOverflow);
    }
    if (in_total < out_total || in_total - out_total < params_.flat_fee)
        return reject(RejectReason::InsufficientValue);

    if (!conflicts.empty())
    {
        // A spend of a conflicting tx's own output cannot replace it.
        for (const auto& in : tx.inputs)
            if (conflicts.contains(in.prevout.txid))
                return reject(RejectReason::Conflict);
        std::map<Hash32, bool> memo;
        const Height next = height_ + 1;
        for (const auto& c : conflicts)
            if (ready_for_block(mempool_[mempool_index_.at(c)], next, memo))
                return reject(RejectReason::Conflict);
        // Evaluate the newcomer as if the conflicts were gone.
        auto saved_mempool = mempool_;
        for (const auto& c : conflicts)
            if (mempool_index_.contains(c))
                evict_with_descendants(c, result.replaced);
        std::map<Hash32, bool> fresh;
        if (!ready_for_block(PendingTx{txid, tx}, next, fresh))
        {
            mempool_ = std::move(saved_mempool);
            rebuild_mempool_index();
            result.replaced.clear();
            return reject(RejectReason::Conflict);
        }
    }

    mempool_.push_back(PendingTx{txid, tx});
    rebuild_mempool_index();
    return result;
}

void Ledger::evict_with_descendants(const Hash32& txid, std::vector<Hash32>& evicted)
{
    std::set<Hash32> doomed{txid};
    // Mempool order is topological, so one forward pass collects descendants.
    for (const auto& p : mempool_)
        for (const auto& in : p.tx.inputs)
            if (doomed.contains(in.prevout.txid))
                doomed.insert(p.txid);
    std::erase_if(mempool_, [&](const PendingTx& p) {
        if (!doomed.contains(p.txid))
            return false;
        evicted.push_back(p.txid);
        return true;
    });
    rebuild_mempool_index();
}

void Ledger::rebuild_mempool_index()
{
    mempool_index_.clear();
    mempool_spent_.clear();
    for (std::size_t i = 0; i < mempool_.size(); ++i)
    {
        mempool_index_[mempool_[i].txid] = i;
        for (const auto& in : mempool_[i].tx.inputs)
            mempool_spent_[in.prevout] = mempool_[i].txid;
    }
}

Height Ledger::mine_blocks(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("mine_blocks requires n >= 1");
    for (std::size_t b = 0; b < n; ++b)
    {
        const Height h = ++height_;
        std::vector<PendingTx> remaining;
        for (auto& p : mempool_)
        {
            bool ok = p.tx.locktime <= h;
            Amount in_total = 0;
            for (std::size_t i = 0; ok && i < p.tx.inputs.size(); ++i)
            {
                const auto& in = p.tx.inputs[i];
                auto it = utxos_.find(in.prevout);
                if (it == utxos_.end())
                {
                    ok = false;
                    break;
                }
                in_total += it->second.amount;
                ok = verify_script(it->second.script, in.witness,
                                   VerifyContext{h, it->second.confirmation_height, p.txid}, *keys_);
            }
            if (!ok)
            {
                remaining.push_back(std::move(p));
                continue;
            }
            for (const auto& in : p.tx.inputs)
            {
                utxos_.erase(in.prevout);
                confirmed_spent_[in.prevout] = p.txid;
            }
            for (std::uint32_t i = 0; i < p.tx.outputs.size(); ++i)
                utxos_[Outpoint{p.txid, i}] = UtxoEntry{p.tx.outputs[i].amount, p.tx.outputs[i].script, h};
            const Amount fee = in_total - p.tx.output_total();
            burned_ += fee;
            history_index_[p.txid] = history_.size();
            history_.push_back(ConfirmedTx{p.txid, std::move(p.tx), h, fee});
        }
        mempool_ = std::move(remaining);
        rebuild_mempool_index();
    }
    return height_;
}

} // namespace comit::chainlab
