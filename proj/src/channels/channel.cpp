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

#include "comit/channels/channel.hpp"

#include "comit/chainlab/wallet.hpp"

#include <algorithm>

namespace comit::channels {

using namespace chainlab;

std::string_view to_string(Side s)
{
    return s == Side::A ? "a" : "b";
}

std::string_view to_string(PhaseKind k)
{
    switch (k)
    {
    case PhaseKind::Opening: return "opening";
    case PhaseKind::Open: return "open";
    case PhaseKind::CooperativeClosing: return "cooperative-closing";
    case PhaseKind::UnilateralClosed: return "unilateral-closed";
    case PhaseKind::Breached: return "breached";
    case PhaseKind::Settled: return "settled";
    }
    return "unknown";
}

std::string_view to_string(ChannelErrc e)
{
    switch (e)
    {
    case ChannelErrc::InsufficientFunds: return "insufficient-funds";
    case ChannelErrc::FundingConflict: return "funding-conflict";
    case ChannelErrc::InsufficientBalance: return "insufficient-balance";
    case ChannelErrc::UnsupportedHashFunction: return "unsupported-hash-function";
    case ChannelErrc::StalePhase: return "stale-phase";
    case ChannelErrc::BadPreimage: return "bad-preimage";
    case ChannelErrc::UnknownHtlc: return "unknown-htlc";
    case ChannelErrc::PendingHtlcs: return "pending-htlcs";
    case ChannelErrc::WindowExpired: return "window-expired";
    case ChannelErrc::NotRevoked: return "not-revoked";
    case ChannelErrc::UnknownCommitment: return "unknown-commitment";
    case ChannelErrc::BelowDust: return "below-dust";
    case ChannelErrc::ExpiryTooSoon: return "expiry-too-soon";
    case ChannelErrc::UpdateInProgress: return "update-in-progress";
    case ChannelErrc::Rejected: return "rejected";
    }
    return "unknown";
}

Amount CommitmentState::htlc_total() const
{
    Amount total = 0;
    for (const auto& h : pending_htlcs)
        total = checked_add(total, h.amount);
    return total;
}

const Htlc* CommitmentState::find_htlc(std::uint64_t id) const
{
    for (const auto& h : pending_htlcs)
        if (h.htlc_id == id)
            return &h;
    return nullptr;
}

std::optional<std::uint32_t> Commitment::output_of(OutputRole::Kind kind, std::uint64_t htlc_id) const
{
    for (std::uint32_t i = 0; i < roles.size(); ++i)
        if (roles[i].kind == kind && (kind != OutputRole::Kind::HtlcOutput || roles[i].htlc_id == htlc_id))
            return i;
    return std::nullopt;
}

namespace {

[[noreturn]] void fail(ChannelErrc e)
{
    throw ChannelError(e);
}

Hash32 invalidation_seed(const SecretKey& secret, const Hash32& funding_txid)
{
    Writer w;
    w.str("comit/invalidation-seed");
    w.raw(secret.bytes);
    w.raw(funding_txid);
    return sha256(w.bytes());
}

} // namespace

Channel Channel::open(Ledger& ledger, const KeyPair& party_a, const KeyPair& party_b, Amount fund_a,
                      Amount fund_b, ChannelConfig cfg, bool confirm)
{
    CoinSelection sel_a;
    CoinSelection sel_b;
    try
    {
        sel_a = select_coins(ledger, party_a.pub, checked_add(fund_a, ledger.params().flat_fee));
        sel_b = select_coins(ledger, party_b.pub, fund_b);
    }
    catch (const chainlab::InsufficientFunds&)
    {
        fail(ChannelErrc::InsufficientFunds);
    }
    catch (const AmountOverflow&)
    {
        fail(ChannelErrc::InsufficientFunds);
    }
    return open_with_coins(ledger, party_a, party_b, sel_a.inputs, sel_b.inputs, fund_a, fund_b, cfg, confirm);
}

Channel Channel::open_with_coins(Ledger& ledger, const KeyPair& party_a, const KeyPair& party_b,
                                 const std::vector<Outpoint>& coins_a, const std::vector<Outpoint>& coins_b,
                                 Amount fund_a, Amount fund_b, ChannelConfig cfg, bool confirm)
{
    const Amount fee = ledger.params().flat_fee;
    Amount total = 0;
    CoinSelection sel_a{coins_a, 0};
    CoinSelection sel_b{coins_b, 0};
    try
    {
        total = checked_add(fund_a, fund_b);
        for (auto* sel : {&sel_a, &sel_b})
            for (const auto& op : sel->inputs)
            {
                auto out = ledger.find_output(op);
                if (!out)
                    fail(ChannelErrc::InsufficientFunds);
                sel->total = checked_add(sel->total, out->amount);
            }
        if (sel_a.total < checked_add(fund_a, fee) || sel_b.total < fund_b)
            fail(ChannelErrc::InsufficientFunds);
    }
    catch (const AmountOverflow&)
    {
        fail(ChannelErrc::InsufficientFunds);
    }
    if (total == 0 || party_a.pub == party_b.pub)
        fail(ChannelErrc::InsufficientFunds);
    // A must be able to pay for a commitment or close out of its own share.
    if (fund_a < fee)
        fail(ChannelErrc::InsufficientBalance);

    Transaction tx;
    for (const auto& op : sel_a.inputs)
        tx.inputs.push_back(TxIn{op, {}});
    for (const auto& op : sel_b.inputs)
        tx.inputs.push_back(TxIn{op, {}});
    tx.outputs.push_back(TxOut{total, Script{Multisig2of2{party_a.pub, party_b.pub}}});
    if (sel_a.total > fund_a + fee)
        tx.outputs.push_back(TxOut{sel_a.total - fund_a - fee, Script{PayToKey{party_a.pub}}});
    if (sel_b.total > fund_b)
        tx.outputs.push_back(TxOut{sel_b.total - fund_b, Script{PayToKey{party_b.pub}}});
    const Hash32 txid = tx.txid();
    for (std::size_t i = 0; i < tx.inputs.size(); ++i)
        tx.inputs[i].witness = pay_to_key_witness(i < sel_a.inputs.size() ? party_a : party_b, txid);

    auto res = ledger.submit_tx(tx);
    if (!res)
        fail(res.reason == RejectReason::Conflict ? ChannelErrc::FundingConflict : ChannelErrc::Rejected);

    Channel ch;
    ch.chain_ = ledger.params();
    ch.key_a_ = party_a;
    ch.key_b_ = party_b;
    ch.cfg_ = cfg;
    ch.id_ = Outpoint{txid, 0};
    ch.funding_amount_ = total;
    ch.seed_a_ = invalidation_seed(party_a.secret, txid);
    ch.seed_b_ = invalidation_seed(party_b.secret, txid);

    CommitmentState initial;
    initial.commitment_number = 0;
    initial.balance_a = fund_a;
    initial.balance_b = fund_b;
    initial.revocation_hash_a = ch.revocation_hash(Side::A, 0);
    initial.revocation_hash_b = ch.revocation_hash(Side::B, 0);
    ch.history_.push_back(std::move(initial));

    if (confirm)
        ledger.mine_blocks(1);
    ch.observe(ledger);
    return ch;
}

const CommitmentState& Channel::state_at(std::uint64_t n) const
{
    if (n >= history_.size())
        fail(ChannelErrc::UnknownCommitment);
    return history_[n];
}

Hash32 Channel::invalidation_key(Side s, std::uint64_t n) const
{
    Writer w;
    w.str("comit/invalidation");
    w.raw(s == Side::A ? seed_a_ : seed_b_);
    w.u64(n);
    return sha256(w.bytes());
}

Hash32 Channel::revocation_hash(Side s, std::uint64_t n) const
{
    return hash_digest(revocation_fn(), invalidation_key(s, n));
}

void Channel::require_open() const
{
    if (phase_.kind != PhaseKind::Open)
        fail(ChannelErrc::StalePhase);
    if (revocation_pending_)
        fail(ChannelErrc::UpdateInProgress);
}

void Channel::apply_update(CommitmentState next, ExchangeStage stop_after)
{
    next.commitment_number = latest_number() + 1;
    next.revocation_hash_a = revocation_hash(Side::A, next.commitment_number);
    next.revocation_hash_b = revocation_hash(Side::B, next.commitment_number);
    history_.push_back(std::move(next));
    revocation_pending_ = true;
    if (stop_after == ExchangeStage::Revoked)
        complete_revocation();
}

void Channel::complete_revocation()
{
    if (!revocation_pending_)
        return;
    const std::uint64_t prev = latest_number() - 1;
    for (Side s : {Side::A, Side::B})
    {
        auto& keys = revealed_[static_cast<int>(s)];
        while (keys.size() <= prev)
            keys.push_back(invalidation_key(s, keys.size()));
    }
    revocation_pending_ = false;
}

std::uint64_t Channel::add_htlc(const Ledger& ledger, Direction direction, Amount amount, HashFnId hash_fn,
                                const Hash32& payment_hash, Height expiry_height, ExchangeStage stop_after)
{
    require_open();
    if (!chain_.hash_fns.contains(hash_fn))
        fail(ChannelErrc::UnsupportedHashFunction);
    if (amount == 0 || amount < cfg_.dust_threshold)
        fail(ChannelErrc::BelowDust);
    if (expiry_height <= ledger.height())
        fail(ChannelErrc::ExpiryTooSoon);

    const Side from = offerer(direction);
    const Amount reserve = from == Side::A ? chain_.flat_fee : 0;
    CommitmentState next = state();
    if (next.balance(from) < amount || next.balance(from) - amount < reserve)
        fail(ChannelErrc::InsufficientBalance);
    next.balance(from) -= amount;
    const std::uint64_t id = next_htlc_id_++;
    next.pending_htlcs.push_back(Htlc{id, direction, amount, hash_fn, payment_hash, expiry_height});
    apply_update(std::move(next), stop_after);
    return id;
}

const CommitmentState& Channel::fulfill_htlc(std::uint64_t htlc_id, std::span<const std::uint8_t> preimage,
                                             ExchangeStage stop_after)
{
    require_open();
    const Htlc* h = state().find_htlc(htlc_id);
    if (!h)
        fail(ChannelErrc::UnknownHtlc);
    if (hash_digest(h->hash_fn, preimage) != h->payment_hash)
        fail(ChannelErrc::BadPreimage);
    CommitmentState next = state();
    next.balance(receiver(h->direction)) += h->amount;
    std::erase_if(next.pending_htlcs, [&](const Htlc& x) { return x.htlc_id == htlc_id; });
    apply_update(std::move(next), stop_after);
    return state();
}

const CommitmentState& Channel::fail_htlc(std::uint64_t htlc_id, ExchangeStage stop_after)
{
    require_open();
    const Htlc* h = state().find_htlc(htlc_id);
    if (!h)
        fail(ChannelErrc::UnknownHtlc);
    CommitmentState next = state();
    next.balance(offerer(h->direction)) += h->amount;
    std::erase_if(next.pending_htlcs, [&](const Htlc& x) { return x.htlc_id == htlc_id; });
    apply_update(std::move(next), stop_after);
    return state();
}

Commitment Channel::commitment(Side holder, std::uint64_t n) const
{
    const CommitmentState& st = state_at(n);
    const Side peer = other(holder);
    const Amount fee = chain_.flat_fee;
    auto after_fee = [&](Side s) { return s == Side::A ? st.balance(s) - fee : st.balance(s); };
    const Script penalty{HashLock{revocation_fn(), st.revocation_hash(holder), pubkey(peer)}};

    Commitment c;
    c.holder = holder;
    c.number = n;
    c.tx.inputs.push_back(TxIn{id_, {}});
    if (Amount v = after_fee(holder); v > 0)
    {
        c.tx.outputs.push_back(
            TxOut{v, make_or(Script{TimeLockRel{cfg_.csv_delay, pubkey(holder)}}, penalty)});
        c.roles.push_back(OutputRole{OutputRole::Kind::ToLocal, holder, 0});
    }
    if (Amount v = after_fee(peer); v > 0)
    {
        c.tx.outputs.push_back(TxOut{v, Script{PayToKey{pubkey(peer)}}});
        c.roles.push_back(OutputRole{OutputRole::Kind::ToRemote, peer, 0});
    }
    std::vector<Htlc> htlcs = st.pending_htlcs;
    std::sort(htlcs.begin(), htlcs.end(), [](const Htlc& x, const Htlc& y) { return x.htlc_id < y.htlc_id; });
    for (const auto& h : htlcs)
    {
        HtlcScript hs{h.hash_fn, h.payment_hash, pubkey(receiver(h.direction)), pubkey(offerer(h.direction)),
                      h.expiry_height};
        c.tx.outputs.push_back(TxOut{h.amount, make_or(Script{hs}, penalty)});
        c.roles.push_back(OutputRole{OutputRole::Kind::HtlcOutput, offerer(h.direction), h.htlc_id});
    }
    const Hash32 digest = c.tx.txid();
    c.tx.inputs[0].witness.signatures = {sign(key_a_, digest), sign(key_b_, digest)};
    return c;
}

Transaction Channel::cooperative_close(Ledger& ledger)
{
    require_open();
    const CommitmentState& st = state();
    if (!st.pending_htlcs.empty())
        fail(ChannelErrc::PendingHtlcs);
    Transaction tx;
    tx.inputs.push_back(TxIn{id_, {}});
    if (Amount v = st.balance_a - chain_.flat_fee; v > 0)
        tx.outputs.push_back(TxOut{v, Script{PayToKey{key_a_.pub}}});
    if (st.balance_b > 0)
        tx.outputs.push_back(TxOut{st.balance_b, Script{PayToKey{key_b_.pub}}});
    const Hash32 digest = tx.txid();
    tx.inputs[0].witness.signatures = {sign(key_a_, digest), sign(key_b_, digest)};
    if (!ledger.submit_tx(tx))
        fail(ChannelErrc::Rejected);
    coop_tx_ = tx;
    closing_ = Closing{Closing::Kind::Cooperative, digest, std::nullopt, false};
    phase_ = ChannelPhase{PhaseKind::CooperativeClosing, Side::A, ledger.height()};
    return tx;
}

Transaction Channel::unilateral_close(Ledger& ledger, Side party, std::uint64_t commitment_number)
{
    if (phase_.kind != PhaseKind::Open)
        fail(ChannelErrc::StalePhase);
    if (commitment_number > latest_number())
        fail(ChannelErrc::UnknownCommitment);
    Commitment c = commitment(party, commitment_number);
    if (!ledger.submit_tx(c.tx))
        fail(ChannelErrc::Rejected);
    const bool revoked = is_revoked(party, commitment_number);
    closing_ = Closing{Closing::Kind::Commitment, c.tx.txid(), c, revoked};
    phase_ = ChannelPhase{revoked ? PhaseKind::Breached : PhaseKind::UnilateralClosed, party, ledger.height()};
    return c.tx;
}

std::optional<Closing> Channel::identify_close(const Ledger& ledger, const Hash32& txid) const
{
    if (coop_tx_ && coop_tx_->txid() == txid)
        return Closing{Closing::Kind::Cooperative, txid, std::nullopt, false};
    (void)ledger;
    for (std::uint64_t n = latest_number() + 1; n-- > 0;)
        for (Side s : {Side::A, Side::B})
        {
            Commitment c = commitment(s, n);
            if (c.tx.txid() == txid)
                return Closing{Closing::Kind::Commitment, txid, std::move(c), is_revoked(s, n)};
        }
    return std::nullopt;
}

void Channel::observe(const Ledger& ledger)
{
    if (phase_.kind == PhaseKind::Settled)
        return;
    if (phase_.kind == PhaseKind::Opening && ledger.confirmation_height(id_.txid))
        phase_ = ChannelPhase{PhaseKind::Open, Side::A, ledger.height()};
    if (phase_.kind == PhaseKind::Opening)
        return;

    auto spender = ledger.spender(id_);
    if (!spender)
    {
        // Our own broadcast was dropped from the mempool; nothing is closing.
        if (closing_ && !ledger.find_tx(closing_->txid))
        {
            closing_.reset();
            phase_ = ChannelPhase{PhaseKind::Open, Side::A, ledger.height()};
        }
        return;
    }
    if (!closing_ || closing_->txid != *spender)
    {
        closing_ = identify_close(ledger, *spender);
        if (!closing_)
            return;
        if (closing_->kind == Closing::Kind::Cooperative)
            phase_ = ChannelPhase{PhaseKind::CooperativeClosing, Side::A, ledger.height()};
        else
            phase_ = ChannelPhase{closing_->revoked ? PhaseKind::Breached : PhaseKind::UnilateralClosed,
                                  closing_->commitment->holder, ledger.height()};
    }

    if (!ledger.confirmation_height(closing_->txid))
        return;
    if (closing_->kind == Closing::Kind::Commitment)
    {
        const auto& c = *closing_->commitment;
        for (std::uint32_t i = 0; i < c.roles.size(); ++i)
            if (c.roles[i].kind != OutputRole::Kind::ToRemote &&
                !ledger.confirmed_spender(Outpoint{closing_->txid, i}))
                return;
    }
    phase_ = ChannelPhase{PhaseKind::Settled, phase_.by, ledger.height()};
}

std::optional<Transaction> Channel::spend_output(const Ledger& ledger, std::uint32_t index, Side beneficiary,
                                                 std::uint8_t branch, std::vector<Bytes> preimages,
                                                 Height locktime) const
{
    const Outpoint op{closing_->txid, index};
    // A queued spend may still be displaced, so only confirmed spends count.
    if (ledger.confirmed_spender(op))
        return std::nullopt;
    auto out = ledger.find_output(op);
    if (!out || out->amount <= chain_.flat_fee)
        return std::nullopt;
    Transaction tx;
    tx.inputs.push_back(TxIn{op, {}});
    tx.outputs.push_back(TxOut{out->amount - chain_.flat_fee, Script{PayToKey{pubkey(beneficiary)}}});
    tx.locktime = locktime;
    tx.inputs[0].witness.branch_selector = branch;
    tx.inputs[0].witness.preimages = std::move(preimages);
    tx.inputs[0].witness.signatures.push_back(sign(keys(beneficiary), tx.txid()));
    return tx;
}

std::optional<Transaction> Channel::sweep_to_local(const Ledger& ledger) const
{
    if (!closing_ || !closing_->commitment)
        return std::nullopt;
    const auto& c = *closing_->commitment;
    auto idx = c.output_of(OutputRole::Kind::ToLocal);
    if (!idx)
        return std::nullopt;
    return spend_output(ledger, *idx, c.holder, 0, {}, 0);
}

std::optional<Transaction> Channel::claim_htlc_output(const Ledger& ledger, std::uint64_t htlc_id,
                                                      std::span<const std::uint8_t> preimage) const
{
    if (!closing_ || !closing_->commitment)
        return std::nullopt;
    const auto& c = *closing_->commitment;
    auto idx = c.output_of(OutputRole::Kind::HtlcOutput, htlc_id);
    if (!idx)
        return std::nullopt;
    const Htlc* h = state_at(c.number).find_htlc(htlc_id);
    if (hash_digest(h->hash_fn, preimage) != h->payment_hash)
        return std::nullopt;
    return spend_output(ledger, *idx, receiver(h->direction), 0, {Bytes(preimage.begin(), preimage.end())}, 0);
}

std::optional<Transaction> Channel::refund_htlc_output(const Ledger& ledger, std::uint64_t htlc_id) const
{
    if (!closing_ || !closing_->commitment)
        return std::nullopt;
    const auto& c = *closing_->commitment;
    auto idx = c.output_of(OutputRole::Kind::HtlcOutput, htlc_id);
    if (!idx)
        return std::nullopt;
    const Htlc* h = state_at(c.number).find_htlc(htlc_id);
    return spend_output(ledger, *idx, offerer(h->direction), 0, {}, h->expiry_height);
}

Transaction Channel::punish_breach(Ledger& ledger, Side honest_party)
{
    observe(ledger);
    if (!closing_ || !closing_->commitment || !closing_->revoked || closing_->commitment->holder == honest_party)
        fail(ChannelErrc::NotRevoked);
    const Commitment& c = *closing_->commitment;
    if (auto conf = ledger.confirmation_height(closing_->txid); conf && ledger.height() >= *conf + cfg_.csv_delay)
        fail(ChannelErrc::WindowExpired);

    const Bytes key = [&] {
        const Hash32 k = revealed_keys(c.holder).at(c.number);
        return Bytes(k.begin(), k.end());
    }();

    // Every output the cheater could claim: its delayed balance and all HTLCs.
    std::vector<std::uint32_t> targets;
    for (std::uint32_t i = 0; i < c.roles.size(); ++i)
        if (c.roles[i].kind != OutputRole::Kind::ToRemote && !ledger.confirmed_spender(Outpoint{closing_->txid, i}))
            targets.push_back(i);
    if (auto local = c.output_of(OutputRole::Kind::ToLocal);
        local && ledger.confirmed_spender(Outpoint{closing_->txid, *local}))
        fail(ChannelErrc::WindowExpired);

    auto build = [&](const std::vector<std::uint32_t>& idx) {
        Transaction tx;
        Amount total = 0;
        for (auto i : idx)
        {
            tx.inputs.push_back(TxIn{Outpoint{closing_->txid, i}, {}});
            total = checked_add(total, c.tx.outputs[i].amount);
        }
        if (total <= chain_.flat_fee)
            fail(ChannelErrc::WindowExpired);
        tx.outputs.push_back(TxOut{total - chain_.flat_fee, Script{PayToKey{pubkey(honest_party)}}});
        const Hash32 digest = tx.txid();
        for (auto& in : tx.inputs)
        {
            in.witness.branch_selector = 1;
            in.witness.preimages = {key};
            in.witness.signatures = {sign(keys(honest_party), digest)};
        }
        return tx;
    };

    if (targets.empty())
        fail(ChannelErrc::WindowExpired);
    Transaction tx = build(targets);
    if (ledger.submit_tx(tx))
        return tx;
    // Something the cheater already queued could not be displaced; take the rest.
    std::vector<std::uint32_t> free;
    for (auto i : targets)
        if (!ledger.spender(Outpoint{closing_->txid, i}))
            free.push_back(i);
    if (free.empty() || free.size() == targets.size())
        fail(ChannelErrc::WindowExpired);
    tx = build(free);
    if (!ledger.submit_tx(tx))
        fail(ChannelErrc::WindowExpired);
    return tx;
}

} // namespace comit::channels
