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

#include "comit/swap/payment.hpp"

#include "comit/chainlab/hash.hpp"

namespace comit::swap {

using channels::ChannelError;
using channels::PhaseKind;
using chainlab::Transaction;

InvoiceSecret make_invoice_from_secret(std::string recipient, Amount amount, std::string asset, HashFnId hash_fn,
                                       const Hash32& secret)
{
    InvoiceSecret out;
    out.invoice = Invoice{std::move(recipient), amount, std::move(asset), hash_fn,
                          chainlab::hash_digest(hash_fn, secret)};
    out.secret = secret;
    return out;
}

std::vector<Height> stack_expiries(const Route& route, const std::map<std::string, Height>& heights,
                                   TimelockPolicy policy)
{
    const std::size_t n = route.hops.size();
    std::vector<Height> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = heights.at(route.hops[i].chain_id) + policy.final_delta + (n - 1 - i) * policy.hop_delta;
    return out;
}

std::string_view to_string(SwapErrc e)
{
    switch (e)
    {
    case SwapErrc::UnsupportedHashFunction: return "unsupported-hash-function";
    case SwapErrc::BadPreimage: return "bad-preimage";
    case SwapErrc::NotExpired: return "not-expired";
    case SwapErrc::InvalidState: return "invalid-state";
    case SwapErrc::EmptyRoute: return "empty-route";
    }
    return "unknown";
}

std::string_view to_string(HopStatus s)
{
    switch (s)
    {
    case HopStatus::Unsent: return "unsent";
    case HopStatus::Offered: return "offered";
    case HopStatus::Fulfilled: return "fulfilled";
    case HopStatus::Failed: return "failed";
    case HopStatus::ClaimedOnChain: return "claimed-onchain";
    case HopStatus::RefundedOnChain: return "refunded-onchain";
    }
    return "unknown";
}

std::string_view to_string(AttemptStatus s)
{
    switch (s)
    {
    case AttemptStatus::Pending: return "pending";
    case AttemptStatus::Settled: return "settled";
    case AttemptStatus::Refunded: return "refunded";
    }
    return "unknown";
}

std::string_view to_string(RefusalReason r)
{
    switch (r)
    {
    case RefusalReason::None: return "none";
    case RefusalReason::Refused: return "refused";
    case RefusalReason::NoChannel: return "no-channel";
    case RefusalReason::ChannelRejected: return "channel-rejected";
    case RefusalReason::BadOnion: return "bad-onion";
    case RefusalReason::FeeTooLow: return "fee-too-low";
    case RefusalReason::ExpiryTooShort: return "expiry-too-short";
    case RefusalReason::WrongAmount: return "wrong-amount";
    case RefusalReason::Offline: return "offline";
    }
    return "unknown";
}

void update_status(PaymentAttempt& attempt)
{
    bool all_paid = !attempt.hops.empty();
    bool all_returned = true;
    for (const auto& h : attempt.hops)
    {
        const bool paid = h.status == HopStatus::Fulfilled || h.status == HopStatus::ClaimedOnChain;
        const bool returned = h.status == HopStatus::Unsent || h.status == HopStatus::Failed ||
                              h.status == HopStatus::RefundedOnChain;
        all_paid = all_paid && paid;
        all_returned = all_returned && returned;
    }
    if (all_paid)
        attempt.status = AttemptStatus::Settled;
    else if (all_returned)
        attempt.status = AttemptStatus::Refunded;
    else
        attempt.status = AttemptStatus::Pending;
}

namespace {

crp::HopPayload payload_for(const Route& route, std::size_t i)
{
    const std::size_t n = route.hops.size();
    const auto& hop = route.hops[i];
    crp::HopPayload p;
    const auto& described = i + 1 < n ? route.hops[i + 1] : hop;
    p.next_node = i + 1 < n ? described.node : "";
    p.chain_id = described.chain_id;
    p.asset = described.asset;
    p.amount_to_forward = described.forward_amount;
    p.expiry_delta = described.expiry_delta;
    p.rate_num = hop.quote.rate_num;
    p.rate_den = hop.quote.rate_den;
    p.base_fee = hop.quote.base_fee;
    p.fee_ppm = hop.quote.fee_ppm;
    return p;
}

bool same_terms(const crp::RateQuote& q, const crp::HopPayload& p)
{
    return q.rate_num == p.rate_num && q.rate_den == p.rate_den && q.base_fee == p.base_fee &&
           q.fee_ppm == p.fee_ppm;
}

/// Quote of `node` converting `asset_in` to `asset_out` whose terms match the
/// ones the sender priced with.
const crp::RateQuote* matching_quote(const Network& net, const std::string& node, const std::string& asset_in,
                                     const crp::HopPayload& p)
{
    for (const auto& q : net.quotes(node))
        if (q.asset_in == asset_in && q.asset_out == p.asset && same_terms(q, p))
            return &q;
    return nullptr;
}

Channel& hop_channel(Network& net, const HopState& hop)
{
    if (!hop.channel)
        throw SwapError(SwapErrc::InvalidState);
    return net.slot(*hop.channel).channel;
}

void require_offered(const PaymentAttempt& attempt, std::size_t i)
{
    if (i >= attempt.hops.size() || attempt.hops[i].status != HopStatus::Offered)
        throw SwapError(SwapErrc::InvalidState);
}

bool submit(chainlab::Ledger& ledger, HopState& hop, const std::optional<Transaction>& tx)
{
    if (!tx)
        return false;
    if (!ledger.submit_tx(*tx).accepted())
        return false;
    hop.onchain_txs.push_back(tx->txid());
    return true;
}

/// Makes sure the channel of `hop` is closed on-chain, broadcasting the latest
/// commitment of `closer` if nobody has closed it yet.
void ensure_closed(Network& net, HopState& hop, channels::Side closer)
{
    auto& ledger = net.ledger(hop.chain_id);
    Channel& ch = hop_channel(net, hop);
    ch.observe(ledger);
    if (ch.phase().kind == PhaseKind::Open)
    {
        if (ch.revocation_pending())
            ch.complete_revocation();
        hop.onchain_txs.push_back(ch.unilateral_close(ledger, closer, ch.latest_number()).txid());
    }
}

void sweep_own_balance(Network& net, HopState& hop, channels::Side party)
{
    auto& ledger = net.ledger(hop.chain_id);
    const Channel& ch = hop_channel(net, hop);
    if (ch.closing() && ch.closing()->commitment && ch.closing()->commitment->holder == party)
        submit(ledger, hop, ch.sweep_to_local(ledger));
}

} // namespace

void fulfill_hop(Network& net, PaymentAttempt& attempt, std::size_t i, const Hash32& secret)
{
    require_offered(attempt, i);
    auto& hop = attempt.hops[i];
    hop_channel(net, hop).fulfill_htlc(*hop.htlc_id, secret);
    hop.status = HopStatus::Fulfilled;
    attempt.revealed_secret = secret;
    update_status(attempt);
}

void fail_hop(Network& net, PaymentAttempt& attempt, std::size_t i)
{
    require_offered(attempt, i);
    auto& hop = attempt.hops[i];
    hop_channel(net, hop).fail_htlc(*hop.htlc_id);
    hop.status = HopStatus::Failed;
    update_status(attempt);
}

DispatchResult dispatch_payment(Network& net, const Invoice& invoice, const Route& route, const Hash32& session_key,
                                const DispatchOptions& options)
{
    const std::size_t n = route.hops.size();
    if (n == 0)
        throw SwapError(SwapErrc::EmptyRoute);
    if (!route.hash_fns.contains(invoice.hash_fn))
        throw SwapError(SwapErrc::UnsupportedHashFunction);
    for (const auto& hop : route.hops)
        if (!net.ledger(hop.chain_id).params().hash_fns.contains(invoice.hash_fn))
            throw SwapError(SwapErrc::UnsupportedHashFunction);

    DispatchResult result;
    PaymentAttempt& a = result.attempt;
    a.route = route;
    a.invoice = invoice;
    a.hops.resize(n);

    std::vector<Hash32> pubkeys;
    std::vector<crp::HopPayload> payloads;
    for (std::size_t i = 0; i < n; ++i)
    {
        pubkeys.push_back(net.node(route.hops[i].node).onion.pub);
        payloads.push_back(payload_for(route, i));
    }
    crp::OnionPacket packet = crp::onion_create(pubkeys, payloads, session_key, invoice.payment_hash);

    auto stop = [&](std::size_t failed, RefusalReason why) {
        a.failed_hop = failed;
        result.refusal = why;
        for (std::size_t j = std::min(failed + 1, n); j-- > 0;)
            if (a.hops[j].status == HopStatus::Offered)
                fail_hop(net, a, j);
        update_status(a);
        return result;
    };

    // The sender's own hop, from the route.
    const auto expiries = stack_expiries(route, net.heights(), options.policy);
    std::string offerer = route.sender;
    std::string receiver = route.hops[0].node;
    std::string chain_id = route.hops[0].chain_id;
    Amount amount = route.hops[0].forward_amount;
    Height expiry = expiries[0];

    for (std::size_t i = 0; i < n; ++i)
    {
        auto& hop = a.hops[i];
        hop.offerer = offerer;
        hop.receiver = receiver;
        hop.chain_id = chain_id;
        hop.amount = amount;
        hop.expiry = expiry;

        if (i > 0 && options.refusing.contains(offerer))
            return stop(i, RefusalReason::Refused);
        if (options.offline.contains(receiver))
            return stop(i, RefusalReason::Offline);
        auto ref = net.find_channel(offerer, receiver, chain_id);
        if (!ref)
            return stop(i, RefusalReason::NoChannel);
        hop.channel = ref->index;
        hop.direction = ref->direction;
        try
        {
            hop.htlc_id = net.slot(ref->index).channel.add_htlc(net.ledger(chain_id), ref->direction, amount,
                                                                invoice.hash_fn, invoice.payment_hash, expiry);
        }
        catch (const ChannelError&)
        {
            return stop(i, RefusalReason::ChannelRejected);
        }
        hop.status = HopStatus::Offered;
        hop.onion = packet;

        // The receiver reads its layer.
        crp::PeelResult peeled;
        try
        {
            peeled = crp::onion_peel(packet, net.node(receiver).onion.secret, invoice.payment_hash);
        }
        catch (const crp::OnionError&)
        {
            return stop(i + 1, RefusalReason::BadOnion);
        }
        const auto& p = peeled.payload;
        const Height in_height = net.ledger(chain_id).height();
        const std::string& in_asset = net.ledger(chain_id).params().asset_id;

        if (!peeled.next)
        {
            if (options.refusing.contains(receiver))
                return stop(n, RefusalReason::Refused);
            if (i + 1 != n || receiver != invoice.recipient)
                return stop(i + 1, RefusalReason::BadOnion);
            if (in_asset != invoice.asset || amount < invoice.amount || amount < p.amount_to_forward)
                return stop(n, RefusalReason::WrongAmount);
            if (expiry < in_height + options.policy.final_delta)
                return stop(n, RefusalReason::ExpiryTooShort);
            break;
        }
        if (i + 1 == n)
            return stop(n, RefusalReason::BadOnion);

        // Forwarding node: check the terms before offering the next hop.
        if (!net.ledgers().contains(p.chain_id) || net.ledger(p.chain_id).params().asset_id != p.asset ||
            !net.has_node(p.next_node))
            return stop(i + 1, RefusalReason::BadOnion);
        const crp::RateQuote* q = matching_quote(net, receiver, in_asset, p);
        if (!q)
            return stop(i + 1, RefusalReason::FeeTooLow);
        try
        {
            if (crp::quote_cost(*q, p.amount_to_forward).amount_in > amount)
                return stop(i + 1, RefusalReason::FeeTooLow);
        }
        catch (const crp::InvalidQuote&)
        {
            return stop(i + 1, RefusalReason::FeeTooLow);
        }
        if (expiry < in_height + p.expiry_delta + options.policy.hop_delta)
            return stop(i + 1, RefusalReason::ExpiryTooShort);

        offerer = receiver;
        receiver = p.next_node;
        chain_id = p.chain_id;
        amount = p.amount_to_forward;
        expiry = net.ledger(p.chain_id).height() + p.expiry_delta;
        packet = *peeled.next;
    }
    update_status(a);
    return result;
}

void settle_payment(Network& net, PaymentAttempt& attempt, const Hash32& secret)
{
    if (chainlab::hash_digest(attempt.invoice.hash_fn, secret) != attempt.invoice.payment_hash)
        throw SwapError(SwapErrc::BadPreimage);
    for (const auto& h : attempt.hops)
        if (h.status != HopStatus::Offered)
            throw SwapError(SwapErrc::InvalidState);
    for (std::size_t i = attempt.hops.size(); i-- > 0;)
        fulfill_hop(net, attempt, i, secret);
}

bool claim_hop_onchain(Network& net, PaymentAttempt& attempt, std::size_t i, const Hash32& secret)
{
    require_offered(attempt, i);
    auto& hop = attempt.hops[i];
    const channels::Side me = channels::receiver(hop.direction);
    ensure_closed(net, hop, me);
    auto& ledger = net.ledger(hop.chain_id);
    const Channel& ch = hop_channel(net, hop);
    const bool ok = submit(ledger, hop, ch.claim_htlc_output(ledger, *hop.htlc_id, secret));
    sweep_own_balance(net, hop, me);
    if (ok)
    {
        hop.status = HopStatus::ClaimedOnChain;
        attempt.revealed_secret = secret;
        update_status(attempt);
    }
    return ok;
}

bool refund_hop_onchain(Network& net, PaymentAttempt& attempt, std::size_t i)
{
    require_offered(attempt, i);
    auto& hop = attempt.hops[i];
    const channels::Side me = channels::offerer(hop.direction);
    ensure_closed(net, hop, me);
    auto& ledger = net.ledger(hop.chain_id);
    const Channel& ch = hop_channel(net, hop);
    const bool ok = submit(ledger, hop, ch.refund_htlc_output(ledger, *hop.htlc_id));
    sweep_own_balance(net, hop, me);
    if (ok)
    {
        hop.status = HopStatus::RefundedOnChain;
        update_status(attempt);
    }
    return ok;
}

std::optional<Hash32> find_revealed_secret(Network& net, const PaymentAttempt& attempt, std::size_t i)
{
    const auto& hop = attempt.hops.at(i);
    if (!hop.channel || !hop.htlc_id)
        return std::nullopt;
    auto& ledger = net.ledger(hop.chain_id);
    Channel& ch = net.slot(*hop.channel).channel;
    ch.observe(ledger);
    if (!ch.closing() || !ch.closing()->commitment)
        return std::nullopt;
    auto idx = ch.closing()->commitment->output_of(channels::OutputRole::Kind::HtlcOutput, *hop.htlc_id);
    if (!idx)
        return std::nullopt;
    const chainlab::Outpoint op{ch.closing()->txid, *idx};
    auto spender = ledger.spender(op);
    const Transaction* tx = spender ? ledger.find_tx(*spender) : nullptr;
    if (!tx)
        return std::nullopt;
    for (const auto& in : tx->inputs)
    {
        if (in.prevout != op)
            continue;
        for (const auto& pre : in.witness.preimages)
            if (pre.size() == 32 &&
                chainlab::hash_digest(attempt.invoice.hash_fn, pre) == attempt.invoice.payment_hash)
            {
                Hash32 secret{};
                std::copy(pre.begin(), pre.end(), secret.begin());
                return secret;
            }
    }
    return std::nullopt;
}

void refund_sweep(Network& net, PaymentAttempt& attempt, const std::set<std::string>& uncooperative)
{
    if (attempt.status != AttemptStatus::Pending)
        throw SwapError(SwapErrc::InvalidState);
    std::vector<std::size_t> expired;
    for (std::size_t i = attempt.hops.size(); i-- > 0;)
    {
        const auto& h = attempt.hops[i];
        if (h.status == HopStatus::Offered && net.ledger(h.chain_id).height() >= h.expiry)
            expired.push_back(i);
    }
    if (expired.empty())
        throw SwapError(SwapErrc::NotExpired);

    for (std::size_t i : expired)
    {
        if (!uncooperative.contains(attempt.hops[i].receiver))
            fail_hop(net, attempt, i);
        else if (!refund_hop_onchain(net, attempt, i))
            throw SwapError(SwapErrc::InvalidState);
    }

    // Mine until every submitted transaction is confirmed. The delayed-balance
    // sweeps bound this by the channel CSV delay.
    for (const auto& h : attempt.hops)
    {
        auto& ledger = net.ledger(h.chain_id);
        for (const auto& txid : h.onchain_txs)
            for (int guard = 0; guard < 10'000 && ledger.in_mempool(txid); ++guard)
                ledger.mine_blocks(1);
    }
    net.observe_all();
    update_status(attempt);
}

} // namespace comit::swap
