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

#include "comit/swap/network.hpp"

#include <random>
#include <set>

namespace comit::swap {

using chainlab::HashFnId;
using crp::Route;
using crp::TimelockPolicy;

/// What the recipient hands to the sender. The secret stays with the recipient.
struct Invoice
{
    std::string recipient;
    Amount amount = 0;
    std::string asset;
    HashFnId hash_fn = HashFnId::Sha256;
    Hash32 payment_hash{};
};

struct InvoiceSecret
{
    Invoice invoice;
    Hash32 secret{};
};

InvoiceSecret make_invoice_from_secret(std::string recipient, Amount amount, std::string asset, HashFnId hash_fn,
                                       const Hash32& secret);

template <std::uniform_random_bit_generator Rng>
InvoiceSecret make_invoice(std::string recipient, Amount amount, std::string asset, HashFnId hash_fn, Rng& rng)
{
    Hash32 secret{};
    std::uniform_int_distribution<unsigned> byte(0, 255);
    for (auto& b : secret)
        b = static_cast<std::uint8_t>(byte(rng));
    return make_invoice_from_secret(std::move(recipient), amount, std::move(asset), hash_fn, secret);
}

/// Absolute expiry per hop: hop i expires at
/// height(chain_i) + final_delta + (n - 1 - i) * hop_delta.
std::vector<Height> stack_expiries(const Route& route, const std::map<std::string, Height>& heights,
                                   TimelockPolicy policy = {});

enum class SwapErrc
{
    UnsupportedHashFunction,
    BadPreimage,
    NotExpired,
    InvalidState,
    EmptyRoute,
};

std::string_view to_string(SwapErrc e);

class SwapError : public std::runtime_error
{
public:
    explicit SwapError(SwapErrc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}
    SwapErrc code() const { return code_; }

private:
    SwapErrc code_;
};

enum class HopStatus
{
    Unsent,
    Offered,
    Fulfilled,
    Failed,
    /// On-chain resolution transactions have been submitted.
    ClaimedOnChain,
    RefundedOnChain,
};

std::string_view to_string(HopStatus s);

struct HopState
{
    std::string offerer;
    std::string receiver;
    std::string chain_id;
    Amount amount = 0;
    Height expiry = 0;
    std::optional<std::size_t> channel;
    Direction direction = Direction::AtoB;
    std::optional<std::uint64_t> htlc_id;
    HopStatus status = HopStatus::Unsent;
    /// Packet delivered to the receiver together with the HTLC.
    std::optional<crp::OnionPacket> onion;
    /// On-chain transactions submitted to resolve this hop.
    std::vector<Hash32> onchain_txs;
};

enum class AttemptStatus
{
    Pending,
    Settled,
    Refunded,
};

std::string_view to_string(AttemptStatus s);

struct PaymentAttempt
{
    Route route;
    Invoice invoice;
    std::vector<HopState> hops;
    AttemptStatus status = AttemptStatus::Pending;
    /// Hop that could not be added during dispatch; hops.size() when the
    /// recipient rejected the last one.
    std::optional<std::size_t> failed_hop;
    /// Secret as learned by the hop receivers, once revealed.
    std::optional<Hash32> revealed_secret;
};

/// Why a node would not forward or accept a hop.
enum class RefusalReason
{
    None,
    Refused,
    NoChannel,
    ChannelRejected,
    BadOnion,
    FeeTooLow,
    ExpiryTooShort,
    WrongAmount,
    Offline,
};

std::string_view to_string(RefusalReason r);

struct DispatchOptions
{
    /// Nodes that decline to forward (or, for the recipient, to accept).
    std::set<std::string> refusing;
    /// Nodes that cannot sign anything; a hop towards them is never added.
    std::set<std::string> offline;
    TimelockPolicy policy{};
};

struct DispatchResult
{
    PaymentAttempt attempt;
    RefusalReason refusal = RefusalReason::None;
};

/// Locks the route hop by hop. Each receiver peels the onion it got with the
/// incoming HTLC and checks amount, quote and expiry before forwarding. On the
/// first refusal every hop already locked is failed cooperatively, back
/// towards the sender, and the attempt ends Refunded with failed_hop set.
DispatchResult dispatch_payment(Network& net, const Invoice& invoice, const Route& route,
                                const Hash32& session_key, const DispatchOptions& options = {});

/// Receiver of hop `i` redeems it off-chain with the secret.
void fulfill_hop(Network& net, PaymentAttempt& attempt, std::size_t i, const Hash32& secret);
/// Receiver of hop `i` releases it off-chain.
void fail_hop(Network& net, PaymentAttempt& attempt, std::size_t i);

/// Recipient reveals `secret`; every hop is fulfilled from the last to the
/// first. A wrong secret throws BadPreimage and changes nothing.
void settle_payment(Network& net, PaymentAttempt& attempt, const Hash32& secret);

/// Receiver of hop `i` force-closes the channel (if still open) and submits
/// the HTLC claim with the secret and its delayed-balance sweep. Returns
/// whether the claim entered the mempool.
bool claim_hop_onchain(Network& net, PaymentAttempt& attempt, std::size_t i, const Hash32& secret);
/// Offerer of hop `i` force-closes the channel (if still open) and submits
/// the HTLC refund and its delayed-balance sweep. The refund is mined once the
/// expiry is reached. Returns whether the refund entered the mempool.
bool refund_hop_onchain(Network& net, PaymentAttempt& attempt, std::size_t i);

/// Secret carried by an on-chain spend (queued or confirmed) of hop `i`'s
/// HTLC output, if any.
std::optional<Hash32> find_revealed_secret(Network& net, const PaymentAttempt& attempt, std::size_t i);

/// Refunds every offered hop whose expiry has been reached: cooperatively
/// when the receiver cooperates, otherwise on-chain, mining the affected
/// chains until the refunds confirm. Throws NotExpired if no hop has expired.
void refund_sweep(Network& net, PaymentAttempt& attempt, const std::set<std::string>& uncooperative = {});

/// Updates attempt.status from the hop states.
void update_status(PaymentAttempt& attempt);

} // namespace comit::swap
