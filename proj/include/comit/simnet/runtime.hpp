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

#include "comit/crp/gossip.hpp"
#include "comit/simnet/scenario.hpp"
#include "comit/swap/payment.hpp"

#include <variant>

namespace comit::simnet {

using EventValue = std::variant<std::uint64_t, std::string>;

/// One record of the report stream: channel lifecycle (open, update, fulfill,
/// fail, close, breach, punish) and payment lifecycle (dispatched, hop-added,
/// settled, refunded, breach-detected) plus fault activations.
struct EventRecord
{
    Tick tick = 0;
    std::string kind;
    std::vector<std::pair<std::string, EventValue>> fields;
};

struct HopRecord
{
    std::string offerer;
    std::string receiver;
    std::string chain;
    Amount amount = 0;
    Height expiry = 0;
    swap::HopStatus status = swap::HopStatus::Unsent;
    std::size_t onchain_txs = 0;
};

struct PaymentRecord
{
    std::size_t index = 0;
    Tick tick = 0;
    std::string from;
    std::string to;
    Amount amount = 0;
    std::string asset;
    /// "settled", "refunded", or "mixed"/"pending" when atomicity broke.
    std::string outcome;
    /// Why it was refunded: a dispatch refusal, "no-route", "sender-offline",
    /// "expired", ...
    std::string reason;
    std::optional<std::size_t> failed_hop;
    /// What the sender committed on the first hop.
    Amount amount_in = 0;
    std::vector<std::string> path;
    std::vector<HopRecord> hops;
    std::optional<Tick> resolved_tick;
};

struct BalanceRecord
{
    Amount initial = 0;
    /// Spendable by key on-chain.
    Amount onchain = 0;
    /// Unspent channel-closing outputs the actor can still claim.
    Amount locked = 0;
    /// Balance in open channels, counting pending HTLCs it offered.
    Amount channel = 0;
    Amount fees_authorized = 0;
    /// Net flow owed to the actor by settled payments.
    std::int64_t entitled = 0;

    Amount final_total() const { return onchain + locked + channel; }
};

struct ChainRecord
{
    std::string id;
    std::string asset;
    Height height = 0;
    std::size_t onchain_txs = 0;
    Amount burned_fees = 0;
};

struct ChannelRecord
{
    std::size_t index = 0;
    std::string a;
    std::string b;
    std::string chain;
    channels::PhaseKind phase = channels::PhaseKind::Open;
    std::uint64_t commitment_number = 0;
    Amount balance_a = 0;
    Amount balance_b = 0;
};

struct GossipRecord
{
    Tick tick = 0;
    crp::GossipStats stats;
};

struct FaultRecord
{
    Tick tick = 0;
    FaultKind kind = FaultKind::RefuseForward;
    std::string target;
    std::string effect;
};

struct Violation
{
    /// conservation, channel-conservation, atomicity, non-terminal,
    /// honest-loss, reconcile or internal.
    std::string kind;
    Tick tick = 0;
    std::string detail;
};

struct Report
{
    std::string name;
    std::uint64_t seed = 0;
    Tick final_tick = 0;
    std::vector<PaymentRecord> payments;
    /// actor -> asset -> balances.
    std::map<std::string, std::map<std::string, BalanceRecord>> balances;
    /// asset -> on-chain value nobody in the scenario can claim.
    std::map<std::string, Amount> unattributed;
    std::vector<ChainRecord> chains;
    std::vector<ChannelRecord> channels;
    std::vector<GossipRecord> gossip;
    std::vector<FaultRecord> faults;
    std::vector<EventRecord> events;
    /// False when several actors misbehave; the honest-loss check is skipped.
    bool honest_loss_checked = true;
    std::vector<Violation> violations;
    /// SHA-256 of the JSON report without this field.
    std::string digest;

    std::size_t onchain_tx_count() const;
    bool has_violation(std::string_view kind) const;
};

struct RunOptions
{
    /// Ticks allowed after the last scheduled event before the run is cut
    /// short with a non-terminal violation.
    Tick max_idle_ticks = 2000;
};

/// Runs `scenario` to quiescence. Deterministic in the scenario alone.
Report run_scenario(const Scenario& scenario, const RunOptions& options = {});

std::string to_json(const Report& report);
std::string to_text(const Report& report);

} // namespace comit::simnet
