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
#include "comit/crp/route.hpp"

#include <stdexcept>

namespace comit::simnet {

using Tick = std::uint64_t;

enum class Role
{
    User,
    LiquidityProvider,
    Business,
};

std::string_view to_string(Role r);

enum class FaultKind
{
    RefuseForward,
    StallSecret,
    BroadcastRevoked,
    DropGossip,
    Crash,
};

std::string_view to_string(FaultKind k);

struct ChainSpec
{
    chainlab::ChainParams params;
    Height start_height = 0;
};

struct ActorSpec
{
    std::string id;
    Role role = Role::User;
    /// chain id -> genesis coins.
    std::map<std::string, Amount> genesis;
};

struct ChannelSpec
{
    std::string a;
    std::string b;
    std::string chain;
    Amount fund_a = 0;
    Amount fund_b = 0;
    Height csv_delay = 6;
};

struct QuoteSpec
{
    std::string lp;
    crp::RateQuote quote;
};

struct PaymentSpec
{
    Tick tick = 0;
    std::string from;
    std::string to;
    Amount amount = 0;
    std::string asset;
    chainlab::HashFnId hash_fn = chainlab::HashFnId::Sha256;
};

struct FaultSpec
{
    Tick tick = 0;
    FaultKind kind = FaultKind::RefuseForward;
    std::string target;
    /// Ticks offline; Crash only.
    Tick duration = 0;
};

/// Chain `chain` mines one block at every tick t >= offset with
/// (t - offset) % interval == 0, tick 0 excluded.
struct MiningSpec
{
    std::string chain;
    Tick interval = 1;
    Tick offset = 0;
};

/// Cooperative close of channels[channel], retried until it succeeds.
struct CloseSpec
{
    Tick tick = 0;
    std::size_t channel = 0;
};

struct Scenario
{
    std::string name;
    std::uint64_t seed = 0;
    crp::TimelockPolicy policy{};
    std::vector<ChainSpec> chains;
    std::vector<ActorSpec> actors;
    std::vector<ChannelSpec> channels;
    std::vector<QuoteSpec> quotes;
    std::vector<PaymentSpec> payments;
    std::vector<FaultSpec> faults;
    /// Chains without an entry mine every block_interval ticks.
    std::vector<MiningSpec> mining;
    std::vector<CloseSpec> closes;

    const ChainSpec* chain(const std::string& id) const;
    const ActorSpec* actor(const std::string& id) const;
    MiningSpec mining_for(const std::string& chain_id) const;
};

enum class DiagnosticKind
{
    ParseError,
    UnknownReference,
    ConstraintViolation,
};

std::string_view to_string(DiagnosticKind k);

struct Diagnostic
{
    DiagnosticKind kind = DiagnosticKind::ParseError;
    /// JSON path of the offending field, e.g. "channels[2].b".
    std::string path;
    std::string message;

    std::string str() const;
};

class ScenarioError : public std::runtime_error
{
public:
    explicit ScenarioError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Parses and checks a scenario document. Throws ScenarioError listing every
/// problem found.
Scenario validate_scenario(std::string_view text);

/// Canonical JSON form; validate_scenario(to_json_text(s)) reproduces `s`.
std::string to_json_text(const Scenario& s);

} // namespace comit::simnet
