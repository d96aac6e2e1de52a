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

#include "comit/channels/channel.hpp"
#include "comit/crp/onion.hpp"
#include "comit/crp/route.hpp"

#include <map>
#include <memory>

namespace comit::swap {

using chainlab::ChainParams;
using chainlab::KeyRegistry;
using channels::Channel;
using channels::Direction;
using channels::Side;

struct NodeKeys
{
    chainlab::KeyPair key;
    crp::OnionKeyPair onion;
};

struct ChannelSlot
{
    std::string node_a;
    std::string node_b;
    Channel channel;

    Side side_of(const std::string& node) const { return node == node_a ? Side::A : Side::B; }
    const std::string& node(Side s) const { return s == Side::A ? node_a : node_b; }
};

struct ChannelRef
{
    std::size_t index = 0;
    /// Direction of a payment from the looked-up `from` node.
    Direction direction = Direction::AtoB;
};

/// Chains, participants and channels of one simulated world. Owns all state;
/// single-threaded.
class Network
{
public:
    explicit Network(std::shared_ptr<KeyRegistry> keys = std::make_shared<KeyRegistry>());

    chainlab::Ledger& add_chain(ChainParams params, Height start_height = 0);
    const NodeKeys& add_node(const std::string& id);
    /// Credits genesis coins to `node` on `chain_id`.
    void fund(const std::string& node, const std::string& chain_id, Amount amount);
    /// Opens and confirms a channel funded by on-chain coins of both nodes.
    std::size_t open_channel(const std::string& node_a, const std::string& node_b, const std::string& chain_id,
                             Amount fund_a, Amount fund_b, channels::ChannelConfig cfg = {});

    chainlab::Ledger& ledger(const std::string& chain_id) { return ledgers_.at(chain_id); }
    const chainlab::Ledger& ledger(const std::string& chain_id) const { return ledgers_.at(chain_id); }
    std::map<std::string, chainlab::Ledger>& ledgers() { return ledgers_; }
    const std::map<std::string, chainlab::Ledger>& ledgers() const { return ledgers_; }
    const NodeKeys& node(const std::string& id) const { return nodes_.at(id); }
    const std::map<std::string, NodeKeys>& nodes() const { return nodes_; }
    bool has_node(const std::string& id) const { return nodes_.contains(id); }
    ChannelSlot& slot(std::size_t i) { return channels_.at(i); }
    const ChannelSlot& slot(std::size_t i) const { return channels_.at(i); }
    std::vector<ChannelSlot>& slots() { return channels_; }
    const std::vector<ChannelSlot>& slots() const { return channels_; }
    const KeyRegistry& keys() const { return *keys_; }

    void set_quotes(const std::string& node, std::vector<crp::RateQuote> quotes) { quotes_[node] = std::move(quotes); }
    const std::vector<crp::RateQuote>& quotes(const std::string& node) const;

    /// First open channel between `from` and `to` on `chain_id`.
    std::optional<ChannelRef> find_channel(const std::string& from, const std::string& to,
                                           const std::string& chain_id) const;
    std::map<std::string, Height> heights() const;
    /// Routing view: chains, quotes and open channels with their current
    /// outbound balances as capacity.
    crp::Graph graph() const;
    /// Lets every channel resolve on-chain events.
    void observe_all();

    /// On-chain balance of `node` over all chains carrying `asset`.
    Amount onchain_balance(const std::string& node, const std::string& asset) const;
    /// Off-chain balance of `node` in open channels carrying `asset`, counting
    /// HTLCs it offered that are still pending.
    Amount channel_balance(const std::string& node, const std::string& asset) const;

private:
    std::shared_ptr<KeyRegistry> keys_;
    std::map<std::string, chainlab::Ledger> ledgers_;
    std::map<std::string, NodeKeys> nodes_;
    std::vector<ChannelSlot> channels_;
    std::map<std::string, std::vector<crp::RateQuote>> quotes_;
};

} // namespace comit::swap
