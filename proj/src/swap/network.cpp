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

#include "comit/swap/network.hpp"

namespace comit::swap {

Network::Network(std::shared_ptr<KeyRegistry> keys) : keys_(std::move(keys)) {}

chainlab::Ledger& Network::add_chain(ChainParams params, Height start_height)
{
    auto id = params.chain_id;
    auto [it, inserted] = ledgers_.try_emplace(id, std::move(params), keys_, start_height);
    if (!inserted)
        throw std::invalid_argument("duplicate chain " + id);
    return it->second;
}

const NodeKeys& Network::add_node(const std::string& id)
{
    auto [it, inserted] = nodes_.try_emplace(id);
    if (inserted)
    {
        it->second.key = keys_->create("node/" + id);
        it->second.onion = crp::derive_onion_keypair("node/" + id);
    }
    return it->second;
}

void Network::fund(const std::string& node, const std::string& chain_id, Amount amount)
{
    ledger(chain_id).credit_genesis(chainlab::Script{chainlab::PayToKey{this->node(node).key.pub}}, amount);
}

std::size_t Network::open_channel(const std::string& node_a, const std::string& node_b, const std::string& chain_id,
                                  Amount fund_a, Amount fund_b, channels::ChannelConfig cfg)
{
    auto ch = Channel::open(ledger(chain_id), node(node_a).key, node(node_b).key, fund_a, fund_b, cfg, true);
    channels_.push_back(ChannelSlot{node_a, node_b, std::move(ch)});
    return channels_.size() - 1;
}

const std::vector<crp::RateQuote>& Network::quotes(const std::string& node) const
{
    static const std::vector<crp::RateQuote> none;
    auto it = quotes_.find(node);
    return it == quotes_.end() ? none : it->second;
}

std::optional<ChannelRef> Network::find_channel(const std::string& from, const std::string& to,
                                                const std::string& chain_id) const
{
    for (std::size_t i = 0; i < channels_.size(); ++i)
    {
        const auto& s = channels_[i];
        if (s.channel.chain_id() != chain_id || s.channel.phase().kind != channels::PhaseKind::Open)
            continue;
        if (s.node_a == from && s.node_b == to)
            return ChannelRef{i, Direction::AtoB};
        if (s.node_b == from && s.node_a == to)
            return ChannelRef{i, Direction::BtoA};
    }
    return std::nullopt;
}

std::map<std::string, Height> Network::heights() const
{
    std::map<std::string, Height> out;
    for (const auto& [id, l] : ledgers_)
        out[id] = l.height();
    return out;
}

crp::Graph Network::graph() const
{
    crp::Graph g;
    for (const auto& [id, l] : ledgers_)
        g.add_chain(crp::ChainInfo{id, l.params().asset_id, l.params().hash_fns});
    for (const auto& [id, n] : nodes_)
        g.add_node(crp::NodeInfo{id, n.key.pub, n.onion.pub, quotes(id)});
    for (const auto& s : channels_)
    {
        if (s.channel.phase().kind != channels::PhaseKind::Open)
            continue;
        const auto& st = s.channel.state();
        const Amount reserve = ledger(s.channel.chain_id()).params().flat_fee;
        g.add_edge(crp::Edge{s.node_a, s.node_b, s.channel.chain_id(), st.balance_a - reserve});
        g.add_edge(crp::Edge{s.node_b, s.node_a, s.channel.chain_id(), st.balance_b});
    }
    return g;
}

void Network::observe_all()
{
    for (auto& s : channels_)
        s.channel.observe(ledger(s.channel.chain_id()));
}

Amount Network::onchain_balance(const std::string& node, const std::string& asset) const
{
    Amount total = 0;
    for (const auto& [id, l] : ledgers_)
        if (l.params().asset_id == asset)
            total += l.balance(this->node(node).key.pub);
    return total;
}

Amount Network::channel_balance(const std::string& node, const std::string& asset) const
{
    Amount total = 0;
    for (const auto& s : channels_)
    {
        if (ledger(s.channel.chain_id()).params().asset_id != asset)
            continue;
        if (s.channel.phase().kind != channels::PhaseKind::Open)
            continue;
        for (Side side : {Side::A, Side::B})
        {
            if (s.node(side) != node)
                continue;
            total += s.channel.state().balance(side);
            for (const auto& h : s.channel.state().pending_htlcs)
                if (channels::offerer(h.direction) == side)
                    total += h.amount;
        }
    }
    return total;
}

} // namespace comit::swap
