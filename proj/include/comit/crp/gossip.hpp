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

#include "comit/chainlab/keys.hpp"
#include "comit/crp/route.hpp"

#include <map>
#include <set>

namespace comit::crp {

using chainlab::KeyPair;
using chainlab::KeyRegistry;
using chainlab::Signature;

struct ChannelEndpoint
{
    std::string chain_id;
    std::string peer_id;
    PubKey peer_pubkey;
    /// Advisory outbound capacity towards the peer.
    Amount capacity = 0;

    bool operator==(const ChannelEndpoint&) const = default;
};

/// Signed self-description an LP floods through the network.
struct LpAdvert
{
    std::string node_id;
    PubKey node_pubkey;
    Hash32 onion_pubkey{};
    std::vector<ChannelEndpoint> channels;
    std::vector<RateQuote> quotes;
    /// Monotone per-origin sequence number.
    std::uint64_t timestamp = 0;
    Signature signature;

    /// Canonical little-endian encoding of every field except the signature.
    Bytes signing_bytes() const;
    Hash32 digest() const;
    bool operator==(const LpAdvert&) const = default;
};

LpAdvert sign_advert(LpAdvert advert, const KeyPair& key);
bool signature_valid(const LpAdvert& advert, const KeyRegistry& keys);

/// One node's view of the advert set.
class GossipNode
{
public:
    /// Merges `incoming`; returns the adverts that were new to this node and
    /// should be relayed. Adverts with bad signatures are dropped and counted.
    std::vector<LpAdvert> gossip_step(std::span<const LpAdvert> incoming, const KeyRegistry& keys);

    const std::map<PubKey, LpAdvert>& known() const { return known_; }
    std::uint64_t invalid_dropped() const { return invalid_dropped_; }

private:
    std::map<PubKey, LpAdvert> known_;
    std::uint64_t invalid_dropped_ = 0;
};

struct GossipStats
{
    /// Rounds until every node held the same advert set.
    std::size_t rounds_to_uniform = 0;
    /// Rounds until nobody had anything left to relay.
    std::size_t rounds_to_quiescence = 0;
    std::uint64_t messages = 0;
    bool converged = false;
};

/// Synchronous flooding: in each round every node sends what it learned in
/// the previous round to all its peers. `outbox` seeds round one. Nodes in
/// `silent` still learn but never relay.
GossipStats run_gossip(std::map<std::string, GossipNode>& nodes,
                       const std::map<std::string, std::vector<std::string>>& peers,
                       std::map<std::string, std::vector<LpAdvert>> outbox, const KeyRegistry& keys,
                       std::size_t max_rounds, const std::set<std::string>& silent = {});

/// Adds every advertised LP and its outbound channels to `g`. Quotes whose
/// assets are not on one of the LP's channel chains are ignored.
void add_adverts(Graph& g, const std::map<PubKey, LpAdvert>& adverts);

} // namespace comit::crp
