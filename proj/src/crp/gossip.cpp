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

#include "comit/crp/gossip.hpp"

#include "comit/chainlab/hash.hpp"

namespace comit::crp {

Bytes LpAdvert::signing_bytes() const
{
    Writer w;
    w.str("comit/lp-advert");
    w.str(node_id);
    w.raw(node_pubkey.bytes);
    w.raw(onion_pubkey);
    w.u32(static_cast<std::uint32_t>(channels.size()));
    for (const auto& c : channels)
    {
        w.str(c.chain_id);
        w.str(c.peer_id);
        w.raw(c.peer_pubkey.bytes);
        w.u64(c.capacity);
    }
    w.u32(static_cast<std::uint32_t>(quotes.size()));
    for (const auto& q : quotes)
    {
        w.str(q.asset_in);
        w.str(q.asset_out);
        w.u64(q.rate_num);
        w.u64(q.rate_den);
        w.u64(q.base_fee);
        w.u32(q.fee_ppm);
    }
    w.u64(timestamp);
    return std::move(w).take();
}

Hash32 LpAdvert::digest() const
{
    return chainlab::sha256(signing_bytes());
}

LpAdvert sign_advert(LpAdvert advert, const KeyPair& key)
{
    advert.node_pubkey = key.pub;
    advert.signature = chainlab::sign(key, advert.digest());
    return advert;
}

bool signature_valid(const LpAdvert& advert, const KeyRegistry& keys)
{
    return keys.verify(advert.node_pubkey, advert.digest(), advert.signature);
}

std::vector<LpAdvert> GossipNode::gossip_step(std::span<const LpAdvert> incoming, const KeyRegistry& keys)
{
    std::vector<LpAdvert> delta;
    for (const auto& ad : incoming)
    {
        if (!signature_valid(ad, keys))
        {
            ++invalid_dropped_;
            continue;
        }
        auto it = known_.find(ad.node_pubkey);
        if (it != known_.end() && it->second.timestamp >= ad.timestamp)
            continue;
        known_[ad.node_pubkey] = ad;
        std::erase_if(delta, [&](const LpAdvert& d) { return d.node_pubkey == ad.node_pubkey; });
        delta.push_back(ad);
    }
    return delta;
}

namespace {

bool uniform(const std::map<std::string, GossipNode>& nodes)
{
    const std::map<PubKey, LpAdvert>* first = nullptr;
    for (const auto& [id, n] : nodes)
    {
        if (!first)
            first = &n.known();
        else if (n.known() != *first)
            return false;
    }
    return true;
}

} // namespace

GossipStats run_gossip(std::map<std::string, GossipNode>& nodes,
                       const std::map<std::string, std::vector<std::string>>& peers,
                       std::map<std::string, std::vector<LpAdvert>> outbox, const KeyRegistry& keys,
                       std::size_t max_rounds, const std::set<std::string>& silent)
{
    GossipStats stats;
    // Originators hold their own adverts before anything is sent.
    for (auto& [id, ads] : outbox)
        ads = nodes[id].gossip_step(ads, keys);
    bool uniform_seen = uniform(nodes);

    for (std::size_t round = 1; round <= max_rounds; ++round)
    {
        std::map<std::string, std::vector<LpAdvert>> inbox;
        for (const auto& [id, ads] : outbox)
        {
            if (ads.empty() || silent.contains(id))
                continue;
            auto it = peers.find(id);
            if (it == peers.end())
                continue;
            for (const auto& peer : it->second)
            {
                auto& box = inbox[peer];
                box.insert(box.end(), ads.begin(), ads.end());
                stats.messages += ads.size();
            }
        }
        if (inbox.empty())
        {
            stats.rounds_to_quiescence = round - 1;
            stats.converged = uniform(nodes);
            return stats;
        }
        outbox.clear();
        for (auto& [id, box] : inbox)
            outbox[id] = nodes[id].gossip_step(box, keys);
        if (!uniform_seen && uniform(nodes))
        {
            uniform_seen = true;
            stats.rounds_to_uniform = round;
        }
    }
    stats.rounds_to_quiescence = max_rounds;
    stats.converged = uniform(nodes);
    return stats;
}

void add_adverts(Graph& g, const std::map<PubKey, LpAdvert>& adverts)
{
    for (const auto& [key, ad] : adverts)
    {
        std::set<std::string> assets;
        for (const auto& c : ad.channels)
            if (const ChainInfo* chain = g.chain(c.chain_id))
                assets.insert(chain->asset);
        NodeInfo info{ad.node_id, ad.node_pubkey, ad.onion_pubkey, {}};
        for (const auto& q : ad.quotes)
            if (q.valid() && assets.contains(q.asset_in) && assets.contains(q.asset_out))
                info.quotes.push_back(q);
        g.add_node(std::move(info));
        for (const auto& c : ad.channels)
            g.add_edge(Edge{ad.node_id, c.peer_id, c.chain_id, c.capacity});
    }
}

} // namespace comit::crp
