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

#include "comit/crp/route.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

namespace comit::crp {

void Graph::add_chain(ChainInfo chain)
{
    auto id = chain.chain_id;
    chains_[id] = std::move(chain);
}

void Graph::add_node(NodeInfo node)
{
    auto id = node.id;
    nodes_[id] = std::move(node);
}

void Graph::add_edge(Edge edge)
{
    edges_.push_back(std::move(edge));
}

const ChainInfo* Graph::chain(const std::string& id) const
{
    auto it = chains_.find(id);
    return it == chains_.end() ? nullptr : &it->second;
}

const NodeInfo* Graph::node(const std::string& id) const
{
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const RateQuote* Graph::quote(const std::string& node, const std::string& asset_in, const std::string& asset_out) const
{
    const NodeInfo* n = this->node(node);
    if (!n)
        return nullptr;
    for (const auto& q : n->quotes)
        if (q.asset_in == asset_in && q.asset_out == asset_out && q.valid())
            return &q;
    return nullptr;
}

std::vector<std::string> Route::node_path() const
{
    std::vector<std::string> out{sender};
    for (const auto& h : hops)
        out.push_back(h.node);
    return out;
}

std::vector<RateQuote> Route::quotes() const
{
    std::vector<RateQuote> out;
    for (const auto& h : hops)
        out.push_back(h.quote);
    return out;
}

namespace {

using Mask = std::uint8_t;

Mask mask_of(const HashFnSet& fns)
{
    Mask m = 0;
    for (auto f : fns)
        m |= static_cast<Mask>(1u << static_cast<unsigned>(f));
    return m;
}

HashFnSet set_of(Mask m)
{
    HashFnSet out;
    for (auto f : {chainlab::HashFnId::Sha256, chainlab::HashFnId::Sha3_256, chainlab::HashFnId::Blake2b_256})
        if (m & (1u << static_cast<unsigned>(f)))
            out.insert(f);
    return out;
}

Amount best_capacity(const Graph& g, const std::string& from, const std::string& to, const std::string& chain)
{
    std::optional<Amount> best;
    for (const auto& e : g.edges())
        if (e.from == from && e.to == to && e.chain_id == chain)
            best = std::max(best.value_or(0), e.capacity);
    return best.value_or(0);
}

bool has_edge(const Graph& g, const std::string& from, const std::string& to, const std::string& chain)
{
    return std::any_of(g.edges().begin(), g.edges().end(), [&](const Edge& e) {
        return e.from == from && e.to == to && e.chain_id == chain;
    });
}

struct Label
{
    std::string node;
    Amount amount = 0;
    Mask mask = 0;
    std::vector<PathStep> suffix;
    std::set<std::string> visited;
    bool alive = true;

    std::vector<std::string> node_key() const
    {
        std::vector<std::string> k{node};
        for (const auto& s : suffix)
            k.push_back(s.node);
        return k;
    }
    std::vector<std::string> chain_key() const
    {
        std::vector<std::string> k;
        for (const auto& s : suffix)
            k.push_back(s.chain_id);
        return k;
    }
};

/// Order on labels at the same node (same prefix): hops, node ids, chain ids.
bool tie_before_or_equal(const Label& a, const Label& b)
{
    return std::make_tuple(a.suffix.size(), a.node_key(), a.chain_key()) <=
           std::make_tuple(b.suffix.size(), b.node_key(), b.chain_key());
}

bool dominates(const Label& a, const Label& b, const Graph& g)
{
    if (a.amount > b.amount || (a.mask & b.mask) != b.mask)
        return false;
    // Extensions price against the first hop's asset, so only compare like with like.
    if (g.chain(a.suffix.front().chain_id)->asset != g.chain(b.suffix.front().chain_id)->asset)
        return false;
    if (!std::includes(b.visited.begin(), b.visited.end(), a.visited.begin(), a.visited.end()))
        return false;
    return tie_before_or_equal(a, b);
}

} // namespace

std::optional<Route> price_path(const Graph& g, const std::string& sender, std::span<const PathStep> steps,
                                Amount amount_out, const std::string& asset_out, TimelockPolicy policy)
{
    const std::size_t n = steps.size();
    if (n == 0 || n > kMaxRouteHops)
        return std::nullopt;
    std::set<std::string> seen{sender};
    Mask mask = 0xff;
    for (const auto& s : steps)
    {
        const ChainInfo* c = g.chain(s.chain_id);
        if (!c || !seen.insert(s.node).second)
            return std::nullopt;
        mask &= mask_of(c->hash_fns);
    }
    if (mask == 0 || g.chain(steps.back().chain_id)->asset != asset_out)
        return std::nullopt;

    Route route;
    route.sender = sender;
    route.hash_fns = set_of(mask);
    route.hops.resize(n);
    Amount next = amount_out;
    for (std::size_t i = n; i-- > 0;)
    {
        HopSpec& hop = route.hops[i];
        hop.node = steps[i].node;
        hop.chain_id = steps[i].chain_id;
        hop.asset = g.chain(hop.chain_id)->asset;
        if (const NodeInfo* info = g.node(hop.node))
            hop.lp_pubkey = info->pubkey;
        if (i + 1 == n)
            hop.quote = RateQuote::identity(hop.asset);
        else
        {
            const RateQuote* q = g.quote(hop.node, hop.asset, route.hops[i + 1].asset);
            if (!q)
                return std::nullopt;
            hop.quote = *q;
        }
        try
        {
            auto cost = quote_cost(hop.quote, next);
            hop.forward_amount = cost.amount_in;
            hop.fee_charged = cost.fee;
        }
        catch (const AmountOverflow&)
        {
            return std::nullopt;
        }
        const std::string& from = i == 0 ? sender : steps[i - 1].node;
        if (!has_edge(g, from, hop.node, hop.chain_id) || best_capacity(g, from, hop.node, hop.chain_id) < hop.forward_amount)
            return std::nullopt;
        hop.expiry_delta = policy.final_delta + static_cast<Height>(n - 1 - i) * policy.hop_delta;
        next = hop.forward_amount;
    }
    return route;
}

std::optional<Route> find_route(const Graph& g, const std::string& sender, const std::string& recipient,
                                Amount amount_out, const std::string& asset_out, TimelockPolicy policy)
{
    if (amount_out == 0 || sender == recipient)
        return std::nullopt;

    std::vector<Label> labels;
    std::map<std::string, std::vector<std::size_t>> at_node;
    std::deque<std::size_t> work;
    std::vector<Label> complete;

    auto extend = [&](const std::string& v, Amount amount, Mask mask, const std::vector<PathStep>& suffix,
                      const std::set<std::string>& visited) {
        for (const auto& e : g.edges())
        {
            if (e.to != v || visited.contains(e.from))
                continue;
            const ChainInfo* c = g.chain(e.chain_id);
            if (!c)
                continue;
            Label next;
            next.node = e.from;
            next.mask = mask & mask_of(c->hash_fns);
            if (next.mask == 0 || suffix.size() + 1 > kMaxRouteHops)
                continue;
            if (suffix.empty())
            {
                if (c->asset != asset_out)
                    continue;
                next.amount = amount;
            }
            else
            {
                const RateQuote* q = g.quote(v, c->asset, g.chain(suffix.front().chain_id)->asset);
                if (!q)
                    continue;
                try
                {
                    next.amount = quote_cost(*q, amount).amount_in;
                }
                catch (const AmountOverflow&)
                {
                    continue;
                }
            }
            if (e.capacity < next.amount)
                continue;
            next.suffix.reserve(suffix.size() + 1);
            next.suffix.push_back(PathStep{v, e.chain_id});
            next.suffix.insert(next.suffix.end(), suffix.begin(), suffix.end());
            next.visited = visited;
            next.visited.insert(e.from);

            if (e.from == sender)
            {
                complete.push_back(std::move(next));
                continue;
            }
            auto& bucket = at_node[e.from];
            bool dominated = false;
            for (auto idx : bucket)
                if (labels[idx].alive && dominates(labels[idx], next, g))
                {
                    dominated = true;
                    break;
                }
            if (dominated)
                continue;
            for (auto idx : bucket)
                if (labels[idx].alive && dominates(next, labels[idx], g))
                    labels[idx].alive = false;
            bucket.push_back(labels.size());
            work.push_back(labels.size());
            labels.push_back(std::move(next));
        }
    };

    extend(recipient, amount_out, 0xff, {}, {recipient});
    while (!work.empty())
    {
        const std::size_t idx = work.front();
        work.pop_front();
        if (!labels[idx].alive)
            continue;
        // Copy: extend() may grow `labels`.
        const Label cur = labels[idx];
        extend(cur.node, cur.amount, cur.mask, cur.suffix, cur.visited);
    }

    if (complete.empty())
        return std::nullopt;
    auto best = std::min_element(complete.begin(), complete.end(), [](const Label& a, const Label& b) {
        return std::make_tuple(a.amount, a.suffix.size(), a.node_key(), a.chain_key()) <
               std::make_tuple(b.amount, b.suffix.size(), b.node_key(), b.chain_key());
    });
    return price_path(g, sender, best->suffix, amount_out, asset_out, policy);
}

bool no_shortfall(const Route& route, Amount amount_out)
{
    if (route.hops.empty())
        return false;
    for (std::size_t i = 0; i + 1 < route.hops.size(); ++i)
        if (apply_quote(route.hops[i].quote, route.hops[i].forward_amount) < route.hops[i + 1].forward_amount)
            return false;
    return route.hops.back().forward_amount >= amount_out;
}

} // namespace comit::crp
