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

#include "comit/chainlab/hash.hpp"
#include "comit/chainlab/keys.hpp"
#include "comit/crp/quote.hpp"

#include <map>
#include <optional>

namespace comit::crp {

using chainlab::HashFnSet;
using chainlab::PubKey;

inline constexpr std::size_t kMaxRouteHops = 20;

/// Expiry spacing: the recipient gets final_delta blocks, every hop towards
/// the sender adds hop_delta.
struct TimelockPolicy
{
    Height final_delta = 6;
    Height hop_delta = 6;
};

struct ChainInfo
{
    std::string chain_id;
    std::string asset;
    HashFnSet hash_fns;
};

struct NodeInfo
{
    std::string id;
    PubKey pubkey;
    Hash32 onion_pubkey{};
    std::vector<RateQuote> quotes;
};

/// Directed channel: `from` can push up to `capacity` to `to` on `chain_id`.
struct Edge
{
    std::string from;
    std::string to;
    std::string chain_id;
    Amount capacity = 0;
};

class Graph
{
public:
    void add_chain(ChainInfo chain);
    void add_node(NodeInfo node);
    void add_edge(Edge edge);

    const std::map<std::string, ChainInfo>& chains() const { return chains_; }
    const std::map<std::string, NodeInfo>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const ChainInfo* chain(const std::string& id) const;
    const NodeInfo* node(const std::string& id) const;
    /// First quote of `node` converting asset_in into asset_out.
    const RateQuote* quote(const std::string& node, const std::string& asset_in, const std::string& asset_out) const;

private:
    std::map<std::string, ChainInfo> chains_;
    std::map<std::string, NodeInfo> nodes_;
    std::vector<Edge> edges_;
};

struct HopSpec
{
    /// Node receiving this hop (an LP, or the recipient on the last hop).
    std::string node;
    PubKey lp_pubkey;
    std::string chain_id;
    std::string asset;
    /// Amount the HTLC of this hop carries.
    Amount forward_amount = 0;
    /// Fee the receiving node keeps when forwarding; zero on the last hop.
    Amount fee_charged = 0;
    /// Blocks after dispatch-time height at which this hop's HTLC expires.
    Height expiry_delta = 0;
    /// Quote the receiving node applies; identity on the last hop.
    RateQuote quote;
};

struct Route
{
    std::string sender;
    std::vector<HopSpec> hops;
    /// Hash functions available on every chain of the route.
    HashFnSet hash_fns;

    Amount amount_in() const { return hops.empty() ? 0 : hops.front().forward_amount; }
    std::string recipient() const { return hops.empty() ? sender : hops.back().node; }
    /// sender, hop nodes...
    std::vector<std::string> node_path() const;
    std::vector<RateQuote> quotes() const;
};

struct PathStep
{
    std::string node;
    std::string chain_id;
};

/// Prices a fixed path sender -> steps[0].node -> ... with amounts and
/// expiry deltas. Returns nothing if a quote, channel, capacity or common hash
/// function is missing.
std::optional<Route> price_path(const Graph& g, const std::string& sender, std::span<const PathStep> steps,
                                Amount amount_out, const std::string& asset_out, TimelockPolicy policy = {});

/// Cheapest admissible route by sender cost. Ties: fewer hops, then the node
/// id sequence, then the chain id sequence, both lexicographic.
std::optional<Route> find_route(const Graph& g, const std::string& sender, const std::string& recipient,
                                Amount amount_out, const std::string& asset_out, TimelockPolicy policy = {});

/// True if forwarding along `route` per its quotes delivers at least every
/// downstream hop amount and `amount_out` at the end.
bool no_shortfall(const Route& route, Amount amount_out);

} // namespace comit::crp
