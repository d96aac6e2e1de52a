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

#include <doctest.h>

#include "comit/crp/gossip.hpp"
#include "comit/crp/onion.hpp"
#include "comit/crp/route.hpp"
#include "support/oracles.hpp"

#include <fstream>
#include <functional>
#include <queue>
#include <random>

using namespace comit;
using namespace comit::crp;
using chainlab::HashFnId;

namespace {

using oracle::u128;
using oracle::OnionScenario;
using oracle::random_quote;

Graph base_graph()
{
    Graph g;
    g.add_chain(ChainInfo{"btc", "BTC", {HashFnId::Sha256}});
    g.add_chain(ChainInfo{"eth", "ETH", {HashFnId::Sha256, HashFnId::Sha3_256}});
    g.add_chain(ChainInfo{"xmr", "XMR", {HashFnId::Blake2b_256}});
    g.add_chain(ChainInfo{"zec", "ZEC", {HashFnId::Sha3_256, HashFnId::Blake2b_256}});
    return g;
}

std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            out.push_back(line);
    return out;
}

} // namespace

// ---- quotes -------------------------------------------------------------------

TEST_CASE("compute_hop_amounts examples")
{
    const RateQuote identity = RateQuote::identity("BTC");
    auto one = compute_hop_amounts(std::vector<RateQuote>{identity}, 1000);
    CHECK(one == std::vector<HopAmount>{{1000, 0}});

    const RateQuote tenx{"BTC", "ETH", 10, 1, 0, 10'000};
    auto r = compute_hop_amounts(std::vector<RateQuote>{tenx}, 10'000);
    REQUIRE(r.size() == 1);
    CHECK(r[0].amount_in == 1010);
    CHECK(r[0].fee == 10);
    CHECK(apply_quote(tenx, 1010) >= 10'000);
    CHECK(apply_quote(tenx, 1009) < 10'000);

    const RateQuote five{"BTC", "BTC", 1, 1, 5, 0};
    auto two = compute_hop_amounts(std::vector<RateQuote>{five, five}, 777);
    CHECK(two[0].amount_in == 787);
    CHECK(two[1].amount_in == 782);
}

TEST_CASE("compute_hop_amounts rejects invalid quotes and overflow")
{
    CHECK_THROWS_AS(quote_cost(RateQuote{"A", "B", 0, 1, 0, 0}, 5), InvalidQuote);
    CHECK_THROWS_AS(quote_cost(RateQuote{"A", "B", 1, 1, 0, 1'000'000}, 5), InvalidQuote);
    CHECK_THROWS_AS(quote_cost(RateQuote{"A", "B", 1, 2, 0, 0}, std::numeric_limits<Amount>::max()), AmountOverflow);
    CHECK_THROWS_AS(quote_cost(RateQuote{"A", "B", 1, 1, 1, 0}, std::numeric_limits<Amount>::max()), AmountOverflow);
}

TEST_CASE("property: quote cost equals the oracle's minimal sufficient input")
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 3000; ++i)
    {
        const RateQuote q = random_quote(rng);
        const Amount out = 1 + rng() % 10'000'000;
        const HopAmount h = quote_cost(q, out);
        CHECK(static_cast<u128>(h.amount_in) == oracle::cost(q, out));
        CHECK(apply_quote(q, h.amount_in) >= out);
        CHECK(static_cast<u128>(apply_quote(q, h.amount_in)) == oracle::forward(q, h.amount_in));
    }
}

TEST_CASE("property: stacked hops never fall short")
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 1000; ++i)
    {
        std::vector<RateQuote> qs;
        const std::size_t n = 1 + rng() % 6;
        for (std::size_t k = 0; k < n; ++k)
            qs.push_back(random_quote(rng));
        const Amount out = 1 + rng() % 1'000'000;
        auto amounts = compute_hop_amounts(qs, out);
        for (std::size_t k = 0; k < n; ++k)
        {
            const Amount next = k + 1 < n ? amounts[k + 1].amount_in : out;
            CHECK(apply_quote(qs[k], amounts[k].amount_in) >= next);
            CHECK(amounts[k].amount_in >= amounts[k].fee);
        }
    }
}

// ---- routing ------------------------------------------------------------------

TEST_CASE("find_route: direct channel")
{
    Graph g = base_graph();
    g.add_edge(Edge{"alice", "bob", "btc", 10'000});
    auto r = find_route(g, "alice", "bob", 1000, "BTC");
    REQUIRE(r);
    REQUIRE(r->hops.size() == 1);
    CHECK(r->hops[0].node == "bob");
    CHECK(r->hops[0].forward_amount == 1000);
    CHECK(r->amount_in() == 1000);
    CHECK(r->hops[0].expiry_delta == 6);
    CHECK_FALSE(find_route(g, "alice", "bob", 10'001, "BTC"));
    CHECK_FALSE(find_route(g, "alice", "bob", 1000, "ETH"));
    CHECK_FALSE(find_route(g, "bob", "alice", 1000, "BTC"));
}

TEST_CASE("find_route: cheaper LP wins")
{
    Graph g = base_graph();
    g.add_node(NodeInfo{"lp1", {}, {}, {RateQuote{"BTC", "BTC", 1, 1, 100, 0}}});
    g.add_node(NodeInfo{"lp2", {}, {}, {RateQuote{"BTC", "BTC", 1, 1, 200, 0}}});
    for (const char* lp : {"lp1", "lp2"})
    {
        g.add_edge(Edge{"alice", lp, "btc", 100'000});
        g.add_edge(Edge{lp, "bob", "btc", 100'000});
    }
    auto r = find_route(g, "alice", "bob", 5000, "BTC");
    REQUIRE(r);
    CHECK(r->node_path() == std::vector<std::string>{"alice", "lp1", "bob"});
    CHECK(r->amount_in() == 5100);
    CHECK(r->hops[0].fee_charged == 100);
    CHECK(r->hops[0].expiry_delta == 12);
    CHECK(r->hops[1].expiry_delta == 6);
}

TEST_CASE("find_route: hash function admissibility forces a longer path")
{
    Graph g = base_graph();
    // Cheap path alice -btc-> lp1 -xmr-> bob shares no hash function.
    g.add_node(NodeInfo{"lp1", {}, {}, {RateQuote{"BTC", "XMR", 1, 1, 0, 0}}});
    g.add_edge(Edge{"alice", "lp1", "btc", 100'000});
    g.add_edge(Edge{"lp1", "bob", "xmr", 100'000});
    CHECK_FALSE(find_route(g, "alice", "bob", 1000, "XMR"));

    // eth -> zec -> xmr: eth and xmr have nothing in common either.
    g.add_node(NodeInfo{"lp2", {}, {}, {RateQuote{"ETH", "ZEC", 1, 1, 50, 0}}});
    g.add_node(NodeInfo{"lp3", {}, {}, {RateQuote{"ZEC", "XMR", 1, 1, 50, 0}}});
    g.add_edge(Edge{"alice", "lp2", "eth", 100'000});
    g.add_edge(Edge{"lp2", "lp3", "zec", 100'000});
    g.add_edge(Edge{"lp3", "bob", "xmr", 100'000});
    CHECK_FALSE(find_route(g, "alice", "bob", 1000, "XMR"));

    // eth -> zec -> zec shares SHA3-256.

    g.add_node(NodeInfo{"lp4", {}, {}, {RateQuote{"ZEC", "ZEC", 1, 1, 10, 0}}});
    g.add_edge(Edge{"lp2", "lp4", "zec", 100'000});
    g.add_edge(Edge{"lp4", "bob", "zec", 100'000});
    auto r = find_route(g, "alice", "bob", 1000, "ZEC");
    REQUIRE(r);
    CHECK(r->node_path() == std::vector<std::string>{"alice", "lp2", "lp4", "bob"});
    CHECK(r->hash_fns == chainlab::HashFnSet{HashFnId::Sha3_256});
    CHECK(r->amount_in() == 1060);
}

TEST_CASE("find_route: ties prefer fewer hops then lexicographic ids")
{
    Graph g = base_graph();
    for (const char* lp : {"lpb", "lpa"})
    {
        g.add_node(NodeInfo{lp, {}, {}, {RateQuote::identity("BTC")}});
        g.add_edge(Edge{"s", lp, "btc", 1000});
        g.add_edge(Edge{lp, "r", "btc", 1000});
    }
    auto r = find_route(g, "s", "r", 10, "BTC");
    REQUIRE(r);
    CHECK(r->node_path() == std::vector<std::string>{"s", "lpa", "r"});
    g.add_edge(Edge{"s", "r", "btc", 1000});
    r = find_route(g, "s", "r", 10, "BTC");
    REQUIRE(r);
    CHECK(r->node_path() == std::vector<std::string>{"s", "r"});
}

TEST_CASE("property: find_route agrees with exhaustive enumeration")
{
    std::mt19937_64 rng(8);
    int found = 0;
    for (int trial = 0; trial < 300; ++trial)
    {
        const auto rc = oracle::random_routing_case(rng);
        CHECK(rc.graph.nodes().size() <= 8);
        CHECK(rc.graph.edges().size() <= 12);
        auto route = find_route(rc.graph, rc.sender, rc.recipient, rc.amount, rc.asset);
        auto best = oracle::best_route(rc.graph, rc.sender, rc.recipient, rc.amount, rc.asset);
        REQUIRE(route.has_value() == best.has_value());
        if (!route)
            continue;
        ++found;
        CHECK(static_cast<u128>(route->amount_in()) == best->cost);
        CHECK(route->node_path() == best->nodes);
        std::vector<std::string> route_chains;
        for (const auto& h : route->hops)
            route_chains.push_back(h.chain_id);
        CHECK(route_chains == best->chains);
        CHECK_FALSE(route->hash_fns.empty());
        CHECK(no_shortfall(*route, rc.amount));
    }
    MESSAGE("graphs with a route: " << found);
    CHECK(found > 100);
}

// ---- onion ------------------------------------------------------------------

TEST_CASE("onion: golden vectors from the reference construction")
{
    for (std::size_t hops : {std::size_t{1}, std::size_t{5}})
    {
        OnionScenario s(hops);
        auto lines = read_lines(std::string(COMIT_TEST_VECTORS_DIR) + "/onion_" + std::to_string(hops) + "hop.txt");
        REQUIRE(lines.size() == hops);
        OnionPacket pkt = onion_create(s.pubs, s.payloads, s.session, s.ad);
        CHECK(to_hex(pkt.serialize()) == lines[0]);
        for (std::size_t i = 0; i < hops; ++i)
        {
            auto peeled = onion_peel(pkt, s.keys[i].secret, s.ad);
            CHECK(peeled.payload == s.payloads[i]);
            if (i + 1 == hops)
            {
                CHECK_FALSE(peeled.next);
                break;
            }
            REQUIRE(peeled.next);
            pkt = *peeled.next;
            CHECK(to_hex(pkt.serialize()) == lines[i + 1]);
        }
    }
}

TEST_CASE("onion: constant size and round trip for 1..20 hops")
{
    std::mt19937_64 rng(12);
    for (std::size_t hops = 1; hops <= kOnionMaxHops; ++hops)
    {
        OnionScenario s(hops);
        OnionPacket pkt = onion_create(s.pubs, s.payloads, rng, s.ad);
        CHECK(pkt.serialize().size() == kOnionPacketSize);
        for (std::size_t i = 0; i < hops; ++i)
        {
            auto peeled = onion_peel(pkt, s.keys[i].secret, s.ad);
            CHECK(peeled.payload == s.payloads[i]);
            CHECK(peeled.next.has_value() == (i + 1 < hops));
            if (peeled.next)
            {
                CHECK(peeled.next->serialize().size() == kOnionPacketSize);
                pkt = *peeled.next;
            }
        }
    }
    CHECK(kOnionPacketSize == 3265);
}

TEST_CASE("onion: errors")
{
    OnionScenario s(21);
    CHECK_THROWS_AS(onion_create(std::span(s.pubs).first(0), std::span(s.payloads).first(0), s.session, s.ad),
                    OnionError);
    try
    {
        onion_create(s.pubs, s.payloads, s.session, s.ad);
        FAIL("expected route-too-long");
    }
    catch (const OnionError& e)
    {
        CHECK(e.code() == OnionErrc::RouteTooLong);
    }
    auto payloads = std::vector<HopPayload>(s.payloads.begin(), s.payloads.begin() + 2);
    payloads[0].next_node = std::string(33, 'x');
    try
    {
        onion_create(std::span(s.pubs).first(2), payloads, s.session, s.ad);
        FAIL("expected payload-overflow");
    }
    catch (const OnionError& e)
    {
        CHECK(e.code() == OnionErrc::PayloadOverflow);
    }
    payloads[0].next_node = "ok";
    payloads[1].chain_id = std::string(17, 'c');
    CHECK_THROWS_AS(onion_create(std::span(s.pubs).first(2), payloads, s.session, s.ad), OnionError);
}

TEST_CASE("onion: peel names only the successor, wrong key fails")
{
    OnionScenario s(3);
    OnionPacket pkt = onion_create(s.pubs, s.payloads, s.session, s.ad);
    auto first = onion_peel(pkt, s.keys[0].secret, s.ad);
    CHECK(first.payload.next_node == "node-1");
    const auto outsider = derive_onion_keypair("not-on-route");
    auto expect_hmac_failure = [&](const OnionPacket& p, const Hash32& key, std::span<const std::uint8_t> ad) {
        try
        {
            onion_peel(p, key, ad);
            return false;
        }
        catch (const OnionError& e)
        {
            return e.code() == OnionErrc::HmacFailure;
        }
    };
    CHECK(expect_hmac_failure(pkt, outsider.secret, s.ad));
    CHECK(expect_hmac_failure(pkt, s.keys[1].secret, s.ad));
    Hash32 other_ad = s.ad;
    other_ad[0] ^= 1;
    CHECK(expect_hmac_failure(pkt, s.keys[0].secret, other_ad));
}

TEST_CASE("onion: any single-byte tamper is detected at the next hop")
{
    OnionScenario s(4);
    const OnionPacket pkt = onion_create(s.pubs, s.payloads, s.session, s.ad);
    const Bytes wire = pkt.serialize();
    std::mt19937_64 rng(99);
    for (std::size_t pos = 1; pos < wire.size(); ++pos)
    {
        Bytes bad = wire;
        bad[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        bool rejected = false;
        try
        {
            onion_peel(OnionPacket::parse(bad), s.keys[0].secret, s.ad);
        }
        catch (const OnionError&)
        {
            rejected = true;
        }
        CHECK(rejected);
    }
    Bytes bad_version = wire;
    bad_version[0] = 1;
    CHECK_THROWS_AS(onion_peel(OnionPacket::parse(bad_version), s.keys[0].secret, s.ad), OnionError);
    CHECK_THROWS_AS(OnionPacket::parse(Bytes(wire.begin(), wire.end() - 1)), OnionError);
}

TEST_CASE("onion: consecutive hop packets differ in every slot")
{
    OnionScenario s(3);
    const OnionPacket p1 = onion_create(s.pubs, s.payloads, s.session, s.ad);
    const OnionPacket p2 = *onion_peel(p1, s.keys[0].secret, s.ad).next;
    const OnionPacket p3 = *onion_peel(p2, s.keys[1].secret, s.ad).next;
    auto all_slots_differ = [](const OnionPacket& a, const OnionPacket& b) {
        for (std::size_t slot = 0; slot < kOnionMaxHops; ++slot)
            if (std::equal(a.routing_info.begin() + slot * kOnionSlotSize,
                           a.routing_info.begin() + (slot + 1) * kOnionSlotSize,
                           b.routing_info.begin() + slot * kOnionSlotSize))
                return false;
        return true;
    };
    CHECK(all_slots_differ(p1, p2));
    CHECK(all_slots_differ(p2, p3));
    CHECK(p1.ephemeral_key != p2.ephemeral_key);
    CHECK(p1.serialize().size() == p2.serialize().size());
}

// ---- gossip -------------------------------------------------------------------

namespace {

struct GossipNet
{
    KeyRegistry keys;
    std::map<std::string, KeyPair> node_keys;

    LpAdvert advert(const std::string& id, std::uint64_t ts)
    {
        if (!node_keys.contains(id))
            node_keys[id] = keys.create("gossip-" + id);
        LpAdvert ad;
        ad.node_id = id;
        ad.timestamp = ts;
        ad.quotes.push_back(RateQuote::identity("BTC"));
        return sign_advert(ad, node_keys[id]);
    }
};

std::size_t diameter(const std::map<std::string, std::vector<std::string>>& peers)
{
    std::size_t best = 0;
    for (const auto& [src, _] : peers)
    {
        std::map<std::string, std::size_t> dist{{src, 0}};
        std::queue<std::string> q;
        q.push(src);
        while (!q.empty())
        {
            auto u = q.front();
            q.pop();
            for (const auto& v : peers.at(u))
                if (!dist.contains(v))
                {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
        }
        for (const auto& [_, d] : dist)
            best = std::max(best, d);
    }
    return best;
}

} // namespace

TEST_CASE("gossip: freshest advert wins, bad signatures are dropped")
{
    GossipNet net;
    GossipNode node;
    auto a1 = net.advert("a", 1);
    auto a2 = net.advert("a", 2);
    CHECK(node.gossip_step(std::vector{a1}, net.keys).size() == 1);
    CHECK(node.gossip_step(std::vector{a2}, net.keys).size() == 1);
    CHECK(node.known().at(a1.node_pubkey).timestamp == 2);
    CHECK(node.gossip_step(std::vector{a1}, net.keys).empty());
    CHECK(node.known().at(a1.node_pubkey).timestamp == 2);

    auto forged = net.advert("b", 1);
    forged.quotes[0].base_fee = 1;
    CHECK(node.gossip_step(std::vector{forged}, net.keys).empty());
    CHECK(node.invalid_dropped() == 1);
    CHECK(node.known().size() == 1);
}

TEST_CASE("gossip: ring of five converges within five rounds")
{
    GossipNet net;
    std::map<std::string, std::vector<std::string>> peers;
    std::map<std::string, GossipNode> nodes;
    for (int i = 0; i < 5; ++i)
    {
        const std::string id = "n" + std::to_string(i);
        peers[id] = {"n" + std::to_string((i + 1) % 5), "n" + std::to_string((i + 4) % 5)};
        nodes[id];
    }
    auto stats = run_gossip(nodes, peers, {{"n0", {net.advert("n0", 1)}}}, net.keys, 50);
    CHECK(stats.converged);
    CHECK(stats.rounds_to_uniform <= 5);
    CHECK(stats.rounds_to_uniform == diameter(peers));
    for (const auto& [id, n] : nodes)
        CHECK(n.known().size() == 1);
}

TEST_CASE("property: gossip converges within the graph diameter")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 60; ++trial)
    {
        GossipNet net;
        const std::size_t n = 2 + rng() % 10;
        std::map<std::string, std::vector<std::string>> peers;
        auto link = [&](std::size_t a, std::size_t b) {
            auto ia = "n" + std::to_string(a), ib = "n" + std::to_string(b);
            if (a == b || std::find(peers[ia].begin(), peers[ia].end(), ib) != peers[ia].end())
                return;
            peers[ia].push_back(ib);
            peers[ib].push_back(ia);
        };
        for (std::size_t i = 1; i < n; ++i)
            link(i, rng() % i); // spanning tree keeps it connected
        for (std::size_t extra = rng() % n; extra > 0; --extra)
            link(rng() % n, rng() % n);
        std::map<std::string, GossipNode> nodes;
        std::map<std::string, std::vector<LpAdvert>> outbox;
        for (std::size_t i = 0; i < n; ++i)
        {
            nodes["n" + std::to_string(i)];
            if (rng() % 2 || i == 0)
                outbox["n" + std::to_string(i)].push_back(net.advert("n" + std::to_string(i), 1 + rng() % 5));
        }
        auto stats = run_gossip(nodes, peers, outbox, net.keys, 100);
        CHECK(stats.converged);
        CHECK(stats.rounds_to_uniform <= diameter(peers));
        CHECK(stats.rounds_to_quiescence <= diameter(peers) + 1);
    }
}

TEST_CASE("gossip: adverts build a routable graph")
{
    GossipNet net;
    Graph g = base_graph();
    auto lp = net.advert("lp", 1);
    lp.channels.push_back(ChannelEndpoint{"btc", "bob", {}, 50'000});
    lp.quotes = {RateQuote{"BTC", "BTC", 1, 1, 7, 0}, RateQuote{"XMR", "BTC", 1, 1, 0, 0}};
    lp = sign_advert(lp, net.node_keys["lp"]);
    GossipNode node;
    node.gossip_step(std::vector{lp}, net.keys);
    add_adverts(g, node.known());
    g.add_edge(Edge{"alice", "lp", "btc", 50'000});
    REQUIRE(g.node("lp"));
    CHECK(g.node("lp")->quotes.size() == 1); // XMR quote has no channel behind it
    auto r = find_route(g, "alice", "bob", 100, "BTC");
    REQUIRE(r);
    CHECK(r->amount_in() == 107);
}
