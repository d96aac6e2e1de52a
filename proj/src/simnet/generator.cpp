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

#include "comit/simnet/generator.hpp"

#include <random>

namespace comit::simnet {

using chainlab::HashFnId;

namespace {

struct ChainTemplate
{
    const char* id;
    const char* asset;
    HashFnId extra;
};

constexpr ChainTemplate kChains[] = {
    {"btc", "BTC", HashFnId::Sha3_256},
    {"eth", "ETH", HashFnId::Blake2b_256},
    {"zec", "ZEC", HashFnId::Blake2b_256},
};

class Draw
{
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t range(std::uint64_t lo, std::uint64_t hi)
    {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
    }
    bool chance(std::uint64_t num, std::uint64_t den) { return range(1, den) <= num; }
    template <class T>
    const T& pick(const std::vector<T>& v)
    {
        return v[range(0, v.size() - 1)];
    }

private:
    std::mt19937_64 rng_;
};

} // namespace

Scenario generate_scenario(std::uint64_t seed, const GeneratorOptions& options)
{
    Draw d(seed);
    Scenario s;
    s.name = "generated-" + std::to_string(seed);
    s.seed = seed;
    s.policy.final_delta = d.range(3, 6);
    s.policy.hop_delta = d.range(2, 6);

    const std::size_t n_chains = d.range(1, std::min<std::size_t>(options.max_chains, 3));
    std::vector<std::string> chain_ids;
    for (std::size_t i = 0; i < n_chains; ++i)
    {
        ChainSpec c;
        c.params.chain_id = kChains[i].id;
        c.params.asset_id = kChains[i].asset;
        c.params.hash_fns = {HashFnId::Sha256, kChains[i].extra};
        c.params.flat_fee = d.range(0, 2);
        c.params.block_interval = 1;
        c.start_height = d.range(0, 300);
        chain_ids.push_back(c.params.chain_id);
        s.chains.push_back(std::move(c));
    }

    const std::size_t max_actors = std::max<std::size_t>(options.max_actors, 3);
    const std::size_t n_lps = d.range(2, std::min<std::size_t>(4, max_actors - 1));
    const std::size_t n_others = d.range(1, max_actors - n_lps);
    std::vector<std::string> lps;
    std::vector<std::string> everyone;
    for (std::size_t i = 0; i < n_lps; ++i)
    {
        lps.push_back("lp" + std::to_string(i + 1));
        s.actors.push_back(ActorSpec{lps.back(), Role::LiquidityProvider, {}});
    }
    for (std::size_t i = 0; i < n_others; ++i)
    {
        const bool business = d.chance(1, 3);
        s.actors.push_back(
            ActorSpec{(business ? "shop" : "user") + std::to_string(i + 1), business ? Role::Business : Role::User, {}});
    }
    for (auto& a : s.actors)
    {
        everyone.push_back(a.id);
        for (const auto& c : chain_ids)
            a.genesis[c] = 50'000;
    }

    auto channel = [&](const std::string& x, const std::string& y) {
        ChannelSpec c;
        const bool swap = d.chance(1, 2);
        c.a = swap ? y : x;
        c.b = swap ? x : y;
        c.chain = d.pick(chain_ids);
        c.fund_a = d.range(1'000, 5'000);
        c.fund_b = d.range(1'000, 5'000);
        c.csv_delay = d.range(2, 8);
        s.channels.push_back(std::move(c));
    };
    for (std::size_t i = 1; i < n_lps; ++i)
        channel(lps[i], lps[d.range(0, i - 1)]);
    for (std::size_t extra = d.range(0, 2); extra-- > 0;)
    {
        const auto& x = d.pick(lps);
        const auto& y = d.pick(lps);
        if (x != y)
            channel(x, y);
    }
    for (std::size_t i = n_lps; i < everyone.size(); ++i)
        for (std::size_t k = d.range(1, 2); k-- > 0;)
            channel(everyone[i], d.pick(lps));

    std::vector<std::string> assets;
    for (const auto& c : s.chains)
        assets.push_back(c.params.asset_id);
    for (const auto& lp : lps)
        for (const auto& in : assets)
            for (const auto& out : assets)
            {
                crp::RateQuote q;
                q.asset_in = in;
                q.asset_out = out;
                if (in == out)
                {
                    q.rate_num = q.rate_den = 1;
                    q.fee_ppm = static_cast<std::uint32_t>(d.range(0, 5'000));
                }
                else
                {
                    q.rate_num = d.range(1, 4);
                    q.rate_den = d.range(1, 4);
                    q.fee_ppm = static_cast<std::uint32_t>(d.range(0, 10'000));
                }
                q.base_fee = d.range(0, 3);
                s.quotes.push_back(QuoteSpec{lp, q});
            }

    std::vector<std::string> others(everyone.begin() + static_cast<std::ptrdiff_t>(n_lps), everyone.end());
    for (std::size_t k = d.range(1, std::max<std::size_t>(options.max_payments, 1)); k-- > 0;)
    {
        PaymentSpec p;
        p.tick = d.range(1, 15);
        p.from = d.chance(4, 5) ? d.pick(others) : d.pick(everyone);
        do
            p.to = d.pick(everyone);
        while (p.to == p.from);
        // Usually the asset of one of the recipient's channels.
        std::vector<std::string> near;
        for (const auto& c : s.channels)
            if (c.a == p.to || c.b == p.to)
                near.push_back(s.chain(c.chain)->params.asset_id);
        p.asset = d.chance(4, 5) ? d.pick(near) : d.pick(assets);
        p.amount = d.range(10, 400);
        s.payments.push_back(std::move(p));
    }

    if (options.inject_fault)
    {
        FaultSpec f;
        f.kind = static_cast<FaultKind>(d.range(0, 4));
        f.tick = d.range(0, 20);
        f.target = d.chance(7, 10) ? d.pick(lps) : d.pick(everyone);
        if (f.kind == FaultKind::Crash)
            f.duration = d.range(1, s.policy.hop_delta);
        s.faults.push_back(std::move(f));
    }
    if (d.chance(1, 3))
        s.closes.push_back(CloseSpec{d.range(20, 30), d.range(0, s.channels.size() - 1)});
    return s;
}

namespace {

constexpr const char* kSingleHop = R"({
  "name": "single-hop",
  "seed": 1,
  "chains": [
    {"id": "btc", "asset": "BTC", "hash_fns": ["SHA256"], "flat_fee": 1}
  ],
  "actors": [
    {"id": "alice", "role": "user", "genesis": {"btc": 20000}},
    {"id": "lp", "role": "lp", "genesis": {"btc": 20000}}
  ],
  "channels": [
    {"a": "alice", "b": "lp", "chain": "btc", "fund_a": 10000, "fund_b": 10000}
  ],
  "payments": [
    {"tick": 1, "from": "alice", "to": "lp", "amount": 500, "asset": "BTC"},
    {"tick": 3, "from": "lp", "to": "alice", "amount": 200, "asset": "BTC"}
  ],
  "closes": [
    {"tick": 6, "channel": 0}
  ]
}
)";

constexpr const char* kCrossChain = R"({
  "name": "cross-chain-2lp",
  "seed": 2,
  "chains": [
    {"id": "btc", "asset": "BTC", "hash_fns": ["SHA256", "SHA3_256"], "flat_fee": 1, "start_height": 100},
    {"id": "eth", "asset": "ETH", "hash_fns": ["SHA256", "BLAKE2B_256"], "flat_fee": 2, "start_height": 5000}
  ],
  "actors": [
    {"id": "alice", "role": "user", "genesis": {"btc": 50000}},
    {"id": "lp1", "role": "lp", "genesis": {"btc": 50000, "eth": 500000}},
    {"id": "lp2", "role": "lp", "genesis": {"eth": 500000}},
    {"id": "shop", "role": "business", "genesis": {"eth": 50000}}
  ],
  "channels": [
    {"a": "alice", "b": "lp1", "chain": "btc", "fund_a": 20000, "fund_b": 5000},
    {"a": "lp1", "b": "lp2", "chain": "eth", "fund_a": 200000, "fund_b": 100000},
    {"a": "lp2", "b": "shop", "chain": "eth", "fund_a": 200000, "fund_b": 1000}
  ],
  "quotes": [
    {"lp": "lp1", "asset_in": "BTC", "asset_out": "ETH", "rate_num": 10, "rate_den": 1, "base_fee": 2, "fee_ppm": 1000},
    {"lp": "lp2", "asset_in": "ETH", "asset_out": "ETH", "rate_num": 1, "rate_den": 1, "base_fee": 3, "fee_ppm": 500}
  ],
  "payments": [
    {"tick": 1, "from": "alice", "to": "shop", "amount": 10000, "asset": "ETH"}
  ]
}
)";

constexpr const char* kRefundCascade = R"({
  "name": "refund-cascade",
  "seed": 3,
  "chains": [
    {"id": "btc", "asset": "BTC", "hash_fns": ["SHA256"], "flat_fee": 1}
  ],
  "actors": [
    {"id": "alice", "role": "user", "genesis": {"btc": 50000}},
    {"id": "lp1", "role": "lp", "genesis": {"btc": 50000}},
    {"id": "lp2", "role": "lp", "genesis": {"btc": 50000}},
    {"id": "bob", "role": "user", "genesis": {"btc": 50000}}
  ],
  "channels": [
    {"a": "alice", "b": "lp1", "chain": "btc", "fund_a": 10000, "fund_b": 10000},
    {"a": "lp1", "b": "lp2", "chain": "btc", "fund_a": 10000, "fund_b": 10000},
    {"a": "lp2", "b": "bob", "chain": "btc", "fund_a": 10000, "fund_b": 10000}
  ],
  "quotes": [
    {"lp": "lp1", "asset_in": "BTC", "asset_out": "BTC", "base_fee": 5},
    {"lp": "lp2", "asset_in": "BTC", "asset_out": "BTC", "base_fee": 5}
  ],
  "payments": [
    {"tick": 1, "from": "alice", "to": "bob", "amount": 1000, "asset": "BTC"}
  ],
  "faults": [
    {"tick": 0, "kind": "refuse_forward", "target": "lp2"}
  ]
}
)";

constexpr const char* kBreachPunish = R"({
  "name": "breach-punish",
  "seed": 4,
  "chains": [
    {"id": "btc", "asset": "BTC", "hash_fns": ["SHA256"], "flat_fee": 1}
  ],
  "actors": [
    {"id": "alice", "role": "user", "genesis": {"btc": 20000}},
    {"id": "lp", "role": "lp", "genesis": {"btc": 20000}}
  ],
  "channels": [
    {"a": "alice", "b": "lp", "chain": "btc", "fund_a": 5000, "fund_b": 10000, "csv_delay": 6}
  ],
  "payments": [
    {"tick": 1, "from": "lp", "to": "alice", "amount": 3000, "asset": "BTC"},
    {"tick": 3, "from": "lp", "to": "alice", "amount": 2000, "asset": "BTC"}
  ],
  "faults": [
    {"tick": 6, "kind": "broadcast_revoked", "target": "lp"}
  ]
}
)";

} // namespace

std::vector<std::string> demo_names()
{
    return {"single-hop", "cross-chain-2lp", "refund-cascade", "breach-punish"};
}

std::optional<std::string> demo_text(std::string_view name)
{
    if (name == "single-hop")
        return kSingleHop;
    if (name == "cross-chain-2lp")
        return kCrossChain;
    if (name == "refund-cascade")
        return kRefundCascade;
    if (name == "breach-punish")
        return kBreachPunish;
    return std::nullopt;
}

} // namespace comit::simnet
