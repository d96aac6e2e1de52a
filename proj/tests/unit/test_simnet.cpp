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

#include "comit/simnet/generator.hpp"
#include "comit/simnet/runtime.hpp"
#include "support/oracles.hpp"

#include <json.hpp>

#include <algorithm>

using namespace comit;
using namespace comit::simnet;

namespace {

const char* kMinimal = R"({
  "name": "minimal",
  "seed": 9,
  "chains": [{"id": "btc", "asset": "BTC", "hash_fns": ["SHA256"], "flat_fee": 0}],
  "actors": [
    {"id": "alice", "role": "user", "genesis": {"btc": 1000}},
    {"id": "lp", "role": "lp", "genesis": {"btc": 1000}}
  ],
  "channels": [{"a": "alice", "b": "lp", "chain": "btc", "fund_a": 400, "fund_b": 300}]
})";

std::vector<Diagnostic> diagnostics_of(const std::string& text)
{
    try
    {
        validate_scenario(text);
    }
    catch (const ScenarioError& e)
    {
        return e.diagnostics();
    }
    return {};
}

nlohmann::json minimal_doc()
{
    return nlohmann::json::parse(kMinimal);
}

Scenario demo(const char* name)
{
    return validate_scenario(*demo_text(name));
}

const BalanceRecord& balance(const Report& r, const std::string& actor, const std::string& asset)
{
    return r.balances.at(actor).at(asset);
}

// alice - lp1 - lp2 - bob on one chain, alice pays bob 1000 at tick 1.
nlohmann::json line_doc()
{
    return nlohmann::json::parse(R"({
      "name": "line",
      "seed": 11,
      "chains": [{"id": "btc", "asset": "BTC", "hash_fns": ["SHA256"], "flat_fee": 1}],
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
      "payments": [{"tick": 1, "from": "alice", "to": "bob", "amount": 1000, "asset": "BTC"}]
    })");
}

// alice pays shop across btc -> eth through one LP; shop withholds the
// secret off-chain and claims on-chain at the last moment.
nlohmann::json stall_doc()
{
    return nlohmann::json::parse(R"({
      "name": "stall",
      "seed": 12,
      "policy": {"final_delta": 6, "hop_delta": 6},
      "chains": [
        {"id": "btc", "asset": "BTC", "hash_fns": ["SHA256"], "flat_fee": 1},
        {"id": "eth", "asset": "ETH", "hash_fns": ["SHA256"], "flat_fee": 1}
      ],
      "actors": [
        {"id": "alice", "role": "user", "genesis": {"btc": 50000}},
        {"id": "lp", "role": "lp", "genesis": {"btc": 50000, "eth": 50000}},
        {"id": "shop", "role": "business", "genesis": {"eth": 50000}}
      ],
      "channels": [
        {"a": "alice", "b": "lp", "chain": "btc", "fund_a": 10000, "fund_b": 10000},
        {"a": "lp", "b": "shop", "chain": "eth", "fund_a": 10000, "fund_b": 10000}
      ],
      "quotes": [{"lp": "lp", "asset_in": "BTC", "asset_out": "ETH", "rate_num": 1, "rate_den": 1}],
      "payments": [{"tick": 1, "from": "alice", "to": "shop", "amount": 1000, "asset": "ETH"}],
      "faults": [{"tick": 0, "kind": "stall_secret", "target": "shop"}]
    })");
}

bool no_loss(const BalanceRecord& b)
{
    return static_cast<std::int64_t>(b.final_total() + b.fees_authorized) >=
           static_cast<std::int64_t>(b.initial) + b.entitled;
}

} // namespace

TEST_CASE("validation: minimal scenario parses")
{
    const Scenario s = validate_scenario(kMinimal);
    CHECK(s.name == "minimal");
    CHECK(s.seed == 9);
    REQUIRE(s.chains.size() == 1);
    CHECK(s.chains[0].params.flat_fee == 0);
    REQUIRE(s.actors.size() == 2);
    CHECK(s.actors[1].role == Role::LiquidityProvider);
    REQUIRE(s.channels.size() == 1);
    CHECK(s.channels[0].csv_delay == 6);
    CHECK(s.policy.final_delta == 6);
    CHECK(s.policy.hop_delta == 6);
    CHECK(s.mining_for("btc").interval == 1);
}

TEST_CASE("validation: unknown actor in a channel names the id")
{
    auto doc = minimal_doc();
    doc["channels"][0]["b"] = "mallory";
    const auto diags = diagnostics_of(doc.dump());
    REQUIRE_FALSE(diags.empty());
    const auto it = std::find_if(diags.begin(), diags.end(),
                                 [](const Diagnostic& d) { return d.kind == DiagnosticKind::UnknownReference; });
    REQUIRE(it != diags.end());
    CHECK(it->path == "channels[0].b");
    CHECK(it->message.find("mallory") != std::string::npos);
}

TEST_CASE("validation: fee_ppm of one million is a constraint violation")
{
    auto doc = minimal_doc();
    doc["quotes"] = nlohmann::json::array(
        {{{"lp", "lp"}, {"asset_in", "BTC"}, {"asset_out", "BTC"}, {"fee_ppm", 1'000'000}}});
    const auto diags = diagnostics_of(doc.dump());
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].kind == DiagnosticKind::ConstraintViolation);
    CHECK(diags[0].path == "quotes[0].fee_ppm");

    doc["quotes"][0]["fee_ppm"] = 999'999;
    CHECK(diagnostics_of(doc.dump()).empty());
}

TEST_CASE("validation: malformed text is a parse error")
{
    const auto diags = diagnostics_of("{\"chains\": [");
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].kind == DiagnosticKind::ParseError);
    CHECK_THROWS_AS(validate_scenario("[]"), ScenarioError);
}

TEST_CASE("validation: every problem is reported")
{
    auto doc = minimal_doc();
    doc["channels"][0]["chain"] = "doge";
    doc["payments"] = nlohmann::json::array(
        {{{"tick", 1}, {"from", "alice"}, {"to", "alice"}, {"amount", 0}, {"asset", "BTC"}}});
    doc["closes"] = nlohmann::json::array({{{"tick", 3}, {"channel", 4}}});
    doc["bogus"] = 1;
    const auto diags = diagnostics_of(doc.dump());
    auto has = [&](DiagnosticKind k, const std::string& path) {
        return std::any_of(diags.begin(), diags.end(),
                           [&](const Diagnostic& d) { return d.kind == k && d.path == path; });
    };
    CHECK(has(DiagnosticKind::UnknownReference, "channels[0].chain"));
    CHECK(has(DiagnosticKind::UnknownReference, "closes[0].channel"));
    CHECK(has(DiagnosticKind::ConstraintViolation, "bogus"));
    CHECK(diags.size() >= 5);
}

TEST_CASE("validation: users need a channel to a liquidity provider")
{
    auto doc = minimal_doc();
    doc["actors"][1]["role"] = "user";
    const auto diags = diagnostics_of(doc.dump());
    REQUIRE_FALSE(diags.empty());
    CHECK(diags[0].kind == DiagnosticKind::ConstraintViolation);
}

TEST_CASE("validation: canonical text round-trips")
{
    for (std::uint64_t seed = 1; seed <= 40; ++seed)
    {
        const Scenario s = generate_scenario(seed);
        const std::string text = to_json_text(s);
        CHECK(to_json_text(validate_scenario(text)) == text);
    }
    for (const auto& name : demo_names())
    {
        const std::string text = to_json_text(demo(name.c_str()));
        CHECK(to_json_text(validate_scenario(text)) == text);
    }
}

TEST_CASE("runtime: same scenario gives the same report")
{
    for (const auto& name : demo_names())
    {
        const Scenario s = demo(name.c_str());
        const Report a = run_scenario(s);
        const Report b = run_scenario(s);
        CHECK(to_json(a) == to_json(b));
        CHECK(a.digest.size() == 64);
        CHECK(a.digest == b.digest);
    }
    Scenario s = demo("single-hop");
    const std::string first = run_scenario(s).digest;
    s.seed += 1;
    CHECK(run_scenario(s).digest != first);
}

TEST_CASE("runtime: no payments leaves genesis balances in place")
{
    const Report r = run_scenario(validate_scenario(kMinimal));
    CHECK(r.violations.empty());
    CHECK(balance(r, "alice", "BTC").initial == 1000);
    CHECK(balance(r, "alice", "BTC").final_total() == 1000);
    CHECK(balance(r, "lp", "BTC").final_total() == 1000);
    CHECK(balance(r, "alice", "BTC").channel == 400);
    CHECK(balance(r, "lp", "BTC").channel == 300);
    CHECK(r.onchain_tx_count() == 1);

    // With a fee only the funder pays it.
    auto doc = minimal_doc();
    doc["chains"][0]["flat_fee"] = 3;
    const Report f = run_scenario(validate_scenario(doc.dump()));
    CHECK(f.violations.empty());
    CHECK(balance(f, "alice", "BTC").final_total() == 997);
    CHECK(balance(f, "alice", "BTC").fees_authorized == 3);
    CHECK(balance(f, "lp", "BTC").final_total() == 1000);
}

TEST_CASE("runtime: cross-chain payment over two LPs settles off-chain")
{
    const Scenario s = demo("cross-chain-2lp");
    const Report r = run_scenario(s);
    CHECK(r.violations.empty());
    REQUIRE(r.payments.size() == 1);
    const auto& p = r.payments[0];
    CHECK(p.outcome == "settled");
    CHECK(p.path == std::vector<std::string>{"alice", "lp1", "lp2", "shop"});

    // Amounts from the reference cost function, applied from the recipient back.
    const auto& q2 = s.quotes[1].quote;
    const auto& q1 = s.quotes[0].quote;
    const auto mid = static_cast<Amount>(oracle::cost(q2, 10'000));
    const auto in = static_cast<Amount>(oracle::cost(q1, mid));
    CHECK(p.amount_in == in);
    REQUIRE(p.hops.size() == 3);
    CHECK(p.hops[0].amount == in);
    CHECK(p.hops[1].amount == mid);
    CHECK(p.hops[2].amount == 10'000);
    for (const auto& h : p.hops)
    {
        CHECK(h.status == swap::HopStatus::Fulfilled);
        CHECK(h.onchain_txs == 0);
    }

    // Only the three funding transactions reach a chain.
    CHECK(r.onchain_tx_count() == 3);
    for (const auto& c : r.channels)
    {
        CHECK(c.phase == channels::PhaseKind::Open);
        CHECK(c.commitment_number == 2);
    }
    CHECK(r.channels[0].balance_a == 20'000 - in);
    CHECK(r.channels[2].balance_b == 1'000 + 10'000);

    CHECK(balance(r, "alice", "BTC").final_total() + balance(r, "alice", "BTC").fees_authorized == 50'000 - in);
    CHECK(balance(r, "shop", "ETH").final_total() == 50'000 + 10'000);
    CHECK(balance(r, "lp1", "BTC").final_total() == 50'000 + in);
    CHECK(balance(r, "lp2", "ETH").final_total() + balance(r, "lp2", "ETH").fees_authorized == 500'000 + mid - 10'000);
}

TEST_CASE("runtime: refusal in the middle refunds the sender")
{
    const Report r = run_scenario(demo("refund-cascade"));
    CHECK(r.violations.empty());
    REQUIRE(r.payments.size() == 1);
    CHECK(r.payments[0].outcome == "refunded");
    CHECK(r.payments[0].reason == "refused");
    CHECK(r.onchain_tx_count() == 3);
    for (const auto& [actor, per] : r.balances)
    {
        const auto& b = per.at("BTC");
        CHECK_MESSAGE(b.final_total() + b.fees_authorized == b.initial, actor);
    }
    for (const auto& h : r.payments[0].hops)
        CHECK(h.status != swap::HopStatus::Fulfilled);
}

TEST_CASE("runtime: a revoked broadcast hands the channel to the counterparty")
{
    const Report r = run_scenario(demo("breach-punish"));
    CHECK(r.violations.empty());
    REQUIRE(r.payments.size() == 2);
    CHECK(r.payments[0].outcome == "settled");
    CHECK(r.payments[1].outcome == "settled");
    const auto& alice = balance(r, "alice", "BTC");
    const auto& lp = balance(r, "lp", "BTC");
    // Alice ends with her genesis plus every coin the LP put in the channel.
    CHECK(alice.final_total() + alice.fees_authorized == 20'000 + 10'000);
    CHECK(lp.final_total() == 20'000 - 10'000);
    CHECK(r.channels[0].phase == channels::PhaseKind::Settled);
    const bool punished = std::any_of(r.events.begin(), r.events.end(),
                                      [](const EventRecord& e) { return e.kind == "punish"; });
    CHECK(punished);
}

TEST_CASE("runtime: a crash shorter than the hop margin costs nobody")
{
    for (const char* target : {"lp1", "lp2"})
        for (Tick at = 1; at <= 5; ++at)
            for (Tick k = 1; k <= 6; ++k)
            {
                auto doc = line_doc();
                doc["faults"] = nlohmann::json::array(
                    {{{"tick", at}, {"kind", "crash"}, {"target", target}, {"duration", k}}});
                const Report r = run_scenario(validate_scenario(doc.dump()));
                INFO(target << " at " << at << " for " << k);
                CHECK(r.violations.empty());
                REQUIRE(r.payments.size() == 1);
                CHECK((r.payments[0].outcome == "settled" || r.payments[0].outcome == "refunded"));
                // The crashed LP is checked too.
                for (const auto& [actor, per] : r.balances)
                    CHECK_MESSAGE(no_loss(per.at("BTC")), actor);
            }
}

TEST_CASE("runtime: a crash past the expiry margin breaks atomicity")
{
    auto doc = line_doc();
    doc["faults"] = nlohmann::json::array({{{"tick", 4}, {"kind", "crash"}, {"target", "lp1"}, {"duration", 30}}});
    const Report r = run_scenario(validate_scenario(doc.dump()));
    CHECK_FALSE(no_loss(balance(r, "lp1", "BTC")));
    CHECK(r.has_violation("atomicity"));
    CHECK_FALSE(r.has_violation("conservation"));
}

TEST_CASE("runtime: a stalled secret is claimed on-chain in time")
{
    const Report r = run_scenario(validate_scenario(stall_doc().dump()));
    CHECK(r.violations.empty());
    REQUIRE(r.payments.size() == 1);
    CHECK(r.payments[0].outcome == "settled");
    CHECK(r.payments[0].hops[1].onchain_txs > 0);
    CHECK(no_loss(balance(r, "lp", "BTC")));
    CHECK(no_loss(balance(r, "lp", "ETH")));
}

TEST_CASE("runtime: block-rate drift beyond the margin is reported as honest loss")
{
    auto doc = stall_doc();
    doc["mining"] = nlohmann::json::array({{{"chain", "eth"}, {"interval", 4}}});
    const Report r = run_scenario(validate_scenario(doc.dump()));
    CHECK(r.has_violation("honest-loss"));
    CHECK(r.has_violation("atomicity"));
    CHECK_FALSE(r.has_violation("conservation"));
    CHECK_FALSE(r.has_violation("internal"));
}

TEST_CASE("generator: scenarios validate and run clean")
{
    for (std::uint64_t seed = 100; seed < 160; ++seed)
    {
        const Scenario s = validate_scenario(to_json_text(generate_scenario(seed)));
        const Report r = run_scenario(s);
        INFO("seed " << seed);
        CHECK(r.violations.empty());
        for (const auto& p : r.payments)
            CHECK((p.outcome == "settled" || p.outcome == "refunded"));
    }
    CHECK(to_json_text(generate_scenario(5)) == to_json_text(generate_scenario(5)));
    CHECK(to_json_text(generate_scenario(5)) != to_json_text(generate_scenario(6)));
}

TEST_CASE("report: text and json views")
{
    const Report r = run_scenario(demo("single-hop"));
    const auto doc = nlohmann::json::parse(to_json(r));
    CHECK(doc["digest"] == r.digest);
    CHECK(doc["payments"].size() == 2);
    CHECK(doc["chains"][0]["onchain_txs"] == 2);
    const std::string text = to_text(r);
    CHECK(text.find("single-hop") != std::string::npos);
    CHECK(text.find("violations: 0") != std::string::npos);
}
