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

#include "comit/simnet/runtime.hpp"

#include <json.hpp>

#include <sstream>

namespace comit::simnet {

using ojson = nlohmann::ordered_json;

namespace {

ojson value(const EventValue& v)
{
    return std::visit([](const auto& x) { return ojson(x); }, v);
}

template <class T>
ojson optional(const std::optional<T>& v)
{
    return v ? ojson(*v) : ojson(nullptr);
}

} // namespace

std::string to_json(const Report& r)
{
    ojson doc;
    doc["name"] = r.name;
    doc["seed"] = r.seed;
    doc["final_tick"] = r.final_tick;

    doc["payments"] = ojson::array();
    for (const auto& p : r.payments)
    {
        ojson hops = ojson::array();
        for (const auto& h : p.hops)
            hops.push_back({{"offerer", h.offerer},
                            {"receiver", h.receiver},
                            {"chain", h.chain},
                            {"amount", h.amount},
                            {"expiry", h.expiry},
                            {"status", std::string(swap::to_string(h.status))},
                            {"onchain_txs", h.onchain_txs}});
        doc["payments"].push_back({{"index", p.index},
                                   {"tick", p.tick},
                                   {"from", p.from},
                                   {"to", p.to},
                                   {"amount", p.amount},
                                   {"asset", p.asset},
                                   {"outcome", p.outcome},
                                   {"reason", p.reason},
                                   {"failed_hop", optional(p.failed_hop)},
                                   {"amount_in", p.amount_in},
                                   {"path", p.path},
                                   {"hops", hops},
                                   {"resolved_tick", optional(p.resolved_tick)}});
    }

    doc["balances"] = ojson::object();
    for (const auto& [actor, per] : r.balances)
        for (const auto& [asset, b] : per)
            doc["balances"][actor][asset] = {{"initial", b.initial},
                                             {"final", b.final_total()},
                                             {"onchain", b.onchain},
                                             {"locked", b.locked},
                                             {"channel", b.channel},
                                             {"fees_authorized", b.fees_authorized},
                                             {"entitled", b.entitled}};
    doc["unattributed"] = ojson::object();
    for (const auto& [asset, v] : r.unattributed)
        doc["unattributed"][asset] = v;

    doc["chains"] = ojson::array();
    for (const auto& c : r.chains)
        doc["chains"].push_back({{"id", c.id},
                                 {"asset", c.asset},
                                 {"height", c.height},
                                 {"onchain_txs", c.onchain_txs},
                                 {"burned_fees", c.burned_fees}});
    doc["channels"] = ojson::array();
    for (const auto& c : r.channels)
        doc["channels"].push_back({{"index", c.index},
                                   {"a", c.a},
                                   {"b", c.b},
                                   {"chain", c.chain},
                                   {"phase", std::string(channels::to_string(c.phase))},
                                   {"commitment_number", c.commitment_number},
                                   {"balance_a", c.balance_a},
                                   {"balance_b", c.balance_b}});
    doc["gossip"] = ojson::array();
    for (const auto& g : r.gossip)
        doc["gossip"].push_back({{"tick", g.tick},
                                 {"rounds_to_uniform", g.stats.rounds_to_uniform},
                                 {"rounds_to_quiescence", g.stats.rounds_to_quiescence},
                                 {"messages", g.stats.messages},
                                 {"converged", g.stats.converged}});
    doc["faults"] = ojson::array();
    for (const auto& f : r.faults)
        doc["faults"].push_back({{"tick", f.tick},
                                 {"kind", std::string(to_string(f.kind))},
                                 {"target", f.target},
                                 {"effect", f.effect}});
    doc["events"] = ojson::array();
    for (const auto& e : r.events)
    {
        ojson x = {{"tick", e.tick}, {"kind", e.kind}};
        for (const auto& [k, v] : e.fields)
            x[k] = value(v);
        doc["events"].push_back(std::move(x));
    }
    doc["honest_loss_checked"] = r.honest_loss_checked;
    doc["violations"] = ojson::array();
    for (const auto& v : r.violations)
        doc["violations"].push_back({{"kind", v.kind}, {"tick", v.tick}, {"detail", v.detail}});
    if (!r.digest.empty())
        doc["digest"] = r.digest;
    return doc.dump(2) + "\n";
}

std::string to_text(const Report& r)
{
    std::ostringstream out;
    out << "scenario " << (r.name.empty() ? "(unnamed)" : r.name) << ", seed " << r.seed << ", " << r.final_tick
        << " ticks\n";
    out << "\npayments\n";
    for (const auto& p : r.payments)
    {
        out << "  #" << p.index << " t=" << p.tick << " " << p.from << " -> " << p.to << " " << p.amount << " "
            << p.asset << ": " << p.outcome;
        if (!p.reason.empty())
            out << " (" << p.reason << ")";
        if (!p.path.empty())
        {
            out << " via";
            for (const auto& n : p.path)
                out << " " << n;
            out << ", sender paid " << p.amount_in;
        }
        out << "\n";
    }
    out << "\nbalances (initial -> final, fees)\n";
    for (const auto& [actor, per] : r.balances)
        for (const auto& [asset, b] : per)
            out << "  " << actor << " " << asset << ": " << b.initial << " -> " << b.final_total() << " (onchain "
                << b.onchain << ", channel " << b.channel << ", locked " << b.locked << "), fees "
                << b.fees_authorized << "\n";
    out << "\nchains\n";
    for (const auto& c : r.chains)
        out << "  " << c.id << ": height " << c.height << ", " << c.onchain_txs << " txs, " << c.burned_fees
            << " burned\n";
    if (!r.gossip.empty())
    {
        const auto& g = r.gossip.front().stats;
        out << "\ngossip: " << r.gossip.size() << " runs, first uniform after " << g.rounds_to_uniform
            << " rounds\n";
    }
    for (const auto& f : r.faults)
        out << "fault " << to_string(f.kind) << " on " << f.target << " at t=" << f.tick << ": " << f.effect
            << "\n";
    out << "\nviolations: " << r.violations.size() << "\n";
    for (const auto& v : r.violations)
        out << "  " << v.kind << " at t=" << v.tick << ": " << v.detail << "\n";
    out << "digest " << r.digest << "\n";
    return out.str();
}

} // namespace comit::simnet
