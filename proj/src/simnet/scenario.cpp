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

#include "comit/simnet/scenario.hpp"

#include "comit/chainlab/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace comit::simnet {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Role r)
{
    switch (r)
    {
    case Role::User: return "user";
    case Role::LiquidityProvider: return "lp";
    case Role::Business: return "business";
    }
    return "unknown";
}

std::string_view to_string(FaultKind k)
{
    switch (k)
    {
    case FaultKind::RefuseForward: return "refuse_forward";
    case FaultKind::StallSecret: return "stall_secret";
    case FaultKind::BroadcastRevoked: return "broadcast_revoked";
    case FaultKind::DropGossip: return "drop_gossip";
    case FaultKind::Crash: return "crash";
    }
    return "unknown";
}

std::string_view to_string(DiagnosticKind k)
{
    switch (k)
    {
    case DiagnosticKind::ParseError: return "parse-error";
    case DiagnosticKind::UnknownReference: return "unknown-reference";
    case DiagnosticKind::ConstraintViolation: return "constraint-violation";
    }
    return "unknown";
}

std::string Diagnostic::str() const
{
    std::string out(to_string(kind));
    if (!path.empty())
        out += " at " + path;
    return out + ": " + message;
}

namespace {

std::string join(const std::vector<Diagnostic>& d)
{
    std::string out;
    for (const auto& x : d)
    {
        if (!out.empty())
            out += "; ";
        out += x.str();
    }
    return out;
}

} // namespace

ScenarioError::ScenarioError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

const ChainSpec* Scenario::chain(const std::string& id) const
{
    for (const auto& c : chains)
        if (c.params.chain_id == id)
            return &c;
    return nullptr;
}

const ActorSpec* Scenario::actor(const std::string& id) const
{
    for (const auto& a : actors)
        if (a.id == id)
            return &a;
    return nullptr;
}

MiningSpec Scenario::mining_for(const std::string& chain_id) const
{
    for (const auto& m : mining)
        if (m.chain == chain_id)
            return m;
    const ChainSpec* c = chain(chain_id);
    return MiningSpec{chain_id, c ? c->params.block_interval : 1, 0};
}

namespace {

std::optional<Role> parse_role(std::string_view s)
{
    if (s == "user")
        return Role::User;
    if (s == "lp" || s == "liquidity_provider")
        return Role::LiquidityProvider;
    if (s == "business")
        return Role::Business;
    return std::nullopt;
}

std::optional<FaultKind> parse_fault(std::string_view s)
{
    for (auto k : {FaultKind::RefuseForward, FaultKind::StallSecret, FaultKind::BroadcastRevoked,
                   FaultKind::DropGossip, FaultKind::Crash})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

std::optional<chainlab::HashFnId> parse_hash_name(std::string name)
{
    for (auto& c : name)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return chainlab::try_parse_hash_fn(name);
}

constexpr std::size_t kMaxNodeId = 32;
constexpr std::size_t kMaxChainId = 16;

class Reader
{
public:
    std::vector<Diagnostic> diags;

    void error(DiagnosticKind kind, std::string path, std::string message)
    {
        diags.push_back(Diagnostic{kind, std::move(path), std::move(message)});
    }
    void constraint(std::string path, std::string message)
    {
        error(DiagnosticKind::ConstraintViolation, std::move(path), std::move(message));
    }
    void unknown(std::string path, std::string message)
    {
        error(DiagnosticKind::UnknownReference, std::move(path), std::move(message));
    }

    /// Flags keys outside `allowed`.
    void only(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed)
    {
        for (const auto& [k, v] : obj.items())
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                constraint(path + "." + k, "unknown field");
    }

    const json* field(const json& obj, const std::string& path, const char* key, bool required)
    {
        auto it = obj.find(key);
        if (it == obj.end())
        {
            if (required)
                constraint(path + "." + key, "missing required field");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::uint64_t> u64(const json& obj, const std::string& path, const char* key, bool required,
                                     std::uint64_t fallback = 0)
    {
        const json* v = field(obj, path, key, required);
        if (!v)
            return required ? std::nullopt : std::optional<std::uint64_t>(fallback);
        if (!v->is_number_unsigned())
        {
            if (v->is_number_integer() && v->get<std::int64_t>() >= 0)
                return v->get<std::uint64_t>();
            constraint(path + "." + key, "expected a non-negative integer");
            return std::nullopt;
        }
        return v->get<std::uint64_t>();
    }

    std::optional<std::string> str(const json& obj, const std::string& path, const char* key, bool required,
                                   std::string fallback = "")
    {
        const json* v = field(obj, path, key, required);
        if (!v)
            return required ? std::nullopt : std::optional<std::string>(fallback);
        if (!v->is_string())
        {
            constraint(path + "." + key, "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    /// Array section; absent optional sections are empty.
    const json* array(const json& obj, const std::string& key, bool required)
    {
        const json* v = field(obj, "", key.c_str(), required);
        if (!v)
            return nullptr;
        if (!v->is_array())
        {
            constraint(key, "expected an array");
            return nullptr;
        }
        return v;
    }

    bool object(const json& v, const std::string& path)
    {
        if (!v.is_object())
        {
            constraint(path, "expected an object");
            return false;
        }
        return true;
    }

    void id_length(const std::string& path, const std::string& id, std::size_t max)
    {
        if (id.empty() || id.size() > max)
            constraint(path, "must be 1.." + std::to_string(max) + " bytes");
    }
};

std::string at(const std::string& section, std::size_t i)
{
    return section + "[" + std::to_string(i) + "]";
}

} // namespace

Scenario validate_scenario(std::string_view text)
{
    json doc;
    try
    {
        doc = json::parse(text.begin(), text.end());
    }
    catch (const json::parse_error& e)
    {
        throw ScenarioError({Diagnostic{DiagnosticKind::ParseError, "", e.what()}});
    }

    Reader r;
    Scenario s;
    if (!doc.is_object())
        throw ScenarioError({Diagnostic{DiagnosticKind::ParseError, "", "top level must be an object"}});
    r.only(doc, "", {"name", "seed", "policy", "chains", "actors", "channels", "quotes", "payments", "faults",
                     "mining", "closes"});
    // Top-level paths have no leading dot.
    for (auto& d : r.diags)
        if (!d.path.empty() && d.path[0] == '.')
            d.path.erase(0, 1);

    s.name = r.str(doc, "", "name", false, "").value_or("");
    if (auto seed = r.u64(doc, "", "seed", true))
        s.seed = *seed;
    for (auto& d : r.diags)
        if (!d.path.empty() && d.path[0] == '.')
            d.path.erase(0, 1);

    if (auto it = doc.find("policy"); it != doc.end() && r.object(*it, "policy"))
    {
        r.only(*it, "policy", {"final_delta", "hop_delta"});
        s.policy.final_delta = r.u64(*it, "policy", "final_delta", false, 6).value_or(6);
        s.policy.hop_delta = r.u64(*it, "policy", "hop_delta", false, 6).value_or(6);
        if (s.policy.final_delta == 0)
            r.constraint("policy.final_delta", "must be at least 1");
        if (s.policy.hop_delta == 0)
            r.constraint("policy.hop_delta", "must be at least 1");
    }

    // chains
    std::set<std::string> assets;
    if (const json* arr = r.array(doc, "chains", true))
    {
        if (arr->empty())
            r.constraint("chains", "at least one chain is required");
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            const auto p = at("chains", i);
            const json& c = (*arr)[i];
            if (!r.object(c, p))
                continue;
            r.only(c, p, {"id", "asset", "hash_fns", "flat_fee", "block_interval", "start_height"});
            ChainSpec cs;
            cs.params.chain_id = r.str(c, p, "id", true).value_or("");
            cs.params.asset_id = r.str(c, p, "asset", true).value_or("");
            r.id_length(p + ".id", cs.params.chain_id, kMaxChainId);
            r.id_length(p + ".asset", cs.params.asset_id, kMaxChainId);
            if (s.chain(cs.params.chain_id))
                r.constraint(p + ".id", "duplicate chain id '" + cs.params.chain_id + "'");
            if (const json* fns = r.field(c, p, "hash_fns", true))
            {
                if (!fns->is_array() || fns->empty())
                    r.constraint(p + ".hash_fns", "expected a non-empty array of hash function names");
                else
                    for (std::size_t k = 0; k < fns->size(); ++k)
                    {
                        const auto fp = p + ".hash_fns[" + std::to_string(k) + "]";
                        auto parsed = (*fns)[k].is_string()
                                          ? parse_hash_name((*fns)[k].get<std::string>())
                                          : std::nullopt;
                        if (!parsed)
                            r.constraint(fp, "unknown hash function");
                        else
                            cs.params.hash_fns.insert(*parsed);
                    }
            }
            cs.params.flat_fee = r.u64(c, p, "flat_fee", false, 0).value_or(0);
            cs.params.block_interval = r.u64(c, p, "block_interval", false, 1).value_or(1);
            if (cs.params.block_interval == 0)
                r.constraint(p + ".block_interval", "must be at least 1");
            cs.start_height = r.u64(c, p, "start_height", false, 0).value_or(0);
            assets.insert(cs.params.asset_id);
            s.chains.push_back(std::move(cs));
        }
    }

    // actors
    if (const json* arr = r.array(doc, "actors", true))
    {
        if (arr->empty())
            r.constraint("actors", "at least one actor is required");
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            const auto p = at("actors", i);
            const json& a = (*arr)[i];
            if (!r.object(a, p))
                continue;
            r.only(a, p, {"id", "role", "genesis"});
            ActorSpec as;
            as.id = r.str(a, p, "id", true).value_or("");
            r.id_length(p + ".id", as.id, kMaxNodeId);
            if (s.actor(as.id))
                r.constraint(p + ".id", "duplicate actor id '" + as.id + "'");
            if (auto role = r.str(a, p, "role", true))
            {
                if (auto parsed = parse_role(*role))
                    as.role = *parsed;
                else
                    r.constraint(p + ".role", "expected user, lp or business");
            }
            if (const json* g = r.field(a, p, "genesis", false))
            {
                if (!g->is_object())
                    r.constraint(p + ".genesis", "expected an object of chain id to amount");
                else
                    for (const auto& [chain, amount] : g->items())
                    {
                        const auto gp = p + ".genesis." + chain;
                        if (!s.chain(chain))
                            r.unknown(gp, "unknown chain '" + chain + "'");
                        if (!amount.is_number_unsigned())
                            r.constraint(gp, "expected a non-negative integer");
                        else
                            as.genesis[chain] = amount.get<Amount>();
                    }
            }
            s.actors.push_back(std::move(as));
        }
    }

    auto actor_ref = [&](const std::string& path, const std::string& id) {
        if (!s.actor(id))
        {
            r.unknown(path, "unknown actor '" + id + "'");
            return false;
        }
        return true;
    };
    auto chain_ref = [&](const std::string& path, const std::string& id) {
        if (!s.chain(id))
        {
            r.unknown(path, "unknown chain '" + id + "'");
            return false;
        }
        return true;
    };
    auto asset_ref = [&](const std::string& path, const std::string& id) {
        if (!assets.contains(id))
        {
            r.unknown(path, "unknown asset '" + id + "'");
            return false;
        }
        return true;
    };

    // channels
    std::map<std::pair<std::string, std::string>, Amount> committed;
    if (const json* arr = r.array(doc, "channels", false))
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            const auto p = at("channels", i);
            const json& c = (*arr)[i];
            if (!r.object(c, p))
                continue;
            r.only(c, p, {"a", "b", "chain", "fund_a", "fund_b", "csv_delay"});
            ChannelSpec cs;
            cs.a = r.str(c, p, "a", true).value_or("");
            cs.b = r.str(c, p, "b", true).value_or("");
            cs.chain = r.str(c, p, "chain", true).value_or("");
            cs.fund_a = r.u64(c, p, "fund_a", true).value_or(0);
            cs.fund_b = r.u64(c, p, "fund_b", false, 0).value_or(0);
            cs.csv_delay = r.u64(c, p, "csv_delay", false, 6).value_or(6);
            const bool refs = actor_ref(p + ".a", cs.a) & actor_ref(p + ".b", cs.b) & chain_ref(p + ".chain", cs.chain);
            if (cs.a == cs.b)
                r.constraint(p + ".b", "a channel needs two distinct actors");
            if (cs.csv_delay == 0)
                r.constraint(p + ".csv_delay", "must be at least 1");
            if (refs)
            {
                const Amount fee = s.chain(cs.chain)->params.flat_fee;
                if (cs.fund_a < fee || cs.fund_a + cs.fund_b == 0)
                    r.constraint(p + ".fund_a", "the funder must cover the flat fee and the channel must hold funds");
                if (s.actor(cs.a)->role != Role::LiquidityProvider && s.actor(cs.b)->role != Role::LiquidityProvider)
                    r.constraint(p, "every channel must have a liquidity provider on one side");
                committed[{cs.a, cs.chain}] += cs.fund_a + fee;
                committed[{cs.b, cs.chain}] += cs.fund_b;
                for (const auto& who : {cs.a, cs.b})
                {
                    const auto& g = s.actor(who)->genesis;
                    auto it = g.find(cs.chain);
                    const Amount have = it == g.end() ? 0 : it->second;
                    if (committed[{who, cs.chain}] > have)
                        r.constraint(p, "actor '" + who + "' lacks genesis coins on '" + cs.chain +
                                            "' for this channel and its fee");
                }
            }
            s.channels.push_back(std::move(cs));
        }

    // every user and business reaches the network through an LP
    for (std::size_t i = 0; i < s.actors.size(); ++i)
    {
        const auto& a = s.actors[i];
        if (a.role == Role::LiquidityProvider)
            continue;
        bool has_lp = false;
        for (const auto& c : s.channels)
            if ((c.a == a.id || c.b == a.id) && s.actor(c.a) && s.actor(c.b))
                has_lp = true;
        if (!has_lp && !s.channels.empty())
            r.constraint(at("actors", i), "'" + a.id + "' needs at least one channel to a liquidity provider");
    }

    // quotes
    if (const json* arr = r.array(doc, "quotes", false))
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            const auto p = at("quotes", i);
            const json& q = (*arr)[i];
            if (!r.object(q, p))
                continue;
            r.only(q, p, {"lp", "asset_in", "asset_out", "rate_num", "rate_den", "base_fee", "fee_ppm"});
            QuoteSpec qs;
            qs.lp = r.str(q, p, "lp", true).value_or("");
            qs.quote.asset_in = r.str(q, p, "asset_in", true).value_or("");
            qs.quote.asset_out = r.str(q, p, "asset_out", true).value_or("");
            qs.quote.rate_num = r.u64(q, p, "rate_num", false, 1).value_or(1);
            qs.quote.rate_den = r.u64(q, p, "rate_den", false, 1).value_or(1);
            qs.quote.base_fee = r.u64(q, p, "base_fee", false, 0).value_or(0);
            const auto ppm = r.u64(q, p, "fee_ppm", false, 0).value_or(0);
            if (actor_ref(p + ".lp", qs.lp) && s.actor(qs.lp)->role != Role::LiquidityProvider)
                r.constraint(p + ".lp", "'" + qs.lp + "' is not a liquidity provider");
            asset_ref(p + ".asset_in", qs.quote.asset_in);
            asset_ref(p + ".asset_out", qs.quote.asset_out);
            if (qs.quote.rate_num == 0)
                r.constraint(p + ".rate_num", "must be positive");
            if (qs.quote.rate_den == 0)
                r.constraint(p + ".rate_den", "must be positive");
            if (ppm >= crp::RateQuote::kPpm)
                r.constraint(p + ".fee_ppm", "must be below 1000000");
            qs.quote.fee_ppm = static_cast<std::uint32_t>(std::min<std::uint64_t>(ppm, crp::RateQuote::kPpm));
            s.quotes.push_back(std::move(qs));
        }

    // payments
    if (const json* arr = r.array(doc, "payments", false))
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            const auto p = at("payments", i);
            const json& x = (*arr)[i];
            if (!r.object(x, p))
                continue;
            r.only(x, p, {"tick", "from", "to", "amount", "asset", "hash_fn"});
            PaymentSpec ps;
            ps.tick = r.u64(x, p, "tick", true).value_or(0);
            ps.from = r.str(x, p, "from", true).value_or("");
            ps.to = r.str(x, p, "to", true).value_or("");
            ps.amount = r.u64(x, p, "amount", true).value_or(0);
            ps.asset = r.str(x, p, "asset", true).value_or("");
            actor_ref(p + ".from", ps.from);
            actor_ref(p + ".to", ps.to);
            asset_ref(p + ".asset", ps.asset);
            if (ps.from == ps.to)
                r.constraint(p + ".to", "sender and recipient must differ");
            if (ps.amount == 0)
                r.constraint(p + ".amount", "must be positive");
            if (auto fn = r.str(x, p, "hash_fn", false, "SHA256"))
            {
                if (auto parsed = parse_hash_name(*fn))
                    ps.hash_fn = *parsed;
                else
                    r.constraint(p + ".hash_fn", "unknown hash function");
            }
            s.payments.push_back(std::move(ps));
        }

    // faults
    if (const json* arr = r.array(doc, "faults", false))
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            const auto p = at("faults", i);
            const json& x = (*arr)[i];
            if (!r.object(x, p))
                continue;
            r.only(x, p, {"tick", "kind", "target", "duration"});
            FaultSpec fs;
            fs.tick = r.u64(x, p, "tick", true).value_or(0);
            if (auto kind = r.str(x, p, "kind", true))
            {
                if (auto parsed = parse_fault(*kind))
                    fs.kind = *parsed;
                else
                    r.constraint(p + ".kind", "unknown fault kind '" + *kind + "'");
            }
            fs.target = r.str(x, p, "target", true).value_or("");
            actor_ref(p + ".target", fs.target);
            fs.duration = r.u64(x, p, "duration", false, 0).value_or(0);
            if (fs.kind == FaultKind::Crash && fs.duration == 0)
                r.constraint(p + ".duration", "a crash lasts at least one tick");
            s.faults.push_back(std::move(fs));
        }

    // mining
    if (const json* arr = r.array(doc, "mining", false))
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            const auto p = at("mining", i);
            const json& x = (*arr)[i];
            if (!r.object(x, p))
                continue;
            r.only(x, p, {"chain", "interval", "offset"});
            MiningSpec ms;
            ms.chain = r.str(x, p, "chain", true).value_or("");
            chain_ref(p + ".chain", ms.chain);
            ms.interval = r.u64(x, p, "interval", false, 1).value_or(1);
            ms.offset = r.u64(x, p, "offset", false, 0).value_or(0);
            if (ms.interval == 0)
                r.constraint(p + ".interval", "must be at least 1");
            s.mining.push_back(std::move(ms));
        }

    // closes
    if (const json* arr = r.array(doc, "closes", false))
        for (std::size_t i = 0; i < arr->size(); ++i)
        {
            const auto p = at("closes", i);
            const json& x = (*arr)[i];
            if (!r.object(x, p))
                continue;
            r.only(x, p, {"tick", "channel"});
            CloseSpec cs;
            cs.tick = r.u64(x, p, "tick", true).value_or(0);
            cs.channel = r.u64(x, p, "channel", true).value_or(0);
            if (cs.channel >= s.channels.size())
                r.unknown(p + ".channel", "no channel with index " + std::to_string(cs.channel));
            s.closes.push_back(cs);
        }

    if (!r.diags.empty())
        throw ScenarioError(std::move(r.diags));
    return s;
}

std::string to_json_text(const Scenario& s)
{
    ojson doc;
    doc["name"] = s.name;
    doc["seed"] = s.seed;
    doc["policy"] = {{"final_delta", s.policy.final_delta}, {"hop_delta", s.policy.hop_delta}};
    doc["chains"] = ojson::array();
    for (const auto& c : s.chains)
    {
        ojson fns = ojson::array();
        for (auto f : c.params.hash_fns)
            fns.push_back(std::string(chainlab::hash_fn_name(f)));
        doc["chains"].push_back({{"id", c.params.chain_id},
                                 {"asset", c.params.asset_id},
                                 {"hash_fns", fns},
                                 {"flat_fee", c.params.flat_fee},
                                 {"block_interval", c.params.block_interval},
                                 {"start_height", c.start_height}});
    }
    doc["actors"] = ojson::array();
    for (const auto& a : s.actors)
    {
        ojson g = ojson::object();
        for (const auto& [chain, amount] : a.genesis)
            g[chain] = amount;
        doc["actors"].push_back({{"id", a.id}, {"role", std::string(to_string(a.role))}, {"genesis", g}});
    }
    doc["channels"] = ojson::array();
    for (const auto& c : s.channels)
        doc["channels"].push_back({{"a", c.a},
                                   {"b", c.b},
                                   {"chain", c.chain},
                                   {"fund_a", c.fund_a},
                                   {"fund_b", c.fund_b},
                                   {"csv_delay", c.csv_delay}});
    doc["quotes"] = ojson::array();
    for (const auto& q : s.quotes)
        doc["quotes"].push_back({{"lp", q.lp},
                                 {"asset_in", q.quote.asset_in},
                                 {"asset_out", q.quote.asset_out},
                                 {"rate_num", q.quote.rate_num},
                                 {"rate_den", q.quote.rate_den},
                                 {"base_fee", q.quote.base_fee},
                                 {"fee_ppm", q.quote.fee_ppm}});
    doc["payments"] = ojson::array();
    for (const auto& p : s.payments)
        doc["payments"].push_back({{"tick", p.tick},
                                   {"from", p.from},
                                   {"to", p.to},
                                   {"amount", p.amount},
                                   {"asset", p.asset},
                                   {"hash_fn", std::string(chainlab::hash_fn_name(p.hash_fn))}});
    doc["faults"] = ojson::array();
    for (const auto& f : s.faults)
    {
        ojson x = {{"tick", f.tick}, {"kind", std::string(to_string(f.kind))}, {"target", f.target}};
        if (f.kind == FaultKind::Crash)
            x["duration"] = f.duration;
        doc["faults"].push_back(x);
    }
    doc["mining"] = ojson::array();
    for (const auto& m : s.mining)
        doc["mining"].push_back({{"chain", m.chain}, {"interval", m.interval}, {"offset", m.offset}});
    doc["closes"] = ojson::array();
    for (const auto& c : s.closes)
        doc["closes"].push_back({{"tick", c.tick}, {"channel", c.channel}});
    return doc.dump(2) + "\n";
}

} // namespace comit::simnet
