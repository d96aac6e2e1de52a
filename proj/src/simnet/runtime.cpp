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

#include "comit/chainlab/hash.hpp"

#include <algorithm>
#include <random>

namespace comit::simnet {

using channels::Channel;
using channels::ChannelError;
using channels::OutputRole;
using channels::PhaseKind;
using channels::Side;
using chainlab::Outpoint;
using chainlab::PayToKey;
using chainlab::PubKey;
using swap::AttemptStatus;
using swap::HopStatus;

std::size_t Report::onchain_tx_count() const
{
    std::size_t n = 0;
    for (const auto& c : chains)
        n += c.onchain_txs;
    return n;
}

bool Report::has_violation(std::string_view kind) const
{
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

namespace {

constexpr std::size_t kMaxGossipRounds = 64;
constexpr std::size_t kMaxViolationsPerKind = 8;

std::mt19937_64 actor_rng(std::uint64_t seed, const std::string& id)
{
    Bytes buf;
    for (int i = 0; i < 8; ++i)
        buf.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
    buf.insert(buf.end(), id.begin(), id.end());
    const Hash32 h = chainlab::sha256(buf);
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i)
        s |= static_cast<std::uint64_t>(h[i]) << (8 * i);
    return std::mt19937_64(s);
}

struct Attempt
{
    std::size_t payment = 0;
    swap::PaymentAttempt a;
    Hash32 secret{};
    /// node -> first tick it can act on the secret.
    std::map<std::string, Tick> knows;
    std::vector<std::optional<Tick>> resolved;
    bool terminal = false;
    std::string reason;
    std::optional<Tick> resolved_tick;
};

struct SlotFlags
{
    bool close_emitted = false;
    bool punish_done = false;
    bool swept = false;
};

struct ScheduledEvent
{
    Tick tick = 0;
    int section = 0;
    std::size_t index = 0;
};

class Runtime
{
public:
    Runtime(const Scenario& sc, const RunOptions& opts) : sc_(sc), opts_(opts) {}

    Report run();

private:
    // setup and scheduling
    void setup();
    std::vector<ScheduledEvent> schedule() const;
    bool mines(const std::string& chain, Tick t) const;

    // actor state
    bool online(const std::string& id) const;
    bool has_fault(const std::string& id, FaultKind k) const;
    std::set<std::string> offline_set() const;
    const std::string& owner(const PubKey& key) const;

    // events
    void handle_fault(std::size_t i);
    void handle_payment(std::size_t i);
    void run_gossip();
    crp::Graph sender_graph(const std::string& sender);

    // reactions
    void adversary();
    void reconcile(Attempt& at);
    void react(Attempt& at);
    void claim(Attempt& at, std::size_t i);
    void refund(Attempt& at, std::size_t i);
    void finish_if_terminal(Attempt& at);
    void channel_reactions();
    void pending_closes();
    bool quiescent() const;

    // invariants and report
    void check();
    void violation(std::string kind, std::string detail);
    void emit(std::string kind, std::vector<std::pair<std::string, EventValue>> fields);
    void note_close(std::size_t k);
    Report build_report();

    const Scenario& sc_;
    RunOptions opts_;
    swap::Network net_;
    Tick now_ = 0;
    std::map<std::string, std::mt19937_64> rng_;
    std::map<std::string, crp::GossipNode> gossip_;
    std::uint64_t advert_ts_ = 0;
    Tick last_gossip_ = ~Tick{0};
    /// actor -> first tick back online.
    std::map<std::string, Tick> crashed_until_;
    std::vector<std::pair<FaultKind, std::string>> active_;
    std::vector<std::size_t> pending_breach_;
    std::vector<std::size_t> pending_close_;
    std::vector<Attempt> attempts_;
    std::vector<SlotFlags> flags_;
    std::map<PubKey, std::string> key_owner_;
    std::map<std::string, std::map<std::string, Amount>> initial_;
    std::map<std::string, std::size_t> violation_count_;
    Report report_;
};

void Runtime::setup()
{
    for (const auto& c : sc_.chains)
        net_.add_chain(c.params, c.start_height);
    for (const auto& a : sc_.actors)
    {
        const auto& keys = net_.add_node(a.id);
        key_owner_[keys.key.pub] = a.id;
        rng_.emplace(a.id, actor_rng(sc_.seed, a.id));
        gossip_[a.id];
        for (const auto& [chain, amount] : a.genesis)
        {
            if (amount == 0)
                continue;
            net_.fund(a.id, chain, amount);
            initial_[a.id][sc_.chain(chain)->params.asset_id] += amount;
        }
    }
    for (const auto& c : sc_.channels)
    {
        const Amount fee = sc_.chain(c.chain)->params.flat_fee;
        const auto k = net_.open_channel(c.a, c.b, c.chain, c.fund_a, c.fund_b,
                                         channels::ChannelConfig{c.csv_delay, fee + 1});
        flags_.emplace_back();
        emit("open", {{"channel", std::uint64_t{k}}, {"a", c.a}, {"b", c.b}, {"chain", c.chain}});
    }
    std::map<std::string, std::vector<crp::RateQuote>> quotes;
    for (const auto& q : sc_.quotes)
        quotes[q.lp].push_back(q.quote);
    for (auto& [lp, qs] : quotes)
        net_.set_quotes(lp, std::move(qs));
}

std::vector<ScheduledEvent> Runtime::schedule() const
{
    // Within a tick: faults, then payments, then closes, each in file order.
    std::vector<ScheduledEvent> out;
    for (std::size_t i = 0; i < sc_.faults.size(); ++i)
        out.push_back({sc_.faults[i].tick, 0, i});
    for (std::size_t i = 0; i < sc_.payments.size(); ++i)
        out.push_back({sc_.payments[i].tick, 1, i});
    for (std::size_t i = 0; i < sc_.closes.size(); ++i)
        out.push_back({sc_.closes[i].tick, 2, i});
    std::stable_sort(out.begin(), out.end(), [](const ScheduledEvent& x, const ScheduledEvent& y) {
        return std::tie(x.tick, x.section) < std::tie(y.tick, y.section);
    });
    return out;
}

bool Runtime::mines(const std::string& chain, Tick t) const
{
    const MiningSpec m = sc_.mining_for(chain);
    return t != 0 && t >= m.offset && (t - m.offset) % m.interval == 0;
}

bool Runtime::online(const std::string& id) const
{
    auto it = crashed_until_.find(id);
    return it == crashed_until_.end() || now_ >= it->second;
}

bool Runtime::has_fault(const std::string& id, FaultKind k) const
{
    return std::any_of(active_.begin(), active_.end(), [&](const auto& f) { return f.first == k && f.second == id; });
}

std::set<std::string> Runtime::offline_set() const
{
    std::set<std::string> out;
    for (const auto& a : sc_.actors)
        if (!online(a.id))
            out.insert(a.id);
    return out;
}

const std::string& Runtime::owner(const PubKey& key) const
{
    static const std::string none;
    auto it = key_owner_.find(key);
    return it == key_owner_.end() ? none : it->second;
}

void Runtime::emit(std::string kind, std::vector<std::pair<std::string, EventValue>> fields)
{
    report_.events.push_back(EventRecord{now_, std::move(kind), std::move(fields)});
}

void Runtime::violation(std::string kind, std::string detail)
{
    if (++violation_count_[kind] > kMaxViolationsPerKind)
        return;
    report_.violations.push_back(Violation{std::move(kind), now_, std::move(detail)});
}

void Runtime::check()
{
    std::map<std::string, Amount> held;
    std::map<std::string, Amount> expected;
    for (const auto& [id, l] : net_.ledgers())
    {
        const auto& asset = l.params().asset_id;
        held[asset] += l.utxo_total();
        expected[asset] += l.genesis_total() - l.burned_fees();
    }
    for (std::size_t k = 0; k < net_.slots().size(); ++k)
    {
        const Channel& ch = net_.slot(k).channel;
        const auto& l = net_.ledger(ch.chain_id());
        const auto& st = ch.state();
        const Amount inside = st.balance_a + st.balance_b + st.htlc_total();
        if (inside != ch.funding_amount())
            violation("channel-conservation", "channel " + std::to_string(k) + " holds " + std::to_string(inside) +
                                                  " of " + std::to_string(ch.funding_amount()));
        if (l.utxo(ch.id()))
            held[l.params().asset_id] += inside - ch.funding_amount();
    }
    for (const auto& [asset, want] : expected)
        if (held[asset] != want)
            violation("conservation", asset + ": " + std::to_string(held[asset]) + " != " + std::to_string(want));
}

void Runtime::note_close(std::size_t k)
{
    auto& f = flags_[k];
    const Channel& ch = net_.slot(k).channel;
    if (f.close_emitted || ch.phase().kind == PhaseKind::Open || ch.phase().kind == PhaseKind::Opening)
        return;
    f.close_emitted = true;
    const auto kind = ch.phase().kind;
    std::string how = "unilateral";
    if (kind == PhaseKind::CooperativeClosing || (ch.closing() && ch.closing()->kind == channels::Closing::Kind::Cooperative))
        how = "cooperative";
    else if (kind == PhaseKind::Breached || (ch.closing() && ch.closing()->revoked))
        how = "revoked";
    emit("close", {{"channel", std::uint64_t{k}},
                   {"how", how},
                   {"by", net_.slot(k).node(ch.phase().by)}});
}

void Runtime::run_gossip()
{
    if (last_gossip_ == now_)
        return;
    last_gossip_ = now_;
    const auto offline = offline_set();
    const auto graph = net_.graph();
    std::map<std::string, std::vector<crp::LpAdvert>> outbox;
    std::map<std::string, std::vector<std::string>> peers;
    for (const auto& a : sc_.actors)
    {
        if (offline.contains(a.id))
            continue;
        peers[a.id];
        if (a.role != Role::LiquidityProvider)
            continue;
        crp::LpAdvert ad;
        ad.node_id = a.id;
        ad.onion_pubkey = net_.node(a.id).onion.pub;
        for (const auto& e : graph.edges())
            if (e.from == a.id)
                ad.channels.push_back(crp::ChannelEndpoint{e.chain_id, e.to, net_.node(e.to).key.pub, e.capacity});
        ad.quotes = net_.quotes(a.id);
        ad.timestamp = ++advert_ts_;
        outbox[a.id].push_back(crp::sign_advert(std::move(ad), net_.node(a.id).key));
    }
    for (const auto& s : net_.slots())
    {
        if (s.channel.phase().kind != PhaseKind::Open || offline.contains(s.node_a) || offline.contains(s.node_b))
            continue;
        for (auto [x, y] : {std::pair{s.node_a, s.node_b}, std::pair{s.node_b, s.node_a}})
        {
            auto& list = peers[x];
            if (std::find(list.begin(), list.end(), y) == list.end())
                list.push_back(y);
        }
    }
    std::set<std::string> silent = offline;
    for (const auto& [kind, who] : active_)
        if (kind == FaultKind::DropGossip)
            silent.insert(who);
    // Offline nodes neither send nor receive.
    std::map<std::string, crp::GossipNode> reachable;
    for (const auto& [id, node] : gossip_)
        if (!offline.contains(id))
            reachable.emplace(id, node);
    const auto stats = crp::run_gossip(reachable, peers, std::move(outbox), net_.keys(), kMaxGossipRounds, silent);
    for (auto& [id, node] : reachable)
        gossip_[id] = std::move(node);
    report_.gossip.push_back(GossipRecord{now_, stats});
}

crp::Graph Runtime::sender_graph(const std::string& sender)
{
    crp::Graph g;
    for (const auto& c : sc_.chains)
        g.add_chain(crp::ChainInfo{c.params.chain_id, c.params.asset_id, c.params.hash_fns});
    for (const auto& a : sc_.actors)
        g.add_node(crp::NodeInfo{a.id, net_.node(a.id).key.pub, net_.node(a.id).onion.pub, {}});
    crp::add_adverts(g, gossip_[sender].known());
    // The sender knows its own channels exactly.
    const auto own = net_.graph();
    for (const auto& e : own.edges())
        if (e.from == sender)
            g.add_edge(e);
    return g;
}

void Runtime::handle_fault(std::size_t i)
{
    const auto& f = sc_.faults[i];
    FaultRecord rec{now_, f.kind, f.target, "active"};
    if (f.kind == FaultKind::Crash)
    {
        auto& until = crashed_until_[f.target];
        until = std::max(until, now_ + f.duration);
        rec.effect = "offline until tick " + std::to_string(until);
    }
    else
    {
        active_.emplace_back(f.kind, f.target);
        if (f.kind == FaultKind::BroadcastRevoked)
        {
            rec.effect = "waiting for a revoked commitment";
            pending_breach_.push_back(report_.faults.size());
        }
    }
    emit("fault", {{"kind", std::string(to_string(f.kind))}, {"target", f.target}});
    report_.faults.push_back(std::move(rec));
}

void Runtime::handle_payment(std::size_t idx)
{
    const auto& p = sc_.payments[idx];
    Attempt at;
    at.payment = idx;
    auto inv = swap::make_invoice(p.to, p.amount, p.asset, p.hash_fn, rng_.at(p.to));
    at.secret = inv.secret;
    at.a.invoice = inv.invoice;
    at.a.status = AttemptStatus::Refunded;

    auto give_up = [&](std::string why) {
        at.terminal = true;
        at.reason = std::move(why);
        at.resolved_tick = now_;
        emit("refunded", {{"payment", std::uint64_t{idx}}, {"reason", at.reason}});
        attempts_.push_back(std::move(at));
    };

    if (!online(p.from))
        return give_up("sender-offline");
    run_gossip();
    const auto route = crp::find_route(sender_graph(p.from), p.from, p.to, p.amount, p.asset, sc_.policy);
    if (!route)
        return give_up("no-route");
    if (!route->hash_fns.contains(p.hash_fn))
        return give_up("unsupported-hash-function");

    Hash32 session{};
    std::uniform_int_distribution<unsigned> byte(0, 255);
    for (auto& b : session)
        b = static_cast<std::uint8_t>(byte(rng_.at(p.from)));

    swap::DispatchOptions opts;
    opts.policy = sc_.policy;
    opts.offline = offline_set();
    for (const auto& [kind, who] : active_)
        if (kind == FaultKind::RefuseForward)
            opts.refusing.insert(who);

    emit("dispatched", {{"payment", std::uint64_t{idx}},
                        {"hops", std::uint64_t{route->hops.size()}},
                        {"amount_in", route->amount_in()}});
    auto res = swap::dispatch_payment(net_, inv.invoice, *route, session, opts);
    at.a = std::move(res.attempt);
    at.resolved.assign(at.a.hops.size(), std::nullopt);
    at.knows[p.to] = now_ + 1;
    for (std::size_t i = 0; i < at.a.hops.size(); ++i)
    {
        const auto& h = at.a.hops[i];
        if (!h.htlc_id)
            continue;
        emit("hop-added", {{"payment", std::uint64_t{idx}}, {"hop", std::uint64_t{i}}, {"chain", h.chain_id},
                           {"amount", h.amount}, {"expiry", h.expiry}});
        emit("update", {{"channel", std::uint64_t{*h.channel}}, {"reason", std::string("add")}});
    }
    for (std::size_t i = at.a.hops.size(); i-- > 0;)
        if (at.a.hops[i].status == HopStatus::Failed)
        {
            at.resolved[i] = now_;
            emit("fail", {{"payment", std::uint64_t{idx}}, {"hop", std::uint64_t{i}},
                          {"channel", std::uint64_t{*at.a.hops[i].channel}}});
        }
    if (res.refusal != swap::RefusalReason::None)
        at.reason = std::string(swap::to_string(res.refusal));
    attempts_.push_back(std::move(at));
    finish_if_terminal(attempts_.back());
}

void Runtime::adversary()
{
    for (auto it = pending_breach_.begin(); it != pending_breach_.end();)
    {
        auto& rec = report_.faults[*it];
        bool done = false;
        if (online(rec.target))
            for (std::size_t k = 0; k < net_.slots().size() && !done; ++k)
            {
                auto& slot = net_.slot(k);
                if (slot.node_a != rec.target && slot.node_b != rec.target)
                    continue;
                Channel& ch = slot.channel;
                auto& ledger = net_.ledger(ch.chain_id());
                ch.observe(ledger);
                if (ch.phase().kind != PhaseKind::Open || !ch.state().pending_htlcs.empty() ||
                    ch.revocation_pending() || ch.latest_number() == 0)
                    continue;
                const Side me = slot.side_of(rec.target);
                std::uint64_t best = 0;
                for (std::uint64_t n = 1; n < ch.latest_number(); ++n)
                    if (ch.state_at(n).balance(me) > ch.state_at(best).balance(me))
                        best = n;
                if (!ch.is_revoked(me, best))
                    continue;
                try
                {
                    ch.unilateral_close(ledger, me, best);
                }
                catch (const ChannelError&)
                {
                    continue;
                }
                rec.effect = "broadcast revoked commitment " + std::to_string(best) + " of channel " +
                             std::to_string(k) + " at tick " + std::to_string(now_);
                emit("breach", {{"channel", std::uint64_t{k}}, {"by", rec.target}, {"commitment", best}});
                note_close(k);
                done = true;
            }
        it = done ? pending_breach_.erase(it) : it + 1;
    }
}

std::optional<Hash32> preimage_in(const chainlab::Transaction& tx, const Outpoint& op, const swap::Invoice& inv)
{
    for (const auto& in : tx.inputs)
    {
        if (in.prevout != op)
            continue;
        for (const auto& pre : in.witness.preimages)
            if (pre.size() == 32 && chainlab::hash_digest(inv.hash_fn, pre) == inv.payment_hash)
            {
                Hash32 s{};
                std::copy(pre.begin(), pre.end(), s.begin());
                return s;
            }
    }
    return std::nullopt;
}

void Runtime::reconcile(Attempt& at)
{
    for (std::size_t i = 0; i < at.a.hops.size(); ++i)
    {
        auto& hop = at.a.hops[i];
        if (hop.status != HopStatus::Offered)
            continue;
        Channel& ch = net_.slot(*hop.channel).channel;
        auto& ledger = net_.ledger(hop.chain_id);
        ch.observe(ledger);
        note_close(*hop.channel);
        if (!ch.closing() || !ch.closing()->commitment)
            continue;
        auto idx = ch.closing()->commitment->output_of(OutputRole::Kind::HtlcOutput, *hop.htlc_id);
        if (!idx)
            continue;
        const Outpoint op{ch.closing()->txid, *idx};
        auto spender = ledger.spender(op);
        const chainlab::Transaction* tx = spender ? ledger.find_tx(*spender) : nullptr;
        if (!tx)
            continue;
        if (preimage_in(*tx, op, at.a.invoice))
        {
            hop.status = HopStatus::ClaimedOnChain;
            at.knows.emplace(hop.offerer, now_);
        }
        else
            hop.status = HopStatus::RefundedOnChain;
        hop.onchain_txs.push_back(*spender);
        at.resolved[i] = now_;
        emit(hop.status == HopStatus::ClaimedOnChain ? "claim-seen" : "refund-seen",
             {{"payment", std::uint64_t{at.payment}}, {"hop", std::uint64_t{i}}});
    }
    swap::update_status(at.a);
}

void Runtime::claim(Attempt& at, std::size_t i)
{
    const auto k = *at.a.hops[i].channel;
    bool ok = false;
    try
    {
        ok = swap::claim_hop_onchain(net_, at.a, i, at.secret);
    }
    catch (const ChannelError&)
    {
    }
    note_close(k);
    if (!ok)
        return;
    at.resolved[i] = now_;
    // Visible to the offerer once it reads the chain.
    at.knows.emplace(at.a.hops[i].offerer, now_ + 1);
    emit("claim", {{"payment", std::uint64_t{at.payment}}, {"hop", std::uint64_t{i}}, {"channel", std::uint64_t{k}}});
}

void Runtime::refund(Attempt& at, std::size_t i)
{
    const auto k = *at.a.hops[i].channel;
    bool ok = false;
    try
    {
        ok = swap::refund_hop_onchain(net_, at.a, i);
    }
    catch (const ChannelError&)
    {
    }
    note_close(k);
    if (!ok)
        return;
    at.resolved[i] = now_;
    emit("refund", {{"payment", std::uint64_t{at.payment}}, {"hop", std::uint64_t{i}}, {"channel", std::uint64_t{k}}});
}

void Runtime::react(Attempt& at)
{
    auto knows = [&](const std::string& who) {
        auto it = at.knows.find(who);
        return it != at.knows.end() && it->second <= now_;
    };
    const std::size_t n = at.a.hops.size();
    for (std::size_t i = n; i-- > 0;)
    {
        auto& hop = at.a.hops[i];
        if (hop.status != HopStatus::Offered)
            continue;
        const auto k = *hop.channel;
        Channel& ch = net_.slot(k).channel;
        auto& ledger = net_.ledger(hop.chain_id);
        ch.observe(ledger);
        const bool open = ch.phase().kind == PhaseKind::Open;
        const Height h = ledger.height();
        const std::string& recv = hop.receiver;
        const std::string& off = hop.offerer;
        const bool stalls = has_fault(recv, FaultKind::StallSecret);

        if (knows(recv) && online(recv))
        {
            if (stalls)
            {
                // Hold the secret until the last block the claim can still win.
                if (h + 1 >= hop.expiry)
                    claim(at, i);
                continue;
            }
            if (online(off) && open && h < hop.expiry && !ch.revocation_pending())
            {
                try
                {
                    swap::fulfill_hop(net_, at.a, i, at.secret);
                    at.resolved[i] = now_;
                    at.knows.emplace(off, now_ + 1);
                    emit("fulfill", {{"payment", std::uint64_t{at.payment}}, {"hop", std::uint64_t{i}},
                                     {"channel", std::uint64_t{k}}});
                    continue;
                }
                catch (const ChannelError&)
                {
                }
            }
            claim(at, i);
            continue;
        }
        if (h >= hop.expiry)
        {
            if (!online(off))
                continue;
            if (open && online(recv) && !stalls && !ch.revocation_pending())
            {
                try
                {
                    swap::fail_hop(net_, at.a, i);
                    at.resolved[i] = now_;
                    emit("fail", {{"payment", std::uint64_t{at.payment}}, {"hop", std::uint64_t{i}},
                                  {"channel", std::uint64_t{k}}});
                    continue;
                }
                catch (const ChannelError&)
                {
                }
            }
            refund(at, i);
            continue;
        }
        if (i + 1 < n)
        {
            const auto& next = at.a.hops[i + 1];
            const bool returned = next.status == HopStatus::Failed || next.status == HopStatus::RefundedOnChain;
            if (returned && at.resolved[i + 1] && *at.resolved[i + 1] < now_ && open && online(recv) &&
                online(off) && !stalls && !ch.revocation_pending())
            {
                try
                {
                    swap::fail_hop(net_, at.a, i);
                    at.resolved[i] = now_;
                    emit("fail", {{"payment", std::uint64_t{at.payment}}, {"hop", std::uint64_t{i}},
                                  {"channel", std::uint64_t{k}}});
                }
                catch (const ChannelError&)
                {
                }
            }
        }
    }
    swap::update_status(at.a);
}

void Runtime::finish_if_terminal(Attempt& at)
{
    if (at.terminal)
        return;
    for (const auto& h : at.a.hops)
        if (h.status == HopStatus::Offered)
            return;
    swap::update_status(at.a);
    at.terminal = true;
    at.resolved_tick = now_;
    if (at.a.status == AttemptStatus::Settled)
        emit("settled", {{"payment", std::uint64_t{at.payment}}});
    else if (at.a.status == AttemptStatus::Refunded)
    {
        if (at.reason.empty())
            at.reason = "expired";
        emit("refunded", {{"payment", std::uint64_t{at.payment}}, {"reason", at.reason}});
    }
    else
        violation("atomicity", "payment " + std::to_string(at.payment) + " ended with paid and returned hops");
}

void Runtime::channel_reactions()
{
    for (std::size_t k = 0; k < net_.slots().size(); ++k)
    {
        auto& slot = net_.slot(k);
        Channel& ch = slot.channel;
        auto& ledger = net_.ledger(ch.chain_id());
        ch.observe(ledger);
        note_close(k);
        auto& f = flags_[k];
        const auto kind = ch.phase().kind;
        if (kind == PhaseKind::Breached && !f.punish_done)
        {
            const Side honest = channels::other(ch.phase().by);
            const auto& who = slot.node(honest);
            if (!online(who))
                continue;
            f.punish_done = true;
            emit("breach-detected", {{"channel", std::uint64_t{k}}, {"by", slot.node(ch.phase().by)}});
            try
            {
                const auto tx = ch.punish_breach(ledger, honest);
                emit("punish", {{"channel", std::uint64_t{k}}, {"by", who}, {"claimed", tx.output_total()}});
            }
            catch (const ChannelError& e)
            {
                emit("punish-failed", {{"channel", std::uint64_t{k}}, {"error", std::string(e.what())}});
            }
        }
        else if (kind == PhaseKind::UnilateralClosed && !f.swept)
        {
            const Side holder = ch.phase().by;
            if (!online(slot.node(holder)) || !ch.closing() || !ch.closing()->commitment)
                continue;
            f.swept = true;
            auto local = ch.closing()->commitment->output_of(OutputRole::Kind::ToLocal);
            if (!local || ledger.spender(Outpoint{ch.closing()->txid, *local}))
                continue;
            if (auto tx = ch.sweep_to_local(ledger); tx && ledger.submit_tx(*tx))
                emit("sweep", {{"channel", std::uint64_t{k}}, {"by", slot.node(holder)}});
        }
    }
}

void Runtime::pending_closes()
{
    for (auto it = pending_close_.begin(); it != pending_close_.end();)
    {
        const auto k = sc_.closes[*it].channel;
        auto& slot = net_.slot(k);
        Channel& ch = slot.channel;
        auto& ledger = net_.ledger(ch.chain_id());
        ch.observe(ledger);
        if (ch.phase().kind != PhaseKind::Open)
        {
            emit("close-skipped", {{"channel", std::uint64_t{k}}});
            it = pending_close_.erase(it);
            continue;
        }
        if (online(slot.node_a) && online(slot.node_b) && ch.state().pending_htlcs.empty() &&
            !ch.revocation_pending())
        {
            try
            {
                ch.cooperative_close(ledger);
                note_close(k);
                it = pending_close_.erase(it);
                continue;
            }
            catch (const ChannelError&)
            {
            }
        }
        ++it;
    }
}

bool Runtime::quiescent() const
{
    if (!pending_close_.empty())
        return false;
    for (const auto& at : attempts_)
        if (!at.terminal)
            return false;
    for (const auto& [id, until] : crashed_until_)
        if (now_ < until)
            return false;
    for (const auto& [id, l] : net_.ledgers())
        if (l.mempool_size() != 0)
            return false;
    for (std::size_t k = 0; k < flags_.size(); ++k)
    {
        const auto kind = net_.slot(k).channel.phase().kind;
        if ((kind == PhaseKind::Breached && !flags_[k].punish_done) ||
            (kind == PhaseKind::UnilateralClosed && !flags_[k].swept))
            return false;
    }
    return true;
}

Report Runtime::run()
{
    report_.name = sc_.name;
    report_.seed = sc_.seed;
    setup();
    run_gossip();
    check();

    const auto events = schedule();
    Tick last = 0;
    for (const auto& e : events)
        last = std::max(last, e.tick);
    for (const auto& f : sc_.faults)
        if (f.kind == FaultKind::Crash)
            last = std::max(last, f.tick + f.duration);

    std::size_t next = 0;
    for (now_ = 0;; ++now_)
    {
        if (now_ > 0)
        {
            for (auto& [id, l] : net_.ledgers())
                if (mines(id, now_))
                    l.mine_blocks(1);
            net_.observe_all();
            check();
        }
        for (; next < events.size() && events[next].tick == now_; ++next)
        {
            const auto& e = events[next];
            if (e.section == 0)
                handle_fault(e.index);
            else if (e.section == 1)
                handle_payment(e.index);
            else
                pending_close_.push_back(e.index);
            check();
        }
        adversary();
        for (auto& at : attempts_)
            if (!at.terminal)
                reconcile(at);
        for (auto& at : attempts_)
            if (!at.terminal)
            {
                react(at);
                finish_if_terminal(at);
            }
        check();
        channel_reactions();
        pending_closes();
        check();
        if (now_ >= last && quiescent())
            break;
        if (now_ >= last + opts_.max_idle_ticks)
        {
            violation("non-terminal", "still active " + std::to_string(opts_.max_idle_ticks) +
                                          " ticks after the last event");
            break;
        }
    }
    return build_report();
}

Report Runtime::build_report()
{
    Report& r = report_;
    r.final_tick = now_;

    // Ownership of on-chain value.
    std::map<Outpoint, std::string> close_owner;
    std::map<Outpoint, std::size_t> funding;
    for (std::size_t k = 0; k < net_.slots().size(); ++k)
    {
        const auto& slot = net_.slot(k);
        funding[slot.channel.id()] = k;
        const auto& c = slot.channel.closing();
        if (!c || !c->commitment)
            continue;
        for (std::uint32_t i = 0; i < c->commitment->roles.size(); ++i)
        {
            const auto& role = c->commitment->roles[i];
            if (role.kind == OutputRole::Kind::ToLocal)
                close_owner[Outpoint{c->txid, i}] = slot.node(c->commitment->holder);
            else if (role.kind == OutputRole::Kind::HtlcOutput)
                close_owner[Outpoint{c->txid, i}] = slot.node(role.owner);
        }
    }

    for (const auto& a : sc_.actors)
        for (const auto& c : sc_.chains)
            r.balances[a.id][c.params.asset_id].initial = initial_[a.id][c.params.asset_id];

    for (const auto& [id, l] : net_.ledgers())
    {
        const auto& asset = l.params().asset_id;
        for (const auto& [op, entry] : l.utxos())
        {
            if (const auto* p2k = std::get_if<PayToKey>(&entry.script.node); p2k && !owner(p2k->key).empty())
                r.balances[owner(p2k->key)][asset].onchain += entry.amount;
            else if (auto f = funding.find(op); f != funding.end())
            {
                const auto& slot = net_.slot(f->second);
                const auto& st = slot.channel.state();
                for (Side side : {Side::A, Side::B})
                {
                    Amount v = st.balance(side);
                    for (const auto& h : st.pending_htlcs)
                        if (channels::offerer(h.direction) == side)
                            v += h.amount;
                    r.balances[slot.node(side)][asset].channel += v;
                }
            }
            else if (auto o = close_owner.find(op); o != close_owner.end())
                r.balances[o->second][asset].locked += entry.amount;
            else
                r.unattributed[asset] += entry.amount;
        }

        // Fees: the channel funder pays for funding, commitments and closes.
        for (const auto& ctx : l.history())
        {
            std::string payer;
            for (const auto& [op, k] : funding)
            {
                if (net_.slot(k).channel.chain_id() != id)
                    continue;
                bool touches = ctx.txid == op.txid;
                for (const auto& in : ctx.tx.inputs)
                    touches = touches || in.prevout == op;
                if (touches)
                {
                    payer = net_.slot(k).node_a;
                    break;
                }
            }
            if (payer.empty() && !ctx.tx.outputs.empty())
                if (const auto* p2k = std::get_if<PayToKey>(&ctx.tx.outputs[0].script.node))
                    payer = owner(p2k->key);
            if (!payer.empty())
                r.balances[payer][asset].fees_authorized += ctx.fee;
        }
        r.chains.push_back(ChainRecord{id, asset, l.height(), l.history().size(), l.burned_fees()});
    }

    // Reconciliation against the ledgers.
    std::map<std::string, Amount> total;
    std::map<std::string, Amount> expected;
    for (const auto& [actor, per] : r.balances)
        for (const auto& [asset, b] : per)
            total[asset] += b.final_total();
    for (const auto& [asset, v] : r.unattributed)
        total[asset] += v;
    for (const auto& [id, l] : net_.ledgers())
        expected[l.params().asset_id] += l.genesis_total() - l.burned_fees();
    for (const auto& [asset, want] : expected)
        if (total[asset] != want)
            violation("reconcile", asset + ": report " + std::to_string(total[asset]) + " != ledger " +
                                       std::to_string(want));

    // Payments and what they entitle each actor to.
    for (auto& at : attempts_)
    {
        const auto& p = sc_.payments[at.payment];
        PaymentRecord rec;
        rec.index = at.payment;
        rec.tick = p.tick;
        rec.from = p.from;
        rec.to = p.to;
        rec.amount = p.amount;
        rec.asset = p.asset;
        rec.failed_hop = at.a.failed_hop;
        rec.resolved_tick = at.resolved_tick;
        if (!at.a.hops.empty())
        {
            rec.path = at.a.route.node_path();
            rec.amount_in = at.a.route.amount_in();
        }
        for (const auto& h : at.a.hops)
            rec.hops.push_back(HopRecord{h.offerer, h.receiver, h.chain_id, h.amount, h.expiry, h.status,
                                         h.onchain_txs.size()});
        if (!at.terminal)
        {
            rec.outcome = "pending";
            violation("non-terminal", "payment " + std::to_string(at.payment) + " never resolved");
        }
        else if (at.a.status == AttemptStatus::Settled)
            rec.outcome = "settled";
        else if (at.a.status == AttemptStatus::Refunded)
        {
            rec.outcome = "refunded";
            rec.reason = at.reason;
        }
        else
            rec.outcome = "mixed";
        if (at.terminal && at.a.status == AttemptStatus::Settled)
            for (const auto& h : at.a.hops)
            {
                const auto& asset = net_.ledger(h.chain_id).params().asset_id;
                r.balances[h.offerer][asset].entitled -= static_cast<std::int64_t>(h.amount);
                r.balances[h.receiver][asset].entitled += static_cast<std::int64_t>(h.amount);
            }
        r.payments.push_back(std::move(rec));
    }

    // Honest actors never end below what the protocol owes them.
    std::set<std::string> adversaries;
    for (const auto& f : sc_.faults)
        adversaries.insert(f.target);
    r.honest_loss_checked = adversaries.size() <= 1;
    if (r.honest_loss_checked)
        for (const auto& [actor, per] : r.balances)
        {
            if (adversaries.contains(actor))
                continue;
            for (const auto& [asset, b] : per)
            {
                const auto have = static_cast<__int128>(b.final_total()) + b.fees_authorized;
                const auto owed = static_cast<__int128>(b.initial) + b.entitled;
                if (have < owed)
                    violation("honest-loss", actor + " " + asset + ": final " + std::to_string(b.final_total()) +
                                                 " + fees " + std::to_string(b.fees_authorized) + " < initial " +
                                                 std::to_string(b.initial) + " + entitled " +
                                                 std::to_string(b.entitled));
            }
        }

    for (std::size_t k = 0; k < net_.slots().size(); ++k)
    {
        const auto& slot = net_.slot(k);
        const auto& st = slot.channel.state();
        r.channels.push_back(ChannelRecord{k, slot.node_a, slot.node_b, slot.channel.chain_id(),
                                           slot.channel.phase().kind, slot.channel.latest_number(), st.balance_a,
                                           st.balance_b});
    }
    for (auto& f : r.faults)
        if (f.kind == FaultKind::BroadcastRevoked && f.effect.starts_with("waiting"))
            f.effect = "no revoked commitment to broadcast";

    r.digest.clear();
    const std::string body = to_json(r);
    r.digest = to_hex(chainlab::sha256(Bytes(body.begin(), body.end())));
    return r;
}

} // namespace

Report run_scenario(const Scenario& scenario, const RunOptions& options)
{
    Runtime rt(scenario, options);
    try
    {
        return rt.run();
    }
    catch (const std::exception& e)
    {
        Report r;
        r.name = scenario.name;
        r.seed = scenario.seed;
        r.violations.push_back(Violation{"internal", 0, e.what()});
        return r;
    }
}

} // namespace comit::simnet
