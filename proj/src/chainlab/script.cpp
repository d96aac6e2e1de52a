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

#include "comit/chainlab/script.hpp"

#include <initializer_list>

namespace comit::chainlab {

namespace {

enum class Tag : std::uint8_t
{
    PayToKey = 1,
    Multisig2of2 = 2,
    HashLock = 3,
    TimeLockAbs = 4,
    TimeLockRel = 5,
    Htlc = 6,
    Or = 7,
};

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void write_script(Writer& w, const Script& s)
{
    std::visit(Overloaded{
                   [&](const PayToKey& p) {
                       w.u8(static_cast<std::uint8_t>(Tag::PayToKey));
                       w.raw(p.key.bytes);
                   },
                   [&](const Multisig2of2& m) {
                       w.u8(static_cast<std::uint8_t>(Tag::Multisig2of2));
                       w.raw(m.key_a.bytes);
                       w.raw(m.key_b.bytes);
                   },
                   [&](const HashLock& h) {
                       w.u8(static_cast<std::uint8_t>(Tag::HashLock));
                       w.u8(static_cast<std::uint8_t>(h.hash_fn));
                       w.raw(h.hash);
                       w.raw(h.claim.bytes);
                   },
                   [&](const TimeLockAbs& t) {
                       w.u8(static_cast<std::uint8_t>(Tag::TimeLockAbs));
                       w.u64(t.unlock_height);
                       w.raw(t.key.bytes);
                   },
                   [&](const TimeLockRel& t) {
                       w.u8(static_cast<std::uint8_t>(Tag::TimeLockRel));
                       w.u64(t.delta_blocks);
                       w.raw(t.key.bytes);
                   },
                   [&](const HtlcScript& h) {
                       w.u8(static_cast<std::uint8_t>(Tag::Htlc));
                       w.u8(static_cast<std::uint8_t>(h.hash_fn));
                       w.raw(h.hash);
                       w.raw(h.claim.bytes);
                       w.raw(h.refund.bytes);
                       w.u64(h.refund_height);
                   },
                   [&](const OrScript& o) {
                       w.u8(static_cast<std::uint8_t>(Tag::Or));
                       w.var_bytes(o.branch_a->serialize());
                       w.var_bytes(o.branch_b->serialize());
                   },
               },
               s.node);
}

PubKey read_key(Reader& r)
{
    PubKey k;
    auto b = r.raw(32);
    std::copy(b.begin(), b.end(), k.bytes.begin());
    return k;
}

Hash32 read_hash(Reader& r)
{
    Hash32 h;
    auto b = r.raw(32);
    std::copy(b.begin(), b.end(), h.begin());
    return h;
}

HashFnId read_hash_fn(Reader& r)
{
    auto id = static_cast<HashFnId>(r.u8());
    hash_fn_name(id); // rejects values outside the closed set
    return id;
}

Script read_script(Reader& r)
{
    switch (static_cast<Tag>(r.u8()))
    {
    case Tag::PayToKey:
        return Script{PayToKey{read_key(r)}};
    case Tag::Multisig2of2: {
        auto a = read_key(r);
        auto b = read_key(r);
        return Script{Multisig2of2{a, b}};
    }
    case Tag::HashLock: {
        auto fn = read_hash_fn(r);
        auto h = read_hash(r);
        return Script{HashLock{fn, h, read_key(r)}};
    }
    case Tag::TimeLockAbs: {
        auto height = r.u64();
        return Script{TimeLockAbs{height, read_key(r)}};
    }
    case Tag::TimeLockRel: {
        auto delta = r.u64();
        return Script{TimeLockRel{delta, read_key(r)}};
    }
    case Tag::Htlc: {
        HtlcScript h;
        h.hash_fn = read_hash_fn(r);
        h.hash = read_hash(r);
        h.claim = read_key(r);
        h.refund = read_key(r);
        h.refund_height = r.u64();
        return Script{h};
    }
    case Tag::Or: {
        auto a = r.var_bytes();
        auto b = r.var_bytes();
        return make_or(Script::deserialize(a), Script::deserialize(b));
    }
    }
    throw std::invalid_argument("unknown script tag");
}

/// Signatures must match `required` one-to-one.
bool signatures_match(const Witness& w, std::initializer_list<PubKey> required, const Hash32& digest,
                      const KeyRegistry& keys)
{
    if (w.signatures.size() != required.size())
        return false;
    for (const auto& key : required)
    {
        std::size_t hits = 0;
        for (const auto& sig : w.signatures)
            if (sig.signer == key && keys.verify(key, digest, sig))
                ++hits;
        if (hits != 1)
            return false;
    }
    return true;
}

bool preimage_matches(const Witness& w, HashFnId fn, const Hash32& hash)
{
    return w.preimages.size() == 1 && hash_digest(fn, w.preimages.front()) == hash;
}

bool eval(const Script& s, const Witness& w, const VerifyContext& ctx, const KeyRegistry& keys,
          std::size_t depth)
{
    return std::visit(
        Overloaded{
            [&](const PayToKey& p) {
                return w.preimages.empty() && signatures_match(w, {p.key}, ctx.tx_digest, keys);
            },
            [&](const Multisig2of2& m) {
                return m.key_a != m.key_b && w.preimages.empty() &&
                       signatures_match(w, {m.key_a, m.key_b}, ctx.tx_digest, keys);
            },
            [&](const HashLock& h) {
                return preimage_matches(w, h.hash_fn, h.hash) &&
                       signatures_match(w, {h.claim}, ctx.tx_digest, keys);
            },
            [&](const TimeLockAbs& t) {
                return w.preimages.empty() && ctx.current_height >= t.unlock_height &&
                       signatures_match(w, {t.key}, ctx.tx_digest, keys);
            },
            [&](const TimeLockRel& t) {
                return w.preimages.empty() && ctx.current_height >= ctx.input_confirmation_height &&
                       ctx.current_height - ctx.input_confirmation_height >= t.delta_blocks &&
                       signatures_match(w, {t.key}, ctx.tx_digest, keys);
            },
            [&](const HtlcScript& h) {
                if (!w.preimages.empty())
                    return preimage_matches(w, h.hash_fn, h.hash) &&
                           signatures_match(w, {h.claim}, ctx.tx_digest, keys);
                return ctx.current_height >= h.refund_height &&
                       signatures_match(w, {h.refund}, ctx.tx_digest, keys);
            },
            [&](const OrScript& o) {
                if (!w.branch_selector || depth >= kMaxOrDepth)
                    return false;
                bool second = (*w.branch_selector >> depth) & 1u;
                return eval(second ? *o.branch_b : *o.branch_a, w, ctx, keys, depth + 1);
            },
        },
        s.node);
}

} // namespace

Bytes Script::serialize() const
{
    Writer w;
    write_script(w, *this);
    return std::move(w).take();
}

Script Script::deserialize(std::span<const std::uint8_t> data)
{
    Reader r(data);
    auto s = read_script(r);
    if (!r.done())
        throw std::invalid_argument("trailing bytes after script");
    return s;
}

Script make_or(Script a, Script b)
{
    return Script{OrScript{std::make_shared<const Script>(std::move(a)), std::make_shared<const Script>(std::move(b))}};
}

std::size_t or_depth(const Script& s)
{
    if (const auto* o = std::get_if<OrScript>(&s.node))
        return 1 + std::max(or_depth(*o->branch_a), or_depth(*o->branch_b));
    return 0;
}

bool well_formed(const Script& s)
{
    if (or_depth(s) > kMaxOrDepth)
        return false;
    if (const auto* h = std::get_if<HtlcScript>(&s.node))
        return h->refund_height > 0;
    if (const auto* o = std::get_if<OrScript>(&s.node))
        return o->branch_a && o->branch_b && well_formed(*o->branch_a) && well_formed(*o->branch_b);
    return true;
}

bool verify_script(const Script& script, const Witness& witness, const VerifyContext& ctx,
                   const KeyRegistry& keys)
{
    if (ctx.input_confirmation_height > ctx.current_height)
        return false;
    return eval(script, witness, ctx, keys, 0);
}

} // namespace comit::chainlab
