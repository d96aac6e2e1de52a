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

#include "comit/crp/onion.hpp"

#include "comit/chainlab/hash.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>

namespace comit::crp {

std::string_view to_string(OnionErrc e)
{
    switch (e)
    {
    case OnionErrc::RouteTooLong: return "route-too-long";
    case OnionErrc::PayloadOverflow: return "payload-overflow";
    case OnionErrc::HmacFailure: return "hmac-failure";
    case OnionErrc::Malformed: return "malformed";
    }
    return "unknown";
}

namespace {

using chainlab::hmac_sha256;
using chainlab::sha256;

constexpr std::size_t kNodeField = 32;
constexpr std::size_t kShortField = 16;

void init_sodium()
{
    static const int rc = sodium_init();
    if (rc < 0)
        throw std::runtime_error("libsodium initialisation failed");
}

Hash32 reduce_wide(std::span<const std::uint8_t, crypto_hash_sha512_BYTES> wide)
{
    Hash32 out{};
    crypto_core_ristretto255_scalar_reduce(out.data(), wide.data());
    return out;
}

Hash32 hash_to_scalar(std::span<const std::uint8_t> data)
{
    std::array<std::uint8_t, crypto_hash_sha512_BYTES> wide{};
    crypto_hash_sha512(wide.data(), data.data(), data.size());
    return reduce_wide(wide);
}

Hash32 scalar_mult(const Hash32& scalar, const Hash32& point)
{
    Hash32 out{};
    if (crypto_scalarmult_ristretto255(out.data(), scalar.data(), point.data()) != 0)
        throw OnionError(OnionErrc::HmacFailure);
    return out;
}

Hash32 blinding_factor(const Hash32& ephemeral, const Hash32& shared_secret)
{
    Bytes buf(ephemeral.begin(), ephemeral.end());
    buf.insert(buf.end(), shared_secret.begin(), shared_secret.end());
    return hash_to_scalar(buf);
}

Hash32 derive_key(std::string_view label, const Hash32& secret)
{
    return hmac_sha256(as_bytes(label), secret);
}

Bytes keystream(const Hash32& key, std::size_t len)
{
    Bytes out(len);
    const std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
    crypto_stream_chacha20(out.data(), out.size(), nonce.data(), key.data());
    return out;
}

Hash32 packet_mac(const Hash32& mu, std::span<const std::uint8_t> blob, std::span<const std::uint8_t> ad)
{
    Bytes buf(blob.begin(), blob.end());
    buf.insert(buf.end(), ad.begin(), ad.end());
    return hmac_sha256(mu, buf);
}

void put_string(std::span<std::uint8_t> field, const std::string& s)
{
    if (s.size() > field.size() || s.find('\0') != std::string::npos)
        throw OnionError(OnionErrc::PayloadOverflow);
    std::copy(s.begin(), s.end(), field.begin());
}

std::string get_string(std::span<const std::uint8_t> field)
{
    auto end = std::find(field.begin(), field.end(), std::uint8_t{0});
    return std::string(field.begin(), end);
}

} // namespace

OnionKeyPair derive_onion_keypair(std::string_view seed)
{
    init_sodium();
    Writer w;
    w.str("comit/onion-key");
    w.str(seed);
    OnionKeyPair kp;
    kp.secret = hash_to_scalar(w.bytes());
    if (crypto_scalarmult_ristretto255_base(kp.pub.data(), kp.secret.data()) != 0)
        throw std::runtime_error("degenerate onion key");
    return kp;
}

std::array<std::uint8_t, kHopPayloadSize> HopPayload::serialize() const
{
    std::array<std::uint8_t, kHopPayloadSize> slot{};
    std::span<std::uint8_t> s(slot);
    put_string(s.subspan(0, kNodeField), next_node);
    put_string(s.subspan(kNodeField, kShortField), chain_id);
    put_string(s.subspan(kNodeField + kShortField, kShortField), asset);
    Writer w;
    w.u64(amount_to_forward);
    w.u64(expiry_delta);
    w.u64(rate_num);
    w.u64(rate_den);
    w.u64(base_fee);
    w.u32(fee_ppm);
    std::copy(w.bytes().begin(), w.bytes().end(), slot.begin() + kNodeField + 2 * kShortField);
    return slot;
}

HopPayload HopPayload::parse(std::span<const std::uint8_t, kHopPayloadSize> slot)
{
    std::span<const std::uint8_t> s(slot);
    HopPayload p;
    p.next_node = get_string(s.subspan(0, kNodeField));
    p.chain_id = get_string(s.subspan(kNodeField, kShortField));
    p.asset = get_string(s.subspan(kNodeField + kShortField, kShortField));
    Reader r(s.subspan(kNodeField + 2 * kShortField));
    p.amount_to_forward = r.u64();
    p.expiry_delta = r.u64();
    p.rate_num = r.u64();
    p.rate_den = r.u64();
    p.base_fee = r.u64();
    p.fee_ppm = r.u32();
    return p;
}

Bytes OnionPacket::serialize() const
{
    Bytes out;
    out.reserve(kOnionPacketSize);
    out.push_back(version);
    out.insert(out.end(), ephemeral_key.begin(), ephemeral_key.end());
    out.insert(out.end(), routing_info.begin(), routing_info.end());
    out.insert(out.end(), hmac.begin(), hmac.end());
    return out;
}

OnionPacket OnionPacket::parse(std::span<const std::uint8_t> data)
{
    if (data.size() != kOnionPacketSize)
        throw OnionError(OnionErrc::Malformed);
    OnionPacket p;
    p.version = data[0];
    std::copy_n(data.begin() + 1, 32, p.ephemeral_key.begin());
    std::copy_n(data.begin() + 33, kRoutingInfoSize, p.routing_info.begin());
    std::copy_n(data.begin() + 33 + kRoutingInfoSize, kOnionHmacSize, p.hmac.begin());
    return p;
}

OnionPacket onion_create(std::span<const Hash32> hop_pubkeys, std::span<const HopPayload> payloads,
                         const Hash32& session_key, std::span<const std::uint8_t> associated_data)
{
    init_sodium();
    const std::size_t n = hop_pubkeys.size();
    if (n == 0 || n > kOnionMaxHops)
        throw OnionError(OnionErrc::RouteTooLong);
    if (payloads.size() != n)
        throw OnionError(OnionErrc::Malformed);
    std::vector<std::array<std::uint8_t, kHopPayloadSize>> slots;
    for (const auto& p : payloads)
        slots.push_back(p.serialize());

    // Per-hop ephemeral keys and shared secrets, blinding the session scalar as we go.
    std::vector<Hash32> secrets(n);
    Hash32 first_ephemeral{};
    Hash32 x = hash_to_scalar(session_key);
    for (std::size_t i = 0; i < n; ++i)
    {
        Hash32 alpha{};
        if (crypto_scalarmult_ristretto255_base(alpha.data(), x.data()) != 0)
            throw OnionError(OnionErrc::Malformed);
        if (i == 0)
            first_ephemeral = alpha;
        Hash32 shared{};
        if (crypto_scalarmult_ristretto255(shared.data(), x.data(), hop_pubkeys[i].data()) != 0)
            throw OnionError(OnionErrc::Malformed);
        secrets[i] = sha256(shared);
        const Hash32 b = blinding_factor(alpha, secrets[i]);
        Hash32 next{};
        crypto_core_ristretto255_scalar_mul(next.data(), x.data(), b.data());
        x = next;
    }

    // Filler: what hops 1..n-1 will shift in at the tail, pre-encrypted.
    Bytes filler((n - 1) * kOnionSlotSize, 0);
    for (std::size_t i = 1; i < n; ++i)
    {
        const Bytes stream = keystream(derive_key("rho", secrets[i - 1]), kRoutingInfoSize + kOnionSlotSize);
        const std::size_t start = kRoutingInfoSize - (i - 1) * kOnionSlotSize;
        for (std::size_t j = 0; j < i * kOnionSlotSize; ++j)
            filler[j] ^= stream[start + j];
    }

    Bytes mix = keystream(derive_key("pad", session_key), kRoutingInfoSize);
    Hash32 next_hmac{};
    for (std::size_t i = n; i-- > 0;)
    {
        std::memmove(mix.data() + kOnionSlotSize, mix.data(), kRoutingInfoSize - kOnionSlotSize);
        std::copy(slots[i].begin(), slots[i].end(), mix.begin());
        std::copy(next_hmac.begin(), next_hmac.end(), mix.begin() + kHopPayloadSize);
        const Bytes stream = keystream(derive_key("rho", secrets[i]), kRoutingInfoSize);
        for (std::size_t j = 0; j < kRoutingInfoSize; ++j)
            mix[j] ^= stream[j];
        if (i == n - 1)
            std::copy(filler.begin(), filler.end(), mix.end() - static_cast<std::ptrdiff_t>(filler.size()));
        next_hmac = packet_mac(derive_key("mu", secrets[i]), mix, associated_data);
    }

    OnionPacket packet;
    packet.ephemeral_key = first_ephemeral;
    std::copy(mix.begin(), mix.end(), packet.routing_info.begin());
    packet.hmac = next_hmac;
    return packet;
}

PeelResult onion_peel(const OnionPacket& packet, const Hash32& node_secret,
                      std::span<const std::uint8_t> associated_data)
{
    init_sodium();
    if (packet.version != kOnionVersion)
        throw OnionError(OnionErrc::Malformed);
    const Hash32 ss = sha256(scalar_mult(node_secret, packet.ephemeral_key));
    const Hash32 expected = packet_mac(derive_key("mu", ss), packet.routing_info, associated_data);
    if (sodium_memcmp(expected.data(), packet.hmac.data(), expected.size()) != 0)
        throw OnionError(OnionErrc::HmacFailure);

    Bytes padded(packet.routing_info.begin(), packet.routing_info.end());
    padded.resize(kRoutingInfoSize + kOnionSlotSize, 0);
    const Bytes stream = keystream(derive_key("rho", ss), padded.size());
    for (std::size_t j = 0; j < padded.size(); ++j)
        padded[j] ^= stream[j];

    PeelResult result;
    result.payload = HopPayload::parse(std::span<const std::uint8_t, kHopPayloadSize>(padded.data(), kHopPayloadSize));
    Hash32 next_hmac{};
    std::copy_n(padded.begin() + kHopPayloadSize, kOnionHmacSize, next_hmac.begin());
    if (std::all_of(next_hmac.begin(), next_hmac.end(), [](std::uint8_t b) { return b == 0; }))
        return result;

    OnionPacket next;
    next.ephemeral_key = scalar_mult(blinding_factor(packet.ephemeral_key, ss), packet.ephemeral_key);
    std::copy_n(padded.begin() + kOnionSlotSize, kRoutingInfoSize, next.routing_info.begin());
    next.hmac = next_hmac;
    result.next = next;
    return result;
}

} // namespace comit::crp
