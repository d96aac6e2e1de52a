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

#include "comit/crp/quote.hpp"

#include <array>
#include <optional>
#include <random>
#include <span>

namespace comit::crp {

inline constexpr std::size_t kOnionMaxHops = 20;
inline constexpr std::size_t kHopPayloadSize = 128;
inline constexpr std::size_t kOnionHmacSize = 32;
inline constexpr std::size_t kOnionSlotSize = kHopPayloadSize + kOnionHmacSize;
inline constexpr std::size_t kRoutingInfoSize = kOnionMaxHops * kOnionSlotSize;
inline constexpr std::size_t kOnionPacketSize = 1 + 32 + kRoutingInfoSize + kOnionHmacSize;
inline constexpr std::uint8_t kOnionVersion = 0;

enum class OnionErrc
{
    RouteTooLong,
    PayloadOverflow,
    HmacFailure,
    Malformed,
};

std::string_view to_string(OnionErrc e);

class OnionError : public std::runtime_error
{
public:
    explicit OnionError(OnionErrc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}
    OnionErrc code() const { return code_; }

private:
    OnionErrc code_;
};

/// ristretto255 key pair for onion key agreement.
struct OnionKeyPair
{
    Hash32 secret{};
    Hash32 pub{};
};

OnionKeyPair derive_onion_keypair(std::string_view seed);

/// Fixed 128-byte slot layout, little-endian:
///   next_node[32] chain_id[16] asset[16] amount u64 expiry_delta u64
///   rate_num u64 rate_den u64 base_fee u64 fee_ppm u32, zero padding.
/// Strings are NUL-padded; an empty next_node marks the final hop.
struct HopPayload
{
    std::string next_node;
    std::string chain_id;
    std::string asset;
    Amount amount_to_forward = 0;
    Height expiry_delta = 0;
    std::uint64_t rate_num = 1;
    std::uint64_t rate_den = 1;
    Amount base_fee = 0;
    std::uint32_t fee_ppm = 0;

    std::array<std::uint8_t, kHopPayloadSize> serialize() const;
    static HopPayload parse(std::span<const std::uint8_t, kHopPayloadSize> slot);
    bool operator==(const HopPayload&) const = default;
};

struct OnionPacket
{
    std::uint8_t version = kOnionVersion;
    Hash32 ephemeral_key{};
    std::array<std::uint8_t, kRoutingInfoSize> routing_info{};
    Hash32 hmac{};

    Bytes serialize() const;
    static OnionPacket parse(std::span<const std::uint8_t> data);
    bool operator==(const OnionPacket&) const = default;
};

/// Builds a packet for hops[0..n) from a 32-byte session key. The associated
/// data (the payment hash) is bound into every hop's tag.
OnionPacket onion_create(std::span<const Hash32> hop_pubkeys, std::span<const HopPayload> payloads,
                         const Hash32& session_key, std::span<const std::uint8_t> associated_data);

template <std::uniform_random_bit_generator Rng>
OnionPacket onion_create(std::span<const Hash32> hop_pubkeys, std::span<const HopPayload> payloads, Rng& rng,
                         std::span<const std::uint8_t> associated_data)
{
    Hash32 session{};
    std::uniform_int_distribution<unsigned> byte(0, 255);
    for (auto& b : session)
        b = static_cast<std::uint8_t>(byte(rng));
    return onion_create(hop_pubkeys, payloads, session, associated_data);
}

struct PeelResult
{
    HopPayload payload;
    /// Packet for the next node; empty at the final hop.
    std::optional<OnionPacket> next;
};

/// Throws OnionError{HmacFailure} when the packet was not built for this key
/// or has been altered.
PeelResult onion_peel(const OnionPacket& packet, const Hash32& node_secret,
                      std::span<const std::uint8_t> associated_data);

} // namespace comit::crp
