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

#include <limits>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace comit::chainlab {

struct Script;
using ScriptPtr = std::shared_ptr<const Script>;

struct PayToKey
{
    PubKey key;
};

struct Multisig2of2
{
    PubKey key_a;
    PubKey key_b;
};

struct HashLock
{
    HashFnId hash_fn;
    Hash32 hash{};
    PubKey claim;
};

struct TimeLockAbs
{
    Height unlock_height = 0;
    PubKey key;
};

struct TimeLockRel
{
    Height delta_blocks = 0;
    PubKey key;
};

/// Claim branch: preimage of `hash` plus a signature by `claim`.
/// Refund branch: signature by `refund` once the chain reaches `refund_height`.
struct HtlcScript
{
    HashFnId hash_fn;
    Hash32 hash{};
    PubKey claim;
    PubKey refund;
    Height refund_height = 0;
};

struct OrScript
{
    ScriptPtr branch_a;
    ScriptPtr branch_b;
};

struct Script
{
    using Node = std::variant<PayToKey, Multisig2of2, HashLock, TimeLockAbs, TimeLockRel, HtlcScript, OrScript>;
    Node node;

    Bytes serialize() const;
    static Script deserialize(std::span<const std::uint8_t> data);

    bool operator==(const Script& other) const { return serialize() == other.serialize(); }
};

inline constexpr std::size_t kMaxOrDepth = 2;

Script make_or(Script a, Script b);

std::size_t or_depth(const Script& s);

/// Structural invariants: Htlc refund_height > 0, Or nesting within kMaxOrDepth.
bool well_formed(const Script& s);

struct Witness
{
    std::vector<Signature> signatures;
    std::vector<Bytes> preimages;
    /// Bit d picks the branch of the Or encountered at nesting depth d
    /// (0 = branch_a, 1 = branch_b).
    std::optional<std::uint8_t> branch_selector;
};

/// Height that satisfies every time condition; used to check a witness
/// independently of the clock.
inline constexpr Height kAnyHeight = std::numeric_limits<Height>::max();

struct VerifyContext
{
    Height current_height = 0;
    Height input_confirmation_height = 0;
    Hash32 tx_digest{};
};

bool verify_script(const Script& script, const Witness& witness, const VerifyContext& ctx,
                   const KeyRegistry& keys);

} // namespace comit::chainlab
