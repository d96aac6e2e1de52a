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

#include "comit/chainlab/script.hpp"

#include <compare>

namespace comit::chainlab {

struct Outpoint
{
    Hash32 txid{};
    std::uint32_t index = 0;
    auto operator<=>(const Outpoint&) const = default;
};

std::string to_string(const Outpoint& op);

struct TxIn
{
    Outpoint prevout;
    Witness witness;
};

struct TxOut
{
    Amount amount = 0;
    Script script;
};

struct Transaction
{
    std::vector<TxIn> inputs;
    std::vector<TxOut> outputs;
    Height locktime = 0;

    /// Canonical serialization without witnesses: u32 counts, 32-byte txids,
    /// u32 indices, u64 amounts, length-prefixed scripts, u64 locktime, all
    /// little-endian and in declaration order.
    Bytes serialize() const;

    /// SHA-256 of serialize(); also the digest every signature commits to.
    Hash32 txid() const;

    Amount output_total() const;
};

} // namespace comit::chainlab
