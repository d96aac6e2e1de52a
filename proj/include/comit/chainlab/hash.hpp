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

#include "comit/chainlab/bytes.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <string_view>

namespace comit::chainlab {

/// Hash functions a chain's script language may offer for hash-locks.
enum class HashFnId : std::uint8_t
{
    Sha256 = 1,
    Sha3_256 = 2,
    Blake2b_256 = 3,
};

using HashFnSet = std::set<HashFnId>;

class UnknownHashFunction : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

std::string_view hash_fn_name(HashFnId id);

/// Parses "SHA256", "SHA3_256" or "BLAKE2B_256".
HashFnId parse_hash_fn(std::string_view name);
std::optional<HashFnId> try_parse_hash_fn(std::string_view name);

/// 32-byte digest of `data` under `id`. Throws UnknownHashFunction for values
/// outside the closed set (e.g. a corrupted enum read off the wire).
Hash32 hash_digest(HashFnId id, std::span<const std::uint8_t> data);

Hash32 sha256(std::span<const std::uint8_t> data);
Hash32 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

HashFnSet intersect(const HashFnSet& a, const HashFnSet& b);

} // namespace comit::chainlab
