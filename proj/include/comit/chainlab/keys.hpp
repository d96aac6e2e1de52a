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

#include <compare>
#include <map>
#include <string_view>

namespace comit::chainlab {

struct PubKey
{
    Hash32 bytes{};
    auto operator<=>(const PubKey&) const = default;
};

struct SecretKey
{
    Hash32 bytes{};
    bool operator==(const SecretKey&) const = default;
};

struct KeyPair
{
    SecretKey secret;
    PubKey pub;
};

/// Simulated signature: HMAC-SHA256 of the signed digest under the signer's
/// secret key, tagged with the signer's public key.
struct Signature
{
    PubKey signer;
    Hash32 mac{};
    bool operator==(const Signature&) const = default;
};

/// Derives a key pair deterministically from an arbitrary seed string.
KeyPair derive_keypair(std::string_view seed);

Signature sign(const KeyPair& key, const Hash32& digest);

/// Maps public keys back to the secrets needed to check MAC signatures. One
/// registry is shared by every ledger of a simulation.
class KeyRegistry
{
public:
    void add(const KeyPair& key) { secrets_[key.pub] = key.secret; }
    KeyPair create(std::string_view seed)
    {
        auto kp = derive_keypair(seed);
        add(kp);
        return kp;
    }

    bool verify(const PubKey& expected, const Hash32& digest, const Signature& sig) const;

private:
    std::map<PubKey, SecretKey> secrets_;
};

} // namespace comit::chainlab
