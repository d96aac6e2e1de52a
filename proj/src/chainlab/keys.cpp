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

#include "comit/chainlab/keys.hpp"

#include "comit/chainlab/hash.hpp"

#include <sodium.h>

namespace comit::chainlab {

KeyPair derive_keypair(std::string_view seed)
{
    Writer w;
    w.str("comit/secret-key");
    w.str(seed);
    KeyPair kp;
    kp.secret.bytes = sha256(w.bytes());

    Writer p;
    p.str("comit/public-key");
    p.raw(kp.secret.bytes);
    kp.pub.bytes = sha256(p.bytes());
    return kp;
}

Signature sign(const KeyPair& key, const Hash32& digest)
{
    return Signature{key.pub, hmac_sha256(key.secret.bytes, digest)};
}

bool KeyRegistry::verify(const PubKey& expected, const Hash32& digest, const Signature& sig) const
{
    if (sig.signer != expected)
        return false;
    auto it = secrets_.find(expected);
    if (it == secrets_.end())
        return false;
    auto mac = hmac_sha256(it->second.bytes, digest);
    return sodium_memcmp(mac.data(), sig.mac.data(), mac.size()) == 0;
}

} // namespace comit::chainlab
