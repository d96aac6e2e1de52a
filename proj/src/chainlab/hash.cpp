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

#include "comit/chainlab/hash.hpp"

#include <openssl/evp.h>
#include <sodium.h>

#include <algorithm>
#include <iterator>
#include <memory>

namespace comit::chainlab {

namespace {

void ensure_sodium()
{
    static const bool ready = [] {
        if (sodium_init() < 0)
            throw std::runtime_error("libsodium initialisation failed");
        return true;
    }();
    (void)ready;
}

Hash32 sha3_256(std::span<const std::uint8_t> data)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    Hash32 out{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha3_256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size())
        throw std::runtime_error("SHA3-256 digest failed");
    return out;
}

} // namespace

std::string_view hash_fn_name(HashFnId id)
{
    switch (id)
    {
    case HashFnId::Sha256:
        return "SHA256";
    case HashFnId::Sha3_256:
        return "SHA3_256";
    case HashFnId::Blake2b_256:
        return "BLAKE2B_256";
    }
    throw UnknownHashFunction("unknown-function");
}

std::optional<HashFnId> try_parse_hash_fn(std::string_view name)
{
    for (auto id : {HashFnId::Sha256, HashFnId::Sha3_256, HashFnId::Blake2b_256})
        if (hash_fn_name(id) == name)
            return id;
    return std::nullopt;
}

HashFnId parse_hash_fn(std::string_view name)
{
    if (auto id = try_parse_hash_fn(name))
        return *id;
    throw UnknownHashFunction("unknown-function: " + std::string(name));
}

Hash32 sha256(std::span<const std::uint8_t> data)
{
    ensure_sodium();
    Hash32 out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Hash32 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data)
{
    ensure_sodium();
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, key.data(), key.size());
    crypto_auth_hmacsha256_update(&st, data.data(), data.size());
    Hash32 out;
    crypto_auth_hmacsha256_final(&st, out.data());
    return out;
}

Hash32 hash_digest(HashFnId id, std::span<const std::uint8_t> data)
{
    switch (id)
    {
    case HashFnId::Sha256:
        return sha256(data);
    case HashFnId::Sha3_256:
        return sha3_256(data);
    case HashFnId::Blake2b_256: {
        ensure_sodium();
        Hash32 out;
        crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
        return out;
    }
    }
    throw UnknownHashFunction("unknown-function");
}

HashFnSet intersect(const HashFnSet& a, const HashFnSet& b)
{
    HashFnSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

} // namespace comit::chainlab
