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

#include "comit/chainlab/ledger.hpp"

namespace comit::chainlab {

class InsufficientFunds : public std::runtime_error
{
public:
    InsufficientFunds() : std::runtime_error("insufficient-funds") {}
};

struct CoinSelection
{
    std::vector<Outpoint> inputs;
    Amount total = 0;
};

/// Smallest prefix (in outpoint order) of `key`'s spendable outputs covering
/// `target`. Throws InsufficientFunds.
CoinSelection select_coins(const Ledger& ledger, const PubKey& key, Amount target);

/// Single-signature witness for a PayToKey input.
Witness pay_to_key_witness(const KeyPair& key, const Hash32& digest);

/// Builds and signs a payment of `amount` to `to`, change back to `from`. The
/// chain's flat fee is paid by `from`.
Transaction make_payment(const Ledger& ledger, const KeyPair& from, const PubKey& to, Amount amount);

} // namespace comit::chainlab
