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

#include "comit/chainlab/wallet.hpp"

namespace comit::chainlab {

CoinSelection select_coins(const Ledger& ledger, const PubKey& key, Amount target)
{
    CoinSelection sel;
    if (target == 0)
        return sel;
    for (const auto& [op, amount] : ledger.spendable(key))
    {
        sel.inputs.push_back(op);
        sel.total = checked_add(sel.total, amount);
        if (sel.total >= target)
            return sel;
    }
    throw InsufficientFunds();
}

Witness pay_to_key_witness(const KeyPair& key, const Hash32& digest)
{
    Witness w;
    w.signatures.push_back(sign(key, digest));
    return w;
}

Transaction make_payment(const Ledger& ledger, const KeyPair& from, const PubKey& to, Amount amount)
{
    const Amount fee = ledger.params().flat_fee;
    auto sel = select_coins(ledger, from.pub, checked_add(amount, fee));
    Transaction tx;
    for (const auto& op : sel.inputs)
        tx.inputs.push_back(TxIn{op, {}});
    tx.outputs.push_back(TxOut{amount, Script{PayToKey{to}}});
    if (sel.total > amount + fee)
        tx.outputs.push_back(TxOut{sel.total - amount - fee, Script{PayToKey{from.pub}}});
    const auto digest = tx.txid();
    for (auto& in : tx.inputs)
        in.witness = pay_to_key_witness(from, digest);
    return tx;
}

} // namespace comit::chainlab
