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

#include "comit/chainlab/transaction.hpp"

namespace comit::chainlab {

std::string to_string(const Outpoint& op)
{
    return to_hex(op.txid) + ":" + std::to_string(op.index);
}

Bytes Transaction::serialize() const
{
    Writer w;
    w.u32(static_cast<std::uint32_t>(inputs.size()));
    for (const auto& in : inputs)
    {
        w.raw(in.prevout.txid);
        w.u32(in.prevout.index);
    }
    w.u32(static_cast<std::uint32_t>(outputs.size()));
    for (const auto& out : outputs)
    {
        w.u64(out.amount);
        w.var_bytes(out.script.serialize());
    }
    w.u64(locktime);
    return std::move(w).take();
}

Hash32 Transaction::txid() const
{
    return sha256(serialize());
}

Amount Transaction::output_total() const
{
    Amount total = 0;
    for (const auto& out : outputs)
        total = checked_add(total, out.amount);
    return total;
}

} // namespace comit::chainlab
