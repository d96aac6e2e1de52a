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

#include "comit/crp/quote.hpp"

#include <limits>

namespace comit::crp {

namespace {

using u128 = unsigned __int128;

Amount narrow(u128 v)
{
    if (v > std::numeric_limits<Amount>::max())
        throw AmountOverflow();
    return static_cast<Amount>(v);
}

u128 ceil_div(u128 a, u128 b)
{
    return a / b + (a % b != 0);
}

u128 proportional_fee(u128 pre, std::uint32_t ppm)
{
    return ceil_div(pre * ppm, RateQuote::kPpm);
}

} // namespace

HopAmount quote_cost(const RateQuote& q, Amount amount_out)
{
    if (!q.valid())
        throw InvalidQuote();
    const u128 pre = ceil_div(static_cast<u128>(amount_out) * q.rate_den, q.rate_num);
    const u128 fee = static_cast<u128>(q.base_fee) + proportional_fee(pre, q.fee_ppm);
    return HopAmount{narrow(pre + fee), narrow(fee)};
}

Amount apply_quote(const RateQuote& q, Amount amount_in)
{
    if (!q.valid())
        throw InvalidQuote();
    if (amount_in <= q.base_fee)
        return 0;
    // Largest pre-conversion amount whose total cost fits in amount_in.
    const u128 budget = amount_in - q.base_fee;
    u128 pre = budget * RateQuote::kPpm / (RateQuote::kPpm + q.fee_ppm);
    while (pre + proportional_fee(pre, q.fee_ppm) > budget)
        --pre;
    while (pre + 1 + proportional_fee(pre + 1, q.fee_ppm) <= budget)
        ++pre;
    return narrow(pre * q.rate_num / q.rate_den);
}

std::vector<HopAmount> compute_hop_amounts(std::span<const RateQuote> quotes, Amount amount_out)
{
    std::vector<HopAmount> out(quotes.size());
    Amount next = amount_out;
    for (std::size_t i = quotes.size(); i-- > 0;)
    {
        out[i] = quote_cost(quotes[i], next);
        next = out[i].amount_in;
    }
    return out;
}

} // namespace comit::crp
