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

#include <span>
#include <string>
#include <vector>

namespace comit::crp {

/// An LP's price for converting `asset_in` into `asset_out`: rate_num units
/// of asset_out per rate_den units of asset_in, after a base fee and a
/// proportional fee (parts per million), both charged in asset_in.
struct RateQuote
{
    std::string asset_in;
    std::string asset_out;
    std::uint64_t rate_num = 1;
    std::uint64_t rate_den = 1;
    Amount base_fee = 0;
    std::uint32_t fee_ppm = 0;

    bool valid() const { return rate_num >= 1 && rate_den >= 1 && fee_ppm < kPpm; }
    static RateQuote identity(const std::string& asset) { return RateQuote{asset, asset, 1, 1, 0, 0}; }

    bool operator==(const RateQuote&) const = default;

    static constexpr std::uint32_t kPpm = 1'000'000;
};

class InvalidQuote : public std::invalid_argument
{
public:
    InvalidQuote() : std::invalid_argument("invalid-quote") {}
};

struct HopAmount
{
    /// Amount the upstream party sends on this hop.
    Amount amount_in = 0;
    /// Fee kept by the node at the far end of the hop, in the hop's asset.
    Amount fee = 0;

    bool operator==(const HopAmount&) const = default;
};

/// Smallest input that yields at least `amount_out` under `q`. Rounds every
/// step up. Throws AmountOverflow or InvalidQuote.
HopAmount quote_cost(const RateQuote& q, Amount amount_out);

/// What an LP honouring `q` delivers for `amount_in` (rounded down).
Amount apply_quote(const RateQuote& q, Amount amount_in);

/// Backward recurrence over a chain of quotes. quotes[i] is applied by the
/// node receiving hop i, so result[i] is what hop i carries and the node after
/// the last quote receives `amount_out`.
std::vector<HopAmount> compute_hop_amounts(std::span<const RateQuote> quotes, Amount amount_out);

} // namespace comit::crp
