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

#include "comit/simnet/scenario.hpp"

namespace comit::simnet {

struct GeneratorOptions
{
    std::size_t max_chains = 3;
    std::size_t max_actors = 6;
    std::size_t max_payments = 6;
    /// Adds exactly one fault of a random kind.
    bool inject_fault = true;
};

/// Random well-formed scenario: 2-4 LPs joined by channels, every other actor
/// attached to an LP, every chain mined once per tick.
Scenario generate_scenario(std::uint64_t seed, const GeneratorOptions& options = {});

/// Names of the bundled scenarios, in a fixed order.
std::vector<std::string> demo_names();
/// Scenario document of a bundled demo.
std::optional<std::string> demo_text(std::string_view name);

} // namespace comit::simnet
