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

// comit-sim: run, validate and demo simulated multi-chain payment scenarios.

#include "comit/simnet/generator.hpp"
#include "comit/simnet/runtime.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace comit::simnet;

std::optional<std::string> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int emit_report(const Report& report, const std::string& format, const std::string& out_path)
{
    const std::string body = format == "text" ? to_text(report) : to_json(report);
    if (out_path.empty())
        std::cout << body;
    else
    {
        std::ofstream out(out_path, std::ios::binary);
        if (!out)
        {
            std::cerr << "cannot write " << out_path << "\n";
            return 2;
        }
        out << body;
    }
    return report.violations.empty() ? 0 : 1;
}

int print_diagnostics(const ScenarioError& e)
{
    for (const auto& d : e.diagnostics())
        std::cerr << d.str() << "\n";
    return 2;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulate cross-chain payments over channels and liquidity providers"};
    app.require_subcommand(1);

    std::string file;
    std::optional<std::uint64_t> seed;
    std::string report_path;
    std::string format = "json";

    auto* run = app.add_subcommand("run", "Run a scenario file and print its report");
    run->add_option("scenario-file", file, "Scenario document (JSON)")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--report", report_path, "Write the report here instead of stdout");
    run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("scenario-file", file, "Scenario document (JSON)")->required();

    std::string demo;
    auto* demo_cmd = app.add_subcommand("demo", "Run a bundled scenario");
    demo_cmd->add_option("name", demo, "Demo name")->required()->check(CLI::IsMember(demo_names()));
    demo_cmd->add_option("--report", report_path, "Write the report here instead of stdout");
    demo_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*demo_cmd)
            return emit_report(run_scenario(validate_scenario(*demo_text(demo))), format, report_path);

        auto text = read_file(file);
        if (!text)
        {
            std::cerr << "cannot read " << file << "\n";
            return 2;
        }
        Scenario scenario = validate_scenario(*text);
        if (*validate)
        {
            std::cout << "ok: " << scenario.chains.size() << " chains, " << scenario.actors.size() << " actors, "
                      << scenario.channels.size() << " channels, " << scenario.payments.size() << " payments\n";
            return 0;
        }
        if (seed)
            scenario.seed = *seed;
        return emit_report(run_scenario(scenario), format, report_path);
    }
    catch (const ScenarioError& e)
    {
        return print_diagnostics(e);
    }
}
