#include <iostream>

#include "CLI11.hpp"
#include "hchain/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Two-sided harmonic chain simulator and limit-theory checker"};
    app.set_version_flag("--version", hchain::tool_version);
    app.require_subcommand(1);

    std::string config;
    hchain::CommandOptions options;
    std::string output;

    auto* check = app.add_subcommand("check", "Evaluate condition C for the config's parameters");
    check->add_option("config", config, "Config file")->required();

    auto* simulate = app.add_subcommand("simulate", "Simulate the ensemble and write trajectory files");
    simulate->add_option("config", config, "Config file")->required();
    simulate->add_option("--workers,-j", options.workers, "Worker threads")->check(CLI::Range(1u, 1024u));

    auto* limits = app.add_subcommand("limits", "Tabulate limit spectra and covariances");
    limits->add_option("config", config, "Config file")->required();

    auto* compare = app.add_subcommand("compare", "Compare simulated statistics with the limit theory");
    compare->add_option("config", config, "Config file")->required();

    for (auto* sub : {simulate, limits, compare}) {
        sub->add_option("--output,-o", output, "Output directory (overrides [run] output)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hchain::exit_code::input;
    }
    if (!output.empty()) options.output = output;

    if (check->parsed()) return hchain::cmd_check(config, std::cout, std::cerr);
    if (simulate->parsed()) return hchain::cmd_simulate(config, options, std::cout, std::cerr);
    if (limits->parsed()) return hchain::cmd_limits(config, options, std::cout, std::cerr);
    return hchain::cmd_compare(config, options, std::cout, std::cerr);
}
