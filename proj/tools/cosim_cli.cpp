// Command-line front end: runs scenarios and, in wire mode, doubles as the
// netsim child process.
#include "cosim/bridge/netsim_server.hpp"
#include "cosim/scenario/config.hpp"
#include "cosim/scenario/runner.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <unistd.h>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitEngine = 2;

std::string self_executable(const char* argv0)
{
    std::error_code ec;
    auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
    return ec ? std::string(argv0) : p.string();
}

}  // namespace

int main(int argc, char** argv)
{
    std::signal(SIGPIPE, SIG_IGN);

    CLI::App app{"Orchestrator/network co-simulation runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string mode;
    std::optional<std::uint64_t> seed;
    bool print_trace = false;

    auto* run = app.add_subcommand("run", "Run a scenario and export results");
    run->add_option("--config", config_path, "Scenario JSON file")->required();
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--mode", mode, "Override the scenario mode")
        ->check(CLI::IsMember({"ideal", "netsim", "netsim-wire"}));
    run->add_option("--seed", seed, "Override the overlay seed");
    run->add_flag("--trace", print_trace, "Print the event trace to stdout");

    std::string serve_config;
    auto* serve = app.add_subcommand("netsim-serve",
                                     "Serve the network side of the protocol on stdin/stdout");
    serve->add_option("--config", serve_config, "Scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    cosim::scenario::ScenarioConfig cfg;
    try {
        cfg = cosim::scenario::load_scenario(run->parsed() ? config_path : serve_config);
        if (!mode.empty()) cfg.mode = cosim::scenario::mode_from_string(mode);
        if (seed) cfg.overlay.seed = *seed;
        cosim::scenario::validate(cfg);
    } catch (const cosim::scenario::ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cosim::scenario::ConfigValidationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    if (serve->parsed()) {
        try {
            cosim::scenario::serve_netsim_stdio(cfg);
        } catch (const std::exception& e) {
            std::cerr << "netsim: " << e.what() << '\n';
            return kExitEngine;
        }
        return kExitOk;
    }

    try {
        cosim::scenario::RunOptions options;
        if (cfg.mode == cosim::scenario::Mode::netsim_wire) {
            options.netsim_command = {self_executable(argv[0]), "netsim-serve", "--config",
                                      std::filesystem::absolute(config_path).string()};
        }
        // The child re-reads the file, so an overridden seed only matters on
        // the orchestrator side; the network does not depend on it.
        const auto result = cosim::scenario::run_scenario(cfg, options);
        cosim::scenario::export_results(result, cfg.threshold_w, out_dir);
        if (print_trace) {
            std::cout << cosim::scenario::events_csv(result.report);
        }
        const auto& s = result.stats;
        std::cerr << "mode=" << cosim::scenario::to_string(cfg.mode) << " sent=" << s.messages_sent
                  << " delivered=" << s.messages_delivered << " lost=" << s.messages_lost
                  << " termination_us="
                  << (s.termination_time ? std::to_string(s.termination_time->micros()) : "none")
                  << " solved=" << s.solved_states.size() << '\n';
    } catch (const cosim::scenario::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitEngine;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return kExitEngine;
    }
    return kExitOk;
}
