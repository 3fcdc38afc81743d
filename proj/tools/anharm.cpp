// anharm: allowed momentum-uncertainty branches, anharmonic frequencies and
// split energy-level ladders of an arbitrary-order anharmonic oscillator,
// plus a coefficient-perturbation laboratory.
//
// Usage:
//   anharm <command> [--config=<path>] [--key=value ...]
//
// Commands: solve | levels | sweep | perturb | oracle-check
// Flags override document values; dotted paths reach nested keys, e.g.
//   anharm levels --order=3 --coefficients.2=0.5 --coefficients.3=-0.02
//   anharm sweep --config=cubic.json --sweep.steps=41
// Data goes to stdout (or output_path); diagnostics go to stderr, verbosity
// controlled by ANHARM_LOG (quiet | info | debug).

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "anharmonic/anharmonic.hpp"

namespace {

constexpr const char* kUsage =
    "usage: anharm <command> [--config=<path>] [--key=value ...]\n"
    "\n"
    "commands:\n"
    "  solve         branch table: stationary points, filter verdicts, a_i, q, w, omega_an\n"
    "  levels        energy-level ladders with quantized ranges and harmonic ratios\n"
    "  sweep         coefficient sweep with branch tracking and instability flags\n"
    "  perturb       compare baseline against additively perturbed coefficients\n"
    "  oracle-check  cross-check polynomial roots against brute-force minima\n"
    "\n"
    "options:\n"
    "  --config=<path>   JSON configuration document\n"
    "  --key=value       override any document key (dotted paths for nesting)\n"
    "  --help            this text\n"
    "\n"
    "exit codes: 0 success, 1 no admissible oscillation state, 2 config error.\n"
    "ANHARM_LOG=quiet|info|debug controls stderr diagnostics.\n";

} // namespace

int main(int argc, char** argv) {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string command;

    for (int k = 1; k < argc; ++k) {
        const std::string arg = argv[k];
        if (arg == "-h" || arg == "--help") {
            std::cout << kUsage;
            return 0;
        }
        if (arg.rfind("--config=", 0) == 0) {
            config_path = arg.substr(9);
        } else if (arg.rfind("--", 0) == 0) {
            overrides.push_back(arg.substr(2));
        } else if (command.empty()) {
            command = arg;
        } else {
            std::cerr << "config error: unexpected positional argument \"" << arg << "\"\n";
            return 2;
        }
    }

    try {
        std::string document;
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw anharm::ConfigError("cannot read config file: " + config_path);
            std::ostringstream buf;
            buf << in.rdbuf();
            document = buf.str();
        }
        // the positional command is an override too, applied before the flags
        if (!command.empty()) overrides.insert(overrides.begin(), "command=\"" + command + "\"");

        const anharm::RunConfig config = anharm::parse_config(document, overrides);
        const anharm::RunResult result = anharm::run(config);

        if (config.output_path) {
            std::ofstream out(*config.output_path, std::ios::binary);
            if (!out) throw anharm::ConfigError("cannot write output file: " + *config.output_path);
            out << result.output;
        } else {
            std::cout << result.output;
        }
        return result.exit_code;
    } catch (const anharm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
