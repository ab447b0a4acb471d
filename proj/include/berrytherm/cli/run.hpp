// run.hpp — command dispatch and error-to-exit-code mapping

#pragma once

#include "berrytherm/cli/certify.hpp"
#include "berrytherm/cli/commands.hpp"

#include <functional>
#include <map>

namespace berrytherm::cli {

using CommandFn = std::function<CommandResult(const RunConfig&)>;

inline const std::map<std::string, std::pair<CommandFn, std::string>>& commands() {
    static const std::map<std::string, std::pair<CommandFn, std::string>> table = {
        {"diagonalize", {cmd_diagonalize, "derived parameters, round trip and eigenstate residuals (JSON)"}},
        {"thermometer", {cmd_thermometer, "phase difference against the cold temperature (CSV)"}},
        {"sensitivity", {cmd_sensitivity, "relative phase error against hot-source error (CSV)"}},
        {"unruh", {cmd_unruh, "per-cycle phase and cycles to pi against acceleration (CSV)"}},
        {"adiabaticity", {cmd_adiabaticity, "detector excitation probability per cycle (CSV)"}},
        {"certify", {cmd_certify, "closed forms against the numerical oracles (JSON)"}},
    };
    return table;
}

inline CommandResult run_command(const std::string& name, const RunConfig& cfg) {
    auto it = commands().find(name);
    if (it == commands().end()) return {kExitConfig, {}, "unknown command '" + name + "'\n"};
    try {
        return it->second.first(cfg);
    } catch (const ConfigError& e) {
        return {kExitConfig, {}, std::string("error: ") + e.what() + "\n"};
    } catch (const DomainError& e) {
        return {kExitConfig, {}, std::string("error: ") + e.what() + "\n"};
    } catch (const ConvergenceError& e) {
        return {kExitNumerical, {},
                std::string("numerical failure: ") + e.what() + " (last residual " + fmt17(e.residual) + ", " +
                    std::to_string(e.iterations) + " iterations)\n"};
    } catch (const TruncationError& e) {
        return {kExitNumerical, {},
                std::string("numerical failure: ") + e.what() + " (estimate " + fmt17(e.estimate) + ")\n"};
    } catch (const std::exception& e) {
        return {kExitNumerical, {}, std::string("numerical failure: ") + e.what() + "\n"};
    }
}

}  // namespace berrytherm::cli
