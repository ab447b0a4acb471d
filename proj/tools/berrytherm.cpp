// berrytherm.cpp — command-line front end

#include "berrytherm/cli/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

using namespace berrytherm::cli;

int main(int argc, char** argv) {
    CLI::App app{"Geometric-phase thermometry: closed forms, oracles and figure data"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "plain-text key = value file")->check(CLI::ExistingFile);

    std::map<std::string, std::string> flag_values;
    for (const auto& [name, entry] : commands()) {
        CLI::App* sub = app.add_subcommand(name, entry.second);
        for (const auto& key : known_keys()) sub->add_option("--" + key.name, flag_values[key.name], key.help);
        sub->add_option("--config", config_path, "plain-text key = value file")->check(CLI::ExistingFile);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    CLI::App* chosen = app.get_subcommands().front();
    RunConfig cfg;
    try {
        RunConfig file;
        if (!config_path.empty()) file = load_config_file(config_path);
        RunConfig flags;
        for (const auto& key : known_keys())
            if (chosen->count("--" + key.name) > 0) flags.set(key.name, flag_values[key.name]);
        cfg = resolve_config(file, flags);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    const CommandResult res = run_command(chosen->get_name(), cfg);
    if (!res.diagnostic.empty()) std::cerr << res.diagnostic;
    if (!res.output.empty()) {
        if (auto out = cfg.raw("out")) {
            std::ofstream f(*out, std::ios::binary);
            if (!f) {
                std::cerr << "error: cannot write '" << *out << "'\n";
                return kExitConfig;
            }
            f << res.output;
        } else {
            std::cout << res.output << std::flush;
        }
    }
    return res.exit_code;
}
