#include "semimono/cli/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"semimono: monotone stochastic evolution experiments"};
    app.require_subcommand(1);

    std::string run_path;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", run_path, "Config file")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse a config and print it with defaults resolved");
    validate->add_option("config", validate_path, "Config file")->required();

    auto* list = app.add_subcommand("list-builtins", "List built-in graphs, noise specs, schemes and studies");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : semimono::cli::kExitConfigError;
    }

    try {
        if (*run) return semimono::cli::run_command(run_path, std::cout, std::cerr);
        if (*validate) return semimono::cli::validate_command(validate_path, std::cout, std::cerr);
        if (*list) {
            std::cout << semimono::cli::list_builtins();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return semimono::cli::kExitInternalError;
    }
    return 0;
}
