#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fomlab/fomlab.hpp"

namespace {

void print_error(const char* kind, const std::string& message, const std::string& key = "") {
    fomlab::json err;
    err["error"]["kind"] = kind;
    err["error"]["message"] = message;
    if (!key.empty()) err["error"]["key"] = key;
    std::cerr << err.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fomlab: task-based figures of merit for parametric models with priors"};
    std::string config_path;
    std::string output_override;
    bool quiet = false;
    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--output", output_override, "override the report output path");
    app.add_flag("--quiet", quiet, "suppress the report on stdout");
    CLI11_PARSE(app, argc, argv);

    try {
        fomlab::RunConfig cfg = fomlab::load_config_file(config_path);
        if (!output_override.empty()) cfg.output_path = output_override;
        const fomlab::RunReport report = fomlab::run(cfg);
        if (!quiet) std::cout << report.body.dump(2) << "\n";
        return report.exit_code;
    } catch (const fomlab::ConfigError& e) {
        print_error("config", e.what(), e.offending_key);
        return 2;
    } catch (const fomlab::ConvergenceError& e) {
        print_error("convergence", e.what());
        return 3;
    } catch (const fomlab::DomainError& e) {
        print_error("domain", e.what());
        return 1;
    } catch (const fomlab::PreconditionError& e) {
        print_error("precondition", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
}
