// bcslab <spectrum|gap|tc|sweep|selftest> --config <path> [--serial] [--out <dir>]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bcslab/bcslab.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, int status) {
    std::cerr << bcslab::error_record(kind, message).dump() << "\n";
    return status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"BCS gap equation, pairing criterion and critical temperature"};
    std::string subcommand;
    std::string config_path;
    std::string out_dir;
    bool serial = false;
    app.add_option("subcommand", subcommand, "spectrum, gap, tc, sweep or selftest")
        ->required()
        ->check(CLI::IsMember({"spectrum", "gap", "tc", "sweep", "selftest"}));
    app.add_option("--config", config_path, "configuration file")->required();
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_flag("--serial", serial, "single-threaded deterministic execution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), bcslab::exit_config);
    }

    try {
        const bcslab::RunConfig config = bcslab::parse_config(config_path);
        bcslab::RunOptions options;
        options.serial = serial;
        if (!out_dir.empty()) options.out_dir = out_dir;
        return bcslab::run_subcommand(subcommand, config, options);
    } catch (const bcslab::ConfigError& e) {
        return fail("config", e.what(), bcslab::exit_config);
    } catch (const bcslab::DomainError& e) {
        return fail("domain", e.what(), bcslab::exit_config);
    } catch (const bcslab::GapNonConvergence& e) {
        bcslab::Json rec = bcslab::error_record("non_convergence", e.what());
        const auto& h = e.residual_history();
        const std::size_t keep = std::min<std::size_t>(h.size(), 20);
        rec["error"]["residual_history_tail"] = std::vector<double>(h.end() - static_cast<std::ptrdiff_t>(keep), h.end());
        std::cerr << rec.dump() << "\n";
        return bcslab::exit_numerical;
    } catch (const bcslab::NumericalError& e) {
        return fail("numerical", e.what(), bcslab::exit_numerical);
    } catch (const bcslab::RangeError& e) {
        return fail("range", e.what(), bcslab::exit_numerical);
    } catch (const bcslab::IoError& e) {
        return fail("io", e.what(), bcslab::exit_numerical);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), bcslab::exit_numerical);
    }
}
