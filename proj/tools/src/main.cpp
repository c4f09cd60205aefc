#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "lyaplab/commands.hpp"
#include "lyaplab/output.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lyaplab: Lyapunov exponent laboratory"};
    app.set_version_flag("--version", std::string(lyaplab::kToolVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "./out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;

    for (const auto& name : lyaplab::subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "overrides numerics.seed");
        sub->add_option("--threads", threads, "worker threads (speed only)")
            ->check(CLI::Range(1u, 1024u))
            ->capture_default_str();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return lyaplab::kExitValidation;
    }

    const std::string subcommand = app.get_subcommands().front()->get_name();
    try {
        auto cfg = lyaplab::Config::load(config_path);
        if (seed) cfg.override_seed(*seed);
        lyaplab::RunOptions opts;
        opts.out_dir = out_dir;
        opts.threads = threads;
        return lyaplab::run(subcommand, cfg, opts, std::cerr);
    } catch (const lyaplab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return lyaplab::kExitValidation;
    }
}
