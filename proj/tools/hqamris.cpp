// hqamris <preset> [--key value]... --out DIR [--seed S] [--trials T] [--workers W] [--config FILE]
//
// Exit status: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hqamris/error.hpp"
#include "hqamris/experiment.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

std::string join_presets()
{
    std::string out;
    for (const auto& p : hqamris::preset_names())
        out += (out.empty() ? "" : ", ") + p;
    return out;
}

// Leftover arguments are generic parameter overrides: "--key value" or "--key=value".
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& args)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a.rfind("--", 0) != 0)
            throw hqamris::ConfigError("unexpected argument '" + a + "'");
        auto key = a.substr(2);
        const auto eq = key.find('=');
        if (eq != std::string::npos) {
            out.emplace_back(key.substr(0, eq), key.substr(eq + 1));
            continue;
        }
        if (i + 1 >= args.size())
            throw hqamris::ConfigError("missing value for '--" + key + "'");
        out.emplace_back(key, args[++i]);
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"HQAM over RIS-assisted links: ASEP, energy efficiency and detection experiments"};
    app.allow_extras();
    app.set_version_flag("--version", std::string(hqamris::version));

    std::string preset;
    std::string out_dir = ".";
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<int> workers;
    bool list_keys = false;

    app.add_option("preset", preset, "one of: " + join_presets());
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--config", config_file, "file of 'key = value' lines, applied before command-line keys");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--trials", trials, "Monte Carlo trials per grid point");
    app.add_option("--workers", workers, "worker threads; results do not depend on it");
    app.add_flag("--list-keys", list_keys, "print every parameter key with its preset value and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (preset.empty())
            throw hqamris::ConfigError("no preset given (one of: " + join_presets() + ")");
        auto cfg = hqamris::default_config(preset);

        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in)
                throw hqamris::ConfigError("cannot read config file '" + config_file + "'");
            std::stringstream text;
            text << in.rdbuf();
            hqamris::apply_config_text(cfg, text.str());
        }
        for (const auto& [key, value] : parse_overrides(app.remaining()))
            hqamris::apply_override(cfg, key, value);
        if (seed)
            cfg.seed = *seed;
        if (trials)
            cfg.trials = *trials;
        if (workers)
            cfg.workers = *workers;

        if (list_keys) {
            for (const auto& key : hqamris::config_keys())
                std::cout << key << " = " << hqamris::config_value(cfg, key) << '\n';
            return 0;
        }

        const auto written = hqamris::run_experiment(cfg, out_dir);
        std::cerr << "wrote " << written.csv.string() << " and " << written.manifest.string() << '\n';
        return 0;
    } catch (const hqamris::ConfigError& e) {
        std::cerr << "hqamris: " << e.what() << '\n';
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "hqamris: " << e.what() << '\n';
        return exit_config;
    } catch (const hqamris::NumericalError& e) {
        std::cerr << "hqamris: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "hqamris: " << e.what() << '\n';
        return 1;
    }
}
