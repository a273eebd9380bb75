#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hqamris/analysis.hpp"
#include "hqamris/channel.hpp"
#include "hqamris/constellation.hpp"

namespace hqamris {

inline constexpr const char* version = "1.0.0";

/// Every tunable of a run as flat keys. Defaults are the reference scenario:
/// P_t = 1 mW, G = 1, C0 = -30 dB, sigma_n^2 = -140 dBm, d0/d1/d2 = 1/20/60 m,
/// n = 2.5, m = 3, Omega = 1, P_ctr = 50 mW, P_PIN = 1 mW, P_v = 1e-5.
struct ExperimentConfig {
    std::string preset;
    LinkBudget link;
    double shape = 3.0;
    double spread = 1.0;
    double controller_power_w = 50e-3;
    double pin_power_w = 1e-3;
    double bandwidth_hz = 1.0;
    double asep_threshold = 1e-5;
    std::vector<Scheme> schemes{Scheme::hqam};
    std::vector<int> orders{64};
    std::vector<int> phase_bits{1, 2, 3};
    int n_min = 50;
    int n_max = 300;
    int n_step = 10;
    double gamma_db_min = 0.0;
    double gamma_db_max = 40.0;
    double gamma_db_step = 2.0;
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    int workers = 1;
    bool simulate = true;

    std::vector<int> elements_grid() const;
    std::vector<double> gamma_grid() const;
    PowerModel power_model() const;
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& preset_names();

/// Reference parameters plus the preset's grids. Throws ConfigError
/// ("unknown preset") for anything else.
ExperimentConfig default_config(const std::string& preset);

/// Sets one flat key. Keys ending in _db / _dbm take logarithmic values;
/// everything else is linear. Throws ConfigError on unknown keys or bad values.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Applies `key = value` lines; '#' starts a comment.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);

/// Canonical key list, in manifest order.
std::vector<std::string> config_keys();

std::string config_value(const ExperimentConfig& cfg, const std::string& key);

/// Run manifest: every effective parameter plus version comments.
/// parse_manifest(to_manifest(c)) == c.
std::string to_manifest(const ExperimentConfig& cfg);
ExperimentConfig parse_manifest(const std::string& text);

/// CSV body produced by the preset.
std::string render_csv(const ExperimentConfig& cfg);

struct RunOutput {
    std::filesystem::path csv;
    std::filesystem::path manifest;
};

/// Writes <out>/<preset>.csv and <out>/<preset>.manifest. Nothing is left
/// behind when the run fails.
RunOutput run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// 17 significant digits, as used in every CSV; "nan" for NaN.
std::string format_double(double v);

} // namespace hqamris
