#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hqamris/error.hpp"
#include "hqamris/experiment.hpp"

using namespace hqamris;
namespace fs = std::filesystem;

namespace {

std::string first_line(const std::string& csv)
{
    return csv.substr(0, csv.find('\n'));
}

std::size_t rows(const std::string& csv)
{
    return static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("hqamris_test_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST(Presets, Grids)
{
    auto a = default_config("fig3a");
    EXPECT_EQ(a.orders, std::vector<int>{64});
    EXPECT_EQ(a.schemes, (std::vector<Scheme>{Scheme::hqam, Scheme::qam}));
    EXPECT_EQ(a.phase_bits, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(a.elements_grid().size(), 26u);
    EXPECT_EQ(a.elements_grid().back(), 300);

    auto b = default_config("fig3b");
    EXPECT_EQ(b.orders, std::vector<int>{1024});
    EXPECT_EQ(b.elements_grid().front(), 100);
    EXPECT_EQ(b.elements_grid().back(), 1100);

    auto c = default_config("fig4");
    EXPECT_EQ(c.elements_grid().size(), 41u);
    EXPECT_DOUBLE_EQ(c.asep_threshold, 1e-5);
    EXPECT_DOUBLE_EQ(c.bandwidth_hz, 1.0);

    auto d = default_config("fig5");
    EXPECT_EQ(d.orders, (std::vector<int>{64, 256, 1024}));
    EXPECT_EQ(d.gamma_grid().size(), 21u);
    EXPECT_DOUBLE_EQ(d.gamma_grid().back(), 40.0);

    for (const auto& name : preset_names())
        EXPECT_NO_THROW(default_config(name).validate()) << name;
}

TEST(Presets, Unknown)
{
    try {
        default_config("fig9");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("unknown preset"), std::string::npos);
    }
}

TEST(Config, OverridesAndAliases)
{
    auto cfg = default_config("fig3a");
    apply_override(cfg, "noise_power_dbm", "-121");
    EXPECT_NEAR(watts_to_dbm(cfg.link.noise_power_w), -121.0, 1e-12);
    apply_override(cfg, "tx_power_dbm", "0");
    EXPECT_NEAR(cfg.link.tx_power_w, 1e-3, 1e-18);
    apply_override(cfg, "gain_db", "3");
    EXPECT_NEAR(cfg.link.gain, std::pow(10.0, 0.3), 1e-15);
    apply_override(cfg, "orders", "16, 256");
    EXPECT_EQ(cfg.orders, (std::vector<int>{16, 256}));
    apply_override(cfg, "schemes", "qam");
    EXPECT_EQ(cfg.schemes, std::vector<Scheme>{Scheme::qam});
    apply_override(cfg, "simulate", "false");
    EXPECT_FALSE(cfg.simulate);
    apply_override(cfg, "trials", "5000");
    EXPECT_EQ(cfg.trials, 5000u);

    EXPECT_THROW(apply_override(cfg, "nonsense", "1"), ConfigError);
    EXPECT_THROW(apply_override(cfg, "n_min", "ten"), ConfigError);
    EXPECT_THROW(apply_override(cfg, "shape_m", "3x"), ConfigError);
    EXPECT_THROW(apply_override(cfg, "schemes", "psk"), ConfigError);
    EXPECT_THROW(apply_override(cfg, "simulate", "maybe"), ConfigError);
}

TEST(Config, ValidationRejectsBadValues)
{
    auto bad = [](const std::string& key, const std::string& value) {
        auto cfg = default_config("fig3a");
        apply_override(cfg, key, value);
        return cfg;
    };
    EXPECT_THROW(bad("orders", "32").validate(), ConfigError);
    EXPECT_THROW(bad("trials", "999").validate(), ConfigError);
    EXPECT_THROW(bad("n_step", "0").validate(), ConfigError);
    EXPECT_THROW(bad("n_max", "10").validate(), ConfigError);
    EXPECT_THROW(bad("shape_m", "0.4").validate(), ConfigError);
    EXPECT_THROW(bad("noise_power_w", "0").validate(), ConfigError);
    EXPECT_THROW(bad("asep_threshold", "1.5").validate(), ConfigError);
    EXPECT_THROW(bad("workers", "0").validate(), ConfigError);
    EXPECT_THROW(bad("gamma_db_step", "0").validate(), ConfigError);
}

TEST(Config, TextFile)
{
    auto cfg = default_config("fig5");
    apply_config_text(cfg, "# comment\n\n  trials = 2000  # inline\nseed=7\npreset = fig5\n");
    EXPECT_EQ(cfg.trials, 2000u);
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_THROW(apply_config_text(cfg, "trials 2000\n"), ConfigError);
    EXPECT_THROW(apply_config_text(cfg, "preset = fig4\n"), ConfigError);
}

TEST(Manifest, RoundTrip)
{
    for (const auto& name : preset_names()) {
        auto cfg = default_config(name);
        apply_override(cfg, "noise_power_dbm", "-121.3");
        apply_override(cfg, "shape_m", "2.7182818284590451");
        apply_override(cfg, "c0_db", "-29.999999999999996");
        apply_override(cfg, "seed", "18446744073709551615");
        apply_override(cfg, "phase_bits", "3,1");
        const auto text = to_manifest(cfg);
        EXPECT_EQ(parse_manifest(text), cfg) << name;
        EXPECT_EQ(to_manifest(parse_manifest(text)), text);
    }
    EXPECT_THROW(parse_manifest("trials = 2000\n"), ConfigError);
}

TEST(Manifest, ListsEveryKey)
{
    const auto text = to_manifest(default_config("fig4"));
    for (const auto& key : config_keys())
        EXPECT_NE(text.find("\n" + key + " = "), std::string::npos) << key;
    EXPECT_NE(text.find(version), std::string::npos);
    EXPECT_NE(text.find("E_s = 1"), std::string::npos);
}

TEST(Csv, Schemas)
{
    auto dump = default_config("constellation-dump");
    auto csv = render_csv(dump);
    EXPECT_EQ(first_line(csv), "index,re,im,is_external");
    EXPECT_EQ(rows(csv), 64u);

    auto analyze = default_config("analyze");
    apply_override(analyze, "n_step", "50");
    csv = render_csv(analyze);
    EXPECT_EQ(first_line(csv), "N,gamma_bar_db,m_t,omega_t,asep_closed,asep_quadrature");
    EXPECT_EQ(rows(csv), 6u);

    auto bench = default_config("detect-bench");
    apply_override(bench, "trials", "1000");
    apply_override(bench, "gamma_db_step", "20");
    csv = render_csv(bench);
    EXPECT_EQ(first_line(csv), "gamma_db,ser_proposed,ser_mld,max_candidates,mean_distance_ops");
    EXPECT_EQ(rows(csv), 3u);

    auto f3 = default_config("fig3a");
    apply_override(f3, "trials", "1000");
    apply_override(f3, "n_step", "125");
    csv = render_csv(f3);
    EXPECT_EQ(first_line(csv), "scheme,M,q,N,gamma_bar_db,m_t,omega_t,m_t_rounded,asep_closed,asep_quadrature,"
                               "asep_sim,sim_errors,sim_trials,sim_stderr,low_confidence");
    EXPECT_EQ(rows(csv), 2u * 3u * 3u);

    auto f4 = default_config("fig4");
    apply_override(f4, "simulate", "false");
    apply_override(f4, "n_step", "500");
    csv = render_csv(f4);
    EXPECT_NE(first_line(csv).find("ee_closed"), std::string::npos);
    EXPECT_NE(first_line(csv).find("power_w"), std::string::npos);
    EXPECT_EQ(rows(csv), 2u * 3u * 3u);
}

TEST(Csv, FullPrecision)
{
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Csv, WorkerCountInvariant)
{
    auto cfg = default_config("fig5");
    apply_override(cfg, "trials", "70000");
    apply_override(cfg, "gamma_db_step", "10");
    apply_override(cfg, "orders", "64");
    auto other = cfg;
    other.workers = 3;
    EXPECT_EQ(render_csv(cfg), render_csv(other));
}

TEST(Run, WritesCsvAndManifest)
{
    const auto dir = scratch("run");
    auto cfg = default_config("constellation-dump");
    const auto out = run_experiment(cfg, dir);
    EXPECT_EQ(out.csv, dir / "constellation-dump.csv");
    EXPECT_EQ(slurp(out.csv), render_csv(cfg));
    EXPECT_EQ(parse_manifest(slurp(out.manifest)), cfg);
    for (const auto& entry : fs::directory_iterator(dir))
        EXPECT_EQ(entry.path().string().find(".partial"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Run, FailureLeavesNothing)
{
    const auto dir = scratch("fail");
    auto cfg = default_config("fig3a");
    apply_override(cfg, "trials", "10");
    EXPECT_THROW(run_experiment(cfg, dir), ConfigError);
    EXPECT_FALSE(fs::exists(dir / "fig3a.csv"));
    EXPECT_FALSE(fs::exists(dir / "fig3a.manifest"));
    fs::remove_all(dir);
}
