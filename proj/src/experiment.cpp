#include "hqamris/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hqamris/detector.hpp"
#include "hqamris/error.hpp"
#include "hqamris/montecarlo.hpp"

namespace hqamris {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& key, const std::string& text)
{
    double v = 0.0;
    const auto t = trim(text);
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
    return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text)
{
    Int v = 0;
    const auto t = trim(text);
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size())
        throw ConfigError("invalid integer '" + text + "' for key '" + key + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text)
{
    const auto t = trim(text);
    if (t == "true" || t == "1")
        return true;
    if (t == "false" || t == "0")
        return false;
    throw ConfigError("invalid boolean '" + text + "' for key '" + key + "'");
}

template <typename T, typename Format>
std::string join(const std::vector<T>& items, Format&& fmt)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += ",";
        out += fmt(items[i]);
    }
    return out;
}

struct Field {
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;  // empty for aliases
};

Field real_field(double ExperimentConfig::*member)
{
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*member = parse_double(k, v); },
            [member](const ExperimentConfig& c) { return format_double(c.*member); }};
}

Field link_field(double LinkBudget::*member)
{
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.link.*member = parse_double(k, v);
            },
            [member](const ExperimentConfig& c) { return format_double(c.link.*member); }};
}

Field int_field(int ExperimentConfig::*member)
{
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_int<int>(k, v);
            },
            [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field int_list_field(std::vector<int> ExperimentConfig::*member)
{
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                std::vector<int> values;
                for (const auto& item : split_list(v))
                    values.push_back(parse_int<int>(k, item));
                c.*member = values;
            },
            [member](const ExperimentConfig& c) {
                return join(c.*member, [](int i) { return std::to_string(i); });
            }};
}

Field alias(std::function<void(ExperimentConfig&, double)> set)
{
    return {[set](ExperimentConfig& c, const std::string& k, const std::string& v) { set(c, parse_double(k, v)); },
            {}};
}

// Canonical keys first (manifest order), aliases after.
const std::vector<std::pair<std::string, Field>>& fields()
{
    static const std::vector<std::pair<std::string, Field>> table = {
        {"tx_power_w", link_field(&LinkBudget::tx_power_w)},
        {"gain", link_field(&LinkBudget::gain)},
        {"c0_db", link_field(&LinkBudget::c0_db)},
        {"d0_m", link_field(&LinkBudget::d0_m)},
        {"d1_m", link_field(&LinkBudget::d1_m)},
        {"d2_m", link_field(&LinkBudget::d2_m)},
        {"path_loss_exponent", link_field(&LinkBudget::path_loss_exponent)},
        {"noise_power_w", link_field(&LinkBudget::noise_power_w)},
        {"shape_m", real_field(&ExperimentConfig::shape)},
        {"spread_omega", real_field(&ExperimentConfig::spread)},
        {"controller_power_w", real_field(&ExperimentConfig::controller_power_w)},
        {"pin_power_w", real_field(&ExperimentConfig::pin_power_w)},
        {"bandwidth_hz", real_field(&ExperimentConfig::bandwidth_hz)},
        {"asep_threshold", real_field(&ExperimentConfig::asep_threshold)},
        {"schemes",
         {[](ExperimentConfig& c, const std::string&, const std::string& v) {
              std::vector<Scheme> values;
              for (const auto& item : split_list(v)) {
                  try {
                      values.push_back(scheme_from_string(item));
                  } catch (const std::invalid_argument& e) {
                      throw ConfigError(e.what());
                  }
              }
              c.schemes = values;
          },
          [](const ExperimentConfig& c) {
              return join(c.schemes, [](Scheme s) { return std::string(to_string(s)); });
          }}},
        {"orders", int_list_field(&ExperimentConfig::orders)},
        {"phase_bits", int_list_field(&ExperimentConfig::phase_bits)},
        {"n_min", int_field(&ExperimentConfig::n_min)},
        {"n_max", int_field(&ExperimentConfig::n_max)},
        {"n_step", int_field(&ExperimentConfig::n_step)},
        {"gamma_db_min", real_field(&ExperimentConfig::gamma_db_min)},
        {"gamma_db_max", real_field(&ExperimentConfig::gamma_db_max)},
        {"gamma_db_step", real_field(&ExperimentConfig::gamma_db_step)},
        {"trials",
         {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.trials = parse_int<std::uint64_t>(k, v);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.trials); }}},
        {"seed",
         {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.seed = parse_int<std::uint64_t>(k, v);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.seed); }}},
        {"workers", int_field(&ExperimentConfig::workers)},
        {"simulate",
         {[](ExperimentConfig& c, const std::string& k, const std::string& v) { c.simulate = parse_bool(k, v); },
          [](const ExperimentConfig& c) { return std::string(c.simulate ? "true" : "false"); }}},
        {"tx_power_dbm", alias([](ExperimentConfig& c, double v) { c.link.tx_power_w = dbm_to_watts(v); })},
        {"noise_power_dbm", alias([](ExperimentConfig& c, double v) { c.link.noise_power_w = dbm_to_watts(v); })},
        {"gain_db", alias([](ExperimentConfig& c, double v) { c.link.gain = db_to_linear(v); })},
        {"controller_power_dbm", alias([](ExperimentConfig& c, double v) { c.controller_power_w = dbm_to_watts(v); })},
        {"pin_power_dbm", alias([](ExperimentConfig& c, double v) { c.pin_power_w = dbm_to_watts(v); })},
    };
    return table;
}

const Field* find_field(const std::string& key)
{
    for (const auto& [name, field] : fields())
        if (name == key)
            return &field;
    return nullptr;
}

std::string csv_bool(bool b) { return b ? "true" : "false"; }

std::string render_ris_sweep(const ExperimentConfig& cfg, bool energy_columns)
{
    std::ostringstream out;
    if (energy_columns)
        out << "scheme,M,q,N,power_w,asep_closed,asep_quadrature,ee_closed,asep_sim,sim_errors,sim_trials,"
               "sim_stderr,ee_sim,low_confidence\n";
    else
        out << "scheme,M,q,N,gamma_bar_db,m_t,omega_t,m_t_rounded,asep_closed,asep_quadrature,asep_sim,"
               "sim_errors,sim_trials,sim_stderr,low_confidence\n";

    const auto pm = cfg.power_model();
    for (int order : cfg.orders) {
        for (Scheme scheme : cfg.schemes) {
            for (int q : cfg.phase_bits) {
                SweepSpec spec;
                spec.scheme = scheme;
                spec.order = order;
                spec.phase_bits = q;
                spec.shape = cfg.shape;
                spec.spread = cfg.spread;
                spec.elements = cfg.elements_grid();
                spec.trials = cfg.trials;
                spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(q));
                spec.workers = cfg.workers;
                spec.simulate = cfg.simulate;
                for (const auto& row : run_sweep(spec, cfg.link, pm)) {
                    const auto& est = row.sim.estimate;
                    const std::string sim_ser = row.simulated ? format_double(est.ser()) : "nan";
                    const std::string sim_se = row.simulated ? format_double(est.std_error()) : "nan";
                    out << to_string(scheme) << ',' << order << ',' << q << ',' << row.elements << ',';
                    if (energy_columns) {
                        PowerModel p = pm;
                        p.elements = row.elements;
                        p.phase_bits = q;
                        out << format_double(p.consumption()) << ',' << format_double(row.asep_closed) << ','
                            << format_double(row.asep_quadrature) << ',' << format_double(row.ee_closed) << ','
                            << sim_ser << ',' << est.errors << ',' << est.trials << ',' << sim_se << ','
                            << (row.simulated ? format_double(row.ee_sim) : "nan") << ','
                            << csv_bool(row.simulated && est.low_confidence()) << '\n';
                    } else {
                        out << format_double(linear_to_db(row.gamma_bar)) << ',' << format_double(row.fit.shape)
                            << ',' << format_double(row.fit.spread) << ',' << row.fit.shape_rounded << ','
                            << format_double(row.asep_closed) << ',' << format_double(row.asep_quadrature) << ','
                            << sim_ser << ',' << est.errors << ',' << est.trials << ',' << sim_se << ','
                            << csv_bool(row.simulated && est.low_confidence()) << '\n';
                    }
                }
            }
        }
    }
    return out.str();
}

SweepSpec detection_spec(const ExperimentConfig& cfg, int order)
{
    SweepSpec spec;
    spec.scheme = Scheme::hqam;
    spec.order = order;
    spec.gamma_db = cfg.gamma_grid();
    spec.trials = cfg.trials;
    spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(order));
    spec.workers = cfg.workers;
    return spec;
}

std::string render_fig5(const ExperimentConfig& cfg)
{
    std::ostringstream out;
    out << "M,gamma_db,ser_proposed,ser_mld,stderr_proposed,stderr_mld,errors_proposed,errors_mld,trials,"
           "max_candidates,mean_distance_ops,fallback_rate,fallback_mismatches\n";
    for (int order : cfg.orders) {
        for (const auto& row : run_detection_sweep(detection_spec(cfg, order))) {
            const auto& k = row.counters;
            out << order << ',' << format_double(row.gamma_db) << ',' << format_double(row.proposed.ser()) << ','
                << format_double(row.mld.ser()) << ',' << format_double(row.proposed.std_error()) << ','
                << format_double(row.mld.std_error()) << ',' << row.proposed.errors << ',' << row.mld.errors
                << ',' << row.proposed.trials << ',' << k.max_candidates << ','
                << format_double(k.mean_distance_ops()) << ','
                << format_double(static_cast<double>(k.fallback) / static_cast<double>(row.proposed.trials))
                << ',' << k.fallback_mismatches << '\n';
        }
    }
    return out.str();
}

std::string render_detect_bench(const ExperimentConfig& cfg)
{
    std::ostringstream out;
    out << "gamma_db,ser_proposed,ser_mld,max_candidates,mean_distance_ops\n";
    for (const auto& row : run_detection_sweep(detection_spec(cfg, cfg.orders.front()))) {
        out << format_double(row.gamma_db) << ',' << format_double(row.proposed.ser()) << ','
            << format_double(row.mld.ser()) << ',' << row.counters.max_candidates << ','
            << format_double(row.counters.mean_distance_ops()) << '\n';
    }
    return out.str();
}

std::string render_analyze(const ExperimentConfig& cfg)
{
    const int order = cfg.orders.front();
    const auto c = build_hqam(order);
    const auto model = hqam_sep_model(c);
    const double gamma_bar = average_snr(cfg.link);
    std::ostringstream out;
    out << "N,gamma_bar_db,m_t,omega_t,asep_closed,asep_quadrature\n";
    for (int n : cfg.elements_grid()) {
        const auto fit = fit_cascade({n, cfg.shape, cfg.spread, cfg.phase_bits.front()});
        out << n << ',' << format_double(linear_to_db(gamma_bar)) << ',' << format_double(fit.shape) << ','
            << format_double(fit.spread) << ',' << format_double(asep_hqam_closed(gamma_bar, fit, model)) << ','
            << format_double(asep_quadrature(gamma_bar, [&](double g) { return sep_awgn_hqam(g, model); }, fit))
            << '\n';
    }
    return out.str();
}

std::string render_dump(const ExperimentConfig& cfg)
{
    const auto c = build_constellation(cfg.schemes.front(), cfg.orders.front());
    std::ostringstream out;
    out << "index,re,im,is_external\n";
    for (int i = 0; i < c.order(); ++i) {
        out << i << ',' << format_double(c.symbol(i).real()) << ',' << format_double(c.symbol(i).imag()) << ','
            << (c.is_external(i) ? 1 : 0) << '\n';
    }
    return out.str();
}

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<int> ExperimentConfig::elements_grid() const
{
    std::vector<int> grid;
    for (int n = n_min; n <= n_max; n += n_step)
        grid.push_back(n);
    return grid;
}

std::vector<double> ExperimentConfig::gamma_grid() const
{
    std::vector<double> grid;
    const int count = static_cast<int>(std::floor((gamma_db_max - gamma_db_min) / gamma_db_step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i)
        grid.push_back(gamma_db_min + i * gamma_db_step);
    return grid;
}

PowerModel ExperimentConfig::power_model() const
{
    PowerModel pm;
    pm.tx_power_w = link.tx_power_w;
    pm.controller_power_w = controller_power_w;
    pm.pin_power_w = pin_power_w;
    pm.bandwidth_hz = bandwidth_hz;
    pm.asep_threshold = asep_threshold;
    return pm;
}

void ExperimentConfig::validate() const
{
    try {
        link.validate();
        ChannelParams{1, shape, spread, 1}.validate();
        power_model().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (schemes.empty() || orders.empty() || phase_bits.empty())
        throw ConfigError("schemes, orders and phase_bits must be non-empty");
    for (int m : orders)
        if (m != 4 && m != 16 && m != 64 && m != 256 && m != 1024)
            throw ConfigError("unsupported constellation order " + std::to_string(m));
    for (int q : phase_bits)
        if (q < 1 || q > 30)
            throw ConfigError("phase_bits must lie in [1, 30]");
    if (n_min < 1 || n_step < 1 || n_max < n_min)
        throw ConfigError("N grid needs 1 <= n_min <= n_max and n_step >= 1");
    if (!(gamma_db_step > 0.0) || gamma_db_max < gamma_db_min)
        throw ConfigError("SNR grid needs gamma_db_min <= gamma_db_max and gamma_db_step > 0");
    if (trials < 1000)
        throw ConfigError("trials must be at least 1000");
    if (workers < 1)
        throw ConfigError("workers must be at least 1");
}

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names = {"fig3a",        "fig3b",   "fig4", "fig5",
                                                   "detect-bench", "analyze", "constellation-dump"};
    return names;
}

ExperimentConfig default_config(const std::string& preset)
{
    ExperimentConfig cfg;
    cfg.preset = preset;
    if (preset == "fig3a") {
        cfg.schemes = {Scheme::hqam, Scheme::qam};
        cfg.orders = {64};
        cfg.n_min = 50, cfg.n_max = 300, cfg.n_step = 10;
    } else if (preset == "fig3b") {
        cfg.schemes = {Scheme::hqam, Scheme::qam};
        cfg.orders = {1024};
        cfg.n_min = 100, cfg.n_max = 1100, cfg.n_step = 50;
    } else if (preset == "fig4") {
        cfg.schemes = {Scheme::hqam, Scheme::qam};
        cfg.orders = {1024};
        cfg.n_min = 500, cfg.n_max = 1500, cfg.n_step = 25;
    } else if (preset == "fig5") {
        cfg.orders = {64, 256, 1024};
    } else if (preset == "detect-bench") {
        cfg.orders = {64};
    } else if (preset == "analyze") {
        cfg.orders = {64};
        cfg.phase_bits = {2};
    } else if (preset == "constellation-dump") {
        cfg.orders = {64};
    } else {
        throw ConfigError("unknown preset '" + preset + "'");
    }
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "preset")
        throw ConfigError("the preset is chosen on the command line, not as a key");
    const Field* field = find_field(key);
    if (!field)
        throw ConfigError("unknown key '" + key + "'");
    field->set(cfg, key, value);
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "preset") {
            if (value != cfg.preset)
                throw ConfigError("line " + std::to_string(number) + ": preset '" + value
                                  + "' does not match '" + cfg.preset + "'");
            continue;
        }
        apply_override(cfg, key, value);
    }
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const auto& [name, field] : fields())
        if (field.get)
            keys.push_back(name);
    return keys;
}

std::string config_value(const ExperimentConfig& cfg, const std::string& key)
{
    const Field* field = find_field(key);
    if (!field || !field->get)
        throw ConfigError("unknown key '" + key + "'");
    return field->get(cfg);
}

std::string to_manifest(const ExperimentConfig& cfg)
{
    std::ostringstream out;
    out << "# hqamris " << version << " run manifest\n";
    out << "# average SNR gamma_bar = " << format_double(average_snr(cfg.link)) << " ("
        << format_double(linear_to_db(average_snr(cfg.link))) << " dB)\n";
    out << "# AWGN convention: E_s = 1, per-component noise variance 1/(2 gamma_r)\n";
    out << "preset = " << cfg.preset << '\n';
    for (const auto& key : config_keys())
        out << key << " = " << config_value(cfg, key) << '\n';
    return out.str();
}

ExperimentConfig parse_manifest(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const auto eq = line.find('=');
        if (eq != std::string::npos && trim(line.substr(0, eq)) == "preset") {
            auto cfg = default_config(trim(line.substr(eq + 1)));
            apply_config_text(cfg, text);
            return cfg;
        }
    }
    throw ConfigError("manifest has no preset line");
}

std::string render_csv(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.preset == "fig3a" || cfg.preset == "fig3b")
        return render_ris_sweep(cfg, false);
    if (cfg.preset == "fig4")
        return render_ris_sweep(cfg, true);
    if (cfg.preset == "fig5")
        return render_fig5(cfg);
    if (cfg.preset == "detect-bench")
        return render_detect_bench(cfg);
    if (cfg.preset == "analyze")
        return render_analyze(cfg);
    if (cfg.preset == "constellation-dump")
        return render_dump(cfg);
    throw ConfigError("unknown preset '" + cfg.preset + "'");
}

RunOutput run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir)
{
    namespace fs = std::filesystem;
    std::string csv;
    try {
        csv = render_csv(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    RunOutput out{out_dir / (cfg.preset + ".csv"), out_dir / (cfg.preset + ".manifest")};
    const std::vector<std::pair<fs::path, std::string>> files = {{out.csv, csv}, {out.manifest, to_manifest(cfg)}};
    std::vector<fs::path> staged;
    try {
        for (const auto& [path, body] : files) {
            fs::path tmp = path;
            tmp += ".partial";
            staged.push_back(tmp);
            std::ofstream f(tmp, std::ios::binary);
            f << body;
            f.close();
            if (!f)
                throw ConfigError("cannot write '" + tmp.string() + "'");
        }
        for (std::size_t i = 0; i < files.size(); ++i)
            fs::rename(staged[i], files[i].first);
    } catch (...) {
        for (const auto& tmp : staged)
            fs::remove(tmp, ec);
        throw;
    }
    return out;
}

} // namespace hqamris
