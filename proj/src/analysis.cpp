#include "hqamris/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hqamris/error.hpp"

namespace hqamris {

namespace {

// E[(|h1||h2|)^n] for independent Nakagami(m, Omega) hops.
double product_moment(int n, double m, double omega)
{
    const double single = std::exp(std::lgamma(m + 0.5 * n) - std::lgamma(m)) * std::pow(omega / m, 0.5 * n);
    return single * single;
}

// E[e^{j k phi}] for phi uniform on [-a, a]; real by symmetry.
double phase_characteristic(int k, int phase_bits)
{
    if (k == 0)
        return 1.0;
    const double x = k * phase_error_bound(phase_bits);
    return std::sin(x) / x;
}

// Visits every set partition of {0..n-1} as a restricted growth string.
template <typename Visit>
void for_each_partition(int n, Visit&& visit)
{
    std::vector<int> label(static_cast<std::size_t>(n), 0);
    std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);
    while (true) {
        visit(std::span<const int>(label));
        int i = n - 1;
        while (i > 0 && label[i] == prefix_max[i - 1] + 1)
            --i;
        if (i == 0)
            return;
        ++label[i];
        prefix_max[i] = std::max(prefix_max[i - 1], label[i]);
        for (int j = i + 1; j < n; ++j) {
            label[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
}

// Incomplete gamma ratios for the grid edges; far tails underflow to zero
// instead of throwing.
namespace bmp = boost::math::policies;
using quiet_policy =
    bmp::policy<bmp::overflow_error<bmp::ignore_error>, bmp::underflow_error<bmp::ignore_error>>;

double log_sum_exp(std::span<const double> logs)
{
    const double peak = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(peak))
        return peak;
    double sum = 0.0;
    for (double l : logs)
        sum += std::exp(l - peak);
    return peak + std::log(sum);
}

} // namespace

double PowerModel::consumption() const
{
    return tx_power_w + controller_power_w + phase_bits * static_cast<double>(elements) * pin_power_w;
}

void PowerModel::validate() const
{
    if (tx_power_w < 0.0 || controller_power_w < 0.0 || pin_power_w < 0.0)
        throw std::invalid_argument("power model: powers must be non-negative");
    if (!(asep_threshold > 0.0 && asep_threshold < 1.0))
        throw std::invalid_argument("power model: ASEP threshold must lie in (0, 1)");
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("power model: bandwidth must be positive");
    if (!(consumption() > 0.0))
        throw std::invalid_argument("power model: total consumption must be positive");
}

HqamGeometry hqam_geometry(double min_distance, double kc, double energy)
{
    if (!(kc > 0.0 && kc <= 1.0) || !(min_distance > 0.0) || !(energy > 0.0))
        throw std::invalid_argument("hqam_geometry: need 0 < k_c <= 1, d_min > 0, E_s > 0");
    const double d2 = min_distance * min_distance / energy;
    const double rest = 1.0 - kc;
    HqamGeometry g;
    g.kc = kc;
    g.exp_scale = d2 * kc * kc / 3.0 + d2 * kc * rest / std::numbers::sqrt3 + d2 * rest * rest / 4.0;
    g.arg_scale = std::sqrt(2.0 * d2 * kc * kc / 3.0) + std::sqrt(d2 * rest * rest / 2.0);
    return g;
}

HqamSepModel hqam_sep_model(const Constellation& c)
{
    return hqam_sep_model(c, kc_lookup(c.order()));
}

HqamSepModel hqam_sep_model(const Constellation& c, double kc)
{
    if (c.scheme() != Scheme::hqam)
        throw std::invalid_argument("hqam_sep_model: constellation is not HQAM");
    return {c.order(), c.external_count(), hqam_geometry(c.min_distance(), kc, c.energy())};
}

double q_function(double x)
{
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double sep_awgn_hqam(double gamma_r, const HqamSepModel& model)
{
    if (!(gamma_r >= 0.0))
        throw std::invalid_argument("sep_awgn_hqam: received SNR must be non-negative");
    const double m = model.order;
    const double b = model.external;
    return (2.0 * m - b) / (2.0 * m) * std::exp(-gamma_r * model.geometry.exp_scale)
        + b / m * q_function(std::sqrt(gamma_r) * model.geometry.arg_scale);
}

double sep_awgn_qam(double gamma_r, int order)
{
    if (!(gamma_r >= 0.0))
        throw std::invalid_argument("sep_awgn_qam: received SNR must be non-negative");
    const double side = std::sqrt(static_cast<double>(order));
    const double p = 2.0 * (1.0 - 1.0 / side) * q_function(std::sqrt(3.0 * gamma_r / (order - 1.0)));
    // 1 - (1 - p)^2 without cancellation at small p.
    return p * (2.0 - p);
}

double cascade_moment(const ChannelParams& p, std::span<const int> signs)
{
    p.validate();
    const int n = static_cast<int>(signs.size());
    if (n == 0)
        return 1.0;
    double total = 0.0;
    for_each_partition(n, [&](std::span<const int> label) {
        const int blocks = *std::max_element(label.begin(), label.end()) + 1;
        if (blocks > p.elements)
            return;
        // Ordered choices of distinct element indices, one per block.
        double term = 1.0;
        for (int k = 0; k < blocks; ++k)
            term *= static_cast<double>(p.elements - k);
        for (int k = 0; k < blocks; ++k) {
            int size = 0;
            int phase = 0;
            for (int pos = 0; pos < n; ++pos) {
                if (label[pos] == k) {
                    ++size;
                    phase += signs[pos];
                }
            }
            term *= product_moment(size, p.shape, p.spread) * phase_characteristic(phase, p.phase_bits);
        }
        total += term;
    });
    return total;
}

double moment_I1(const ChannelParams& p)
{
    static constexpr int signs[] = {+1, -1};
    return cascade_moment(p, signs);
}

double moment_I2(const ChannelParams& p)
{
    static constexpr int signs[] = {+1, -1, +1, -1};
    return cascade_moment(p, signs);
}

NakagamiFit fit_nakagami(double i1, double i2)
{
    if (!(i1 > 0.0) || !(i2 > i1 * i1))
        throw std::invalid_argument("fit_nakagami: degenerate moments (need I2 > I1^2 > 0)");
    NakagamiFit fit;
    fit.i1 = i1;
    fit.i2 = i2;
    fit.shape = i1 * i1 / (i2 - i1 * i1);
    fit.spread = i1;
    fit.shape_rounded = static_cast<int>(std::max(1LL, std::llround(fit.shape)));
    return fit;
}

NakagamiFit fit_cascade(const ChannelParams& p)
{
    return fit_nakagami(moment_I1(p), moment_I2(p));
}

double nakagami_pdf(double x, double shape, double spread)
{
    if (x < 0.0)
        return 0.0;
    if (x == 0.0)
        return shape == 0.5 ? 2.0 * std::sqrt(0.5 / (std::numbers::pi * spread)) : 0.0;
    const double log_pdf = std::log(2.0) + shape * std::log(shape / spread) - std::lgamma(shape)
        + (2.0 * shape - 1.0) * std::log(x) - shape * x * x / spread;
    return std::exp(log_pdf);
}

double nakagami_q_average(double c, int shape, double spread)
{
    if (shape < 1 || !(spread > 0.0) || !(c >= 0.0))
        throw std::invalid_argument("nakagami_q_average: need integer shape >= 1, spread > 0, c >= 0");
    if (c == 0.0)
        return 0.5;
    const double m = shape;
    const double denom = 2.0 * m + c * spread;
    const double mu = std::sqrt(c * spread / denom);
    const double one_minus_mu = (2.0 * m / denom) / (1.0 + mu);
    const double log_low = std::log(0.5 * one_minus_mu);
    const double log_high = std::log(0.5 * (1.0 + mu));

    // ((1-mu)/2)^m sum_k C(m-1+k, k) ((1+mu)/2)^k, summed in the log domain.
    std::vector<double> logs(static_cast<std::size_t>(shape));
    const double lg_m = std::lgamma(m);
    for (int k = 0; k < shape; ++k)
        logs[k] = m * log_low + std::lgamma(m + k) - std::lgamma(k + 1.0) - lg_m + k * log_high;
    return std::exp(log_sum_exp(logs));
}

double asep_hqam_closed(double gamma_bar, const NakagamiFit& fit, const HqamSepModel& model)
{
    if (!(gamma_bar >= 0.0))
        throw std::invalid_argument("asep_hqam_closed: average SNR must be non-negative");
    const double m = fit.shape_rounded;
    const double big_m = model.order;
    const double b = model.external;
    const double exp_term = std::exp(-m * std::log1p(model.geometry.exp_scale * gamma_bar * fit.spread / m));
    const double c = model.geometry.arg_scale * model.geometry.arg_scale * gamma_bar;
    return (2.0 * big_m - b) / (2.0 * big_m) * exp_term
        + b / big_m * nakagami_q_average(c, fit.shape_rounded, fit.spread);
}

double asep_quadrature(double gamma_bar, const std::function<double(double)>& conditional_sep,
                       const NakagamiFit& fit, bool rounded_shape, QuadratureReport* report)
{
    if (!(gamma_bar >= 0.0))
        throw std::invalid_argument("asep_quadrature: average SNR must be non-negative");
    const double m = rounded_shape ? fit.shape_rounded : fit.shape;
    const double omega = fit.spread;
    if (!(m > 0.0) || !(omega > 0.0))
        throw std::invalid_argument("asep_quadrature: invalid fitted density");

    // y = |h|^2 ~ Gamma(m, omega/m). Substituting y = omega e^t turns the
    // density into exp(log_norm + m log y - m y / omega) dt, smooth for every
    // m > 0, and keeps sqrt(y) terms of the conditional SEP smooth as well.
    const double log_norm = m * std::log(m / omega) - std::lgamma(m);
    auto checked_sep = [&](double y) {
        const double p = conditional_sep(y * gamma_bar);
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("asep_quadrature: conditional SEP outside [0, 1]");
        return p;
    };
    auto log_weight = [&](double t) {
        const double y = omega * std::exp(t);
        return log_norm + m * std::log(y) - m * y / omega;
    };
    auto integrand = [&](double t) {
        const double p = checked_sep(omega * std::exp(t));
        return p == 0.0 ? 0.0 : p * std::exp(log_weight(t));
    };

    // Locate where the mass sits on a coarse grid in t.
    constexpr int grid = 8192;
    constexpr double t_lo = -60.0;
    constexpr double t_hi = 8.0;
    const double dt = (t_hi - t_lo) / (grid - 1);
    std::vector<double> sep_at(grid);
    std::vector<double> log_mass(grid);
    double best = -std::numeric_limits<double>::infinity();
    int best_at = 0;
    for (int i = 0; i < grid; ++i) {
        const double t = t_lo + i * dt;
        const double p = checked_sep(omega * std::exp(t));
        sep_at[i] = p;
        log_mass[i] = p > 0.0 ? std::log(p) + log_weight(t) : -std::numeric_limits<double>::infinity();
        if (log_mass[i] > best) {
            best = log_mass[i];
            best_at = i;
        }
    }
    if (!std::isfinite(best))
        return 0.0;

    // Keep everything within `depth` nats of the peak.
    constexpr double depth = 80.0;
    int first = best_at;
    while (first > 0 && log_mass[first - 1] >= best - depth)
        --first;
    int last = best_at;
    while (last < grid - 1 && log_mass[last + 1] >= best - depth)
        ++last;
    first = std::max(0, first - 1);
    last = std::min(grid - 1, last + 1);
    const double t_first = t_lo + first * dt;
    const double t_last = t_lo + last * dt;

    using boost::math::quadrature::gauss_kronrod;
    // Each piece spans at most a quarter of the peak width (about 1/sqrt(m) in t).
    const int pieces = std::max(24, static_cast<int>(std::ceil((t_last - t_first) * std::sqrt(m) * 4.0)));
    double total = 0.0;
    double error = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const double a = t_first + (t_last - t_first) * k / pieces;
        const double b = t_first + (t_last - t_first) * (k + 1) / pieces;
        // Single GK61 panel; its error comes back in the [-1, 1] variable.
        double piece_error = 0.0;
        total += gauss_kronrod<double, 61>::integrate(integrand, a, b, 0, 0.0, &piece_error);
        error += piece_error * 0.5 * (b - a);
    }

    // Grid cells outside the window. The SEP is monotone in y and the weight
    // is unimodal in t, so each cell lies between the products of the smaller
    // and of the larger end values.
    auto add_cell = [&](int i) {
        const double t = t_lo + i * dt;
        const double w0 = log_weight(t);
        const double w1 = log_weight(t + dt);
        const double upper = std::max(sep_at[i], sep_at[i + 1]) * std::exp(std::max(w0, w1)) * dt;
        const double lower = std::min(sep_at[i], sep_at[i + 1]) * std::exp(std::min(w0, w1)) * dt;
        total += 0.5 * (upper + lower);
        error += 0.5 * (upper - lower);
    };
    for (int i = 0; i < first; ++i)
        add_cell(i);
    for (int i = last; i < grid - 1; ++i)
        add_cell(i);

    // Below the grid, the density mass times the mean of the end SEP values
    // is off by at most half their spread. Above it, the SEP is bounded by its
    // value at the grid end.
    const double y_lo = omega * std::exp(t_lo);
    const double head_mass = boost::math::gamma_p(m, m * y_lo / omega, quiet_policy());
    const double sep_0 = checked_sep(0.0);
    total += head_mass * 0.5 * (sep_0 + sep_at.front());
    error += head_mass * 0.5 * std::abs(sep_0 - sep_at.front());
    error += boost::math::gamma_q(m, m * std::exp(t_hi), quiet_policy()) * sep_at.back();

    if (!(error <= 1e-10 * std::abs(total)) && error > std::numeric_limits<double>::min()) {
        std::ostringstream msg;
        msg << "asep_quadrature did not converge: value " << total << ", error estimate " << error
            << ", gamma_bar " << gamma_bar << ", shape " << m << ", spread " << omega;
        throw NumericalError(msg.str());
    }
    if (report)
        *report = {error, pieces + 1, omega * std::exp(t_lo + best_at * dt)};
    return total;
}

double conditioned_ee(double asep, int order, const PowerModel& pm)
{
    if (!(asep >= 0.0 && asep <= 1.0))
        throw std::invalid_argument("conditioned_ee: ASEP must lie in [0, 1]");
    pm.validate();
    if (asep > pm.asep_threshold)
        return 0.0;
    return (1.0 - asep) * pm.bandwidth_hz * std::log2(static_cast<double>(order)) / pm.consumption();
}

} // namespace hqamris
