#include "hqamris/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hqamris {

void ChannelParams::validate() const
{
    if (elements < 1)
        throw std::invalid_argument("channel: number of elements must be >= 1");
    if (!(shape >= 0.5))
        throw std::invalid_argument("channel: Nakagami shape m must be >= 0.5");
    if (!(spread > 0.0))
        throw std::invalid_argument("channel: Nakagami spread must be > 0");
    if (phase_bits < 1)
        throw std::invalid_argument("channel: phase quantization bits must be >= 1");
}

void LinkBudget::validate() const
{
    if (!(tx_power_w > 0.0) || !(gain > 0.0) || !(d0_m > 0.0) || !(path_loss_exponent > 0.0)
        || !(noise_power_w > 0.0) || !std::isfinite(c0_db))
        throw std::invalid_argument("link budget: powers, gain, distances and exponent must be positive");
    if (!(d1_m >= d0_m) || !(d2_m >= d0_m))
        throw std::invalid_argument("link budget: d1 and d2 must not be shorter than d0");
}

namespace {

const ChannelParams& validated(const ChannelParams& params)
{
    params.validate();
    return params;
}

} // namespace

double phase_error_bound(int phase_bits)
{
    return std::numbers::pi / std::ldexp(1.0, phase_bits);
}

double mean_phase_cosine(int phase_bits)
{
    const double a = phase_error_bound(phase_bits);
    return std::sin(a) / a;
}

double sample_nakagami(double shape, double spread, Rng& rng)
{
    if (!(shape >= 0.5) || !(spread > 0.0))
        throw std::invalid_argument("sample_nakagami: requires m >= 0.5 and Omega > 0");
    std::gamma_distribution<double> power(shape, spread / shape);
    return std::sqrt(power(rng));
}

CascadeSampler::CascadeSampler(const ChannelParams& params)
    : params_(validated(params)),
      power_(params.shape, params.spread / params.shape),
      phase_(-phase_error_bound(params.phase_bits), phase_error_bound(params.phase_bits))
{
}

std::complex<double> CascadeSampler::operator()(Rng& rng)
{
    double re = 0.0;
    double im = 0.0;
    for (int i = 0; i < params_.elements; ++i) {
        const double g1 = power_(rng);
        const double g2 = power_(rng);
        const double amplitude = std::sqrt(g1 * g2);
        const double phi = phase_(rng);
        re += amplitude * std::cos(phi);
        im += amplitude * std::sin(phi);
    }
    return {re, im};
}

std::complex<double> sample_cascade_gain(const ChannelParams& params, Rng& rng)
{
    CascadeSampler sampler(params);
    return sampler(rng);
}

double path_loss(const LinkBudget& lb)
{
    lb.validate();
    const double c0 = db_to_linear(lb.c0_db);
    return c0 * c0 * std::pow(lb.d0_m / (lb.d1_m * lb.d2_m), lb.path_loss_exponent);
}

double average_snr(const LinkBudget& lb)
{
    return lb.tx_power_w * lb.gain * path_loss(lb) / lb.noise_power_w;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double value) { return 10.0 * std::log10(value); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

} // namespace hqamris
