#pragma once

#include <complex>
#include <random>

namespace hqamris {

/// Random stream used by every sampler. Streams are never shared: callers
/// pass the one they own.
using Rng = std::mt19937_64;

/// RIS cascade parameters.
struct ChannelParams {
    int elements = 1;      // N
    double shape = 3.0;    // Nakagami m of each hop
    double spread = 1.0;   // Nakagami Omega of each hop
    int phase_bits = 1;    // q, residual phase error uniform on [-pi/2^q, pi/2^q]

    void validate() const;
};

/// CN-RIS-BS link budget. Powers in watts, distances in meters.
struct LinkBudget {
    double tx_power_w = 1e-3;
    double gain = 1.0;               // G_t * G_r
    double c0_db = -30.0;            // reference-distance loss; l_p uses (10^(c0_db/10))^2
    double d0_m = 1.0;
    double d1_m = 20.0;
    double d2_m = 60.0;
    double path_loss_exponent = 2.5;
    double noise_power_w = 1e-17;    // -140 dBm

    void validate() const;
    bool operator==(const LinkBudget&) const = default;
};

/// Half-width pi / 2^q of the residual phase error.
double phase_error_bound(int phase_bits);

/// E[cos(phi)] for the residual phase error: 2^q sin(pi / 2^q) / pi.
double mean_phase_cosine(int phase_bits);

/// One Nakagami-m amplitude: sqrt of a Gamma(m, Omega/m) draw.
double sample_nakagami(double shape, double spread, Rng& rng);

/// Reusable sampler for h = sum_i |h1_i||h2_i| e^{j phi_i}.
/// Holds distribution objects, so keep one per stream.
class CascadeSampler {
public:
    explicit CascadeSampler(const ChannelParams& params);

    std::complex<double> operator()(Rng& rng);
    const ChannelParams& params() const { return params_; }

private:
    ChannelParams params_;
    std::gamma_distribution<double> power_;
    std::uniform_real_distribution<double> phase_;
};

std::complex<double> sample_cascade_gain(const ChannelParams& params, Rng& rng);

/// l_p = C0^2 (d0 / (d1 d2))^n as a power gain.
double path_loss(const LinkBudget& lb);

/// gamma_bar = P_t G l_p / sigma_n^2.
double average_snr(const LinkBudget& lb);

double db_to_linear(double db);
double linear_to_db(double value);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

} // namespace hqamris
