#pragma once

#include <functional>
#include <span>

#include "hqamris/channel.hpp"
#include "hqamris/constellation.hpp"

namespace hqamris {

/// Nakagami approximation of |h| obtained by matching E[|h|^2] and E[|h|^4].
struct NakagamiFit {
    double i1 = 0.0;        // E[|h|^2]
    double i2 = 0.0;        // E[|h|^4]
    double shape = 0.0;     // m_t = I1^2 / (I2 - I1^2)
    double spread = 0.0;    // Omega_t = I1
    int shape_rounded = 1;  // round-half-away-from-zero of m_t, at least 1
};

/// Network power model for the conditioned energy efficiency.
struct PowerModel {
    double tx_power_w = 1e-3;
    double controller_power_w = 50e-3;
    double pin_power_w = 1e-3;
    int phase_bits = 1;
    int elements = 1;
    double bandwidth_hz = 1.0;
    double asep_threshold = 1e-5;

    /// P_t + P_ctr + q N P_PIN.
    double consumption() const;
    void validate() const;
};

/// Constants of the circle-approximation SEP for one HQAM order.
struct HqamGeometry {
    double kc = 1.0;
    double arg_scale = 0.0;  // A, scales sqrt(gamma) inside Q(.)
    double exp_scale = 0.0;  // B, scales gamma inside exp(.)
};

HqamGeometry hqam_geometry(double min_distance, double kc, double energy = 1.0);

/// Everything the HQAM SEP approximation needs: M, b and the geometry.
struct HqamSepModel {
    int order = 0;
    int external = 0;
    HqamGeometry geometry;
};

/// Model from a constructed HQAM constellation; k_c from the table.
HqamSepModel hqam_sep_model(const Constellation& c);
HqamSepModel hqam_sep_model(const Constellation& c, double kc);

/// Gaussian tail probability, via erfc.
double q_function(double x);

/// Circle-approximation SEP of M-HQAM at received SNR gamma_r.
double sep_awgn_hqam(double gamma_r, const HqamSepModel& model);

/// Exact SEP of square M-QAM with unit symbol energy.
double sep_awgn_qam(double gamma_r, int order);

/// E[|h|^2] of the cascade channel.
double moment_I1(const ChannelParams& p);

/// E[|h|^4] of the cascade channel.
double moment_I2(const ChannelParams& p);

/// E[h^(a) h^(b) ...] where each position is h (sign +1) or conj(h) (sign -1).
/// Expanded over all coincidence patterns of the element indices.
double cascade_moment(const ChannelParams& p, std::span<const int> signs);

NakagamiFit fit_nakagami(double i1, double i2);
NakagamiFit fit_cascade(const ChannelParams& p);

/// Density of a Nakagami(shape, spread) amplitude at x >= 0.
double nakagami_pdf(double x, double shape, double spread);

/// E[Q(x sqrt(c))] for x ~ Nakagami(m, spread), integer m >= 1.
double nakagami_q_average(double c, int shape, double spread);

/// Closed-form ASEP of M-HQAM over the fitted Nakagami gain (rounded shape).
double asep_hqam_closed(double gamma_bar, const NakagamiFit& fit, const HqamSepModel& model);

struct QuadratureReport {
    double error_estimate = 0.0;
    int pieces = 0;
    double peak = 0.0;  // location of the mass peak in |h|^2
};

/// Integral of conditional_sep(x^2 gamma_bar) f(x) dx over the fitted Nakagami
/// density, relative tolerance 1e-10. Uses the rounded shape unless
/// `rounded_shape` is false.
double asep_quadrature(double gamma_bar, const std::function<double(double)>& conditional_sep,
                       const NakagamiFit& fit, bool rounded_shape = true,
                       QuadratureReport* report = nullptr);

/// Throughput per watt, zero unless the ASEP meets the threshold.
double conditioned_ee(double asep, int order, const PowerModel& pm);

} // namespace hqamris
