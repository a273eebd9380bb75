#pragma once

#include <cstdint>
#include <vector>

#include "hqamris/analysis.hpp"
#include "hqamris/channel.hpp"
#include "hqamris/constellation.hpp"
#include "hqamris/detector.hpp"

namespace hqamris {

/// Trials per independent random stream. Results never depend on how chunks
/// are spread over workers.
inline constexpr std::uint64_t chunk_trials = 1u << 16;

/// Stream for one chunk, derived from (master seed, chunk index) only.
Rng chunk_stream(std::uint64_t seed, std::uint64_t chunk);

/// Mixes a master seed with a label (grid value, scheme, ...) into a new seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label);

struct SerEstimate {
    std::uint64_t errors = 0;
    std::uint64_t trials = 0;

    double ser() const;
    /// sqrt(ser (1 - ser) / trials).
    double std_error() const;
    /// Fewer than 10 observed errors.
    bool low_confidence() const { return errors < 10; }
};

enum class DetectorKind { proposed, mld, qam_slicer };

const char* to_string(DetectorKind kind);

/// Instrumentation gathered while detecting.
struct DetectionCounters {
    std::uint64_t main_path = 0;
    std::uint64_t fallback = 0;
    std::uint64_t distance_ops = 0;
    std::uint64_t fallback_mismatches = 0;  // fallback decisions that differ from MLD
    int max_candidates = 0;
    int max_main_ops = 0;

    void merge(const DetectionCounters& other);
    double mean_distance_ops() const;
};

struct AwgnOptions {
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    int workers = 1;
};

/// Uniform symbols through AWGN with per-component variance 1 / (2 gamma_r).
/// Counters are filled for the proposed detector only.
SerEstimate simulate_ser_awgn(const Constellation& c, DetectorKind kind, double gamma_r, const AwgnOptions& opt,
                              DetectionCounters* counters = nullptr);

struct RisRun {
    SerEstimate estimate;
    std::uint64_t zero_gain_resamples = 0;
};

/// End-to-end RIS link: y = sqrt(P_t G l_p) h s + w, then channel inversion
/// and detection. HQAM uses the proposed detector, QAM the per-axis slicer.
RisRun simulate_asep_ris(const Constellation& c, const LinkBudget& lb, const ChannelParams& cp,
                         const AwgnOptions& opt);

/// Received sample y = a h s + w. Kept in extended precision: in double the
/// cancellation between a h s and w costs up to hundreds of ulps after
/// inversion at low SNR.
using sample_ext = std::complex<long double>;
sample_ext receive(cplx s, double amplitude, cplx h, cplx w);

/// y / (a h), rounded once to double. Equals s + w / (a h) to 1 ulp.
cplx invert_channel(sample_ext y, double amplitude, cplx h);

struct SweepSpec {
    Scheme scheme = Scheme::hqam;
    int order = 64;
    int phase_bits = 1;
    double shape = 3.0;
    double spread = 1.0;
    std::vector<int> elements;       // N grid
    std::vector<double> gamma_db;    // received-SNR grid, detection sweeps
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    int workers = 1;
    bool simulate = true;

    void validate_elements() const;
    void validate_gamma() const;
};

struct CurvePoint {
    int elements = 0;
    double gamma_bar = 0.0;
    NakagamiFit fit;
    double asep_closed = 0.0;      // NaN for QAM, which has no closed form here
    double asep_quadrature = 0.0;
    bool simulated = false;
    RisRun sim;
    double ee_closed = 0.0;
    double ee_sim = 0.0;
};

/// ASEP and conditioned energy efficiency along an N grid, rows in grid order.
std::vector<CurvePoint> run_sweep(const SweepSpec& spec, const LinkBudget& lb, const PowerModel& pm);

struct DetectionPoint {
    double gamma_db = 0.0;
    SerEstimate proposed;
    SerEstimate mld;
    DetectionCounters counters;
};

/// Proposed detector against MLD on identical noise draws, along a gamma grid.
std::vector<DetectionPoint> run_detection_sweep(const SweepSpec& spec);

} // namespace hqamris
