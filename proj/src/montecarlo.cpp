#include "hqamris/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace hqamris {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Runs body(rng, count) once per chunk and returns the partial results in
// chunk order. Workers pull chunk indices from a shared counter.
template <typename Partial, typename Body>
std::vector<Partial> run_chunks(std::uint64_t trials, std::uint64_t seed, int workers, Body&& body)
{
    const std::uint64_t chunks = (trials + chunk_trials - 1) / chunk_trials;
    std::vector<Partial> parts(chunks);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (;;) {
            const std::uint64_t chunk = next.fetch_add(1);
            if (chunk >= chunks)
                return;
            const std::uint64_t count = std::min(chunk_trials, trials - chunk * chunk_trials);
            try {
                Rng rng = chunk_stream(seed, chunk);
                parts[chunk] = body(rng, count);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = chunks;
                return;
            }
        }
    };

    const int threads = static_cast<int>(std::min<std::uint64_t>(std::max(1, workers), chunks));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return parts;
}

struct AwgnPartial {
    SerEstimate estimate;
    DetectionCounters counters;
};

struct RisPartial {
    std::uint64_t errors = 0;
    std::uint64_t resamples = 0;
};

} // namespace

Rng chunk_stream(std::uint64_t seed, std::uint64_t chunk)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label)
{
    return splitmix64(seed ^ splitmix64(label));
}

double SerEstimate::ser() const
{
    return trials == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(trials);
}

double SerEstimate::std_error() const
{
    if (trials == 0)
        return 0.0;
    const double p = ser();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

const char* to_string(DetectorKind kind)
{
    switch (kind) {
    case DetectorKind::proposed: return "proposed";
    case DetectorKind::mld: return "mld";
    case DetectorKind::qam_slicer: return "qam_slicer";
    }
    return "?";
}

void DetectionCounters::merge(const DetectionCounters& other)
{
    main_path += other.main_path;
    fallback += other.fallback;
    distance_ops += other.distance_ops;
    fallback_mismatches += other.fallback_mismatches;
    max_candidates = std::max(max_candidates, other.max_candidates);
    max_main_ops = std::max(max_main_ops, other.max_main_ops);
}

double DetectionCounters::mean_distance_ops() const
{
    const auto calls = main_path + fallback;
    return calls == 0 ? 0.0 : static_cast<double>(distance_ops) / static_cast<double>(calls);
}

SerEstimate simulate_ser_awgn(const Constellation& c, DetectorKind kind, double gamma_r, const AwgnOptions& opt,
                              DetectionCounters* counters)
{
    if (!(gamma_r >= 0.0))
        throw std::invalid_argument("simulate_ser_awgn: received SNR must be non-negative");
    if (opt.trials == 0)
        throw std::invalid_argument("simulate_ser_awgn: trials must be positive");
    if (kind == DetectorKind::qam_slicer && c.scheme() != Scheme::qam)
        throw std::invalid_argument("simulate_ser_awgn: the slicer needs square QAM");

    DetectorIndex index;
    if (kind == DetectorKind::proposed)
        index = build_detector(c);
    // At zero SNR the noise swamps the symbol; a huge finite deviation keeps
    // every detector on its far-field path.
    const double sd = gamma_r > 0.0 ? std::sqrt(0.5 / gamma_r) : 1e100;
    const bool track = counters != nullptr && kind == DetectorKind::proposed;

    auto parts = run_chunks<AwgnPartial>(opt.trials, opt.seed, opt.workers, [&](Rng& rng, std::uint64_t count) {
        std::uniform_int_distribution<int> pick(0, c.order() - 1);
        std::normal_distribution<double> noise(0.0, sd);
        AwgnPartial part;
        part.estimate.trials = count;
        for (std::uint64_t t = 0; t < count; ++t) {
            const int sent = pick(rng);
            const double nr = noise(rng);
            const double ni = noise(rng);
            const cplx r = c.symbol(sent) + cplx(nr, ni);
            int got = 0;
            switch (kind) {
            case DetectorKind::proposed: {
                DetectStats stats;
                got = detect(index, r, &stats);
                if (track) {
                    auto& k = part.counters;
                    k.distance_ops += static_cast<std::uint64_t>(stats.distance_ops);
                    if (stats.fallback) {
                        ++k.fallback;
                        if (got != mld_detect(c, r))
                            ++k.fallback_mismatches;
                    } else {
                        ++k.main_path;
                        k.max_candidates = std::max(k.max_candidates, stats.candidates);
                        k.max_main_ops = std::max(k.max_main_ops, stats.distance_ops);
                    }
                }
                break;
            }
            case DetectorKind::mld: got = mld_detect(c, r); break;
            case DetectorKind::qam_slicer: got = qam_slice(c, r); break;
            }
            if (got != sent)
                ++part.estimate.errors;
        }
        return part;
    });

    SerEstimate total;
    for (const auto& p : parts) {
        total.errors += p.estimate.errors;
        total.trials += p.estimate.trials;
        if (counters)
            counters->merge(p.counters);
    }
    return total;
}

sample_ext receive(cplx s, double amplitude, cplx h, cplx w)
{
    return sample_ext(amplitude) * sample_ext(h) * sample_ext(s) + sample_ext(w);
}

cplx invert_channel(sample_ext y, double amplitude, cplx h)
{
    const sample_ext r = y / (sample_ext(amplitude) * sample_ext(h));
    return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

RisRun simulate_asep_ris(const Constellation& c, const LinkBudget& lb, const ChannelParams& cp, const AwgnOptions& opt)
{
    lb.validate();
    cp.validate();
    if (opt.trials == 0)
        throw std::invalid_argument("simulate_asep_ris: trials must be positive");

    DetectorIndex index;
    if (c.scheme() == Scheme::hqam)
        index = build_detector(c);
    const double amplitude = std::sqrt(lb.tx_power_w * lb.gain * path_loss(lb));
    const double sd = std::sqrt(lb.noise_power_w / 2.0);

    auto parts = run_chunks<RisPartial>(opt.trials, opt.seed, opt.workers, [&](Rng& rng, std::uint64_t count) {
        CascadeSampler cascade(cp);
        std::uniform_int_distribution<int> pick(0, c.order() - 1);
        std::normal_distribution<double> noise(0.0, sd);
        RisPartial part;
        for (std::uint64_t t = 0; t < count; ++t) {
            cplx h = cascade(rng);
            while (h == cplx(0.0, 0.0)) {
                ++part.resamples;
                h = cascade(rng);
            }
            const int sent = pick(rng);
            const double nr = noise(rng);
            const double ni = noise(rng);
            const cplx r = invert_channel(receive(c.symbol(sent), amplitude, h, cplx(nr, ni)), amplitude, h);
            const int got = c.scheme() == Scheme::hqam ? detect(index, r) : qam_slice(c, r);
            if (got != sent)
                ++part.errors;
        }
        return part;
    });

    RisRun run;
    run.estimate.trials = opt.trials;
    for (const auto& p : parts) {
        run.estimate.errors += p.errors;
        run.zero_gain_resamples += p.resamples;
    }
    return run;
}

void SweepSpec::validate_elements() const
{
    if (elements.empty())
        throw std::invalid_argument("sweep: empty N grid");
    if (!std::is_sorted(elements.begin(), elements.end())
        || std::adjacent_find(elements.begin(), elements.end()) != elements.end())
        throw std::invalid_argument("sweep: N grid must be strictly ascending");
    if (elements.front() < 1)
        throw std::invalid_argument("sweep: N grid values must be >= 1");
    if (simulate && trials < 1000)
        throw std::invalid_argument("sweep: at least 1000 trials per point");
}

void SweepSpec::validate_gamma() const
{
    if (gamma_db.empty())
        throw std::invalid_argument("sweep: empty SNR grid");
    for (std::size_t i = 1; i < gamma_db.size(); ++i)
        if (!(gamma_db[i] > gamma_db[i - 1]))
            throw std::invalid_argument("sweep: SNR grid must be strictly ascending");
    if (trials < 1000)
        throw std::invalid_argument("sweep: at least 1000 trials per point");
}

std::vector<CurvePoint> run_sweep(const SweepSpec& spec, const LinkBudget& lb, const PowerModel& pm)
{
    spec.validate_elements();
    const auto c = build_constellation(spec.scheme, spec.order);
    const double gamma_bar = average_snr(lb);

    std::vector<CurvePoint> rows;
    rows.reserve(spec.elements.size());
    for (int n : spec.elements) {
        CurvePoint row;
        row.elements = n;
        row.gamma_bar = gamma_bar;
        const ChannelParams cp{n, spec.shape, spec.spread, spec.phase_bits};
        row.fit = fit_cascade(cp);
        if (spec.scheme == Scheme::hqam) {
            const auto model = hqam_sep_model(c);
            row.asep_closed = asep_hqam_closed(gamma_bar, row.fit, model);
            row.asep_quadrature = asep_quadrature(
                gamma_bar, [&](double g) { return sep_awgn_hqam(g, model); }, row.fit);
        } else {
            row.asep_closed = std::numeric_limits<double>::quiet_NaN();
            row.asep_quadrature = asep_quadrature(
                gamma_bar, [&](double g) { return sep_awgn_qam(g, spec.order); }, row.fit);
        }

        PowerModel point_pm = pm;
        point_pm.elements = n;
        point_pm.phase_bits = spec.phase_bits;
        const double analytic = spec.scheme == Scheme::hqam ? row.asep_closed : row.asep_quadrature;
        row.ee_closed = conditioned_ee(analytic, spec.order, point_pm);

        if (spec.simulate) {
            row.simulated = true;
            row.sim = simulate_asep_ris(c, lb, cp,
                                        {spec.trials, derive_seed(spec.seed, static_cast<std::uint64_t>(n)),
                                         spec.workers});
            row.ee_sim = conditioned_ee(row.sim.estimate.ser(), spec.order, point_pm);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<DetectionPoint> run_detection_sweep(const SweepSpec& spec)
{
    spec.validate_gamma();
    const auto c = build_constellation(spec.scheme, spec.order);
    if (c.scheme() != Scheme::hqam)
        throw std::invalid_argument("detection sweep: the proposed detector needs HQAM");

    std::vector<DetectionPoint> rows;
    for (double db : spec.gamma_db) {
        DetectionPoint row;
        row.gamma_db = db;
        const double gamma = db_to_linear(db);
        const AwgnOptions opt{spec.trials, derive_seed(spec.seed, std::bit_cast<std::uint64_t>(db)), spec.workers};
        row.proposed = simulate_ser_awgn(c, DetectorKind::proposed, gamma, opt, &row.counters);
        row.mld = simulate_ser_awgn(c, DetectorKind::mld, gamma, opt);
        rows.push_back(row);
    }
    return rows;
}

} // namespace hqamris
