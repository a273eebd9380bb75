#include "hqamris/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hqamris {

namespace {

// Positions lo..hi (1-based, inclusive) of an equispaced array starting at
// `first` with spacing `step` whose values fall inside [low, high].
struct Span1 {
    int lo;
    int hi;
};

Span1 interpolate_range(double first, double step, int length, double low, double high)
{
    const double lo = std::ceil((low - first) / step + 1.0);
    const double hi = std::floor((high - first) / step + 1.0);
    const double clamped_lo = std::max(lo, 1.0);
    const double clamped_hi = std::min(hi, static_cast<double>(length));
    if (!(clamped_lo <= clamped_hi))
        return {1, 0};
    return {static_cast<int>(clamped_lo), static_cast<int>(clamped_hi)};
}

bool closer(double d, int i, double best_d, int best_i)
{
    return d < best_d || (d == best_d && i < best_i);
}

} // namespace

DetectorIndex build_detector(const Constellation& c)
{
    if (c.scheme() != Scheme::hqam)
        throw std::invalid_argument("build_detector: the interpolation detector needs an HQAM constellation");

    DetectorIndex idx;
    const double dmin = c.min_distance();
    const double tol = 1e-9 * dmin;
    idx.symbols.assign(c.symbols().begin(), c.symbols().end());
    idx.radius = dmin;
    idx.col_step = dmin / 2.0;
    idx.external_count = c.external_count();

    std::vector<int> order(idx.symbols.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return idx.symbols[a].real() < idx.symbols[b].real();
    });

    for (int s : order) {
        const double x = idx.symbols[s].real();
        if (idx.column_x.empty() || x - idx.column_x.back() > tol) {
            idx.column_x.push_back(x);
            idx.columns.emplace_back();
        }
        idx.columns.back().push_back({s, idx.symbols[s].imag()});
    }
    idx.x_first = idx.column_x.front();
    for (std::size_t i = 1; i < idx.column_x.size(); ++i) {
        if (std::abs(idx.column_x[i] - idx.column_x[i - 1] - idx.col_step) > tol)
            throw std::logic_error("build_detector: column abscissae are not equispaced by d_min/2");
    }

    for (auto& column : idx.columns) {
        std::sort(column.begin(), column.end(), [](const auto& a, const auto& b) { return a.im < b.im; });
        if (column.size() >= 2 && idx.col_y_step == 0.0)
            idx.col_y_step = column[1].im - column[0].im;
    }
    if (idx.col_y_step == 0.0)
        idx.col_y_step = std::numbers::sqrt3 * dmin;
    for (const auto& column : idx.columns) {
        for (std::size_t j = 1; j < column.size(); ++j) {
            if (std::abs(column[j].im - column[j - 1].im - idx.col_y_step) > tol)
                throw std::logic_error("build_detector: column ordinates are not equispaced");
        }
    }

    // Far-field winners along rays; each quadrant includes both boundary rays.
    const double far = 1e3 * dmin;
    for (int e = 0; e < 4; ++e) {
        auto& q = idx.quadrant[static_cast<std::size_t>(e)];
        for (int k = 0; k <= fallback_rays; ++k) {
            const double theta = std::numbers::pi / 2.0 * (e + static_cast<double>(k) / fallback_rays);
            q.push_back(mld_detect(c, std::polar(far, theta)));
        }
        std::sort(q.begin(), q.end());
        q.erase(std::unique(q.begin(), q.end()), q.end());
    }
    return idx;
}

CandidateList candidate_set(const DetectorIndex& idx, cplx r)
{
    CandidateList out;
    const double reach = idx.radius * (1.0 + 1e-9);
    const auto cols = interpolate_range(idx.x_first, idx.col_step, static_cast<int>(idx.columns.size()),
                                        r.real() - reach, r.real() + reach);
    for (int i = cols.lo; i <= cols.hi; ++i) {
        const auto& column = idx.columns[static_cast<std::size_t>(i - 1)];
        const auto rows = interpolate_range(column.front().im, idx.col_y_step, static_cast<int>(column.size()),
                                            r.imag() - reach, r.imag() + reach);
        for (int j = rows.lo; j <= rows.hi; ++j)
            out.push(column[static_cast<std::size_t>(j - 1)].symbol);
    }
    return out;
}

int quadrant_of(cplx r)
{
    if (r.imag() >= 0.0)
        return r.real() >= 0.0 ? 0 : 1;
    return r.real() < 0.0 ? 2 : 3;
}

int detect(const DetectorIndex& idx, cplx r, DetectStats* stats)
{
    const auto candidates = candidate_set(idx, r);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    int ops = 0;
    if (!candidates.empty()) {
        for (int s : candidates) {
            const double d = std::norm(r - idx.symbols[static_cast<std::size_t>(s)]);
            ++ops;
            if (closer(d, s, best_d, best)) {
                best_d = d;
                best = s;
            }
        }
    } else {
        for (int s : idx.quadrant[static_cast<std::size_t>(quadrant_of(r))]) {
            const double d = std::norm(r - idx.symbols[static_cast<std::size_t>(s)]);
            ++ops;
            if (closer(d, s, best_d, best)) {
                best_d = d;
                best = s;
            }
        }
    }
    if (stats)
        *stats = {candidates.size, ops, candidates.empty()};
    return best;
}

int mld_detect(std::span<const cplx> symbols, cplx r)
{
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const double d = std::norm(r - symbols[i]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

int mld_detect(const Constellation& c, cplx r)
{
    return mld_detect(c.symbols(), r);
}

int qam_slice(const Constellation& c, cplx r)
{
    if (c.scheme() != Scheme::qam)
        throw std::invalid_argument("qam_slice: constellation is not square QAM");
    const int side = static_cast<int>(std::lround(std::sqrt(c.order())));
    const double half = c.min_distance() / 2.0;
    auto level = [&](double v) {
        const double k = std::round((v / half + side - 1) / 2.0);
        return static_cast<int>(std::clamp(k, 0.0, side - 1.0));
    };
    return level(r.imag()) * side + level(r.real());
}

} // namespace hqamris
