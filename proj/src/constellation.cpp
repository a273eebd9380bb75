#include "hqamris/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hqamris {

namespace {

bool supported_order(int order)
{
    return order == 4 || order == 16 || order == 64 || order == 256 || order == 1024;
}

int neighbour_count(std::span<const cplx> symbols, std::size_t i, double dmin)
{
    const double tol = 1e-9 * dmin;
    int count = 0;
    for (std::size_t j = 0; j < symbols.size(); ++j) {
        if (j != i && std::abs(std::abs(symbols[i] - symbols[j]) - dmin) <= tol)
            ++count;
    }
    return count;
}

void normalize(std::vector<cplx>& symbols)
{
    cplx centroid{0.0, 0.0};
    for (const auto& s : symbols)
        centroid += s;
    centroid /= static_cast<double>(symbols.size());

    double energy = 0.0;
    for (auto& s : symbols) {
        s -= centroid;
        energy += std::norm(s);
    }
    const double scale = 1.0 / std::sqrt(energy / static_cast<double>(symbols.size()));
    for (auto& s : symbols)
        s *= scale;
}

} // namespace

const char* to_string(Scheme scheme)
{
    return scheme == Scheme::hqam ? "HQAM" : "QAM";
}

Scheme scheme_from_string(const std::string& name)
{
    if (name == "HQAM" || name == "hqam")
        return Scheme::hqam;
    if (name == "QAM" || name == "qam")
        return Scheme::qam;
    throw std::invalid_argument("unknown modulation scheme '" + name + "'");
}

Constellation::Constellation(Scheme scheme, std::vector<cplx> symbols, int full_neighbourhood)
    : scheme_(scheme), symbols_(std::move(symbols))
{
    min_distance_ = pairwise_min_distance(symbols_);
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (neighbour_count(symbols_, i, min_distance_) < full_neighbourhood)
            external_.push_back(static_cast<int>(i));
    }
}

bool Constellation::is_external(int index) const
{
    return std::binary_search(external_.begin(), external_.end(), index);
}

double Constellation::energy() const
{
    double e = 0.0;
    for (const auto& s : symbols_)
        e += std::norm(s);
    return e / static_cast<double>(symbols_.size());
}

double pairwise_min_distance(std::span<const cplx> symbols)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < symbols.size(); ++i)
        for (std::size_t j = i + 1; j < symbols.size(); ++j)
            best = std::min(best, std::abs(symbols[i] - symbols[j]));
    return best;
}

Constellation build_hqam(int order)
{
    if (!supported_order(order))
        throw std::invalid_argument("unsupported constellation order " + std::to_string(order));

    // Lattice point a*(1,0) + b*(1/2, sqrt(3)/2); its squared norm is the
    // integer a^2 + ab + b^2, so shells are compared exactly.
    struct LatticePoint {
        long long norm;
        double angle;
        cplx position;
    };
    const int reach = static_cast<int>(std::ceil(std::sqrt(order))) + 2;
    std::vector<LatticePoint> lattice;
    for (int b = -reach; b <= reach; ++b) {
        for (int a = -reach; a <= reach; ++a) {
            const double x = a + 0.5 * b;
            const double y = b * std::numbers::sqrt3 / 2.0;
            double angle = std::atan2(y, x);
            if (angle < 0.0)
                angle += 2.0 * std::numbers::pi;
            lattice.push_back({static_cast<long long>(a) * a + static_cast<long long>(a) * b
                                   + static_cast<long long>(b) * b,
                               angle, {x, y}});
        }
    }
    std::stable_sort(lattice.begin(), lattice.end(), [](const auto& l, const auto& r) {
        if (l.norm != r.norm)
            return l.norm < r.norm;
        return l.angle < r.angle;
    });

    std::vector<cplx> symbols;
    symbols.reserve(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i)
        symbols.push_back(lattice[static_cast<std::size_t>(i)].position);
    normalize(symbols);
    return Constellation(Scheme::hqam, std::move(symbols), 6);
}

Constellation build_qam(int order)
{
    if (!supported_order(order))
        throw std::invalid_argument("unsupported constellation order " + std::to_string(order)
                                    + " (square QAM needs a perfect square)");
    const int side = static_cast<int>(std::lround(std::sqrt(order)));
    const double scale = std::sqrt(3.0 / (2.0 * (order - 1)));

    std::vector<cplx> symbols;
    symbols.reserve(static_cast<std::size_t>(order));
    for (int row = 0; row < side; ++row)
        for (int col = 0; col < side; ++col)
            symbols.emplace_back((2 * col - side + 1) * scale, (2 * row - side + 1) * scale);
    return Constellation(Scheme::qam, std::move(symbols), 4);
}

Constellation build_constellation(Scheme scheme, int order)
{
    return scheme == Scheme::hqam ? build_hqam(order) : build_qam(order);
}

double dmin_formula(int order, double energy)
{
    if (order < 4 || !(energy > 0.0))
        throw std::invalid_argument("dmin_formula requires M >= 4 and E_s > 0");
    return std::sqrt(12.0 * energy / (7.0 * order - 4.0));
}

double kc_lookup(int order)
{
    switch (order) {
    case 16: return 0.8711505;
    case 64: return 0.5222431;
    case 256: return 0.3936315;
    case 1024: return 0.2982858;
    default: throw std::invalid_argument("k_c unavailable for M = " + std::to_string(order));
    }
}

std::vector<int> external_symbols(const Constellation& c)
{
    return c.external();
}

} // namespace hqamris
