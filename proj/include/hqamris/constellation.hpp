#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace hqamris {

using cplx = std::complex<double>;

enum class Scheme { hqam, qam };

const char* to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// Unit-energy, zero-mean symbol set with its lattice geometry.
///
/// Instances are only produced by build_hqam() / build_qam() and are
/// immutable afterwards, so they can be shared freely between threads.
class Constellation {
public:
    Scheme scheme() const { return scheme_; }
    int order() const { return static_cast<int>(symbols_.size()); }
    std::span<const cplx> symbols() const { return symbols_; }
    const cplx& symbol(int index) const { return symbols_[static_cast<std::size_t>(index)]; }

    /// Nearest-neighbour distance measured on the normalized symbols.
    double min_distance() const { return min_distance_; }

    /// Indices of the external symbols (ascending); size() == external_count().
    const std::vector<int>& external() const { return external_; }
    int external_count() const { return static_cast<int>(external_.size()); }
    bool is_external(int index) const;

    /// Average symbol energy. 1 up to rounding.
    double energy() const;

private:
    Constellation(Scheme scheme, std::vector<cplx> symbols, int full_neighbourhood);

    friend Constellation build_hqam(int order);
    friend Constellation build_qam(int order);

    Scheme scheme_;
    std::vector<cplx> symbols_;
    double min_distance_ = 0.0;
    std::vector<int> external_;
};

/// Lowest-energy subset of the triangular lattice: lattice points sorted by
/// norm, ties broken by angle in [0, 2pi), then translated to zero centroid
/// and scaled to unit energy. Supported orders: 4, 16, 64, 256, 1024.
Constellation build_hqam(int order);

/// Square sqrt(M) x sqrt(M) grid, index = row * sqrt(M) + column with rows
/// running along the imaginary axis. Supported orders: 4, 16, 64, 256, 1024.
Constellation build_qam(int order);

Constellation build_constellation(Scheme scheme, int order);

/// sqrt(12 E_s / (7M - 4)). For the regular HQAM family this evaluates to
/// exactly half of the nearest-neighbour distance.
double dmin_formula(int order, double energy);

/// Circle-approximation parameter k_c, tabulated for M = 16, 64, 256, 1024.
double kc_lookup(int order);

/// Symbols with fewer than `full_neighbourhood` neighbours at distance d_min
/// (6 for the hexagonal lattice, 4 for the square grid).
std::vector<int> external_symbols(const Constellation& c);

/// Empirical minimum pairwise distance, O(M^2).
double pairwise_min_distance(std::span<const cplx> symbols);

} // namespace hqamris
