#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hqamris/constellation.hpp"

namespace hqamris {

/// Small fixed-capacity list of symbol indices. The d_min box around any
/// point meets at most 5 columns and 2 symbols per column.
struct CandidateList {
    static constexpr int capacity = 16;
    std::array<int, capacity> index{};
    int size = 0;

    void push(int i) { index[static_cast<std::size_t>(size++)] = i; }
    bool empty() const { return size == 0; }
    const int* begin() const { return index.data(); }
    const int* end() const { return index.data() + size; }
};

/// Lookup structures of the constant-time HQAM detector.
///
/// Column i holds the symbols whose real part is column_x[i], sorted by
/// imaginary part. Both the column abscissae and the in-column ordinates are
/// equispaced, so a box query reduces to two linear interpolations.
struct DetectorIndex {
    struct Entry {
        int symbol;
        double im;
    };

    std::vector<cplx> symbols;
    std::vector<double> column_x;                 // S_x, ascending
    double x_first = 0.0;
    double col_step = 0.0;                        // d_min / 2
    std::vector<std::vector<Entry>> columns;      // A_{x_i}
    double col_y_step = 0.0;                      // measured; sqrt(3) d_min for this lattice
    std::array<std::vector<int>, 4> quadrant;     // Q_1..Q_4, external symbols only
    double radius = 0.0;                          // R_m = d_min
    int external_count = 0;
};

/// Work done by one detect() call.
struct DetectStats {
    int candidates = 0;
    int distance_ops = 0;
    bool fallback = false;
};

/// Rays per quadrant used to collect the fallback arrays.
inline constexpr int fallback_rays = 4096;

DetectorIndex build_detector(const Constellation& c);

/// Symbols inside [x_r - R_m, x_r + R_m] x [y_r - R_m, y_r + R_m], found by
/// interpolation only.
CandidateList candidate_set(const DetectorIndex& idx, cplx r);

/// Quadrant 0..3 of r: x >= 0 & y >= 0 is 0, then counterclockwise.
int quadrant_of(cplx r);

/// Nearest candidate, or nearest fallback symbol of r's quadrant when the box
/// is empty. Ties go to the lowest symbol index.
int detect(const DetectorIndex& idx, cplx r, DetectStats* stats = nullptr);

/// Exhaustive nearest-symbol search, lowest index on ties.
int mld_detect(const Constellation& c, cplx r);
int mld_detect(std::span<const cplx> symbols, cplx r);

/// Per-axis decision for square QAM built by build_qam(); equals mld_detect
/// off the decision boundaries.
int qam_slice(const Constellation& c, cplx r);

} // namespace hqamris
