// Batched pair classification for stick intersection, scalar and AVX2.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hypersticks/hypgeo.hpp"

namespace hs::kern {

// Hyperboloid lifts of both endpoints and the unit normal of the supporting
// geodesic, one array per component. nn is the 1-norm of the normal.
struct StickGeom {
    std::vector<double> at, ax, ay, bt, bx, by, nt, nx, ny, nn;

    std::size_t size() const { return at.size(); }
    void clear();
    void reserve(std::size_t n);
    void push(const Stick& s);
    void assign(const std::vector<Stick>& sticks);
};

enum PairClass : std::uint8_t { kApart = 0, kMeet = 1, kUnsure = 2 };

// Rounding-error multiplier for the Minkowski products, per unit of |n|_1 * t.
inline constexpr double kErrScale = 6e-14;

// Classify pairs (i, js[k]) into out[k]. kApart / kMeet are certain given the error
// bound; kUnsure pairs need the frame test. tol = sinh(eps).
using ClassifyFn = void (*)(const StickGeom& g, std::size_t i, const std::uint32_t* js,
                            std::size_t n, double tol, std::uint8_t* out);

void classify_scalar(const StickGeom& g, std::size_t i, const std::uint32_t* js, std::size_t n,
                     double tol, std::uint8_t* out);
void classify_avx2(const StickGeom& g, std::size_t i, const std::uint32_t* js, std::size_t n,
                   double tol, std::uint8_t* out);

bool avx2_available();
// AVX2 when the CPU has it, unless HYPERSTICKS_SIMD=scalar.
ClassifyFn classify_best();
const char* classify_best_name();

}  // namespace hs::kern
