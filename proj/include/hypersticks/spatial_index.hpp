// Annulus-sector cells and a sample-point index for stick intersection candidates.
#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hypersticks/hypgeo.hpp"

namespace hs {

// Band b = floor(rho) is split into max(1, floor(2 pi sinh(b + 1))) equal sectors,
// so cells have diameter of order 1 at every radius.
struct CellGrid {
    static std::uint64_t sectors(std::uint64_t band);
    static std::uint64_t key(std::uint64_t band, std::uint64_t sector) { return band << 40 | sector; }
    static std::uint64_t band_of(std::uint64_t key) { return key >> 40; }
    static std::uint64_t sector_of(std::uint64_t key) { return key & ((std::uint64_t{1} << 40) - 1); }
    static std::uint64_t key_of(const HPoint& p);
    // Area of a cell.
    static double area(std::uint64_t key);

    // Calls fn(key) for a superset of the cells meeting B(p, delta).
    template <class Fn>
    static void for_each_near(const HPoint& p, double delta, Fn&& fn);

private:
    static void sector_range(const HPoint& p, double delta, std::uint64_t band, std::uint64_t& first,
                             std::uint64_t& count);
};

template <class Fn>
void CellGrid::for_each_near(const HPoint& p, double delta, Fn&& fn)
{
    const double lo = p.rho - delta;
    const auto b0 = static_cast<std::uint64_t>(lo > 0 ? lo : 0.0);
    const auto b1 = static_cast<std::uint64_t>(p.rho + delta);
    for (std::uint64_t b = b0; b <= b1; ++b) {
        std::uint64_t first = 0, count = 0;
        sector_range(p, delta, b, first, count);
        const std::uint64_t n = sectors(b);
        for (std::uint64_t k = 0; k < count; ++k) {
            std::uint64_t s = first + k;
            if (s >= n) s -= n;
            fn(key(b, s));
        }
    }
}

// Offsets along a stick of length L at spacing at most h, ends included.
std::vector<double> sample_offsets(double L, double h);

// Every pair of intersecting sticks has sample points within distance `spacing` of
// each other; candidates() returns all sticks with a sample point in a cell
// meeting a ball of that radius around one of stick i's points.
class StickIndex {
public:
    explicit StickIndex(const std::vector<Stick>& sticks, double spacing = 1.0);

    std::size_t size() const { return n_; }
    // Candidate partners j > i, sorted ascending, without duplicates.
    void candidates(std::size_t i, std::vector<std::uint32_t>& out);

private:
    std::size_t n_ = 0;
    double radius_ = 0.0;
    std::vector<HPoint> pts_;
    std::vector<std::uint32_t> pt_begin_;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> entries_;
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> cells_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::uint64_t> keys_;
    std::uint32_t epoch_ = 0;
};

}  // namespace hs
