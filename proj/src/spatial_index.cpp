#include "hypersticks/spatial_index.hpp"

#include <algorithm>
#include <cmath>

namespace hs {

namespace {

constexpr std::uint64_t kMaxSectors = std::uint64_t{1} << 39;

inline std::uint64_t sector_index(double theta, std::uint64_t n)
{
    return static_cast<std::uint64_t>(std::floor(theta * static_cast<double>(n) / kTwoPi));
}

}  // namespace

std::uint64_t CellGrid::sectors(std::uint64_t band)
{
    const double v = std::floor(kTwoPi * std::sinh(static_cast<double>(band) + 1.0));
    if (!(v < static_cast<double>(kMaxSectors))) return kMaxSectors;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(v));
}

std::uint64_t CellGrid::key_of(const HPoint& p)
{
    const auto b = static_cast<std::uint64_t>(p.rho);
    const std::uint64_t n = sectors(b);
    return key(b, std::min(n - 1, sector_index(p.theta, n)));
}

double CellGrid::area(std::uint64_t k)
{
    const double b = static_cast<double>(band_of(k));
    return (std::cosh(b + 1.0) - std::cosh(b)) * kTwoPi / static_cast<double>(sectors(band_of(k)));
}

void CellGrid::sector_range(const HPoint& p, double delta, std::uint64_t band, std::uint64_t& first,
                            std::uint64_t& count)
{
    const std::uint64_t n = sectors(band);
    first = 0;
    count = n;
    if (band == 0 || p.rho <= delta) return;
    const double ratio = std::sinh(0.5 * delta) / std::sqrt(std::sinh(p.rho) * std::sinh(static_cast<double>(band)));
    if (ratio >= 1.0) return;
    const double half = 2.0 * std::asin(ratio) * (1.0 + 1e-12) + 1e-15;
    if (half >= kPi) return;
    const double lo = p.theta - half, hi = p.theta + half;
    const double nf = static_cast<double>(n);
    const auto s0 = static_cast<std::int64_t>(std::floor(lo * nf / kTwoPi));
    const auto s1 = static_cast<std::int64_t>(std::floor(hi * nf / kTwoPi));
    const std::uint64_t c = static_cast<std::uint64_t>(s1 - s0 + 1);
    if (c >= n) return;
    const auto ni = static_cast<std::int64_t>(n);
    first = static_cast<std::uint64_t>(((s0 % ni) + ni) % ni);
    count = c;
}

std::vector<double> sample_offsets(double L, double h)
{
    const auto m = static_cast<std::size_t>(std::ceil(L / h));
    std::vector<double> t(m + 1);
    for (std::size_t k = 0; k <= m; ++k) t[k] = -0.5 * L + L * static_cast<double>(k) / static_cast<double>(m);
    return t;
}

StickIndex::StickIndex(const std::vector<Stick>& sticks, double spacing)
    : n_(sticks.size()), radius_(spacing * (1.0 + 1e-9) + 1e-9), stamp_(sticks.size(), 0)
{
    pt_begin_.reserve(n_ + 1);
    pt_begin_.push_back(0);
    for (const auto& s : sticks) {
        for (double t : sample_offsets(s.length, spacing)) pts_.push_back(point_on_stick(s, t));
        pt_begin_.push_back(static_cast<std::uint32_t>(pts_.size()));
    }
    entries_.reserve(pts_.size());
    for (std::uint32_t i = 0; i < n_; ++i)
        for (std::uint32_t k = pt_begin_[i]; k < pt_begin_[i + 1]; ++k)
            entries_.emplace_back(CellGrid::key_of(pts_[k]), i);
    std::sort(entries_.begin(), entries_.end());
    entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
    cells_.reserve(entries_.size());
    for (std::uint32_t a = 0; a < entries_.size();) {
        std::uint32_t b = a;
        while (b < entries_.size() && entries_[b].first == entries_[a].first) ++b;
        cells_.emplace(entries_[a].first, std::pair{a, b});
        a = b;
    }
}

void StickIndex::candidates(std::size_t i, std::vector<std::uint32_t>& out)
{
    out.clear();
    if (++epoch_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        epoch_ = 1;
    }
    // distinct cells first: neighbouring sample points mostly hit the same cells
    keys_.clear();
    for (std::uint32_t k = pt_begin_[i]; k < pt_begin_[i + 1]; ++k)
        CellGrid::for_each_near(pts_[k], radius_, [&](std::uint64_t key) { keys_.push_back(key); });
    std::sort(keys_.begin(), keys_.end());
    keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
    for (const std::uint64_t key : keys_) {
        const auto it = cells_.find(key);
        if (it == cells_.end()) continue;
        // entries within a cell are sorted by stick index
        auto first = entries_.begin() + it->second.first, last = entries_.begin() + it->second.second;
        first = std::upper_bound(first, last, std::pair{key, static_cast<std::uint32_t>(i)});
        for (; first != last; ++first) {
            const std::uint32_t j = first->second;
            if (stamp_[j] != epoch_) {
                stamp_[j] = epoch_;
                out.push_back(j);
            }
        }
    }
    std::sort(out.begin(), out.end());
}

}  // namespace hs
