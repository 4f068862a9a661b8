#include "hypersticks/kernels.hpp"

#include <immintrin.h>

namespace hs::kern {

bool avx2_available()
{
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

#if defined(__x86_64__) || defined(__i386__)

namespace {

__attribute__((target("avx2"))) inline __m256d side4(__m256d nt, __m256d nx, __m256d ny,
                                                     __m256d pt, __m256d px, __m256d py)
{
    const __m256d zero = _mm256_setzero_pd();
    __m256d s = _mm256_sub_pd(zero, _mm256_mul_pd(nt, pt));
    s = _mm256_add_pd(s, _mm256_mul_pd(nx, px));
    return _mm256_add_pd(s, _mm256_mul_pd(ny, py));
}

struct Straddle {
    __m256d no;
    __m256d yes;
    __m256d near;
};

__attribute__((target("avx2"))) inline Straddle straddle4(__m256d sa, __m256d sb, __m256d ea,
                                                          __m256d eb, __m256d tol, __m256d ntol)
{
    const __m256d la = _mm256_sub_pd(sa, ea), ha = _mm256_add_pd(sa, ea);
    const __m256d lb = _mm256_sub_pd(sb, eb), hb = _mm256_add_pd(sb, eb);
    const __m256d no = _mm256_or_pd(_mm256_cmp_pd(_mm256_min_pd(la, lb), tol, _CMP_GT_OQ),
                                    _mm256_cmp_pd(_mm256_max_pd(ha, hb), ntol, _CMP_LT_OQ));
    const __m256d yes = _mm256_and_pd(_mm256_cmp_pd(_mm256_min_pd(ha, hb), tol, _CMP_LE_OQ),
                                      _mm256_cmp_pd(_mm256_max_pd(la, lb), ntol, _CMP_GE_OQ));
    const __m256d sign = _mm256_set1_pd(-0.0);
    const __m256d near = _mm256_and_pd(
        _mm256_cmp_pd(_mm256_sub_pd(_mm256_andnot_pd(sign, sa), ea), tol, _CMP_LE_OQ),
        _mm256_cmp_pd(_mm256_sub_pd(_mm256_andnot_pd(sign, sb), eb), tol, _CMP_LE_OQ));
    return {no, yes, near};
}

}  // namespace

__attribute__((target("avx2"))) void classify_avx2(const StickGeom& g, std::size_t i,
                                                   const std::uint32_t* js, std::size_t n,
                                                   double tol, std::uint8_t* out)
{
    const __m256d iat = _mm256_set1_pd(g.at[i]), iax = _mm256_set1_pd(g.ax[i]),
                  iay = _mm256_set1_pd(g.ay[i]);
    const __m256d ibt = _mm256_set1_pd(g.bt[i]), ibx = _mm256_set1_pd(g.bx[i]),
                  iby = _mm256_set1_pd(g.by[i]);
    const __m256d int_ = _mm256_set1_pd(g.nt[i]), inx = _mm256_set1_pd(g.nx[i]),
                  iny = _mm256_set1_pd(g.ny[i]);
    const __m256d ie = _mm256_set1_pd(kErrScale * g.nn[i]);
    const __m256d vscale = _mm256_set1_pd(kErrScale);
    const __m256d vtol = _mm256_set1_pd(tol), vntol = _mm256_set1_pd(-tol);

    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(js + k));
        const __m256d jat = _mm256_i32gather_pd(g.at.data(), idx, 8);
        const __m256d jax = _mm256_i32gather_pd(g.ax.data(), idx, 8);
        const __m256d jay = _mm256_i32gather_pd(g.ay.data(), idx, 8);
        const __m256d jbt = _mm256_i32gather_pd(g.bt.data(), idx, 8);
        const __m256d jbx = _mm256_i32gather_pd(g.bx.data(), idx, 8);
        const __m256d jby = _mm256_i32gather_pd(g.by.data(), idx, 8);
        const __m256d jnt = _mm256_i32gather_pd(g.nt.data(), idx, 8);
        const __m256d jnx = _mm256_i32gather_pd(g.nx.data(), idx, 8);
        const __m256d jny = _mm256_i32gather_pd(g.ny.data(), idx, 8);
        const __m256d jnn = _mm256_i32gather_pd(g.nn.data(), idx, 8);

        const __m256d sa = side4(int_, inx, iny, jat, jax, jay);
        const __m256d sb = side4(int_, inx, iny, jbt, jbx, jby);
        const __m256d ta = side4(jnt, jnx, jny, iat, iax, iay);
        const __m256d tb = side4(jnt, jnx, jny, ibt, ibx, iby);
        const __m256d je = _mm256_mul_pd(vscale, jnn);

        const Straddle u = straddle4(sa, sb, _mm256_mul_pd(ie, jat), _mm256_mul_pd(ie, jbt), vtol, vntol);
        const Straddle v = straddle4(ta, tb, _mm256_mul_pd(je, iat), _mm256_mul_pd(je, ibt), vtol, vntol);
        const int near = _mm256_movemask_pd(_mm256_or_pd(u.near, v.near));
        const int apart = _mm256_movemask_pd(_mm256_or_pd(u.no, v.no));
        const int meet = _mm256_movemask_pd(_mm256_and_pd(u.yes, v.yes));
        for (int l = 0; l < 4; ++l) {
            if (near >> l & 1)
                out[k + l] = kUnsure;
            else if (apart >> l & 1)
                out[k + l] = kApart;
            else if (meet >> l & 1)
                out[k + l] = kMeet;
            else
                out[k + l] = kUnsure;
        }
    }
    if (k < n) classify_scalar(g, i, js + k, n - k, tol, out + k);
}

#else

void classify_avx2(const StickGeom& g, std::size_t i, const std::uint32_t* js, std::size_t n,
                   double tol, std::uint8_t* out)
{
    classify_scalar(g, i, js, n, tol, out);
}

#endif

}  // namespace hs::kern
