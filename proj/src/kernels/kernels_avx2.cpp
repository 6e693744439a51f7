// AVX2 variants of the batch kernels. Four points (or rays) per lane group;
// the arithmetic mirrors kernels_scalar.cpp operation for operation.
//
// Only intrinsics and the POD EdgeView are used here so that no inline code
// compiled with -mavx2 can be shared with the scalar translation units.

#include <immintrin.h>

#include <cstddef>
#include <cstdint>
#include <limits>

#include "coverage/kernels.hpp"

namespace coverage::kernels::avx2 {

namespace {

inline __m256d opposite_signs(__m256d a, __m256d b) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d a_pos = _mm256_cmp_pd(a, zero, _CMP_GT_OQ);
    const __m256d a_neg = _mm256_cmp_pd(a, zero, _CMP_LT_OQ);
    const __m256d b_pos = _mm256_cmp_pd(b, zero, _CMP_GT_OQ);
    const __m256d b_neg = _mm256_cmp_pd(b, zero, _CMP_LT_OQ);
    return _mm256_or_pd(_mm256_and_pd(a_pos, b_neg), _mm256_and_pd(a_neg, b_pos));
}

}  // namespace

void visible_mask(double ox, double oy, double r2, const double* px, const double* py, std::size_t n,
                  EdgeView edges, std::uint8_t* mask) {
    const __m256d vox = _mm256_set1_pd(ox);
    const __m256d voy = _mm256_set1_pd(oy);
    const __m256d vr2 = _mm256_set1_pd(r2);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d x = _mm256_loadu_pd(px + k);
        const __m256d y = _mm256_loadu_pd(py + k);
        const __m256d dx = _mm256_sub_pd(x, vox);
        const __m256d dy = _mm256_sub_pd(y, voy);
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        const __m256d inside = _mm256_cmp_pd(d2, vr2, _CMP_LE_OQ);
        __m256d blocked = _mm256_setzero_pd();
        if (_mm256_movemask_pd(inside) != 0) {
            for (std::size_t e = 0; e < edges.n; ++e) {
                const __m256d ex = _mm256_set1_pd(edges.ex[e]);
                const __m256d ey = _mm256_set1_pd(edges.ey[e]);
                const __m256d ax = _mm256_set1_pd(edges.ax[e]);
                const __m256d ay = _mm256_set1_pd(edges.ay[e]);
                const __m256d d1 = _mm256_set1_pd(edges.ex[e] * (oy - edges.ay[e]) - edges.ey[e] * (ox - edges.ax[e]));
                const __m256d d2e = _mm256_sub_pd(_mm256_mul_pd(ex, _mm256_sub_pd(y, ay)),
                                                  _mm256_mul_pd(ey, _mm256_sub_pd(x, ax)));
                const __m256d rax = _mm256_set1_pd(edges.ax[e] - ox);
                const __m256d ray = _mm256_set1_pd(edges.ay[e] - oy);
                const __m256d rbx = _mm256_set1_pd(edges.bx[e] - ox);
                const __m256d rby = _mm256_set1_pd(edges.by[e] - oy);
                const __m256d d3 = _mm256_sub_pd(_mm256_mul_pd(dx, ray), _mm256_mul_pd(dy, rax));
                const __m256d d4 = _mm256_sub_pd(_mm256_mul_pd(dx, rby), _mm256_mul_pd(dy, rbx));
                blocked = _mm256_or_pd(blocked, _mm256_and_pd(opposite_signs(d1, d2e), opposite_signs(d3, d4)));
                if (_mm256_movemask_pd(_mm256_or_pd(blocked, _mm256_xor_pd(inside, _mm256_castsi256_pd(_mm256_set1_epi64x(-1))))) == 0xF)
                    break;
            }
        }
        const int visible = _mm256_movemask_pd(_mm256_andnot_pd(blocked, inside));
        mask[k + 0] = static_cast<std::uint8_t>(visible & 1);
        mask[k + 1] = static_cast<std::uint8_t>((visible >> 1) & 1);
        mask[k + 2] = static_cast<std::uint8_t>((visible >> 2) & 1);
        mask[k + 3] = static_cast<std::uint8_t>((visible >> 3) & 1);
    }
    if (k < n) scalar::visible_mask(ox, oy, r2, px + k, py + k, n - k, edges, mask + k);
}

void ray_hits(double ox, double oy, const double* dx, const double* dy, std::size_t n, EdgeView edges,
              double t_min, double* t) {
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d vtmin = _mm256_set1_pd(t_min);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d ux = _mm256_loadu_pd(dx + k);
        const __m256d uy = _mm256_loadu_pd(dy + k);
        __m256d best = inf;
        for (std::size_t e = 0; e < edges.n; ++e) {
            const double exs = edges.ex[e], eys = edges.ey[e];
            const __m256d ex = _mm256_set1_pd(exs);
            const __m256d ey = _mm256_set1_pd(eys);
            const __m256d denom = _mm256_sub_pd(_mm256_mul_pd(ux, ey), _mm256_mul_pd(uy, ex));
            const __m256d nonzero = _mm256_cmp_pd(denom, zero, _CMP_NEQ_UQ);
            const double wxs = edges.ax[e] - ox;
            const double wys = edges.ay[e] - oy;
            const __m256d tnum = _mm256_set1_pd(wxs * eys - wys * exs);
            const __m256d wx = _mm256_set1_pd(wxs);
            const __m256d wy = _mm256_set1_pd(wys);
            const __m256d tt = _mm256_div_pd(tnum, denom);
            const __m256d w = _mm256_div_pd(_mm256_sub_pd(_mm256_mul_pd(wx, uy), _mm256_mul_pd(wy, ux)), denom);
            __m256d hit = _mm256_and_pd(nonzero, _mm256_cmp_pd(tt, vtmin, _CMP_GT_OQ));
            hit = _mm256_and_pd(hit, _mm256_cmp_pd(w, zero, _CMP_GE_OQ));
            hit = _mm256_and_pd(hit, _mm256_cmp_pd(w, one, _CMP_LE_OQ));
            hit = _mm256_and_pd(hit, _mm256_cmp_pd(tt, best, _CMP_LT_OQ));
            best = _mm256_blendv_pd(best, tt, hit);
        }
        _mm256_storeu_pd(t + k, best);
    }
    if (k < n) scalar::ray_hits(ox, oy, dx + k, dy + k, n - k, edges, t_min, t + k);
}

}  // namespace coverage::kernels::avx2
