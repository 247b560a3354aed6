#include "mobiman/kernels/kernels.hpp"

#if defined(MOBIMAN_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

namespace mobiman::kernels {
namespace {

constexpr double kDetEps = 1e-14;
constexpr double kBaryEps = 1e-12;

inline __m256d abs_pd(__m256d x) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign, x);
}

RayBlockHit ray_block_nearest_avx2(const TriBlockSoA& b, const double* o,
                                   const double* d, double t_min, double t_max) {
  const __m256d dx = _mm256_set1_pd(d[0]);
  const __m256d dy = _mm256_set1_pd(d[1]);
  const __m256d dz = _mm256_set1_pd(d[2]);
  const __m256d ox = _mm256_set1_pd(o[0]);
  const __m256d oy = _mm256_set1_pd(o[1]);
  const __m256d oz = _mm256_set1_pd(o[2]);
  const __m256d eps_det = _mm256_set1_pd(kDetEps);
  const __m256d lo_b = _mm256_set1_pd(-kBaryEps);
  const __m256d hi_b = _mm256_set1_pd(1.0 + kBaryEps);
  const __m256d vt_min = _mm256_set1_pd(t_min);

  __m256d best_t = _mm256_set1_pd(t_max);
  __m256d best_slot = _mm256_set1_pd(-1.0);
  __m256d best_u = _mm256_setzero_pd();
  __m256d best_v = _mm256_setzero_pd();
  __m256d slot = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d four = _mm256_set1_pd(4.0);

  for (int i = 0; i + 4 <= b.count; i += 4) {
    const __m256d e1x = _mm256_loadu_pd(b.e1x + i);
    const __m256d e1y = _mm256_loadu_pd(b.e1y + i);
    const __m256d e1z = _mm256_loadu_pd(b.e1z + i);
    const __m256d e2x = _mm256_loadu_pd(b.e2x + i);
    const __m256d e2y = _mm256_loadu_pd(b.e2y + i);
    const __m256d e2z = _mm256_loadu_pd(b.e2z + i);

    // pvec = d x e2
    const __m256d pvx = _mm256_sub_pd(_mm256_mul_pd(dy, e2z), _mm256_mul_pd(dz, e2y));
    const __m256d pvy = _mm256_sub_pd(_mm256_mul_pd(dz, e2x), _mm256_mul_pd(dx, e2z));
    const __m256d pvz = _mm256_sub_pd(_mm256_mul_pd(dx, e2y), _mm256_mul_pd(dy, e2x));
    const __m256d det = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(e1x, pvx), _mm256_mul_pd(e1y, pvy)),
        _mm256_mul_pd(e1z, pvz));
    __m256d mask = _mm256_cmp_pd(abs_pd(det), eps_det, _CMP_GE_OQ);
    if (_mm256_movemask_pd(mask) == 0) {
      slot = _mm256_add_pd(slot, four);
      continue;
    }
    const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), det);
    const __m256d tvx = _mm256_sub_pd(ox, _mm256_loadu_pd(b.ax + i));
    const __m256d tvy = _mm256_sub_pd(oy, _mm256_loadu_pd(b.ay + i));
    const __m256d tvz = _mm256_sub_pd(oz, _mm256_loadu_pd(b.az + i));
    const __m256d u = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(tvx, pvx), _mm256_mul_pd(tvy, pvy)),
                      _mm256_mul_pd(tvz, pvz)),
        inv);
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(u, lo_b, _CMP_GE_OQ));
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(u, hi_b, _CMP_LE_OQ));
    // qvec = tvec x e1
    const __m256d qvx = _mm256_sub_pd(_mm256_mul_pd(tvy, e1z), _mm256_mul_pd(tvz, e1y));
    const __m256d qvy = _mm256_sub_pd(_mm256_mul_pd(tvz, e1x), _mm256_mul_pd(tvx, e1z));
    const __m256d qvz = _mm256_sub_pd(_mm256_mul_pd(tvx, e1y), _mm256_mul_pd(tvy, e1x));
    const __m256d v = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, qvx), _mm256_mul_pd(dy, qvy)),
                      _mm256_mul_pd(dz, qvz)),
        inv);
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(v, lo_b, _CMP_GE_OQ));
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(_mm256_add_pd(u, v), hi_b, _CMP_LE_OQ));
    const __m256d t = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e2x, qvx), _mm256_mul_pd(e2y, qvy)),
                      _mm256_mul_pd(e2z, qvz)),
        inv);
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(t, vt_min, _CMP_GT_OQ));
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(t, best_t, _CMP_LT_OQ));

    best_t = _mm256_blendv_pd(best_t, t, mask);
    best_slot = _mm256_blendv_pd(best_slot, slot, mask);
    best_u = _mm256_blendv_pd(best_u, u, mask);
    best_v = _mm256_blendv_pd(best_v, v, mask);
    slot = _mm256_add_pd(slot, four);
  }

  alignas(32) double ts[4], slots[4], us[4], vs[4];
  _mm256_store_pd(ts, best_t);
  _mm256_store_pd(slots, best_slot);
  _mm256_store_pd(us, best_u);
  _mm256_store_pd(vs, best_v);

  RayBlockHit best{t_max, -1, 0.0, 0.0};
  for (int l = 0; l < 4; ++l) {
    if (slots[l] < 0.0) continue;
    const int s = static_cast<int>(slots[l]);
    if (ts[l] < best.t || (ts[l] == best.t && (best.slot < 0 || s < best.slot)))
      best = RayBlockHit{ts[l], s, us[l], vs[l]};
  }

  // Scalar tail for blocks that are not a multiple of 4.
  const int tail_begin = b.count & ~3;
  if (tail_begin < b.count) {
    TriBlockSoA tail = b;
    tail.ax += tail_begin;
    tail.ay += tail_begin;
    tail.az += tail_begin;
    tail.e1x += tail_begin;
    tail.e1y += tail_begin;
    tail.e1z += tail_begin;
    tail.e2x += tail_begin;
    tail.e2y += tail_begin;
    tail.e2z += tail_begin;
    tail.count = b.count - tail_begin;
    const RayBlockHit th =
        detail::scalar_table.ray_block_nearest(tail, o, d, t_min, best.t);
    if (th.slot >= 0) best = RayBlockHit{th.t, th.slot + tail_begin, th.u, th.v};
  }
  return best;
}

void transform_points_avx2(const double* R, const double* t, const double* px,
                           const double* py, const double* pz, double* ox, double* oy,
                           double* oz, int count) {
  const __m256d r00 = _mm256_set1_pd(R[0]), r01 = _mm256_set1_pd(R[1]),
                r02 = _mm256_set1_pd(R[2]);
  const __m256d r10 = _mm256_set1_pd(R[3]), r11 = _mm256_set1_pd(R[4]),
                r12 = _mm256_set1_pd(R[5]);
  const __m256d r20 = _mm256_set1_pd(R[6]), r21 = _mm256_set1_pd(R[7]),
                r22 = _mm256_set1_pd(R[8]);
  const __m256d tx = _mm256_set1_pd(t[0]), ty = _mm256_set1_pd(t[1]),
                tz = _mm256_set1_pd(t[2]);
  int i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d x = _mm256_loadu_pd(px + i);
    const __m256d y = _mm256_loadu_pd(py + i);
    const __m256d z = _mm256_loadu_pd(pz + i);
    _mm256_storeu_pd(
        ox + i,
        _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r00, x),
                                                  _mm256_mul_pd(r01, y)),
                                    _mm256_mul_pd(r02, z)),
                      tx));
    _mm256_storeu_pd(
        oy + i,
        _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r10, x),
                                                  _mm256_mul_pd(r11, y)),
                                    _mm256_mul_pd(r12, z)),
                      ty));
    _mm256_storeu_pd(
        oz + i,
        _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r20, x),
                                                  _mm256_mul_pd(r21, y)),
                                    _mm256_mul_pd(r22, z)),
                      tz));
  }
  for (; i < count; ++i) {
    const double x = px[i], y = py[i], z = pz[i];
    ox[i] = R[0] * x + R[1] * y + R[2] * z + t[0];
    oy[i] = R[3] * x + R[4] * y + R[5] * z + t[1];
    oz[i] = R[6] * x + R[7] * y + R[8] * z + t[2];
  }
}

double point_to_plane_residuals_avx2(const double* px, const double* py,
                                     const double* pz, const double* qx,
                                     const double* qy, const double* qz,
                                     const double* nx, const double* ny,
                                     const double* nz, double* r, int count) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d ex = _mm256_sub_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(qx + i));
    const __m256d ey = _mm256_sub_pd(_mm256_loadu_pd(py + i), _mm256_loadu_pd(qy + i));
    const __m256d ez = _mm256_sub_pd(_mm256_loadu_pd(pz + i), _mm256_loadu_pd(qz + i));
    const __m256d ri = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(ex, _mm256_loadu_pd(nx + i)),
                      _mm256_mul_pd(ey, _mm256_loadu_pd(ny + i))),
        _mm256_mul_pd(ez, _mm256_loadu_pd(nz + i)));
    _mm256_storeu_pd(r + i, ri);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(ri, ri));
  }
  alignas(32) double a[4];
  _mm256_store_pd(a, acc);
  // Lane order matches the scalar accumulation pattern of i%4 groups only
  // approximately; the sum is reduced in fixed order for determinism.
  double sum = (a[0] + a[1]) + (a[2] + a[3]);
  for (; i < count; ++i) {
    const double ri =
        (px[i] - qx[i]) * nx[i] + (py[i] - qy[i]) * ny[i] + (pz[i] - qz[i]) * nz[i];
    r[i] = ri;
    sum += ri * ri;
  }
  return sum;
}

}  // namespace

namespace detail {
const KernelTable avx2_table = {
    &ray_block_nearest_avx2,
    &transform_points_avx2,
    &point_to_plane_residuals_avx2,
};
}  // namespace detail

}  // namespace mobiman::kernels

#endif  // MOBIMAN_HAVE_AVX2
