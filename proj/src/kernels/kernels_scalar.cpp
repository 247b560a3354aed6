#include "mobiman/kernels/kernels.hpp"

#include <cmath>

namespace mobiman::kernels {
namespace {

constexpr double kDetEps = 1e-14;   // reject near-parallel rays
constexpr double kBaryEps = 1e-12;  // keep shared-edge hits

RayBlockHit ray_block_nearest_scalar(const TriBlockSoA& b, const double* o,
                                     const double* d, double t_min, double t_max) {
  RayBlockHit best{t_max, -1, 0.0, 0.0};
  for (int i = 0; i < b.count; ++i) {
    // pvec = d x e2
    const double pvx = d[1] * b.e2z[i] - d[2] * b.e2y[i];
    const double pvy = d[2] * b.e2x[i] - d[0] * b.e2z[i];
    const double pvz = d[0] * b.e2y[i] - d[1] * b.e2x[i];
    const double det = b.e1x[i] * pvx + b.e1y[i] * pvy + b.e1z[i] * pvz;
    if (std::abs(det) < kDetEps) continue;
    const double inv = 1.0 / det;
    const double tvx = o[0] - b.ax[i];
    const double tvy = o[1] - b.ay[i];
    const double tvz = o[2] - b.az[i];
    const double u = (tvx * pvx + tvy * pvy + tvz * pvz) * inv;
    if (u < -kBaryEps || u > 1.0 + kBaryEps) continue;
    // qvec = tvec x e1
    const double qvx = tvy * b.e1z[i] - tvz * b.e1y[i];
    const double qvy = tvz * b.e1x[i] - tvx * b.e1z[i];
    const double qvz = tvx * b.e1y[i] - tvy * b.e1x[i];
    const double v = (d[0] * qvx + d[1] * qvy + d[2] * qvz) * inv;
    if (v < -kBaryEps || u + v > 1.0 + kBaryEps) continue;
    const double t = (b.e2x[i] * qvx + b.e2y[i] * qvy + b.e2z[i] * qvz) * inv;
    if (t <= t_min || t >= best.t) continue;
    best = RayBlockHit{t, i, u, v};
  }
  if (best.slot < 0) best.t = t_max;
  return best;
}

void transform_points_scalar(const double* R, const double* t, const double* px,
                             const double* py, const double* pz, double* ox,
                             double* oy, double* oz, int count) {
  for (int i = 0; i < count; ++i) {
    const double x = px[i], y = py[i], z = pz[i];
    ox[i] = R[0] * x + R[1] * y + R[2] * z + t[0];
    oy[i] = R[3] * x + R[4] * y + R[5] * z + t[1];
    oz[i] = R[6] * x + R[7] * y + R[8] * z + t[2];
  }
}

double point_to_plane_residuals_scalar(const double* px, const double* py,
                                       const double* pz, const double* qx,
                                       const double* qy, const double* qz,
                                       const double* nx, const double* ny,
                                       const double* nz, double* r, int count) {
  double sum = 0.0;
  for (int i = 0; i < count; ++i) {
    const double ri =
        (px[i] - qx[i]) * nx[i] + (py[i] - qy[i]) * ny[i] + (pz[i] - qz[i]) * nz[i];
    r[i] = ri;
    sum += ri * ri;
  }
  return sum;
}

}  // namespace

namespace detail {
const KernelTable scalar_table = {
    &ray_block_nearest_scalar,
    &transform_points_scalar,
    &point_to_plane_residuals_scalar,
};
}  // namespace detail

}  // namespace mobiman::kernels
