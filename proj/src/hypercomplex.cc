/*
 * Copyright 2026 The hkge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hkge/hypercomplex.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "hkge/error.h"

namespace hkge {
namespace {

void check_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("hypercomplex vector has a non-finite component");
  }
}

void check_same_shape(const HVec& u, const HVec& v, std::string_view op) {
  if (u.dim() != v.dim()) {
    throw DimensionMismatch(fmt::format("{}: dimension {} vs {}", op, u.dim(), v.dim()));
  }
  if (u.algebra() != v.algebra()) {
    throw DimensionMismatch(fmt::format("{}: algebra {} vs {}", op, to_string(u.algebra()),
                                        to_string(v.algebra())));
  }
}

std::size_t dim_of(std::span<const double> flat) {
  if (flat.empty() || flat.size() % 4 != 0) {
    throw DimensionMismatch(fmt::format("flat hypercomplex buffer of size {} is not 4*D", flat.size()));
  }
  return flat.size() / 4;
}

}  // namespace

std::string_view to_string(Algebra algebra) {
  return algebra == Algebra::kQuaternion ? "quaternion" : "dihedron";
}

Algebra parse_algebra(std::string_view name) {
  if (name == "quaternion") return Algebra::kQuaternion;
  if (name == "dihedron") return Algebra::kDihedron;
  throw ConfigError(fmt::format("unknown algebra '{}' (expected quaternion|dihedron)", name));
}

HVec::HVec(Algebra algebra, std::size_t dim) : algebra_(algebra), dim_(dim), data_(4 * dim, 0.0) {
  if (dim == 0) throw DimensionMismatch("hypercomplex dimension must be >= 1");
}

HVec HVec::from_blocks(Algebra algebra, std::span<const double> s, std::span<const double> x,
                       std::span<const double> y, std::span<const double> z) {
  if (x.size() != s.size() || y.size() != s.size() || z.size() != s.size()) {
    throw DimensionMismatch(fmt::format("blocks have lengths {}, {}, {}, {}", s.size(), x.size(),
                                        y.size(), z.size()));
  }
  HVec out(algebra, s.size());
  const std::span<const double> blocks[4] = {s, x, y, z};
  for (std::size_t k = 0; k < 4; ++k) {
    check_finite(blocks[k]);
    std::copy(blocks[k].begin(), blocks[k].end(), out.block(k).begin());
  }
  return out;
}

HVec HVec::from_flat(Algebra algebra, std::span<const double> flat) {
  HVec out(algebra, dim_of(flat));
  check_finite(flat);
  std::copy(flat.begin(), flat.end(), out.data_.begin());
  return out;
}

std::span<const double> HVec::block(std::size_t k) const {
  return std::span<const double>(data_).subspan(k * dim_, dim_);
}

std::span<double> HVec::block(std::size_t k) { return std::span<double>(data_).subspan(k * dim_, dim_); }

HVec hmul(const HVec& u, const HVec& v) {
  check_same_shape(u, v, "hmul");
  HVec out(u.algebra(), u.dim());
  hc::hmul(u.algebra(), u.flat(), v.flat(), out.flat());
  return out;
}

std::vector<double> inner(const HVec& u, const HVec& v) {
  check_same_shape(u, v, "inner");
  std::vector<double> out(u.dim(), 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    auto a = u.block(k);
    auto b = v.block(k);
    for (std::size_t d = 0; d < u.dim(); ++d) out[d] += a[d] * b[d];
  }
  return out;
}

HVec conjugate(const HVec& u) {
  HVec out = u;
  for (std::size_t k = 1; k < 4; ++k) {
    for (double& c : out.block(k)) c = -c;
  }
  return out;
}

std::vector<double> algebra_norm(const HVec& u) {
  const double sign = u.algebra() == Algebra::kQuaternion ? 1.0 : -1.0;
  std::vector<double> out(u.dim());
  for (std::size_t d = 0; d < u.dim(); ++d) {
    const double s = u.s()[d], x = u.x()[d], y = u.y()[d], z = u.z()[d];
    const double radicand = s * s + x * x + sign * (y * y + z * z);
    if (radicand < 0.0) throw IndefiniteNorm(d, radicand);
    out[d] = std::sqrt(radicand);
  }
  return out;
}

HVec normalize(const HVec& u) {
  HVec out(u.algebra(), u.dim());
  std::vector<double> norms(u.dim());
  hc::normalize(u.flat(), out.flat(), norms);
  return out;
}

HVec hadd(const HVec& u, const HVec& v) {
  check_same_shape(u, v, "hadd");
  HVec out = u;
  auto o = out.flat();
  auto b = v.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += b[i];
  return out;
}

HVec hsub(const HVec& u, const HVec& v) {
  check_same_shape(u, v, "hsub");
  HVec out = u;
  auto o = out.flat();
  auto b = v.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= b[i];
  return out;
}

double sq_distance(const HVec& u, const HVec& v) {
  check_same_shape(u, v, "sq_distance");
  double acc = 0.0;
  auto a = u.flat();
  auto b = v.flat();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

namespace hc {

// Both products share the j and k rows; the Dihedron flips the sign of the
// y/z contributions to the real and i rows (j^2 = k^2 = +1, jk = -i, kj = i).
void hmul(Algebra algebra, std::span<const double> a, std::span<const double> b,
          std::span<double> out) {
  const std::size_t n = dim_of(out);
  if (a.size() != out.size() || b.size() != out.size()) {
    throw DimensionMismatch(fmt::format("hmul: buffer sizes {}, {}, {}", a.size(), b.size(), out.size()));
  }
  const double sg = algebra == Algebra::kQuaternion ? 1.0 : -1.0;
  const double *as = a.data(), *ax = as + n, *ay = ax + n, *az = ay + n;
  const double *bs = b.data(), *bx = bs + n, *by = bx + n, *bz = by + n;
  double *os = out.data(), *ox = os + n, *oy = ox + n, *oz = oy + n;
  for (std::size_t d = 0; d < n; ++d) {
    const double s = as[d] * bs[d] - ax[d] * bx[d] - sg * (ay[d] * by[d] + az[d] * bz[d]);
    const double x = as[d] * bx[d] + ax[d] * bs[d] + sg * (ay[d] * bz[d] - az[d] * by[d]);
    const double y = as[d] * by[d] - ax[d] * bz[d] + ay[d] * bs[d] + az[d] * bx[d];
    const double z = as[d] * bz[d] + ax[d] * by[d] - ay[d] * bx[d] + az[d] * bs[d];
    os[d] = s;
    ox[d] = x;
    oy[d] = y;
    oz[d] = z;
  }
}

void hmul_backward(Algebra algebra, std::span<const double> a, std::span<const double> b,
                   std::span<const double> grad_out, std::span<double> grad_a,
                   std::span<double> grad_b) {
  const std::size_t n = dim_of(grad_out);
  const double sg = algebra == Algebra::kQuaternion ? 1.0 : -1.0;
  const double *as = a.data(), *ax = as + n, *ay = ax + n, *az = ay + n;
  const double *bs = b.data(), *bx = bs + n, *by = bx + n, *bz = by + n;
  const double *gs = grad_out.data(), *gx = gs + n, *gy = gx + n, *gz = gy + n;
  if (!grad_a.empty()) {
    double *ps = grad_a.data(), *px = ps + n, *py = px + n, *pz = py + n;
    for (std::size_t d = 0; d < n; ++d) {
      ps[d] += gs[d] * bs[d] + gx[d] * bx[d] + gy[d] * by[d] + gz[d] * bz[d];
      px[d] += -gs[d] * bx[d] + gx[d] * bs[d] - gy[d] * bz[d] + gz[d] * by[d];
      py[d] += -sg * gs[d] * by[d] + sg * gx[d] * bz[d] + gy[d] * bs[d] - gz[d] * bx[d];
      pz[d] += -sg * gs[d] * bz[d] - sg * gx[d] * by[d] + gy[d] * bx[d] + gz[d] * bs[d];
    }
  }
  if (!grad_b.empty()) {
    double *ps = grad_b.data(), *px = ps + n, *py = px + n, *pz = py + n;
    for (std::size_t d = 0; d < n; ++d) {
      ps[d] += gs[d] * as[d] + gx[d] * ax[d] + gy[d] * ay[d] + gz[d] * az[d];
      px[d] += -gs[d] * ax[d] + gx[d] * as[d] + gy[d] * az[d] - gz[d] * ay[d];
      py[d] += -sg * gs[d] * ay[d] - sg * gx[d] * az[d] + gy[d] * as[d] + gz[d] * ax[d];
      pz[d] += -sg * gs[d] * az[d] + sg * gx[d] * ay[d] - gy[d] * ax[d] + gz[d] * as[d];
    }
  }
}

void normalize(std::span<const double> v, std::span<double> out, std::span<double> norms) {
  const std::size_t n = dim_of(v);
  if (out.size() != v.size() || norms.size() != n) {
    throw DimensionMismatch("normalize: output buffer size mismatch");
  }
  for (std::size_t d = 0; d < n; ++d) {
    const double s = v[d], x = v[n + d], y = v[2 * n + d], z = v[3 * n + d];
    const double norm = std::sqrt(s * s + x * x + y * y + z * z);
    if (!(norm >= kNormEpsilon)) throw DegenerateVector(d, norm);
    norms[d] = norm;
    out[d] = s / norm;
    out[n + d] = x / norm;
    out[2 * n + d] = y / norm;
    out[3 * n + d] = z / norm;
  }
}

void normalize_backward(std::span<const double> unit, std::span<const double> norms,
                        std::span<const double> grad_out, std::span<double> grad_v) {
  const std::size_t n = norms.size();
  for (std::size_t d = 0; d < n; ++d) {
    double dot = 0.0;
    for (std::size_t k = 0; k < 4; ++k) dot += unit[k * n + d] * grad_out[k * n + d];
    const double inv = 1.0 / std::max(norms[d], kNormEpsilon);
    for (std::size_t k = 0; k < 4; ++k) {
      grad_v[k * n + d] += (grad_out[k * n + d] - unit[k * n + d] * dot) * inv;
    }
  }
}

}  // namespace hc
}  // namespace hkge
