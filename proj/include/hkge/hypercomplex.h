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

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace hkge {

enum class Algebra { kQuaternion, kDihedron };

std::string_view to_string(Algebra algebra);
// Accepts "quaternion" or "dihedron"; throws ConfigError otherwise.
Algebra parse_algebra(std::string_view name);

// Below this Euclidean 4-norm a coordinate cannot be normalized.
inline constexpr double kNormEpsilon = 1e-12;

// A D-dimensional hypercomplex vector u = s + x i + y j + z k.
//
// The four real blocks are stored contiguously (s block, then x, y, z), so a
// product acts on coordinate index d through the tuple
// (s[d], x[d], y[d], z[d]) and loops over d vectorize. Values are immutable
// from the algebra's point of view: every operation returns a new HVec.
class HVec {
 public:
  // Zero vector of dimension `dim` (dim >= 1).
  HVec(Algebra algebra, std::size_t dim);

  static HVec from_blocks(Algebra algebra, std::span<const double> s,
                          std::span<const double> x, std::span<const double> y,
                          std::span<const double> z);
  // `flat` holds 4*D values laid out block by block.
  static HVec from_flat(Algebra algebra, std::span<const double> flat);

  Algebra algebra() const { return algebra_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> block(std::size_t k) const;
  std::span<double> block(std::size_t k);
  std::span<const double> s() const { return block(0); }
  std::span<const double> x() const { return block(1); }
  std::span<const double> y() const { return block(2); }
  std::span<const double> z() const { return block(3); }

  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }

  bool operator==(const HVec& other) const = default;

 private:
  Algebra algebra_;
  std::size_t dim_;
  std::vector<double> data_;
};

// Quaternion (Hamilton) or Dihedron product, applied per coordinate index.
HVec hmul(const HVec& u, const HVec& v);
// Per-index s_u s_v + x_u x_v + y_u y_v + z_u z_v.
std::vector<double> inner(const HVec& u, const HVec& v);
HVec conjugate(const HVec& u);
// Per-index norm as defined for each algebra: sqrt(s^2+x^2+y^2+z^2) for
// Quaternions, sqrt(s^2+x^2-y^2-z^2) for Dihedrons. The Dihedron radicand can
// be negative, in which case IndefiniteNorm names the first bad index.
std::vector<double> algebra_norm(const HVec& u);
// Divides every coordinate tuple by its Euclidean 4-norm, in both algebras.
HVec normalize(const HVec& u);
HVec hadd(const HVec& u, const HVec& v);
HVec hsub(const HVec& u, const HVec& v);
// Sum over all 4*D components of (u - v)^2.
double sq_distance(const HVec& u, const HVec& v);

// Flat-buffer kernels shared by HVec and the training code. Buffers hold
// 4*D values in block order; D is inferred from the output size.
namespace hc {

void hmul(Algebra algebra, std::span<const double> a, std::span<const double> b,
          std::span<double> out);
// Accumulates dL/da and dL/db given dL/d(a*b). The product is bilinear, so
// each gradient is the transpose of the other operand's multiplication map.
void hmul_backward(Algebra algebra, std::span<const double> a, std::span<const double> b,
                   std::span<const double> grad_out, std::span<double> grad_a,
                   std::span<double> grad_b);

// out = v / |v| per index; throws DegenerateVector when |v| < kNormEpsilon.
// `norms` (size D) receives the per-index Euclidean norms.
void normalize(std::span<const double> v, std::span<double> out, std::span<double> norms);
// Accumulates dL/dv for out = v/|v|: (g - out (out.g)) / max(|v|, eps).
void normalize_backward(std::span<const double> unit, std::span<const double> norms,
                        std::span<const double> grad_out, std::span<double> grad_v);

}  // namespace hc
}  // namespace hkge
