#pragma once

// Pointwise Riemannian geometry of a chart metric: jets, Christoffel symbols,
// the Riemann tensor and its contractions, and oriented orthonormal frames.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "conformal4/manifold.hpp"

namespace conformal4 {

using Mat4 = Eigen::Matrix4d;

struct MetricJet {
  Vec4 x{};
  Mat4 g = Mat4::Zero();
  Mat4 g_inv = Mat4::Zero();
  std::array<double, 64> dg_{};    // dg(k, i, j) = d_k g_ij
  std::array<double, 256> ddg_{};  // ddg(l, k, i, j) = d_l d_k g_ij

  double dg(int k, int i, int j) const { return dg_[(k * 4 + i) * 4 + j]; }
  double ddg(int l, int k, int i, int j) const { return ddg_[((l * 4 + k) * 4 + i) * 4 + j]; }
  double sqrt_det() const { return std::sqrt(g.determinant()); }
};

// Gamma(k, i, j) = Gamma^k_ij.
struct Christoffel {
  std::array<double, 64> c{};
  double operator()(int k, int i, int j) const { return c[(k * 4 + i) * 4 + j]; }
  double& operator()(int k, int i, int j) { return c[(k * 4 + i) * 4 + j]; }
};

struct Riemann {
  std::array<double, 256> r{};
  double operator()(int a, int b, int c, int d) const { return r[((a * 4 + b) * 4 + c) * 4 + d]; }
  double& operator()(int a, int b, int c, int d) { return r[((a * 4 + b) * 4 + c) * 4 + d]; }
};

struct CurvaturePoint {
  Vec4 x{};
  Mat4 g = Mat4::Zero();
  Mat4 g_inv = Mat4::Zero();
  Riemann riem;  // R_abcd, fully covariant; R_abab is a sectional numerator
  Mat4 ric = Mat4::Zero();
  double scalar = 0.0;
  Mat4 ric0 = Mat4::Zero();
  // Rows are the coordinate components of an orthonormal frame e_0..e_3.
  Mat4 frame = Mat4::Identity();
  int orientation = 1;
  // Riemann and Ricci components in that frame.
  Riemann frame_riem;
  Mat4 frame_ric = Mat4::Zero();
  // eps times the largest sum of absolute terms entering a frame component;
  // near coordinate singularities this exceeds eps |Riem| by a wide margin.
  double rounding_scale = 0.0;

  double ric0_norm2() const;
  double ric_norm2() const;
  const Riemann& frame_riemann() const { return frame_riem; }
};

// Evaluates the chart metric on jets seeded at x. Throws DomainError if x is
// outside the chart box and MetricDegeneracyError for asymmetric, non-finite
// or non-positive-definite coefficients.
MetricJet evaluate_jet(const ChartDomain& chart, const Vec4& x);
MetricJet evaluate_jet(const ManifoldSpec& spec, int chart, const Vec4& x);

Christoffel christoffel(const MetricJet& jet);

// Gram-Schmidt of the coordinate basis in the given order; the last produced
// vector is negated when needed so that sign(det frame) == orientation.
Mat4 orthonormal_frame(const Mat4& g, int orientation, const std::array<int, 4>& order = {0, 1, 2, 3});

// The Riemann tensor is assembled in the Gram-Schmidt frame from the frame
// connection coefficients (Cartan structure equations on the coframe jets),
// then pulled back to coordinates.
CurvaturePoint curvature(const MetricJet& jet, int orientation = 1,
                         const std::array<int, 4>& frame_order = {0, 1, 2, 3});

// R_abcd from coordinate Christoffel symbols and their derivatives. Loses
// accuracy near coordinate singularities; kept as an independent route.
Riemann riemann_from_christoffel(const MetricJet& jet);

// Convenience: evaluate_jet followed by curvature with the manifold's declared orientation.
CurvaturePoint curvature_at(const ManifoldSpec& spec, int chart, const Vec4& x);

}  // namespace conformal4
