#pragma once

// Splitting of the curvature operator on 2-forms into self-dual and
// anti-self-dual blocks, Weyl spectra, sigma_g and the isotropic-curvature margin.

#include <array>
#include <string>

#include <Eigen/Dense>

#include "conformal4/geometry.hpp"

namespace conformal4 {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Ordering of basis 2-forms used throughout: e01, e02, e03, e23, e31, e12.
inline constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {2, 3}, {3, 1}, {1, 2}}};

struct TwoFormBases {
  // Columns are omega^+_i (resp. omega^-_i) in the frame basis e^a ^ e^b.
  Eigen::Matrix<double, 6, 3> plus_frame;
  Eigen::Matrix<double, 6, 3> minus_frame;
  // Same forms in the coordinate basis dx^i ^ dx^j with (i, j) from kPairs.
  Eigen::Matrix<double, 6, 3> plus_coord;
  Eigen::Matrix<double, 6, 3> minus_coord;
};

// omega^{+-}_1 = (e0^e1 +- s e2^e3)/sqrt2 and cyclically, with
// s = orientation * sign(det frame), so a frame of the opposite orientation
// exchanges the two triples.
TwoFormBases two_form_bases(const Mat4& frame, int orientation);

struct CurvatureBlocks {
  Mat3 A = Mat3::Zero();
  Mat3 B = Mat3::Zero();
  Mat3 C = Mat3::Zero();
  Vec3 wplus_eigs = Vec3::Zero();   // descending
  Vec3 wminus_eigs = Vec3::Zero();  // descending
  double R = 0.0;
  double lambda_max_plus = 0.0;
  double lambda_max_minus = 0.0;
  double sigma = 0.0;
  double sigma_plus = 0.0;
  double pic_margin = 0.0;
  // Least eigenvalues of P = R/6 - W on each side.
  double p_plus_min = 0.0;
  double p_minus_min = 0.0;

  // Sum of squared eigenvalues (the half-norm convention).
  double wplus_norm2() const { return wplus_eigs.squaredNorm(); }
  double wminus_norm2() const { return wminus_eigs.squaredNorm(); }
};

// The 6x6 curvature operator R(e_a ^ e_b, e_c ^ e_d) in the kPairs ordering.
Mat6 curvature_operator(const CurvaturePoint& curv);

// Projects onto the +- bases built from curv.frame. Throws ConsistencyError
// when the operator is not symmetric within tolerance.
CurvatureBlocks decompose(const CurvaturePoint& curv, int orientation);
CurvatureBlocks decompose(const CurvaturePoint& curv);

enum class PicVerdict { Positive, NonnegativeDegenerate, Indefinite };

const char* to_string(PicVerdict v);

struct PicResult {
  PicVerdict verdict = PicVerdict::Indefinite;
  double margin = 0.0;
  double tolerance = 0.0;
};

PicResult pic_verdict(const CurvatureBlocks& blocks);

// Eigenvalues of a symmetric 3x3 matrix in descending order.
Vec3 sorted_eigenvalues(const Mat3& m);

}  // namespace conformal4
