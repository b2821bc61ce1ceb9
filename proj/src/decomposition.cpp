#include "conformal4/decomposition.hpp"

#include <algorithm>
#include <cmath>

#include "conformal4/errors.hpp"

namespace conformal4 {

TwoFormBases two_form_bases(const Mat4& frame, int orientation) {
  const double s = (orientation >= 0 ? 1.0 : -1.0) * (frame.determinant() > 0.0 ? 1.0 : -1.0);
  const double h = 1.0 / std::sqrt(2.0);

  TwoFormBases out;
  out.plus_frame.setZero();
  out.minus_frame.setZero();
  for (int i = 0; i < 3; ++i) {
    out.plus_frame(i, i) = h;
    out.plus_frame(i + 3, i) = s * h;
    out.minus_frame(i, i) = h;
    out.minus_frame(i + 3, i) = -s * h;
  }

  // theta^a = Theta(a, i) dx^i with Theta = frame^{-T}.
  const Mat4 theta = frame.inverse().transpose();
  Mat6 to_coord;
  for (int p = 0; p < 6; ++p) {
    const int a = kPairs[p][0], b = kPairs[p][1];
    for (int q = 0; q < 6; ++q) {
      const int i = kPairs[q][0], j = kPairs[q][1];
      to_coord(q, p) = theta(a, i) * theta(b, j) - theta(a, j) * theta(b, i);
    }
  }
  out.plus_coord = to_coord * out.plus_frame;
  out.minus_coord = to_coord * out.minus_frame;
  return out;
}

Mat6 curvature_operator(const CurvaturePoint& curv) {
  const Riemann rf = curv.frame_riemann();
  Mat6 m;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) m(p, q) = rf(kPairs[p][0], kPairs[p][1], kPairs[q][0], kPairs[q][1]);
  return m;
}

Vec3 sorted_eigenvalues(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(m, Eigen::EigenvaluesOnly);
  Vec3 ev = es.eigenvalues();  // ascending
  return Vec3(ev[2], ev[1], ev[0]);
}

CurvatureBlocks decompose(const CurvaturePoint& curv, int orientation) {
  const Mat6 m = curvature_operator(curv);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale + 1e3 * curv.rounding_scale)
    throw ConsistencyError("curvature operator is not symmetric");

  const TwoFormBases bases = two_form_bases(curv.frame, orientation);
  CurvatureBlocks b;
  b.R = curv.scalar;
  b.A = bases.plus_frame.transpose() * m * bases.plus_frame;
  b.B = bases.plus_frame.transpose() * m * bases.minus_frame;
  b.C = bases.minus_frame.transpose() * m * bases.minus_frame;
  b.A = 0.5 * (b.A + b.A.transpose()).eval();
  b.C = 0.5 * (b.C + b.C.transpose()).eval();

  const Mat3 shift = (b.R / 12.0) * Mat3::Identity();
  b.wplus_eigs = sorted_eigenvalues(b.A - shift);
  b.wminus_eigs = sorted_eigenvalues(b.C - shift);
  b.lambda_max_plus = b.wplus_eigs[0];
  b.lambda_max_minus = b.wminus_eigs[0];
  b.sigma = b.R - 6.0 * std::max(b.lambda_max_plus, b.lambda_max_minus);
  b.sigma_plus = b.R - 6.0 * b.lambda_max_plus;

  const Vec3 ap = sorted_eigenvalues(b.A);
  const Vec3 cm = sorted_eigenvalues(b.C);
  b.pic_margin = std::min(ap[1] + ap[2], cm[1] + cm[2]);
  b.p_plus_min = b.R / 6.0 - b.wplus_eigs[0];
  b.p_minus_min = b.R / 6.0 - b.wminus_eigs[0];
  return b;
}

CurvatureBlocks decompose(const CurvaturePoint& curv) { return decompose(curv, curv.orientation); }

const char* to_string(PicVerdict v) {
  switch (v) {
    case PicVerdict::Positive: return "positive";
    case PicVerdict::NonnegativeDegenerate: return "nonnegative-degenerate";
    case PicVerdict::Indefinite: return "indefinite";
  }
  return "unknown";
}

PicResult pic_verdict(const CurvatureBlocks& blocks) {
  PicResult r;
  r.margin = blocks.pic_margin;
  r.tolerance = 1e-8 * std::max(1.0, std::abs(blocks.R));
  if (r.margin > r.tolerance) r.verdict = PicVerdict::Positive;
  else if (std::abs(r.margin) <= r.tolerance) r.verdict = PicVerdict::NonnegativeDegenerate;
  else r.verdict = PicVerdict::Indefinite;
  return r;
}

}  // namespace conformal4
