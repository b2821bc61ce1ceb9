#include "conformal4/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "conformal4/errors.hpp"

namespace conformal4 {

namespace {

std::string describe(const Vec4& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ")";
  return os.str();
}

}  // namespace

MetricJet evaluate_jet(const ChartDomain& chart, const Vec4& x) {
  if (!chart.contains(x))
    throw DomainError("point " + describe(x) + " is outside chart '" + chart.name + "'");

  Point4J p;
  for (int a = 0; a < 4; ++a) p[a] = Jet4::variable(x[a], a);
  const MetricMatrixJ m = chart.metric(p);

  MetricJet jet;
  jet.x = x;
  double scale = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Jet4& e = m[i][j];
      if (!std::isfinite(e.v))
        throw MetricDegeneracyError("non-finite metric coefficient at " + describe(x));
      jet.g(i, j) = e.v;
      scale = std::max(scale, std::abs(e.v));
      for (int k = 0; k < 4; ++k) {
        jet.dg_[(k * 4 + i) * 4 + j] = e.d[k];
        for (int l = 0; l < 4; ++l) jet.ddg_[((l * 4 + k) * 4 + i) * 4 + j] = e.hess(l, k);
      }
    }

  const double tol = 1e-14 * std::max(1.0, scale);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(jet.g(i, j) - jet.g(j, i)) > tol)
        throw MetricDegeneracyError("metric is not symmetric at " + describe(x));

  Eigen::LLT<Mat4> llt(jet.g);
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0))
    throw MetricDegeneracyError("metric is not positive definite at " + describe(x) + " in chart '" +
                                chart.name + "'");
  jet.g_inv = llt.solve(Mat4::Identity());
  jet.g_inv = 0.5 * (jet.g_inv + jet.g_inv.transpose());
  return jet;
}

MetricJet evaluate_jet(const ManifoldSpec& spec, int chart, const Vec4& x) {
  if (chart < 0 || chart >= static_cast<int>(spec.charts.size()))
    throw DomainError("chart index " + std::to_string(chart) + " out of range for '" + spec.name + "'");
  return evaluate_jet(spec.charts[chart], x);
}

namespace {

// Gamma_{m ij} = 1/2 (d_i g_jm + d_j g_im - d_m g_ij)
double gamma_lower(const MetricJet& jet, int m, int i, int j) {
  return 0.5 * (jet.dg(i, j, m) + jet.dg(j, i, m) - jet.dg(m, i, j));
}

double dgamma_lower(const MetricJet& jet, int l, int m, int i, int j) {
  return 0.5 * (jet.ddg(l, i, j, m) + jet.ddg(l, j, i, m) - jet.ddg(l, m, i, j));
}

}  // namespace

Christoffel christoffel(const MetricJet& jet) {
  std::array<double, 64> low{};
  for (int m = 0; m < 4; ++m)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) low[(m * 4 + i) * 4 + j] = gamma_lower(jet, m, i, j);
  Christoffel gam;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int m = 0; m < 4; ++m) s += jet.g_inv(k, m) * low[(m * 4 + i) * 4 + j];
        gam(k, i, j) = s;
      }
  return gam;
}

Mat4 orthonormal_frame(const Mat4& g, int orientation, const std::array<int, 4>& order) {
  Mat4 e = Mat4::Zero();
  for (int n = 0; n < 4; ++n) {
    Eigen::Vector4d v = Eigen::Vector4d::Zero();
    v[order[n]] = 1.0;
    // Modified Gram-Schmidt, repeated once for stability.
    for (int pass = 0; pass < 2; ++pass)
      for (int p = 0; p < n; ++p) {
        const Eigen::Vector4d ep = e.row(p).transpose();
        v -= (ep.dot(g * v)) * ep;
      }
    const double norm = std::sqrt(v.dot(g * v));
    e.row(n) = v.transpose() / norm;
  }
  const int sign = e.determinant() > 0.0 ? 1 : -1;
  if (sign != (orientation >= 0 ? 1 : -1)) e.row(3) *= -1.0;
  return e;
}

Riemann riemann_from_christoffel(const MetricJet& jet) {
  const Christoffel gam = christoffel(jet);

  // d_l g^{km} = -g^{ka} d_l g_ab g^{bm}
  std::array<Mat4, 4> dginv;
  for (int l = 0; l < 4; ++l) {
    Mat4 d;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) d(a, b) = jet.dg(l, a, b);
    dginv[l] = -jet.g_inv * d * jet.g_inv;
  }

  // dgam[l][k][i][j] = d_l Gamma^k_ij
  std::array<double, 256> dgam{};
  for (int l = 0; l < 4; ++l)
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
          double s = 0.0;
          for (int m = 0; m < 4; ++m)
            s += dginv[l](k, m) * gamma_lower(jet, m, i, j) + jet.g_inv(k, m) * dgamma_lower(jet, l, m, i, j);
          dgam[((l * 4 + k) * 4 + i) * 4 + j] = s;
          dgam[((l * 4 + k) * 4 + j) * 4 + i] = s;
        }
  auto dG = [&](int l, int k, int i, int j) { return dgam[((l * 4 + k) * 4 + i) * 4 + j]; };

  // R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
  Riemann up;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = c + 1; d < 4; ++d) {
          double s = dG(c, a, d, b) - dG(d, a, c, b);
          for (int e = 0; e < 4; ++e) s += gam(a, c, e) * gam(e, d, b) - gam(a, d, e) * gam(e, c, b);
          up(a, b, c, d) = s;
          up(a, b, d, c) = -s;
        }
  Riemann low;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double s = 0.0;
          for (int e = 0; e < 4; ++e) s += jet.g(a, e) * up(e, b, c, d);
          low(a, b, c, d) = s;
        }
  return low;
}

namespace {

// First-order jet: value and gradient in the four coordinates.
struct D1 {
  double v = 0.0;
  std::array<double, 4> d{};
};

D1 operator+(D1 a, const D1& b) {
  a.v += b.v;
  for (int i = 0; i < 4; ++i) a.d[i] += b.d[i];
  return a;
}
D1 operator-(D1 a, const D1& b) {
  a.v -= b.v;
  for (int i = 0; i < 4; ++i) a.d[i] -= b.d[i];
  return a;
}
D1 operator*(const D1& a, const D1& b) {
  D1 r;
  r.v = a.v * b.v;
  for (int i = 0; i < 4; ++i) r.d[i] = a.v * b.d[i] + b.v * a.d[i];
  return r;
}
D1 operator*(double c, D1 a) {
  a.v *= c;
  for (auto& x : a.d) x *= c;
  return a;
}
D1 truncate(const Jet4& j) { return D1{j.v, j.d}; }

// R_ijkl = theta^a_i theta^b_j theta^c_k theta^d_l R_abcd
Riemann pull_back(const Riemann& f, const Mat4& theta) {
  Riemann t1, t2;
  for (int i = 0; i < 4; ++i)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double s = 0.0;
          for (int a = 0; a < 4; ++a) s += theta(a, i) * f(a, b, c, d);
          t1(i, b, c, d) = s;
        }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double s = 0.0;
          for (int b = 0; b < 4; ++b) s += theta(b, j) * t1(i, b, c, d);
          t2(i, j, c, d) = s;
        }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int d = 0; d < 4; ++d) {
          double s = 0.0;
          for (int c = 0; c < 4; ++c) s += theta(c, k) * t2(i, j, c, d);
          t1(i, j, k, d) = s;
        }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double s = 0.0;
          for (int d = 0; d < 4; ++d) s += theta(d, l) * t1(i, j, k, d);
          t2(i, j, k, l) = s;
        }
  return t2;
}

}  // namespace

CurvaturePoint curvature(const MetricJet& jet, int orientation, const std::array<int, 4>& frame_order) {
  const auto& P = frame_order;

  // Metric jets in the permuted coordinates y_i = x_{P[i]}.
  std::array<std::array<Jet4, 4>, 4> g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Jet4 e(jet.g(P[i], P[j]));
      for (int k = 0; k < 4; ++k) {
        e.d[k] = jet.dg(P[k], P[i], P[j]);
        for (int l = 0; l < 4; ++l) e.h[k * 4 + l] = jet.ddg(P[k], P[l], P[i], P[j]);
      }
      g[i][j] = e;
    }

  // Cholesky g = L L^T: the coframe is theta^a = L_ia dy^i and the
  // Gram-Schmidt frame is E = L^{-1} (row a holds e_a).
  std::array<std::array<Jet4, 4>, 4> L{}, E{};
  for (int j = 0; j < 4; ++j) {
    Jet4 s = g[j][j];
    for (int k = 0; k < j; ++k) s -= L[j][k] * L[j][k];
    if (!(s.v > 0.0)) throw MetricDegeneracyError("metric is not positive definite at " + describe(jet.x));
    L[j][j] = sqrt(s);
    const Jet4 inv = reciprocal(L[j][j]);
    for (int i = j + 1; i < 4; ++i) {
      Jet4 t = g[i][j];
      for (int k = 0; k < j; ++k) t -= L[i][k] * L[j][k];
      L[i][j] = t * inv;
    }
  }
  for (int j = 0; j < 4; ++j) E[j][j] = reciprocal(L[j][j]);
  for (int j = 0; j < 4; ++j) {
    for (int i = j + 1; i < 4; ++i) {
      Jet4 t(0.0);
      for (int k = j; k < i; ++k) t += L[i][k] * E[k][j];
      E[i][j] = -t * E[i][i];
    }
  }

  // Frame components of d theta: D[a][b][c] = d theta^a (e_b, e_c), with
  // d theta^a = sum_{j,i} d_j L_ia dy^j ^ dy^i.
  std::array<std::array<D1, 4>, 4> e1;
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 4; ++i) e1[a][i] = truncate(E[a][i]);
  auto dtheta = [&](int a, int j, int i) {  // d_j Theta^a_i as a first-order jet
    D1 r;
    r.v = L[i][a].d[j];
    for (int k = 0; k < 4; ++k) r.d[k] = L[i][a].hess(j, k);
    return r;
  };
  std::array<std::array<std::array<D1, 4>, 4>, 4> curl{};  // curl[a][j][i] = d_j Theta^a_i - d_i Theta^a_j
  for (int a = 0; a < 4; ++a)
    for (int j = 0; j < 4; ++j)
      for (int i = j + 1; i < 4; ++i) {
        curl[a][j][i] = dtheta(a, j, i) - dtheta(a, i, j);
        curl[a][i][j] = -1.0 * curl[a][j][i];
      }

  // C[a][b][c] = <[e_b, e_c], e_a> = -d theta^a(e_b, e_c)
  std::array<std::array<std::array<D1, 4>, 4>, 4> C{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c) {
        D1 s;
        for (int j = 0; j < 4; ++j)
          for (int i = 0; i < 4; ++i)
            if (i != j) s = s + curl[a][j][i] * e1[b][j] * e1[c][i];
        C[a][b][c] = -1.0 * s;
        C[a][c][b] = s;
      }

  // Gam[a][b][c] = <nabla_{e_b} e_c, e_a> = (C_abc - C_bca + C_cab) / 2
  std::array<std::array<std::array<D1, 4>, 4>, 4> Gam{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) Gam[a][b][c] = 0.5 * (C[a][b][c] - C[b][c][a] + C[c][a][b]);

  auto along = [&](int c, const D1& f) {  // e_c(f)
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += E[c][i].v * f.d[i];
    return s;
  };

  auto along_abs = [&](int c, const D1& f) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::abs(E[c][i].v * f.d[i]);
    return s;
  };

  // R_abcd = e_c(Gam_adb) - e_d(Gam_acb) + Gam_edb Gam_ace - Gam_ecb Gam_ade - C_ecd Gam_aeb
  Riemann rf;
  double magnitude = 0.0;  // largest sum of absolute terms, for the rounding scale
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = c + 1; d < 4; ++d) {
          double s = along(c, Gam[a][d][b]) - along(d, Gam[a][c][b]);
          double m = along_abs(c, Gam[a][d][b]) + along_abs(d, Gam[a][c][b]);
          for (int e = 0; e < 4; ++e) {
            const double t1 = Gam[e][d][b].v * Gam[a][c][e].v;
            const double t2 = Gam[e][c][b].v * Gam[a][d][e].v;
            const double t3 = C[e][c][d].v * Gam[a][e][b].v;
            s += t1 - t2 - t3;
            m += std::abs(t1) + std::abs(t2) + std::abs(t3);
          }
          rf(a, b, c, d) = s;
          rf(a, b, d, c) = -s;
          magnitude = std::max(magnitude, m);
        }

  CurvaturePoint cp;
  cp.x = jet.x;
  cp.g = jet.g;
  cp.g_inv = jet.g_inv;
  cp.orientation = orientation >= 0 ? 1 : -1;

  // Frame and coframe back in the original coordinates.
  Mat4 frame = Mat4::Zero(), theta = Mat4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 4; ++i) {
      frame(a, P[i]) = E[a][i].v;
      theta(a, P[i]) = L[i][a].v;
    }
  if ((frame.determinant() > 0.0 ? 1 : -1) != cp.orientation) {
    frame.row(3) *= -1.0;
    theta.row(3) *= -1.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) {
            const int n = (a == 3) + (b == 3) + (c == 3) + (d == 3);
            if (n & 1) rf(a, b, c, d) = -rf(a, b, c, d);
          }
  }
  cp.frame = frame;
  cp.frame_riem = rf;
  cp.rounding_scale = std::numeric_limits<double>::epsilon() * magnitude;

  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a) s += rf(a, b, a, d);
      cp.frame_ric(b, d) = s;
    }
  cp.frame_ric = 0.5 * (cp.frame_ric + cp.frame_ric.transpose()).eval();
  cp.scalar = cp.frame_ric.trace();
  cp.riem = pull_back(rf, theta);
  cp.ric = theta.transpose() * cp.frame_ric * theta;
  cp.ric0 = cp.ric - 0.25 * cp.scalar * jet.g;
  return cp;
}

CurvaturePoint curvature_at(const ManifoldSpec& spec, int chart, const Vec4& x) {
  return curvature(evaluate_jet(spec, chart, x), spec.orientation);
}

double CurvaturePoint::ric0_norm2() const {
  const Mat4 f = frame_ric - 0.25 * scalar * Mat4::Identity();
  return f.squaredNorm();
}

double CurvaturePoint::ric_norm2() const { return frame_ric.squaredNorm(); }

}  // namespace conformal4
