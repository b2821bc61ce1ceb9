#include "conformal4/discretization.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Sparse>

#include "conformal4/errors.hpp"
#include "conformal4/geometry.hpp"

namespace conformal4 {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kS3Area = 2.0 * kPi * kPi;

// Applies m along one axis of a row-major n0 x n1 x n2 x n3 array.
Field apply_along(const Eigen::MatrixXd& m, int axis, const std::array<int, 4>& shape, const Field& in) {
  Field out(in.size());
  int stride = 1;
  for (int b = axis + 1; b < 4; ++b) stride *= shape[b];
  const int n = shape[axis];
  const int outer = static_cast<int>(in.size()) / (n * stride);
  Eigen::VectorXd line(n);
  for (int o = 0; o < outer; ++o)
    for (int s = 0; s < stride; ++s) {
      const int base = o * n * stride + s;
      for (int j = 0; j < n; ++j) line[j] = in[base + j * stride];
      const Eigen::VectorXd r = m * line;
      for (int j = 0; j < n; ++j) out[base + j * stride] = r[j];
    }
  return out;
}

double sigma_of(const CurvatureBlocks& b, SigmaMode mode) { return b.R - modified_f(b, mode); }

}  // namespace

const char* to_string(DiscretizationKind kind) {
  switch (kind) {
    case DiscretizationKind::TorusGrid4D: return "torus-grid-4d";
    case DiscretizationKind::CircleReducedS3xS1: return "circle-reduced-S3xS1";
    case DiscretizationKind::PolarReducedS4: return "polar-reduced-S4";
    case DiscretizationKind::WarpedLine: return "warped-line";
  }
  return "unknown";
}

TorusGrid::TorusGrid(const Vec4& periods, const std::array<int, 4>& shape) : periods_(periods), shape_(shape) {
  kind_ = DiscretizationKind::TorusGrid4D;
  std::size_t total = 1;
  double cell = 1.0;
  for (int a = 0; a < 4; ++a) {
    if (shape[a] < 1) throw PreconditionError("torus grid sizes must be positive");
    if (!(periods[a] > 0.0)) throw PreconditionError("torus periods must be positive");
    total *= static_cast<std::size_t>(shape[a]);
    cell *= periods[a] / shape[a];

    const int n = shape[a];
    Eigen::MatrixXd q(n, n);
    Eigen::VectorXd lam(n);
    const double w = 2.0 * kPi / periods[a];
    int col = 0;
    for (int j = 0; j < n; ++j) q(j, col) = 1.0 / std::sqrt(double(n));
    lam[col++] = 0.0;
    for (int k = 1; 2 * k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        q(j, col) = std::sqrt(2.0 / n) * std::cos(2.0 * kPi * k * j / n);
        q(j, col + 1) = std::sqrt(2.0 / n) * std::sin(2.0 * kPi * k * j / n);
      }
      lam[col] = lam[col + 1] = -(w * k) * (w * k);
      col += 2;
    }
    if (n % 2 == 0 && n > 1) {
      for (int j = 0; j < n; ++j) q(j, col) = (j % 2 == 0 ? 1.0 : -1.0) / std::sqrt(double(n));
      lam[col++] = -(w * n / 2) * (w * n / 2);
    }
    basis_[a] = q;
    eig_[a] = lam;
    d2_[a] = q * lam.asDiagonal() * q.transpose();
  }
  measure_ = Field::Constant(static_cast<Eigen::Index>(total), cell);
  sigma_ = Field::Zero(static_cast<Eigen::Index>(total));
  scalar_ = sigma_;
}

Vec4 TorusGrid::point(std::size_t i) const {
  Vec4 x{};
  for (int a = 3; a >= 0; --a) {
    const std::size_t j = i % static_cast<std::size_t>(shape_[a]);
    i /= static_cast<std::size_t>(shape_[a]);
    x[a] = periods_[a] * static_cast<double>(j) / shape_[a];
  }
  return x;
}

Field TorusGrid::apply_axes(const std::array<const Eigen::MatrixXd*, 4>& ops, const Field& u) const {
  Field v = u;
  for (int a = 0; a < 4; ++a)
    if (ops[a]) v = apply_along(*ops[a], a, shape_, v);
  return v;
}

Field TorusGrid::laplacian(const Field& u) const {
  Field out = Field::Zero(u.size());
  for (int a = 0; a < 4; ++a) {
    if (shape_[a] == 1) continue;
    std::array<const Eigen::MatrixXd*, 4> ops{};
    ops[a] = &d2_[a];
    out += apply_axes(ops, u);
  }
  return out;
}

double TorusGrid::dirichlet_energy(const Field& u) const { return -integral(u.cwiseProduct(laplacian(u))); }

std::function<Field(const Field&)> TorusGrid::shifted_solver(double c) const {
  if (!(c > 0.0)) throw PreconditionError("preconditioner shift must be positive");
  return [this, c](const Field& r) {
    std::array<Eigen::MatrixXd, 4> qt;
    std::array<const Eigen::MatrixXd*, 4> fwd{}, back{};
    for (int a = 0; a < 4; ++a) {
      qt[a] = basis_[a].transpose();
      fwd[a] = &qt[a];
      back[a] = &basis_[a];
    }
    Field v = apply_axes(fwd, r);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::size_t k = static_cast<std::size_t>(i);
      double lam = 0.0;
      for (int a = 3; a >= 0; --a) {
        lam += eig_[a][static_cast<Eigen::Index>(k % static_cast<std::size_t>(shape_[a]))];
        k /= static_cast<std::size_t>(shape_[a]);
      }
      v[i] /= c - 6.0 * lam;
    }
    return apply_axes(back, v);
  };
}

std::function<Field(const Field&)> TorusGrid::potential_solver(const Field& v) const {
  if (v.size() != measure_.size()) throw PreconditionError("potential size mismatch");
  return shifted_solver(v.maxCoeff());
}

std::string TorusGrid::describe() const {
  std::ostringstream os;
  os << "torus-grid-4d " << shape_[0] << "x" << shape_[1] << "x" << shape_[2] << "x" << shape_[3];
  return os.str();
}

WarpedLine::WarpedLine(std::string name, WarpFunction warp, Interval t_range, bool periodic, int cells,
                       SigmaMode mode, DiscretizationKind kind)
    : name_(std::move(name)), warp_(std::move(warp)), range_(t_range), periodic_(periodic) {
  kind_ = kind;
  mode_ = mode;
  if (cells < 3) throw PreconditionError("a warped line needs at least 3 cells");
  if (!(t_range.hi > t_range.lo)) throw PreconditionError("warped line range must satisfy lo < hi");
  t0_ = t_range.lo;
  h_ = t_range.length() / cells;

  measure_.resize(cells);
  sigma_.resize(cells);
  scalar_.resize(cells);
  std::vector<double> gx, gw;
  gauss_legendre(4, 0.0, 1.0, gx, gw);
  for (int i = 0; i < cells; ++i) {
    double m = 0.0;
    for (int q = 0; q < 4; ++q) {
      const auto [a, b] = warp_at(t0_ + (i + gx[q]) * h_);
      m += gw[q] * a * b * b * b;
    }
    measure_[i] = kS3Area * m * h_;
  }

  face_k_.resize(cells + 1);
  for (int j = 0; j <= cells; ++j) {
    const auto [a, b] = warp_at(t0_ + j * h_);
    face_k_[j] = kS3Area * b * b * b / (a * h_);
  }
  if (periodic_) {
    face_k_[cells] = face_k_[0];
  } else {
    face_k_[0] = 0.0;
    face_k_[cells] = 0.0;
  }

  const ChartDomain chart = make_warped_chart(name_, warp_, range_);
  for (int i = 0; i < cells; ++i) {
    const Vec4 x{coordinate(static_cast<std::size_t>(i)), kPi / 4, kPi, kPi};
    const CurvaturePoint cp = curvature(evaluate_jet(chart, x), 1);
    const CurvatureBlocks b = decompose(cp);
    scalar_[i] = cp.scalar;
    sigma_[i] = sigma_of(b, mode);
  }
}

std::pair<double, double> WarpedLine::warp_at(double t) const {
  const auto [a, b] = warp_(Jet4(t));
  return {a.v, b.v};
}

Field WarpedLine::laplacian(const Field& u) const {
  const Eigen::Index n = u.size();
  Field out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ip = (i + 1 == n) ? (periodic_ ? 0 : i) : i + 1;
    const Eigen::Index im = (i == 0) ? (periodic_ ? n - 1 : i) : i - 1;
    out[i] = (face_k_[i + 1] * (u[ip] - u[i]) - face_k_[i] * (u[i] - u[im])) / measure_[i];
  }
  return out;
}

double WarpedLine::dirichlet_energy(const Field& u) const {
  const Eigen::Index n = u.size();
  double e = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) e += face_k_[j] * (u[j] - u[j - 1]) * (u[j] - u[j - 1]);
  if (periodic_) e += face_k_[n] * (u[0] - u[n - 1]) * (u[0] - u[n - 1]);
  return e;
}

std::function<Field(const Field&)> WarpedLine::shifted_solver(double c) const {
  if (!(c > 0.0)) throw PreconditionError("preconditioner shift must be positive");
  return potential_solver(Field::Constant(measure_.size(), c));
}

std::function<Field(const Field&)> WarpedLine::potential_solver(const Field& v) const {
  if (v.size() != measure_.size()) throw PreconditionError("potential size mismatch");
  if (!(v.minCoeff() > 0.0)) throw PreconditionError("preconditioner potential must be positive");
  const Eigen::Index n = measure_.size();
  std::vector<Eigen::Triplet<double>> trip;
  auto couple = [&](Eigen::Index i, Eigen::Index j, double k) {
    trip.emplace_back(i, i, 6.0 * k);
    trip.emplace_back(j, j, 6.0 * k);
    trip.emplace_back(i, j, -6.0 * k);
    trip.emplace_back(j, i, -6.0 * k);
  };
  for (Eigen::Index j = 1; j < n; ++j) couple(j - 1, j, face_k_[j]);
  if (periodic_) couple(n - 1, 0, face_k_[n]);
  for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, v[i] * measure_[i]);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  auto solver = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(a);
  if (solver->info() != Eigen::Success) throw ConsistencyError("shifted operator factorization failed");
  Field m = measure_;
  return [solver, m](const Field& r) -> Field { return solver->solve(Field(m.cwiseProduct(r))); };
}

std::string WarpedLine::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind_) << " '" << name_ << "' cells=" << measure_.size() << " t=[" << range_.lo << ", "
     << range_.hi << "]" << (periodic_ ? " periodic" : "");
  return os.str();
}

std::unique_ptr<TorusGrid> make_torus_grid(const ManifoldSpec& spec, const std::array<int, 4>& shape) {
  if (spec.kind != ManifoldKind::FlatTorus4)
    throw PreconditionError("the spectral torus grid needs a flat-torus-4 manifold, got '" + spec.name + "'");
  const Vec4 periods{spec.param("L0"), spec.param("L1"), spec.param("L2"), spec.param("L3")};
  auto grid = std::make_unique<TorusGrid>(periods, shape);
  // Every axis is cyclic, so one evaluation covers all nodes.
  const ChartDomain& chart = spec.charts.at(0);
  const CurvaturePoint cp = curvature(evaluate_jet(chart, chart.reference_point), spec.orientation);
  const CurvatureBlocks b = decompose(cp);
  if (cp.scalar != 0.0 || sigma_of(b, SigmaMode::Full) != 0.0)
    throw ConsistencyError("flat torus metric has nonzero curvature");
  return grid;
}

std::unique_ptr<WarpedLine> make_circle_reduced_s3xs1(const ManifoldSpec& spec, int cells, SigmaMode mode) {
  if (spec.kind != ManifoldKind::ProductS3xS1)
    throw PreconditionError("circle reduction needs a product-S3xS1 manifold, got '" + spec.name + "'");
  const double r = spec.param("r");
  const double len = spec.param("L");
  return std::make_unique<WarpedLine>(
      "s3xs1", [r](const Jet4&) { return std::pair<Jet4, Jet4>(Jet4(1.0), Jet4(r)); }, Interval{0.0, len}, true,
      cells, mode, DiscretizationKind::CircleReducedS3xS1);
}

std::unique_ptr<WarpedLine> make_polar_reduced_s4(const ManifoldSpec& spec, int cells, SigmaMode mode) {
  if (spec.kind != ManifoldKind::RoundSphere4)
    throw PreconditionError("polar reduction needs a round-sphere-4 manifold, got '" + spec.name + "'");
  const double r = spec.param("r");
  return std::make_unique<WarpedLine>(
      "s4", [r](const Jet4& chi) { return std::pair<Jet4, Jet4>(Jet4(r), r * sin(chi)); }, Interval{0.0, kPi},
      false, cells, mode, DiscretizationKind::PolarReducedS4);
}

std::unique_ptr<Discretization> make_discretization(const ManifoldSpec& spec, int resolution, SigmaMode mode) {
  switch (spec.kind) {
    case ManifoldKind::FlatTorus4:
      return make_torus_grid(spec, {resolution, resolution, resolution, resolution});
    case ManifoldKind::ProductS3xS1:
      return make_circle_reduced_s3xs1(spec, resolution, mode);
    case ManifoldKind::RoundSphere4:
      return make_polar_reduced_s4(spec, resolution, mode);
    default:
      throw PreconditionError("no conformal-factor discretization for '" + spec.name +
                              "'; supported: flat-torus-4, product-S3xS1, round-sphere-4");
  }
}

}  // namespace conformal4
