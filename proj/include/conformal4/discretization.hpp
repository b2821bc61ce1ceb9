#pragma once

// Grids carrying conformal factors: a spectral periodic grid for flat tori and
// a finite-volume line for metrics A(t)^2 dt^2 + B(t)^2 g_{S^3} with functions
// of t only (circle-reduced S^3 x S^1, polar-reduced S^4, glued necks).

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conformal4/integration.hpp"
#include "conformal4/manifold.hpp"

namespace conformal4 {

using Field = Eigen::VectorXd;

enum class DiscretizationKind { TorusGrid4D, CircleReducedS3xS1, PolarReducedS4, WarpedLine };
const char* to_string(DiscretizationKind kind);

class Discretization {
 public:
  virtual ~Discretization() = default;

  DiscretizationKind kind() const { return kind_; }
  std::size_t size() const { return static_cast<std::size_t>(measure_.size()); }
  // Node measures dv; they sum to the volume.
  const Field& measure() const { return measure_; }
  // sigma_g = R - f(W) and R at the nodes.
  const Field& sigma() const { return sigma_; }
  const Field& scalar() const { return scalar_; }
  double volume() const { return measure_.sum(); }
  SigmaMode mode() const { return mode_; }

  // Laplace-Beltrami operator, self-adjoint for the node measures.
  virtual Field laplacian(const Field& u) const = 0;
  // Integral of |grad u|^2, equal to -<u, laplacian(u)>.
  virtual double dirichlet_energy(const Field& u) const = 0;
  // Returns a solver for (-6 laplacian + c) x = r, c > 0.
  virtual std::function<Field(const Field&)> shifted_solver(double c) const = 0;
  // Same with a node-wise potential v > 0 in place of c.
  virtual std::function<Field(const Field&)> potential_solver(const Field& v) const = 0;
  // Representative coordinate of node i (first chart axis).
  virtual double coordinate(std::size_t i) const = 0;
  virtual std::string describe() const = 0;

  double integral(const Field& f) const { return measure_.dot(f); }

 protected:
  DiscretizationKind kind_ = DiscretizationKind::WarpedLine;
  SigmaMode mode_ = SigmaMode::Full;
  Field measure_;
  Field sigma_;
  Field scalar_;
};

// Flat torus with periods L_a on an n0 x n1 x n2 x n3 grid (any n_a >= 1);
// node j_a sits at x_a = j_a L_a / n_a. Derivatives are spectral.
class TorusGrid : public Discretization {
 public:
  TorusGrid(const Vec4& periods, const std::array<int, 4>& shape);

  Field laplacian(const Field& u) const override;
  double dirichlet_energy(const Field& u) const override;
  std::function<Field(const Field&)> shifted_solver(double c) const override;
  // Spectral diagonalization needs a constant shift; uses max v.
  std::function<Field(const Field&)> potential_solver(const Field& v) const override;
  double coordinate(std::size_t i) const override { return point(i)[0]; }
  std::string describe() const override;

  Vec4 point(std::size_t i) const;
  const std::array<int, 4>& shape() const { return shape_; }
  const Vec4& periods() const { return periods_; }

 private:
  Field apply_axes(const std::array<const Eigen::MatrixXd*, 4>& ops, const Field& u) const;

  Vec4 periods_;
  std::array<int, 4> shape_;
  std::array<Eigen::MatrixXd, 4> d2_;     // spectral second derivative per axis
  std::array<Eigen::MatrixXd, 4> basis_;  // orthonormal real Fourier basis (columns)
  std::array<Eigen::VectorXd, 4> eig_;    // eigenvalues of d2_ in that basis
};

// Cell-centred finite volumes on [t0, t1] for u = u(t). Fluxes use
// 2 pi^2 B^3 / A at cell faces; cell measures integrate 2 pi^2 A B^3 exactly
// up to a 4-point Gauss rule. Non-periodic ends carry zero flux (poles, where
// B vanishes, and reflecting ends otherwise).
class WarpedLine : public Discretization {
 public:
  WarpedLine(std::string name, WarpFunction warp, Interval t_range, bool periodic, int cells,
             SigmaMode mode = SigmaMode::Full, DiscretizationKind kind = DiscretizationKind::WarpedLine);

  Field laplacian(const Field& u) const override;
  double dirichlet_energy(const Field& u) const override;
  std::function<Field(const Field&)> shifted_solver(double c) const override;
  std::function<Field(const Field&)> potential_solver(const Field& v) const override;
  double coordinate(std::size_t i) const override { return t0_ + (static_cast<double>(i) + 0.5) * h_; }
  std::string describe() const override;

  double step() const { return h_; }
  bool periodic() const { return periodic_; }
  const Interval& range() const { return range_; }
  const WarpFunction& warp() const { return warp_; }
  // Face conductances 2 pi^2 B^3 / (A h); face j lies at t0 + j h.
  const Field& conductance() const { return face_k_; }
  // A(t) and B(t).
  std::pair<double, double> warp_at(double t) const;

 private:
  std::string name_;
  WarpFunction warp_;
  Interval range_;
  bool periodic_;
  double t0_, h_;
  Field face_k_;
};

std::unique_ptr<TorusGrid> make_torus_grid(const ManifoldSpec& spec, const std::array<int, 4>& shape);
// S^3(r) x S^1_L with u depending on the circle coordinate.
std::unique_ptr<WarpedLine> make_circle_reduced_s3xs1(const ManifoldSpec& spec, int cells,
                                                      SigmaMode mode = SigmaMode::Full);
// S^4(r) with u depending on the polar angle.
std::unique_ptr<WarpedLine> make_polar_reduced_s4(const ManifoldSpec& spec, int cells,
                                                  SigmaMode mode = SigmaMode::Full);
// Dispatches on the catalog kind; resolution is the grid size per torus axis
// or the cell count of the reduced line. Other kinds throw PreconditionError.
std::unique_ptr<Discretization> make_discretization(const ManifoldSpec& spec, int resolution,
                                                    SigmaMode mode = SigmaMode::Full);

}  // namespace conformal4
