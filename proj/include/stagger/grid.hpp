// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "stagger/field.hpp"

namespace stagger {

enum class Boundary { dirichlet, neumann, traction };

inline const char* to_string(Boundary b) {
  switch (b) {
  case Boundary::dirichlet: return "dirichlet";
  case Boundary::neumann: return "neumann";
  case Boundary::traction: return "traction";
  }
  return "?";
}

// Side order: left, right, bottom, top. 1D grids use only the first two.
struct Grid {
  int dim = 1;
  int nx = 2;
  int ny = 1;
  double h = 1.0;
  std::array<Boundary, 4> sides{Boundary::dirichlet, Boundary::dirichlet, Boundary::dirichlet,
                                Boundary::dirichlet};
  bool operator==(const Grid&) const = default;
};

// Isotropic moduli. In 1D only `K` is used, as the scalar modulus.
struct Moduli {
  double K = 1.0;
  double G = 0.0;
  bool operator==(const Moduli&) const = default;
};

enum class Component { scalar, xx, yy, xy };

// A stress point group holds the tensor components that share one location.
struct StressGroup {
  std::array<int, 2> dof{-1, -1};
  int size = 1;
  double area = 0.0;         // quadrature weight without the shear multiplicity
  int point = -1;            // scalar point co-located with the trace, -1 for shear vertices
  std::vector<int> cells;    // scalar points averaged onto this group
};

struct Edge {
  int a;
  int b;
  double c; // edge measure divided by h^2
};

class Discretization {
public:
  static Discretization build(const Grid& grid, const Moduli& moduli, double rho) {
    if (grid.dim != 1 && grid.dim != 2)
      throw Error(ErrorKind::config, "grid.dim: only 1 and 2 are supported");
    if (grid.nx < 2 || (grid.dim == 2 && grid.ny < 2))
      throw Error(ErrorKind::config, "grid.nx: at least 2 cells per direction are required");
    if (!(grid.h > 0.0)) throw Error(ErrorKind::config, "grid.h: spacing must be positive");
    if (!(rho > 0.0)) throw Error(ErrorKind::config, "material.rho: density must be positive");
    if (!(moduli.K > 0.0)) throw Error(ErrorKind::config, "material.K: modulus must be positive");
    if (grid.dim == 2 && !(moduli.G > 0.0))
      throw Error(ErrorKind::config, "material.G: shear modulus must be positive in 2D");
    Discretization d;
    d.grid_ = grid;
    d.moduli_ = moduli;
    d.rho_ = rho;
    if (grid.dim == 1)
      d.build_1d();
    else
      d.build_2d();
    d.finish();
    return d;
  }

  const Grid& grid() const { return grid_; }
  const Moduli& moduli() const { return moduli_; }
  double rho() const { return rho_; }
  int dim() const { return grid_.dim; }
  double h() const { return grid_.h; }
  std::size_t nv() const { return mass_.size(); }
  std::size_t ns() const { return sw_.size(); }
  std::size_t npoints() const { return pw_.size(); }
  const Field& mass() const { return mass_; }
  const Field& stress_weights() const { return sw_; }
  const Field& point_weights() const { return pw_; }
  const std::vector<Component>& components() const { return comp_; }
  const std::vector<StressGroup>& groups() const { return groups_; }
  const std::vector<int>& group_of() const { return group_of_; }
  const std::vector<Edge>& point_edges() const { return pedges_; }
  const std::vector<Edge>& stress_edges() const { return sedges_; }

  // Eigenvalue of the moduli tensor on spherical and deviatoric tensors.
  double c_sph() const { return grid_.dim == 1 ? moduli_.K : grid_.dim * moduli_.K; }
  double c_dev() const { return 2.0 * moduli_.G; }

  Field apply_E(const Field& v) const {
    require_size(v, nv(), "velocity");
    Field e(ns(), 0.0);
    for (std::size_t r = 0; r < ns(); ++r) {
      double s = 0.0;
      for (int p = eptr_[r]; p < eptr_[r + 1]; ++p) s += eval_[p] * v[ecol_[p]];
      e[r] = s;
    }
    return e;
  }

  // Exact weighted transpose: <S, E v>_W = <apply_E_adjoint(S), v> (plain sum).
  Field apply_E_adjoint(const Field& S) const {
    require_size(S, ns(), "stress");
    Field f(nv(), 0.0);
    for (std::size_t r = 0; r < ns(); ++r) {
      const double ws = sw_[r] * S[r];
      for (int p = eptr_[r]; p < eptr_[r + 1]; ++p) f[ecol_[p]] += eval_[p] * ws;
    }
    return f;
  }

  Field sph(const Field& s) const {
    require_size(s, ns(), "stress");
    Field r(ns(), 0.0);
    for (const auto& g : groups_) {
      if (g.point < 0) continue;
      if (g.size == 1) {
        r[g.dof[0]] = s[g.dof[0]];
      } else {
        const double m = 0.5 * (s[g.dof[0]] + s[g.dof[1]]);
        r[g.dof[0]] = m;
        r[g.dof[1]] = m;
      }
    }
    return r;
  }

  Field dev(const Field& s) const { return add(s, sph(s), -1.0); }

  Field apply_C(const Field& e) const { return iso_apply(e, c_sph(), c_dev()); }
  Field apply_C_inv(const Field& s) const {
    return iso_apply(s, 1.0 / c_sph(), grid_.dim == 1 ? 0.0 : 1.0 / c_dev());
  }
  // The moduli act pointwise and symmetrically and all components of a group share a weight.
  Field apply_C_adjoint(const Field& e) const { return apply_C(e); }
  Field apply_I(const Field& s) const {
    require_size(s, ns(), "stress");
    return s;
  }

  // Applies a*sph + b*dev pointwise.
  Field iso_apply(const Field& x, double a, double b) const {
    Field sp = sph(x);
    Field r(ns());
    for (std::size_t i = 0; i < ns(); ++i) r[i] = a * sp[i] + b * (x[i] - sp[i]);
    return r;
  }

  // Weighted-transpose of the componentwise difference operator on the stress layout,
  // returned as a stress field (Riesz representative in the weighted product).
  Field laplacian_stress(const Field& s) const {
    require_size(s, ns(), "stress");
    Field r(ns(), 0.0);
    for (const auto& e : sedges_) {
      const double f = e.c * (s[e.a] - s[e.b]);
      r[e.a] -= f;
      r[e.b] += f;
    }
    for (std::size_t i = 0; i < ns(); ++i) r[i] /= sw_[i];
    return r;
  }

  // Trace per scalar point.
  Field point_trace(const Field& s) const {
    require_size(s, ns(), "stress");
    Field t(npoints(), 0.0);
    for (const auto& g : groups_) {
      if (g.point < 0) continue;
      t[g.point] = s[g.dof[0]] + (g.size == 2 ? s[g.dof[1]] : 0.0);
    }
    return t;
  }

  // Inverse of point_trace's adjoint: spreads a point scalar as c*I onto the stress layout.
  Field point_identity(const Field& c) const {
    require_size(c, npoints(), "point field");
    Field s(ns(), 0.0);
    for (const auto& g : groups_) {
      if (g.point < 0) continue;
      s[g.dof[0]] = c[g.point];
      if (g.size == 2) s[g.dof[1]] = c[g.point];
    }
    return s;
  }

  // Euclidean covector of the point Dirichlet form: sum_e c_e (a_i - a_j)(b_i - b_j).
  Field point_stiffness(const Field& a) const {
    require_size(a, npoints(), "point field");
    Field r(npoints(), 0.0);
    for (const auto& e : pedges_) {
      const double f = e.c * (a[e.a] - a[e.b]);
      r[e.a] += f;
      r[e.b] -= f;
    }
    return r;
  }

  double point_gradient_form(const Field& a, const Field& b) const {
    double s = 0.0;
    for (const auto& e : pedges_) s += e.c * (a[e.a] - a[e.b]) * (b[e.a] - b[e.b]);
    return s;
  }

  // Tensor norm squared of the group's components (shear counted twice).
  double group_norm2(const StressGroup& g, const Field& x) const {
    double s = 0.0;
    for (int k = 0; k < g.size; ++k) {
      const int j = g.dof[k];
      s += (comp_[j] == Component::xy ? 2.0 : 1.0) * x[j] * x[j];
    }
    return s;
  }

  // Position of a velocity DOF (x, y) and of a stress DOF, for initial data.
  std::array<double, 2> velocity_position(std::size_t i) const { return vpos_[i]; }
  int velocity_direction(std::size_t i) const { return vdir_[i]; }
  std::array<double, 2> stress_position(std::size_t j) const { return spos_[j]; }
  std::array<double, 2> point_position(std::size_t p) const { return ppos_[p]; }

  // Covector of a normal traction g[side] on the traction sides (outward normal).
  Field traction_covector(const std::array<double, 4>& g) const {
    Field f(nv(), 0.0);
    for (int side = 0; side < 2 * grid_.dim; ++side) {
      if (grid_.sides[side] != Boundary::traction) continue;
      const double normal = (side % 2 == 0) ? -1.0 : 1.0;
      for (int i : side_dofs_[side]) f[i] += normal * g[side] * side_measure_;
    }
    return f;
  }
  const std::vector<int>& side_dofs(int side) const { return side_dofs_[side]; }

private:
  Grid grid_;
  Moduli moduli_;
  double rho_ = 1.0;
  Field mass_, sw_, pw_;
  std::vector<Component> comp_;
  std::vector<StressGroup> groups_;
  std::vector<int> group_of_;
  std::vector<Edge> pedges_, sedges_;
  std::vector<std::array<double, 2>> vpos_, spos_, ppos_;
  std::vector<int> vdir_;
  std::array<std::vector<int>, 4> side_dofs_; // normal velocity DOFs touching each side
  double side_measure_ = 1.0;
  // E in row-compressed form, one row per stress DOF
  std::vector<int> eptr_{0}, ecol_;
  std::vector<double> eval_;

  void push_row(const std::vector<std::pair<int, double>>& entries) {
    for (const auto& [c, v] : entries) {
      if (c < 0 || v == 0.0) continue;
      ecol_.push_back(c);
      eval_.push_back(v);
    }
    eptr_.push_back(static_cast<int>(ecol_.size()));
  }

  int add_stress(Component c, double weight, std::array<double, 2> pos) {
    comp_.push_back(c);
    sw_.push_back(weight);
    spos_.push_back(pos);
    return static_cast<int>(sw_.size()) - 1;
  }

  void build_1d() {
    const int n = grid_.nx;
    const double h = grid_.h;
    const bool dl = grid_.sides[0] == Boundary::dirichlet;
    const bool dr = grid_.sides[1] == Boundary::dirichlet;
    side_dofs_[0] = {0};
    side_dofs_[1] = {n - 1};
    side_measure_ = 1.0;
    for (int i = 0; i < n; ++i) {
      mass_.push_back(rho_ * h);
      vpos_.push_back({(i + 0.5) * h, 0.0});
      vdir_.push_back(0);
    }
    for (int j = 0; j <= n; ++j) {
      const bool boundary = (j == 0 || j == n);
      if (j == 0 && !dl) continue;
      if (j == n && !dr) continue;
      const int s = add_stress(Component::scalar, boundary ? 0.5 * h : h, {j * h, 0.0});
      // The clamped wall sits on the boundary node, half a cell from the adjacent velocity.
      if (j == 0)
        push_row({{0, 2.0 / h}});
      else if (j == n)
        push_row({{n - 1, -2.0 / h}});
      else
        push_row({{j, 1.0 / h}, {j - 1, -1.0 / h}});
      StressGroup g;
      g.dof = {s, -1};
      g.size = 1;
      g.area = sw_[s];
      g.point = static_cast<int>(pw_.size());
      g.cells = {g.point};
      groups_.push_back(g);
      pw_.push_back(sw_[s]);
      ppos_.push_back(spos_[s]);
    }
    for (std::size_t j = 0; j + 1 < sw_.size(); ++j) {
      sedges_.push_back({static_cast<int>(j), static_cast<int>(j + 1), 1.0 / h});
      pedges_.push_back({static_cast<int>(j), static_cast<int>(j + 1), 1.0 / h});
    }
  }

  void build_2d() {
    const int nx = grid_.nx, ny = grid_.ny;
    const double h = grid_.h, h2 = h * h;
    const bool dL = grid_.sides[0] == Boundary::dirichlet;
    const bool dR = grid_.sides[1] == Boundary::dirichlet;
    const bool dB = grid_.sides[2] == Boundary::dirichlet;
    const bool dT = grid_.sides[3] == Boundary::dirichlet;
    side_measure_ = h;

    // velocity DOFs: v_x on vertical edges, v_y on horizontal edges
    std::vector<int> vx((nx + 1) * ny, -1), vy(nx * (ny + 1), -1);
    auto VX = [&](int i, int j) -> int& { return vx[j * (nx + 1) + i]; };
    auto VY = [&](int i, int j) -> int& { return vy[j * nx + i]; };
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        if ((i == 0 && dL) || (i == nx && dR)) continue;
        VX(i, j) = static_cast<int>(mass_.size());
        if (i == 0 || i == nx) side_dofs_[i == 0 ? 0 : 1].push_back(VX(i, j));
        mass_.push_back(rho_ * h2 * ((i == 0 || i == nx) ? 0.5 : 1.0));
        vpos_.push_back({i * h, (j + 0.5) * h});
        vdir_.push_back(0);
      }
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if ((j == 0 && dB) || (j == ny && dT)) continue;
        VY(i, j) = static_cast<int>(mass_.size());
        if (j == 0 || j == ny) side_dofs_[j == 0 ? 2 : 3].push_back(VY(i, j));
        mass_.push_back(rho_ * h2 * ((j == 0 || j == ny) ? 0.5 : 1.0));
        vpos_.push_back({(i + 0.5) * h, j * h});
        vdir_.push_back(1);
      }

    // normal components at cell centres
    std::vector<int> cxx(nx * ny), cyy(nx * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::array<double, 2> pos{(i + 0.5) * h, (j + 0.5) * h};
        const int a = add_stress(Component::xx, h2, pos);
        push_row({{VX(i + 1, j), 1.0 / h}, {VX(i, j), -1.0 / h}});
        const int b = add_stress(Component::yy, h2, pos);
        push_row({{VY(i, j + 1), 1.0 / h}, {VY(i, j), -1.0 / h}});
        const int c = j * nx + i;
        cxx[c] = a;
        cyy[c] = b;
        StressGroup g;
        g.dof = {a, b};
        g.size = 2;
        g.area = h2;
        g.point = c;
        g.cells = {c};
        groups_.push_back(g);
        pw_.push_back(h2);
        ppos_.push_back(pos);
      }

    // shear at vertices; traction-free sides drop their boundary vertices
    std::vector<int> vxy((nx + 1) * (ny + 1), -1);
    auto XY = [&](int i, int j) -> int& { return vxy[j * (nx + 1) + i]; };
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const bool bi = (i == 0 || i == nx), bj = (j == 0 || j == ny);
        if ((i == 0 && !dL) || (i == nx && !dR) || (j == 0 && !dB) || (j == ny && !dT)) continue;
        const double area = h2 * (bi ? 0.5 : 1.0) * (bj ? 0.5 : 1.0);
        const int s = add_stress(Component::xy, 2.0 * area, {i * h, j * h});
        XY(i, j) = s;
        std::vector<std::pair<int, double>> row;
        // d v_x / d y, antisymmetric ghost across a clamped wall
        if (j == 0)
          row.push_back({VX(i, 0), 0.5 * 2.0 / h});
        else if (j == ny)
          row.push_back({VX(i, ny - 1), -0.5 * 2.0 / h});
        else {
          row.push_back({VX(i, j), 0.5 / h});
          row.push_back({VX(i, j - 1), -0.5 / h});
        }
        if (i == 0)
          row.push_back({VY(0, j), 0.5 * 2.0 / h});
        else if (i == nx)
          row.push_back({VY(nx - 1, j), -0.5 * 2.0 / h});
        else {
          row.push_back({VY(i, j), 0.5 / h});
          row.push_back({VY(i - 1, j), -0.5 / h});
        }
        push_row(row);
        StressGroup g;
        g.dof = {s, -1};
        g.size = 1;
        g.area = area;
        g.point = -1;
        for (int cj = j - 1; cj <= j; ++cj)
          for (int ci = i - 1; ci <= i; ++ci)
            if (ci >= 0 && ci < nx && cj >= 0 && cj < ny) g.cells.push_back(cj * nx + ci);
        groups_.push_back(g);
      }

    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int c = j * nx + i;
        if (i + 1 < nx) {
          const int r = c + 1;
          pedges_.push_back({c, r, 1.0});
          sedges_.push_back({cxx[c], cxx[r], 1.0});
          sedges_.push_back({cyy[c], cyy[r], 1.0});
        }
        if (j + 1 < ny) {
          const int u = c + nx;
          pedges_.push_back({c, u, 1.0});
          sedges_.push_back({cxx[c], cxx[u], 1.0});
          sedges_.push_back({cyy[c], cyy[u], 1.0});
        }
      }
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const int a = XY(i, j);
        if (a < 0) continue;
        if (i + 1 <= nx && XY(i + 1, j) >= 0)
          sedges_.push_back({a, XY(i + 1, j), 2.0 * ((j == 0 || j == ny) ? 0.5 : 1.0)});
        if (j + 1 <= ny && XY(i, j + 1) >= 0)
          sedges_.push_back({a, XY(i, j + 1), 2.0 * ((i == 0 || i == nx) ? 0.5 : 1.0)});
      }
  }

  void finish() {
    group_of_.assign(ns(), -1);
    for (std::size_t g = 0; g < groups_.size(); ++g)
      for (int k = 0; k < groups_[g].size; ++k) group_of_[groups_[g].dof[k]] = static_cast<int>(g);
  }
};

} // namespace stagger
