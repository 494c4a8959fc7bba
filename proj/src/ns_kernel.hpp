#pragma once

// Discrete steady operator of the rescaled thin-channel Navier-Stokes system in
// terrain-following coordinates. Templated on the scalar so the same code
// yields residuals (double) and exact Jacobian columns (Dual).
//
// Chain rule: d/dx|_Z = d/dx|_sigma - (sigma h'/h) d/dsigma,  d/dZ = (1/h) d/dsigma.

#include <cmath>

#include <Eigen/Core>

#include "reynolds_limit/dual.hpp"
#include "reynolds_limit/geometry.hpp"
#include "reynolds_limit/laws.hpp"
#include "reynolds_limit/thin_state.hpp"

namespace reylim::detail {

template <class S>
using Field = Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
struct NsFields {
  Field<S> rho;  // nx x ns
  Field<S> v;    // nx x ns
  Field<S> w;    // nx x (ns + 1)
};

struct NsContext {
  int nx = 0;
  int ns = 0;
  double dx = 0.0;
  double ds = 0.0;
  double eps = 0.0;
  double V = 0.0;
  double rho_b = 1.0;
  double rho_t = 1.0;
  double hyper4 = 0.0;
  const LawSet* laws = nullptr;
  Eigen::ArrayXd hc, hpc;   // h, h' at cell centers
  Eigen::ArrayXd hf, hpf;   // h, h' at x-faces
  Eigen::ArrayXd sig_c;     // ns cell levels
  Eigen::ArrayXd sig_l;     // ns + 1 face levels
  Eigen::ArrayXd couette;   // V (1 - sigma_j), the base profile the mass flux upwinds

  NsContext(const ThinGrid& g, const ThinGeometry& geom, const LawSet& l, double eps_,
            double hyper4_)
      : nx(g.nx), ns(g.ns), dx(g.dx()), ds(g.ds()), eps(eps_), V(geom.V), rho_b(geom.rho_b),
        rho_t(geom.rho_t), hyper4(hyper4_), laws(&l), hc(g.nx), hpc(g.nx), hf(g.nx),
        hpf(g.nx), sig_c(g.ns), sig_l(g.ns + 1), couette(g.ns) {
    for (int i = 0; i < nx; ++i) {
      hc[i] = geom.h(g.x_cell(i));
      hpc[i] = geom.h.slope(g.x_cell(i));
      hf[i] = geom.h(g.x_face(i));
      hpf[i] = geom.h.slope(g.x_face(i));
    }
    for (int j = 0; j < ns; ++j) {
      sig_c[j] = g.sigma_cell(j);
      couette[j] = V * (1.0 - sig_c[j]);
    }
    for (int k = 0; k <= ns; ++k) sig_l[k] = g.sigma_level(k);
  }

  int ip(int i) const { return i + 1 == nx ? 0 : i + 1; }
  int im(int i) const { return i == 0 ? nx - 1 : i - 1; }
};

// d/dsigma at cell level j of a cell-centered column; one-sided second order
// at the first and last rows (interior values only).
template <class S>
S dsig_cell(const Field<S>& f, int i, int j, int ns, double ds) {
  if (j == 0) return (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) / (2.0 * ds);
  if (j == ns - 1) return (3.0 * f(i, ns - 1) - 4.0 * f(i, ns - 2) + f(i, ns - 3)) / (2.0 * ds);
  return (f(i, j + 1) - f(i, j - 1)) / (2.0 * ds);
}

// d/dsigma at cell level j of a cell-centered column whose wall values are
// known (bottom at sigma = 0, top at sigma = 1); exact for quadratics.
template <class S, class Col>
S dsig_with_walls(const Col& c, int j, int ns, double ds, double bottom, double top) {
  if (j == 0) return (-4.0 * bottom + 3.0 * c(0) + c(1)) / (3.0 * ds);
  if (j == ns - 1) return (4.0 * top - 3.0 * c(ns - 1) - c(ns - 2)) / (3.0 * ds);
  return (c(j + 1) - c(j - 1)) / (2.0 * ds);
}

// d/dsigma of w at level k (w = 0 on both walls), one-sided at the walls.
template <class S>
S dsig_w_level(const Field<S>& w, int i, int k, int ns, double ds) {
  if (k == 0) return (-3.0 * w(i, 0) + 4.0 * w(i, 1) - w(i, 2)) / (2.0 * ds);
  if (k == ns) return (3.0 * w(i, ns) - 4.0 * w(i, ns - 1) + w(i, ns - 2)) / (2.0 * ds);
  return (w(i, k + 1) - w(i, k - 1)) / (2.0 * ds);
}

// d/dsigma of v on x-face i at level k; at the walls uses the Dirichlet values
// through a three-point stencil that is exact for quadratic profiles.
template <class S>
S dsig_v_level(const Field<S>& v, int i, int k, int ns, double ds, double V) {
  if (k == 0) return (-8.0 * V + 9.0 * v(i, 0) - v(i, 1)) / (3.0 * ds);
  if (k == ns) return (-9.0 * v(i, ns - 1) + v(i, ns - 2)) / (3.0 * ds);
  return (v(i, k) - v(i, k - 1)) / ds;
}

template <class S>
S fourth_difference(const S& a, const S& b, const S& c, const S& d, const S& e) {
  return a - 4.0 * b + 6.0 * c - 4.0 * d + e;
}

/// Evaluates the scaled steady residual. Output shapes match the inputs; the
/// wall rows of r.w are zero.
template <class S>
void ns_residual(const NsContext& c, const NsFields<S>& f, NsFields<S>& r) {
  using std::sqrt;
  const int nx = c.nx, ns = c.ns;
  const double dx = c.dx, ds = c.ds, e2 = c.eps * c.eps, e4 = e2 * e2;
  const LawSet& laws = *c.laws;
  const double mu_b = mu(laws, c.rho_b), mu_t = mu(laws, c.rho_t);

  Field<S> mu_c(nx, ns), lam_c(nx, ns), P_c(nx, ns), F(nx, ns), H(nx, ns);
  for (int j = 0; j < ns; ++j) {
    for (int i = 0; i < nx; ++i) {
      const S& rho = f.rho(i, j);
      mu_c(i, j) = mu(laws, rho);
      lam_c(i, j) = lambda_of(laws, rho);
      P_c(i, j) = pressure(laws, rho);
    }
  }

  // Cell-centered strain pieces: F = 2 mu dxv + lambda div, H = 2 mu dzw + lambda div.
  for (int i = 0; i < nx; ++i) {
    const int im = c.im(i);
    const double metric = c.hpc[i] / c.hc[i];
    auto vc = [&](int j) -> S { return 0.5 * (f.v(im, j) + f.v(i, j)); };
    for (int j = 0; j < ns; ++j) {
      const S dsv = dsig_with_walls<S>(vc, j, ns, ds, c.V, 0.0);
      const S dxv = (f.v(i, j) - f.v(im, j)) / dx - c.sig_c[j] * metric * dsv;
      const S dzw = (f.w(i, j + 1) - f.w(i, j)) / (c.hc[i] * ds);
      const S div = dxv + dzw;
      F(i, j) = 2.0 * mu_c(i, j) * dxv + lam_c(i, j) * div;
      H(i, j) = 2.0 * mu_c(i, j) * dzw + lam_c(i, j) * div;
    }
  }

  // Corner quantities at (x-face i, level k).
  Field<S> G(nx, ns + 1), Vflux(nx, ns + 1), J(nx, ns + 1);
  for (int i = 0; i < nx; ++i) {
    const int ip = c.ip(i);
    const double metric = c.hpf[i] / c.hf[i];
    for (int k = 0; k <= ns; ++k) {
      S mu_k;
      if (k == 0) {
        mu_k = S(mu_b);
      } else if (k == ns) {
        mu_k = S(mu_t);
      } else {
        mu_k = 0.25 * (mu_c(i, k - 1) + mu_c(i, k) + mu_c(ip, k - 1) + mu_c(ip, k));
      }
      const S dsw = 0.5 * (dsig_w_level(f.w, i, k, ns, ds) + dsig_w_level(f.w, ip, k, ns, ds));
      const S dxw = (f.w(ip, k) - f.w(i, k)) / dx - c.sig_l[k] * metric * dsw;
      const S dsv = dsig_v_level(f.v, i, k, ns, ds, c.V);
      G(i, k) = mu_k * dxw;
      Vflux(i, k) = mu_k * dsv;
      J(i, k) = mu_k * (dsv / c.hf[i] + e2 * dxw);
    }
  }

  // Horizontal momentum on x-faces.
  r.v.resize(nx, ns);
  for (int i = 0; i < nx; ++i) {
    const int ip = c.ip(i), im = c.im(i);
    const double hf = c.hf[i];
    const double metric = c.hpf[i] / hf;
    for (int j = 0; j < ns; ++j) {
      const double sig = c.sig_c[j];
      const S dxF = (F(ip, j) - F(i, j)) / dx -
                    sig * metric * 0.5 * (dsig_cell(F, i, j, ns, ds) + dsig_cell(F, ip, j, ns, ds));
      const S dxP = (P_c(ip, j) - P_c(i, j)) / dx -
                    sig * metric * 0.5 * (dsig_cell(P_c, i, j, ns, ds) + dsig_cell(P_c, ip, j, ns, ds));
      const S dzG = (G(i, j + 1) - G(i, j)) / (hf * ds);
      const S visc_z = (Vflux(i, j + 1) - Vflux(i, j)) / (hf * hf * ds);

      const S& vv = f.v(i, j);
      const S rho_f = 0.5 * (f.rho(i, j) + f.rho(ip, j));
      const S wbar = 0.25 * (f.w(i, j) + f.w(i, j + 1) + f.w(ip, j) + f.w(ip, j + 1));
      const S dxv_up = vv >= 0.0 ? (vv - f.v(im, j)) / dx : (f.v(ip, j) - vv) / dx;
      const S omega = wbar - sig * c.hpf[i] * vv;
      S dsv_up;
      if (omega >= 0.0) {
        dsv_up = j > 0 ? (vv - f.v(i, j - 1)) / ds : (vv - c.V) / (0.5 * ds);
      } else {
        dsv_up = j < ns - 1 ? (f.v(i, j + 1) - vv) / ds : (0.0 - vv) / (0.5 * ds);
      }
      const S conv = vv * dxv_up + omega / hf * dsv_up;
      const S speed = sqrt(vv * vv + e2 * wbar * wbar);
      const S drag = laws.r0 * rho_f * speed * vv;

      S res = e2 * (dxF + dzG - rho_f * conv - drag) + visc_z - dxP;
      if (c.hyper4 != 0.0) {
        const int im2 = c.im(im), ip2 = c.ip(ip);
        S d4 = fourth_difference(f.v(im2, j), f.v(im, j), vv, f.v(ip, j), f.v(ip2, j));
        if (j >= 2 && j <= ns - 3)
          d4 += fourth_difference(f.v(i, j - 2), f.v(i, j - 1), vv, f.v(i, j + 1), f.v(i, j + 2));
        res -= c.hyper4 * d4;
      }
      r.v(i, j) = res;
    }
  }

  // Vertical momentum on interior sigma-faces.
  r.w.resize(nx, ns + 1);
  for (int i = 0; i < nx; ++i) {
    const int ip = c.ip(i), im = c.im(i);
    const double hc = c.hc[i];
    const double metric = c.hpc[i] / hc;
    r.w(i, 0) = S(0.0);
    r.w(i, ns) = S(0.0);
    for (int k = 1; k < ns; ++k) {
      const double sig = c.sig_l[k];
      const S dzH = (H(i, k) - H(i, k - 1)) / (hc * ds);
      const S dsJ = 0.5 * ((J(i, k + 1) - J(i, k - 1)) + (J(im, k + 1) - J(im, k - 1))) / (2.0 * ds);
      const S dxJ = (J(i, k) - J(im, k)) / dx - sig * metric * dsJ;
      const S dzP = (P_c(i, k) - P_c(i, k - 1)) / (hc * ds);

      const S& ww = f.w(i, k);
      const S rho_w = 0.5 * (f.rho(i, k - 1) + f.rho(i, k));
      const S vbar = 0.25 * (f.v(im, k - 1) + f.v(im, k) + f.v(i, k - 1) + f.v(i, k));
      const S dxw_up = vbar >= 0.0 ? (ww - f.w(im, k)) / dx : (f.w(ip, k) - ww) / dx;
      const S omega = ww - sig * c.hpc[i] * vbar;
      const S dsw_up = omega >= 0.0 ? (ww - f.w(i, k - 1)) / ds : (f.w(i, k + 1) - ww) / ds;
      const S conv = vbar * dxw_up + omega / hc * dsw_up;
      const S speed = sqrt(vbar * vbar + e2 * ww * ww);
      const S drag = laws.r0 * rho_w * speed * ww;

      S res = e2 * (dzH + dxJ) - dzP - e4 * (rho_w * conv + drag);
      if (c.hyper4 != 0.0) {
        const int im2 = c.im(im), ip2 = c.ip(ip);
        S d4 = fourth_difference(f.w(im2, k), f.w(im, k), ww, f.w(ip, k), f.w(ip2, k));
        if (k >= 2 && k <= ns - 2)
          d4 += fourth_difference(f.w(i, k - 2), f.w(i, k - 1), ww, f.w(i, k + 1), f.w(i, k + 2));
        res -= c.hyper4 * d4;
      }
      r.w(i, k) = res;
    }
  }

  // Mass: -(1/h) [d_x|_sigma (h rho v) + d_sigma (rho (w - sigma h' v))].
  // The x-face flux upwinds the base Couette profile and centers the deviation.
  Field<S> Fx(nx, ns), Fs(nx, ns + 1);
  for (int i = 0; i < nx; ++i) {
    const int ip = c.ip(i);
    for (int j = 0; j < ns; ++j) {
      const S rho_mean = 0.5 * (f.rho(i, j) + f.rho(ip, j));
      const S& rho_up = c.V >= 0.0 ? f.rho(i, j) : f.rho(ip, j);
      Fx(i, j) = c.hf[i] * (rho_mean * (f.v(i, j) - c.couette[j]) + rho_up * c.couette[j]);
    }
  }
  for (int i = 0; i < nx; ++i) {
    const int im = c.im(i);
    Fs(i, 0) = S(0.0);
    Fs(i, ns) = S(0.0);
    for (int k = 1; k < ns; ++k) {
      const S rho_k = 0.5 * (f.rho(i, k - 1) + f.rho(i, k));
      const S vbar = 0.25 * (f.v(im, k - 1) + f.v(im, k) + f.v(i, k - 1) + f.v(i, k));
      Fs(i, k) = rho_k * (f.w(i, k) - c.sig_l[k] * c.hpc[i] * vbar);
    }
  }
  r.rho.resize(nx, ns);
  for (int i = 0; i < nx; ++i) {
    const int im = c.im(i);
    for (int j = 0; j < ns; ++j) {
      r.rho(i, j) = -((Fx(i, j) - Fx(im, j)) / dx + (Fs(i, j + 1) - Fs(i, j)) / ds) / c.hc[i];
    }
  }
}

}  // namespace reylim::detail
