#pragma once

#include "mpcc/model.hpp"

namespace mpcc {

/// Dimensions of a primal-dual iterate. Primal variables are ordered
/// (x0, x1, x2, s); the Scholtes slacks s and their rows exist only when
/// `slacks` is set. Constraint rows are ordered (c, Scholtes).
struct Layout {
  int n0 = 0;
  int n_cc = 0;
  int m = 0;
  bool slacks = false;

  int n() const { return n0 + 2 * n_cc; }
  int n_s() const { return slacks ? n_cc : 0; }
  int n_primal() const { return n() + n_s(); }
  int n_rows() const { return m + n_s(); }
  int x1(int i) const { return n0 + i; }
  int x2(int i) const { return n0 + n_cc + i; }
  int s(int i) const { return n() + i; }
};

/// One primal-dual snapshot. `p` holds (x, s), `y` holds (y_c, y_s) and
/// `z` holds the bound multipliers of `p` in the same order.
struct Iterate {
  Vec p;
  Vec y;
  Vec z;

  auto x(const Layout& l) const { return p.head(l.n()); }
  auto s(const Layout& l) const { return p.segment(l.n(), l.n_s()); }
  auto x0(const Layout& l) const { return p.head(l.n0); }
  auto x1(const Layout& l) const { return p.segment(l.n0, l.n_cc); }
  auto x2(const Layout& l) const { return p.segment(l.n0 + l.n_cc, l.n_cc); }
  auto y_c(const Layout& l) const { return y.head(l.m); }
  auto y_s(const Layout& l) const { return y.segment(l.m, l.n_s()); }
  auto z0(const Layout& l) const { return z.head(l.n0); }
  auto z1(const Layout& l) const { return z.segment(l.n0, l.n_cc); }
  auto z2(const Layout& l) const { return z.segment(l.n0 + l.n_cc, l.n_cc); }
  auto z_s(const Layout& l) const { return z.segment(l.n(), l.n_s()); }
};

}  // namespace mpcc
