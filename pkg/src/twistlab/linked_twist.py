"""Reduced two-dimensional dynamics on the flat band surface.

The invariant set of the composite twist reduces to a surface Y built from
horizontal bands A_I (twist supports of the odd spheres) and vertical bands
B_J (even spheres), glued at their ends.  For m = 2 the surface is the full
torus (R/2piZ)^2.  The twists become shear maps T_i, the composite is their
ordered product, and the derivative along an orbit is a product of unit
shear matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .twist_core import TwistProfile

TWO_PI = 2.0 * np.pi
BOUNDARY_TOL = 1e-9


def wrap_angle(t):
    """Wrap to (-pi, pi]."""
    return np.pi - np.mod(np.pi - t, TWO_PI)


@dataclass(frozen=True)
class FlatPoint:
    """A point of the band surface; band is an optional hint like 'A1' or 'B2'."""

    x: float
    y: float
    band: str | None = None


@dataclass(frozen=True)
class FlatSurface:
    """Band surface for a chain of m twist regions with support half-width epsilon.

    Odd sphere i owns the horizontal band A_I, I = (i+1)/2, centered on the
    line y = I*pi with x in [pi(I - 1/2), pi(I + 3/2)) and ends glued
    (x ~ x + 2pi).  Even sphere j owns the vertical band B_J, J = j/2,
    centered on x = (J+1)*pi with y in [pi(J - 1/2), pi(J + 3/2)) and ends
    glued (y ~ y + 2pi).  For m = 2 the two bands close up into the torus
    with twist centers on y = 0 and x = 0.
    """

    m: int
    epsilon: float

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need m >= 2")
        if not (0.0 < self.epsilon < np.pi / 4):
            raise ValueError("epsilon must lie in (0, pi/4)")

    @property
    def n_a(self) -> int:
        return (self.m + 1) // 2

    @property
    def n_b(self) -> int:
        return self.m // 2

    @property
    def is_torus(self) -> bool:
        return self.m == 2

    def twist_center(self, i: int):
        """(axis, center): odd i shears x along y = center, even i shears y."""
        if not 1 <= i <= self.m:
            raise ValueError(f"band index {i} out of range 1..{self.m}")
        if self.is_torus:
            return ("x", 0.0) if i == 1 else ("y", 0.0)
        if i % 2 == 1:
            return ("x", np.pi * ((i + 1) // 2))
        return ("y", np.pi * (i // 2 + 1))

    def _a_extent(self, I):
        return (np.pi * (I - 0.5), np.pi * (I + 1.5))

    def _b_extent(self, J):
        return (np.pi * (J - 0.5), np.pi * (J + 1.5))

    def bands_of(self, p: FlatPoint):
        """Ids of all bands containing p (closed strips, half-open along the glued axis)."""
        if self.is_torus:
            out = []
            if abs(wrap_angle(p.y)) <= self.epsilon:
                out.append("A1")
            if abs(wrap_angle(p.x)) <= self.epsilon:
                out.append("B1")
            return out
        out = []
        for I in range(1, self.n_a + 1):
            lo, hi = self._a_extent(I)
            if abs(p.y - I * np.pi) <= self.epsilon and lo <= p.x < hi:
                out.append(f"A{I}")
        for J in range(1, self.n_b + 1):
            lo, hi = self._b_extent(J)
            if abs(p.x - (J + 1) * np.pi) <= self.epsilon and lo <= p.y < hi:
                out.append(f"B{J}")
        return out

    def canonical_form(self, p: FlatPoint) -> FlatPoint:
        """Apply end-gluings to move (x, y) into fundamental band extents."""
        if self.is_torus:
            x = float(np.mod(p.x, TWO_PI))
            y = float(np.mod(p.y, TWO_PI))
            return FlatPoint(x, y, p.band)
        x, y = float(p.x), float(p.y)
        for I in range(1, self.n_a + 1):
            if abs(y - I * np.pi) <= self.epsilon:
                lo, hi = self._a_extent(I)
                x = lo + float(np.mod(x - lo, TWO_PI))
                if x >= hi:  # extent is exactly one period
                    x -= TWO_PI
                break
        for J in range(1, self.n_b + 1):
            if abs(x - (J + 1) * np.pi) <= self.epsilon:
                lo, hi = self._b_extent(J)
                y = lo + float(np.mod(y - lo, TWO_PI))
                if y >= hi:
                    y -= TWO_PI
                break
        q = FlatPoint(x, y, p.band)
        if not self.bands_of(q):
            raise ValueError(f"point ({p.x}, {p.y}) lies on no band")
        return q


@dataclass(frozen=True)
class Cocycle2:
    """A 2x2 real matrix with determinant 1 (product of unit shears)."""

    matrix: np.ndarray
    boundary_contaminated: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (2, 2):
            raise ValueError("matrix must be 2x2")
        # tolerance scales with the entry size: det cancellation loses
        # about norm^2 * machine-eps of absolute accuracy
        scale = max(1.0, float(np.max(np.abs(mat))) ** 2)
        if abs(np.linalg.det(mat) - 1.0) > 1e-9 * scale:
            raise ValueError("determinant must be 1 (up to rounding at scale)")
        object.__setattr__(self, "matrix", mat)


def _signed_offset(surface: FlatSurface, value: float, center: float) -> float:
    d = value - center
    if surface.is_torus:
        d = float(wrap_angle(d))
    return d


def twist_map(
    i: int, k: int, p: FlatPoint, profile: TwistProfile, surface: FlatSurface
) -> FlatPoint:
    """Apply T_i^k: shear by k*r along the band of twist region i.

    Identity outside the support strip |offset| >= epsilon.
    """
    axis, center = surface.twist_center(i)
    if axis == "x":
        d = _signed_offset(surface, p.y, center)
        if abs(d) >= profile.epsilon:
            return p  # r is 0 or a full turn there: identity on the glued band
        q = FlatPoint(p.x + k * profile.eval(d), p.y, p.band)
    else:
        d = _signed_offset(surface, p.x, center)
        if abs(d) >= profile.epsilon:
            return p
        q = FlatPoint(p.x, p.y - k * profile.eval(d), p.band)
    return surface.canonical_form(q)


def composite_map(p: FlatPoint, cfg, profile: TwistProfile) -> FlatPoint:
    """One step of the composite: T_m^{k_m} first, T_1^{k_1} last."""
    surface = FlatSurface(cfg.m, profile.epsilon)
    for i in range(cfg.m, 0, -1):
        p = twist_map(i, cfg.exponents[i - 1], p, profile, surface)
    return p


def shear_factors(p: FlatPoint, cfg, profile: TwistProfile, N: int):
    """Ordered shear data along N composite steps starting at p.

    Yields tuples (kind, t, grazing): kind 'upper' for [[1, t], [0, 1]]
    (odd twists) or 'lower' for [[1, 0], [t, 1]] (even twists), t the shear
    entry k_i * r'(offset) with the sign of the acting twist, grazing True
    when the offset lies within 1e-9 of the support boundary.
    """
    surface = FlatSurface(cfg.m, profile.epsilon)
    for _ in range(N):
        for i in range(cfg.m, 0, -1):
            k = cfg.exponents[i - 1]
            axis, center = surface.twist_center(i)
            value = p.y if axis == "x" else p.x
            d = _signed_offset(surface, value, center)
            grazing = abs(abs(d) - profile.epsilon) < BOUNDARY_TOL
            t = k * profile.deriv(d)
            if axis == "x":
                yield ("upper", t, grazing)
            else:
                yield ("lower", -t, grazing)
            p = twist_map(i, k, p, profile, surface)


def derivative_cocycle(p: FlatPoint, cfg, profile: TwistProfile, N: int) -> Cocycle2:
    """Product of the exact shear derivatives along N composite steps."""
    mat = np.eye(2)
    contaminated = False
    for kind, t, grazing in shear_factors(p, cfg, profile, N):
        contaminated = contaminated or grazing
        if kind == "upper":
            factor = np.array([[1.0, t], [0.0, 1.0]])
        else:
            factor = np.array([[1.0, 0.0], [t, 1.0]])
        mat = factor @ mat
    return Cocycle2(mat, boundary_contaminated=contaminated)


def region_membership(p: FlatPoint, delta: float, surface: FlatSurface):
    """Membership flags for the hyperbolicity regions Y^1_delta, Y^2_delta.

    Y^1_delta asks for some j with delta < |x - j*pi| < eps - delta and
    delta < |y - (j-1)*pi| < eps - delta; Y^2_delta uses |y - j*pi| instead.
    On the torus (m = 2) both reduce to the single crossing at the origin,
    measured with wrapped distances.
    """
    if not 0.0 <= delta < surface.epsilon / 2:
        raise ValueError("need 0 <= delta < epsilon/2")
    eps = surface.epsilon

    def strip(d):
        return delta < abs(d) < eps - delta

    if surface.is_torus:
        hit = strip(wrap_angle(p.x)) and strip(wrap_angle(p.y))
        return {"in_Y1": hit, "in_Y2": hit, "bands": surface.bands_of(p)}
    in_y1 = any(
        strip(p.x - j * np.pi) and strip(p.y - (j - 1) * np.pi)
        for j in range(0, surface.m + 2)
    )
    in_y2 = any(
        strip(p.x - j * np.pi) and strip(p.y - j * np.pi)
        for j in range(0, surface.m + 2)
    )
    return {"in_Y1": in_y1, "in_Y2": in_y2, "bands": surface.bands_of(p)}


def torus_region_mask(x, y, delta: float, epsilon: float):
    """Vectorized membership in the m = 2 crossing region Y_delta."""
    wx = np.abs(wrap_angle(np.asarray(x, dtype=float)))
    wy = np.abs(wrap_angle(np.asarray(y, dtype=float)))
    return (delta < wx) & (wx < epsilon - delta) & (delta < wy) & (wy < epsilon - delta)


def torus_step_with_cocycle(x, y, exponents, profile: TwistProfile):
    """One composite step on the m = 2 torus, vectorized over coordinate arrays.

    Returns (x', y', (a, b, c, d)) with [[a, b], [c, d]] the derivative of the
    step at each input point (T_2^{k_2} applied first).
    """
    if len(exponents) != 2:
        raise ValueError("torus fast path requires m = 2")
    k1, k2 = exponents
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t2 = -k2 * profile.deriv(wrap_angle(x))
    y = np.mod(y - k2 * profile.eval(wrap_angle(x)), TWO_PI)
    t1 = k1 * profile.deriv(wrap_angle(y))
    x = np.mod(x + k1 * profile.eval(wrap_angle(y)), TWO_PI)
    # [[1, t1], [0, 1]] @ [[1, 0], [t2, 1]]
    a = 1.0 + t1 * t2
    b = t1
    c = t2
    d = np.ones_like(a)
    return x, y, (a, b, c, d)


def orbit(p: FlatPoint, cfg, profile: TwistProfile, N: int):
    """The forward orbit p, T(p), ..., T^N(p) as a list of FlatPoints."""
    out = [p]
    for _ in range(N):
        out.append(composite_map(out[-1], cfg, profile))
    return out
