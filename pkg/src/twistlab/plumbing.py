"""Plumbing of sphere cotangent bundles along a chain.

Spheres S_1, ..., S_m are glued in a row: the south pole of sphere i is
identified with the north pole of sphere i+1 through stereographic-type
charts composed with the linear swap J(t, s) = (-s, t), which exchanges
base and fiber roles.  This module provides the charts and their cotangent
lifts, the transition maps, composite Dehn twists acting on ambient points,
the correspondence zeta between the flat band surface and the invariant
set of great-circle cotangent bundles, and rotation-swept Lagrangian
leaves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linked_twist import FlatPoint, FlatSurface, wrap_angle
from .twist_core import (
    SphereCotangentPoint,
    TwistProfile,
    dehn_twist,
    involution,
)

CHART_MARGIN = 0.1
OFF_CIRCLE_TOL = 1e-8

# quarter-turn sign pattern for the flat-to-ambient correspondence;
# consecutive spheres pick up the signs of the base/fiber swap J
_ZETA_SIGNS = {1: (1.0, 1.0), 2: (1.0, -1.0), 3: (-1.0, -1.0), 0: (-1.0, 1.0)}


@dataclass(frozen=True)
class PlumbingConfig:
    """Chain of m spheres of dimension n with twist exponents and support radius."""

    m: int
    n: int
    epsilon: float
    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(k) for k in self.exponents))
        if self.m < 2:
            raise ValueError("need m >= 2")
        if self.n < 1:
            raise ValueError("need n >= 1")
        if self.m > 2 and self.n < 2:
            # chains longer than two can self-overlap degenerately on circles
            raise ValueError("m > 2 requires sphere dimension n >= 2")
        if not (0.0 < self.epsilon < np.pi / 4):
            raise ValueError("epsilon must lie in (0, pi/4)")
        if len(self.exponents) != self.m:
            raise ValueError("need one exponent per sphere")

    @property
    def adjacent_signs_alternate(self) -> bool:
        ks = self.exponents
        return all(ks[i] * ks[i + 1] < 0 for i in range(self.m - 1))


@dataclass(frozen=True)
class AmbientPoint:
    """A point of the plumbing, represented on one owning sphere."""

    sphere_idx: int
    point: SphereCotangentPoint


@dataclass(frozen=True)
class ChartPoint:
    """Chart coordinates (t, s): base and fiber vectors in R^n, |t| < pi/2."""

    t: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        s = np.asarray(self.s, dtype=float)
        if np.linalg.norm(t) >= np.pi / 2:
            raise ValueError("chart base coordinate must satisfy |t| < pi/2")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "s", s)


def _g_radial(rho: float) -> float:
    """g(rho) = rho / sin(rho), the radial stretch of the chart."""
    if rho < 1e-3:
        return 1.0 + rho * rho / 6.0
    return rho / np.sin(rho)


def _h_radial(rho: float) -> float:
    """(sin rho - rho cos rho) / sin^3 rho, the radial derivative kernel."""
    if rho < 1e-3:
        return 1.0 / 3.0 + rho * rho / 15.0
    sn = np.sin(rho)
    return (sn - rho * np.cos(rho)) / sn**3


def _tangent_basis(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the hyperplane orthogonal to x."""
    return np.linalg.svd(x.reshape(-1, 1), full_matrices=True)[0][:, 1:]


def _chart_jacobian(x: np.ndarray, pole: int) -> np.ndarray:
    """Closed-form n x (n+1) Jacobian of the base chart at x."""
    n = x.shape[0] - 1
    rho = np.arccos(np.clip(pole * x[-1], -1.0, 1.0))
    g = _g_radial(rho)
    jac = np.zeros((n, n + 1))
    jac[:, :n] = g * np.eye(n)
    jac[:, n] = -pole * _h_radial(rho) * x[:n]
    return jac


def chart_forward(p: SphereCotangentPoint, pole: int) -> ChartPoint:
    """Chart coordinates around the pole (0,...,0, pole) with cotangent lift.

    Base coordinate arccos(pole * x_{n+1}) / sqrt(1 - x_{n+1}^2) * (x_1..x_n);
    fiber by the inverse-transpose Jacobian rule.  Requires the point to lie
    in the chart hemisphere pole * x_{n+1} > 0.
    """
    if pole not in (1, -1):
        raise ValueError("pole must be +1 or -1")
    if pole * p.x[-1] <= 0.0:
        raise ValueError("point outside the chart hemisphere")
    n = p.dim_n
    rho = np.arccos(np.clip(pole * p.x[-1], -1.0, 1.0))
    t = _g_radial(rho) * p.x[:n]
    basis = _tangent_basis(p.x)
    a = _chart_jacobian(p.x, pole) @ basis
    s = np.linalg.solve(a.T, basis.T @ p.v)
    return ChartPoint(t, s)


def chart_backward(cp: ChartPoint, pole: int, dim_n: int) -> SphereCotangentPoint:
    """Inverse of chart_forward on the same pole."""
    if pole not in (1, -1):
        raise ValueError("pole must be +1 or -1")
    rho = float(np.linalg.norm(cp.t))
    x = np.zeros(dim_n + 1)
    x[:dim_n] = cp.t / _g_radial(rho)
    x[-1] = pole * np.cos(rho)
    basis = _tangent_basis(x)
    a = _chart_jacobian(x, pole) @ basis
    v = basis @ (a.T @ cp.s)
    return SphereCotangentPoint(dim_n, x, v)


def transition(p: AmbientPoint, direction: int, cfg: PlumbingConfig) -> AmbientPoint:
    """Re-represent an overlap point on the neighboring sphere.

    direction +1 moves sphere i -> i+1 through the south pole of sphere i
    (chart pole -1, swap J(t,s) = (-s,t), north chart of sphere i+1);
    direction -1 is the inverse.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    target = p.sphere_idx + direction
    if not 1 <= target <= cfg.m:
        raise ValueError(f"no sphere {target} in a chain of {cfg.m}")
    if direction == 1:
        cp = chart_forward(p.point, pole=-1)
        out = ChartPoint(-cp.s, cp.t)
        q = chart_backward(out, pole=1, dim_n=cfg.n)
    else:
        cp = chart_forward(p.point, pole=1)
        out = ChartPoint(cp.s, -cp.t)
        q = chart_backward(out, pole=-1, dim_n=cfg.n)
    return AmbientPoint(target, q)


def _can_transition(p: AmbientPoint, direction: int, cfg: PlumbingConfig) -> bool:
    """Overlap test with the operational chart safety margin."""
    target = p.sphere_idx + direction
    if not 1 <= target <= cfg.m:
        return False
    pole = -1 if direction == 1 else 1
    if pole * p.point.x[-1] <= 0.0:
        return False
    rho = np.arccos(np.clip(pole * p.point.x[-1], -1.0, 1.0))
    if rho >= np.pi / 2 - CHART_MARGIN:
        return False
    cp = chart_forward(p.point, pole)
    # the swapped point's base coordinate is the current fiber coordinate
    return float(np.linalg.norm(cp.s)) < np.pi / 2 - CHART_MARGIN


def canonical_owner(p: AmbientPoint, cfg: PlumbingConfig) -> AmbientPoint:
    """Move overlap points to the lowest-index sphere able to represent them."""
    while p.sphere_idx > 1 and _can_transition(p, -1, cfg):
        p = transition(p, -1, cfg)
    return p


def composite_twist(
    p: AmbientPoint, cfg: PlumbingConfig, profile: TwistProfile
) -> AmbientPoint:
    """Apply the composite tau_1^{k_1} ... tau_m^{k_m}, rightmost factor first."""
    for i in range(cfg.m, 0, -1):
        p = _single_twist(p, i, cfg.exponents[i - 1], cfg, profile)
    return canonical_owner(p, cfg)


def _single_twist(
    p: AmbientPoint, i: int, k: int, cfg: PlumbingConfig, profile: TwistProfile
) -> AmbientPoint:
    if k == 0:
        return p
    if p.sphere_idx == i:
        return AmbientPoint(i, dehn_twist(p.point, profile, k))
    if abs(p.sphere_idx - i) != 1:
        return p  # disjoint spheres: outside the twist support
    direction = i - p.sphere_idx
    if not _can_transition(p, direction, cfg):
        # safety: the only way a support point can fail to transition is a
        # fiber beyond the chart margin, impossible for |v| < pi/4 orbits
        pole = -1 if direction == 1 else 1
        if pole * p.point.x[-1] > 0.0:
            rho = np.arccos(np.clip(pole * p.point.x[-1], -1.0, 1.0))
            if rho < profile.epsilon:
                raise RuntimeError("support point left the chart domain")
        return p  # not in the overlap, hence outside the support
    q = transition(p, direction, cfg)
    if q.point.vnorm >= profile.epsilon:
        return p  # representable on sphere i but outside the support strip
    return AmbientPoint(i, dehn_twist(q.point, profile, k))


def global_involution(p: AmbientPoint) -> AmbientPoint:
    """Sphere-wise coordinate involution; its fixed set is the chain of T*gamma_i."""
    return AmbientPoint(p.sphere_idx, involution(p.point))


def _circle_embed(n: int, t: float, s: float) -> SphereCotangentPoint:
    """The great-circle point G(t, s): arc coordinate t, fiber value s."""
    x = np.zeros(n + 1)
    v = np.zeros(n + 1)
    x[0], x[-1] = np.sin(t), -np.cos(t)
    v[0], v[-1] = s * np.cos(t), s * np.sin(t)
    return SphereCotangentPoint(n, x, v)


def _zeta_coords(q: FlatPoint, sphere: int, cfg: PlumbingConfig):
    """Arc and fiber coordinates (t, s) of the flat point on the given sphere."""
    if cfg.m == 2:
        if sphere == 1:
            return float(q.x), float(wrap_angle(q.y))
        return float(q.y) + np.pi, -float(wrap_angle(q.x))
    st, ss = _ZETA_SIGNS[sphere % 4]
    if sphere % 2 == 1:
        big_i = (sphere + 1) // 2
        return st * (q.x - (big_i + 1) * np.pi), ss * (q.y - big_i * np.pi)
    big_j = sphere // 2
    return st * (q.y - (big_j + 1) * np.pi), ss * (q.x - (big_j + 1) * np.pi)


def _sphere_of_band(band: str) -> int:
    idx = int(band[1:])
    return 2 * idx - 1 if band[0] == "A" else 2 * idx


def lift_from_flat(q: FlatPoint, cfg: PlumbingConfig) -> AmbientPoint:
    """The correspondence zeta: flat band point to ambient great-circle point."""
    surface = FlatSurface(cfg.m, cfg.epsilon)
    q = surface.canonical_form(q)
    bands = surface.bands_of(q)
    sphere = min(_sphere_of_band(b) for b in bands)
    t, s = _zeta_coords(q, sphere, cfg)
    return AmbientPoint(sphere, _circle_embed(cfg.n, t, s))


def reduce_to_flat(p: AmbientPoint, cfg: PlumbingConfig) -> FlatPoint:
    """Inverse of lift_from_flat on the invariant set of great-circle bundles."""
    x, v = p.point.x, p.point.v
    off = max(
        float(np.max(np.abs(x[1:-1]), initial=0.0)),
        float(np.max(np.abs(v[1:-1]), initial=0.0)),
    )
    if off > OFF_CIRCLE_TOL:
        raise ValueError(f"point is off the great-circle set by {off:.3e}")
    t = float(np.arctan2(x[0], -x[-1]))
    s = float(v[0] * np.cos(t) + v[-1] * np.sin(t))
    surface = FlatSurface(cfg.m, cfg.epsilon)
    if cfg.m == 2:
        if p.sphere_idx == 1:
            return surface.canonical_form(FlatPoint(t, s))
        return surface.canonical_form(FlatPoint(-s, t - np.pi))
    st, ss = _ZETA_SIGNS[p.sphere_idx % 4]
    if p.sphere_idx % 2 == 1:
        big_i = (p.sphere_idx + 1) // 2
        flat = FlatPoint(st * t + (big_i + 1) * np.pi, ss * s + big_i * np.pi)
    else:
        big_j = p.sphere_idx // 2
        flat = FlatPoint(ss * s + (big_j + 1) * np.pi, st * t + (big_j + 1) * np.pi)
    return surface.canonical_form(flat)


@dataclass(frozen=True)
class LagrangianLeaf:
    """Rotation-swept leaf samples: xs[i, k] and vs[i, k] in R^(n+1).

    Index i runs over the curve polyline, k over the rotation angles;
    sphere_idx[i] records the owning sphere of curve point i.
    """

    sphere_idx: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    omega_max: float


def _reflection(p: SphereCotangentPoint) -> SphereCotangentPoint:
    """The reflection fixing admissible curves: negate the first coordinates."""
    x = p.x.copy()
    v = p.v.copy()
    x[0] *= -1.0
    v[0] *= -1.0
    return SphereCotangentPoint(p.dim_n, x, v)


def lagrangian_leaf(
    curve,
    theta_samples: int,
    closed: bool = False,
    seed: int = 0,
) -> LagrangianLeaf:
    """Sweep a polyline in the great-circle bundles to a Lagrangian leaf.

    Each curve point (y_1, 0, .., y_{n+1}; v_1, 0, .., v_{n+1}) is rotated to
    y_{n+1} nhat + y_1 (theta, 0) (and likewise for the fiber) along a great
    circle of rotation angles theta through the reference direction.  When
    `closed`, the polyline must be invariant under the reflection negating
    the first coordinates; otherwise it cannot close up to an embedded leaf.
    """
    if theta_samples < 4:
        raise ValueError("need at least 4 rotation samples")
    pts = [p.point if isinstance(p, AmbientPoint) else p for p in curve]
    idxs = np.array(
        [p.sphere_idx if isinstance(p, AmbientPoint) else 1 for p in curve]
    )
    n = pts[0].dim_n
    for p in pts:
        if not p.on_great_circle(tol=1e-8):
            raise ValueError("curve points must lie on the great-circle bundles")
    if closed:
        _check_admissible(pts)
    rng = np.random.default_rng(seed)
    # rotation path: great circle through the reference direction e1
    if n == 1:
        raise ValueError("leaves need sphere dimension n >= 2")
    u2 = np.zeros(n)
    if n == 2:
        u2[1] = 1.0
    else:
        w = rng.normal(size=n)
        w[0] = 0.0
        u2[:] = w / np.linalg.norm(w)
    alphas = np.linspace(0.0, 2 * np.pi, theta_samples, endpoint=False)
    thetas = np.outer(np.cos(alphas), np.eye(n)[0]) + np.outer(np.sin(alphas), u2)
    xs = np.zeros((len(pts), theta_samples, n + 1))
    vs = np.zeros_like(xs)
    for i, p in enumerate(pts):
        xs[i, :, :n] = p.x[0] * thetas
        xs[i, :, n] = p.x[-1]
        vs[i, :, :n] = p.v[0] * thetas
        vs[i, :, n] = p.v[-1]
    omega_max = _leaf_omega_residual(idxs, xs, vs)
    return LagrangianLeaf(idxs, xs, vs, omega_max)


def _check_admissible(pts):
    gap = max(
        np.linalg.norm(np.concatenate([a.x - b.x, a.v - b.v]))
        for a, b in zip(pts[1:], pts[:-1])
    )
    for p in pts:
        refl = _reflection(p)
        dist = min(
            np.linalg.norm(np.concatenate([refl.x - q.x, refl.v - q.v])) for q in pts
        )
        if dist > 0.75 * gap + 1e-9:
            raise ValueError(
                "closed curve is not reflection-invariant "
                f"(sample leaves the curve by {dist:.3e}); "
                "it cannot bound an embedded closed leaf"
            )


def _leaf_omega_residual(idxs, xs, vs) -> float:
    """Max |omega| over discrete tangent 2-frames of the sampled leaf."""
    nc = xs.shape[0]
    if nc < 3:
        return 0.0
    # chords along the curve direction (skip pairs straddling sphere changes)
    same = idxs[2:] == idxs[:-2]
    du_x = (xs[2:] - xs[:-2]) / 2.0
    du_v = (vs[2:] - vs[:-2]) / 2.0
    dw_x = (np.roll(xs, -1, axis=1) - np.roll(xs, 1, axis=1))[1:-1] / 2.0
    dw_v = (np.roll(vs, -1, axis=1) - np.roll(vs, 1, axis=1))[1:-1] / 2.0
    omega = np.einsum("ikd,ikd->ik", du_x, dw_v) - np.einsum(
        "ikd,ikd->ik", du_v, dw_x
    )
    if not np.any(same):
        return 0.0
    return float(np.max(np.abs(omega[same])))
