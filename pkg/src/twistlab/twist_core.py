"""Model geometry on the cotangent bundle of the n-sphere.

The state space is T*S^n realized as pairs (x, v) in R^(n+1) x R^(n+1) with
|x| = 1 and <x, v> = 0.  This module provides the twist profile r, the model
Dehn twist (a compactly supported fiberwise rotation), the underlying circle
action, the equatorial rotation maps R_theta, the coordinate involution whose
fixed set is the cotangent bundle of a great circle, and a finite-difference
Jacobian of the twist.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CONSTRAINT_TOL = 1e-9


def _smooth_step(x):
    """C-infinity step: 0 for x<=0, 1 for x>=1, flat to all orders at both ends."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)
        g = np.where(x < 1.0, np.exp(-1.0 / np.where(x < 1.0, 1.0 - x, 1.0)), 0.0)
    return f / (f + g)


def _smooth_step_deriv(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xs = np.where(inside, x, 0.5)
    f = np.exp(-1.0 / xs)
    g = np.exp(-1.0 / (1.0 - xs))
    fp = f / xs**2
    gp = -g / (1.0 - xs) ** 2
    d = (fp * g - f * gp) / (f + g) ** 2
    return np.where(inside, d, 0.0)


@dataclass(frozen=True)
class TwistProfile:
    """Angle profile r with r(-t) + r(t) = 2*pi, support radius epsilon.

    r decreases from pi at t=0+ to 0 at t=epsilon, so r' <= 0 everywhere
    (r' is an even function).  All derivatives vanish at t=0 and |t|=epsilon.
    """

    epsilon: float

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        # r(t) = pi * (1 - step(t/eps)) on t >= 0, extended by r(-t) = 2*pi - r(t)
        pos = np.pi * (1.0 - _smooth_step(np.abs(t) / self.epsilon))
        r = np.where(t >= 0.0, pos, 2.0 * np.pi - pos)
        return float(r) if r.ndim == 0 else r

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        d = -np.pi / self.epsilon * _smooth_step_deriv(np.abs(t) / self.epsilon)
        return float(d) if d.ndim == 0 else d

    def __call__(self, t):
        return self.eval(t)

    def inverse_on_support(self, angle, tol=1e-12):
        """The unique t in (0, epsilon) with r(t) = angle, for angle in (0, pi)."""
        if not (0.0 < angle < np.pi):
            raise ValueError("angle must lie in (0, pi)")
        lo, hi = 0.0, self.epsilon
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.eval(mid) > angle:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def make_profile(epsilon: float) -> TwistProfile:
    """Build the twist profile with support radius epsilon in (0, 1)."""
    return TwistProfile(epsilon=float(epsilon))


@dataclass(frozen=True)
class SphereCotangentPoint:
    """A point (x, v) of T*S^n in ambient coordinates, re-projected on construction."""

    dim_n: int
    x: np.ndarray
    v: np.ndarray = field(default=None)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.zeros_like(x) if self.v is None else np.asarray(self.v, dtype=float)
        if x.shape != (self.dim_n + 1,) or v.shape != (self.dim_n + 1,):
            raise ValueError("x and v must have shape (n+1,)")
        nx = np.linalg.norm(x)
        if nx == 0.0:
            raise ValueError("x must be nonzero")
        x = x / nx
        v = v - np.dot(x, v) * x
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    @property
    def vnorm(self) -> float:
        return float(np.linalg.norm(self.v))

    def constraint_residuals(self):
        return (abs(np.dot(self.x, self.x) - 1.0), abs(np.dot(self.x, self.v)))

    def on_great_circle(self, tol=CONSTRAINT_TOL) -> bool:
        """True when coordinates 2..n of both x and v vanish within tol."""
        return (
            float(np.max(np.abs(self.x[1:-1]), initial=0.0)) < tol
            and float(np.max(np.abs(self.v[1:-1]), initial=0.0)) < tol
        )

    def close_to(self, other, tol=CONSTRAINT_TOL) -> bool:
        return (
            np.max(np.abs(self.x - other.x)) < tol
            and np.max(np.abs(self.v - other.v)) < tol
        )


@dataclass(frozen=True)
class EquatorAngle:
    """A point theta of the equator S^(n-1), stored as a unit vector in R^n."""

    theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        n = np.linalg.norm(th)
        if abs(n - 1.0) > 1e-12:
            th = th / n
        object.__setattr__(self, "theta", th)


def circle_action(p: SphereCotangentPoint, angle: float) -> SphereCotangentPoint:
    """Rotate (x, v) by the 2x2 block [[cos a, sin a/|v|], [-sin a * |v|, cos a]].

    Undefined on the zero section (the moment map |v| is singular there).
    """
    s = p.vnorm
    if s == 0.0:
        raise ValueError("circle action undefined on the zero section (v = 0)")
    c, sn = np.cos(angle), np.sin(angle)
    x = c * p.x + (sn / s) * p.v
    v = -sn * s * p.x + c * p.v
    return SphereCotangentPoint(p.dim_n, x, v)


def dehn_twist(
    p: SphereCotangentPoint, profile: TwistProfile, power: int = 1
) -> SphereCotangentPoint:
    """Model Dehn twist: circle action by power*r(|v|); the antipodal map on v=0."""
    s = p.vnorm
    if s == 0.0:
        sign = -1.0 if power % 2 else 1.0
        return SphereCotangentPoint(p.dim_n, sign * p.x, np.zeros_like(p.v))
    if power == 0:
        return p
    return circle_action(p, power * profile.eval(s))


def rotation_map(p: SphereCotangentPoint, theta: EquatorAngle) -> SphereCotangentPoint:
    """Sweep the great-circle cotangent bundle to equator angle theta.

    (y1,0,..,0,y_{n+1}; v1,0,..,0,v_{n+1}) maps to
    (y_{n+1}*nhat + y1*(theta,0); v_{n+1}*nhat + v1*(theta,0)).
    """
    if not p.on_great_circle():
        raise ValueError("rotation map requires a point on the great-circle bundle")
    n1 = p.dim_n + 1
    th = np.zeros(n1)
    th[:-1] = theta.theta
    nhat = np.zeros(n1)
    nhat[-1] = 1.0
    x = p.x[-1] * nhat + p.x[0] * th
    v = p.v[-1] * nhat + p.v[0] * th
    return SphereCotangentPoint(p.dim_n, x, v)


def involution(p: SphereCotangentPoint) -> SphereCotangentPoint:
    """Negate coordinates 2..n of x and v; fixes exactly the great-circle bundle."""
    x = p.x.copy()
    v = p.v.copy()
    x[1:-1] *= -1.0
    v[1:-1] *= -1.0
    return SphereCotangentPoint(p.dim_n, x, v)


def _raw_twist(x, v, profile, power):
    """Twist formula on raw ambient arrays, no projection.  Smooth for v != 0."""
    s = np.linalg.norm(v)
    a = power * profile.eval(s)
    c, sn = np.cos(a), np.sin(a)
    return c * x + (sn / s) * v, -sn * s * x + c * v


def constraint_tangent_basis(p: SphereCotangentPoint) -> np.ndarray:
    """Orthonormal basis (columns) of the 2n-dim tangent space of the constraint set.

    Tangent vectors (dx, dv) satisfy <x, dx> = 0 and <x, dv> + <v, dx> = 0.
    """
    n1 = p.dim_n + 1
    dim = 2 * n1
    normals = np.zeros((dim, 2))
    normals[:n1, 0] = p.x
    normals[:n1, 1] = p.v
    normals[n1:, 1] = p.x
    q, _ = np.linalg.qr(np.linalg.svd(normals, full_matrices=True)[0][:, 2:])
    # columns orthonormal, orthogonal to both constraint gradients
    return q


def twist_jacobian(
    p: SphereCotangentPoint, profile: TwistProfile, power: int = 1, h: float = 1e-6
) -> np.ndarray:
    """Central finite-difference Jacobian of the twist in ambient coordinates.

    Columns are re-projected to the constraint tangent space at the image point.
    Rejects the zero section, where the map is not smooth.
    """
    if p.vnorm == 0.0:
        raise ValueError("Jacobian undefined on the zero section (v = 0)")
    n1 = p.dim_n + 1
    dim = 2 * n1
    z0 = np.concatenate([p.x, p.v])
    jac = np.empty((dim, dim))
    for i in range(dim):
        zp = z0.copy()
        zm = z0.copy()
        zp[i] += h
        zm[i] -= h
        xp, vp = _raw_twist(zp[:n1], zp[n1:], profile, power)
        xm, vm = _raw_twist(zm[:n1], zm[n1:], profile, power)
        jac[:, i] = (np.concatenate([xp, vp]) - np.concatenate([xm, vm])) / (2.0 * h)
    q = dehn_twist(p, profile, power)
    basis = constraint_tangent_basis(q)
    return basis @ (basis.T @ jac)


def symplectic_form(u: np.ndarray, w: np.ndarray) -> float:
    """omega = sum_i dx_i ^ dv_i evaluated on ambient tangent vectors u, w."""
    n1 = u.shape[0] // 2
    return float(np.dot(u[:n1], w[n1:]) - np.dot(u[n1:], w[:n1]))
