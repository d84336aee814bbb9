"""Hyperbolicity measurements for composite twist dynamics.

Finite-time Lyapunov exponents of the flat shear cocycle, return statistics
to the crossing regions, the quadrant shear-product bound, Pesin-type
entropy lower bounds, numerically grown stable curves with Lagrangian
lifts, and the closed-form spectra at doubly periodic points of the
two-sphere plumbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .linked_twist import (
    FlatPoint,
    FlatSurface,
    composite_map,
    region_membership,
    torus_region_mask,
    torus_step_with_cocycle,
    twist_map,
    wrap_angle,
)
from .plumbing import AmbientPoint, lift_from_flat
from .plumbing import lagrangian_leaf as _lagrangian_leaf
from .twist_core import SphereCotangentPoint, TwistProfile, dehn_twist

RENORM_EVERY = 20
DELTA_LADDER = tuple(0.5**k for k in range(1, 11))
HYPERBOLIC_THRESHOLD = 0.05


@dataclass(frozen=True)
class LyapunovRecord:
    """Finite-time exponent of one orbit, with visit statistics.

    chi_plus is (log_scale + log s_max(cocycle)) / steps for the stored
    renormalized cocycle.
    """

    point: FlatPoint
    steps: int
    chi_plus: float
    return_freq_Y1: float
    return_freq_Y2: float
    boundary_flag: bool
    cocycle: np.ndarray
    log_scale: float


@dataclass(frozen=True)
class EntropyEstimate:
    """Grid-averaged Pesin-type entropy lower bound (nats per iterate)."""

    grid_points: int
    steps: int
    mean_positive_exponent: float
    positive_fraction: float
    lower_bound: float
    std_error: float


@dataclass(frozen=True)
class StableLeafSample:
    """A numerically grown stable curve through a hyperbolic base point."""

    base: FlatPoint
    direction: np.ndarray
    polyline: np.ndarray
    contraction_rates: np.ndarray
    converged: bool


def _top_singular(mat: np.ndarray) -> float:
    return float(np.linalg.svd(mat, compute_uv=False)[0])


def _scalar_cocycle(p, cfg, profile, N, inverse=False):
    """Renormalized N-step cocycle with orbit bookkeeping.

    Returns (final point, normalized matrix, log of the removed scale,
    orbit list of length N (points before each step), grazing flag).
    """
    surface = FlatSurface(cfg.m, profile.epsilon)
    order = range(1, cfg.m + 1) if inverse else range(cfg.m, 0, -1)
    mat = np.eye(2)
    log_scale = 0.0
    grazing = False
    pts = []
    for step in range(N):
        pts.append(p)
        for i in order:
            k = -cfg.exponents[i - 1] if inverse else cfg.exponents[i - 1]
            axis, center = surface.twist_center(i)
            value = p.y if axis == "x" else p.x
            d = value - center
            if surface.is_torus:
                d = float(wrap_angle(d))
            grazing = grazing or abs(abs(d) - profile.epsilon) < 1e-9
            t = k * profile.deriv(d)
            if axis == "x":
                mat = np.array([[1.0, t], [0.0, 1.0]]) @ mat
            else:
                mat = np.array([[1.0, 0.0], [-t, 1.0]]) @ mat
            p = twist_map(i, k, p, profile, surface)
        if (step + 1) % RENORM_EVERY == 0:
            scale = np.max(np.abs(mat))
            if scale > 1.0:
                mat = mat / scale
                log_scale += math.log(scale)
    return p, mat, log_scale, pts, grazing


def finite_time_lyapunov(
    p: FlatPoint, cfg, profile: TwistProfile, N: int, delta: float | None = None
) -> LyapunovRecord:
    """Finite-time top Lyapunov exponent of the composite at p over N steps."""
    if N < 1:
        raise ValueError("need N >= 1")
    surface = FlatSurface(cfg.m, profile.epsilon)
    if delta is None:
        delta = profile.epsilon / 4.0
    _, mat, log_scale, pts, grazing = _scalar_cocycle(p, cfg, profile, N)
    chi = (log_scale + math.log(_top_singular(mat))) / N
    hits1 = hits2 = 0
    for q in pts:
        mem = region_membership(q, delta, surface)
        hits1 += mem["in_Y1"]
        hits2 += mem["in_Y2"]
    return LyapunovRecord(
        point=p,
        steps=N,
        chi_plus=chi,
        return_freq_Y1=hits1 / N,
        return_freq_Y2=hits2 / N,
        boundary_flag=grazing,
        cocycle=mat,
        log_scale=log_scale,
    )


def return_statistics(p: FlatPoint, cfg, profile: TwistProfile, N: int, delta: float):
    """Empirical visit frequencies of the orbit to Y^1_delta and Y^2_delta."""
    surface = FlatSurface(cfg.m, profile.epsilon)
    hits1 = hits2 = 0
    for _ in range(N):
        mem = region_membership(p, delta, surface)
        hits1 += mem["in_Y1"]
        hits2 += mem["in_Y2"]
        p = composite_map(p, cfg, profile)
    return {"freq_Y1": hits1 / N, "freq_Y2": hits2 / N}


def shear_product_bound(t_sequence, c1: float, delta: float):
    """Quadrant lower bound for alternating shear products.

    The sequence alternates upper/lower unit shears with entries t_i >= 0
    (upper first).  With lambda the top eigenvalue of the comparison matrix
    C = [[1, c1], [c1, 1 + c1^2]] and m the number of adjacent (upper,
    lower) pairs with both entries >= c1, the ordered product P satisfies
    P u >= C^m u entrywise on the diagonal direction u and
    ||P u|| >= c2 * lambda^floor(delta * n / 2) with c2 = min(w) / sqrt(2),
    w the top unit eigenvector of C.
    """
    ts = np.asarray(t_sequence, dtype=float)
    if np.any(ts < 0.0):
        raise ValueError("shear entries must be nonnegative (sign convention)")
    n = ts.size
    exponent = int(math.floor(delta * n / 2.0))
    good_pairs = sum(
        1 for j in range(0, n - 1, 2) if ts[j] >= c1 and ts[j + 1] >= c1
    )
    if good_pairs < exponent:
        raise ValueError(
            f"only {good_pairs} strong shear pairs, need {exponent} "
            f"for density delta={delta}"
        )
    comparison = np.array([[1.0, c1], [c1, 1.0 + c1 * c1]])
    evals, evecs = np.linalg.eigh(comparison)
    lam = float(evals[-1])
    w = np.abs(evecs[:, -1])
    c2 = float(np.min(w)) / math.sqrt(2.0)
    u = np.array([1.0, 1.0]) / math.sqrt(2.0)
    prod = np.eye(2)
    for j, t in enumerate(ts):
        if j % 2 == 0:
            prod = np.array([[1.0, t], [0.0, 1.0]]) @ prod
        else:
            prod = np.array([[1.0, 0.0], [t, 1.0]]) @ prod
    pu = prod @ u
    cu = np.linalg.matrix_power(comparison, good_pairs) @ u
    dominates = bool(np.all(pu >= cu * (1.0 - 1e-12)))
    norm = float(np.linalg.norm(pu))
    bound = c2 * lam**exponent
    return {
        "holds": norm >= bound * (1.0 - 1e-12) and dominates,
        "norm": norm,
        "bound": bound,
        "lam": lam,
        "good_pairs": good_pairs,
        "exponent": exponent,
        "dominates": dominates,
    }


def band_grid(epsilon: float, nx: int, ny: int):
    """Grid of nx*ny points covering the m = 2 band surface Y."""
    half = ny // 2
    ax = np.linspace(0.0, 2 * np.pi, nx, endpoint=False)
    ay = np.linspace(-epsilon, epsilon, half + 2)[1:-1]
    gx, gy = np.meshgrid(ax, ay, indexing="ij")
    bx = np.linspace(-epsilon, epsilon, ny - half + 2)[1:-1]
    by = np.linspace(0.0, 2 * np.pi, nx, endpoint=False)
    hx, hy = np.meshgrid(bx, by, indexing="ij")
    xs = np.concatenate([gx.ravel(), hx.ravel()])
    ys = np.concatenate([gy.ravel(), hy.ravel()])
    return np.mod(xs, 2 * np.pi), np.mod(ys, 2 * np.pi)


def lyapunov_field(xs, ys, exponents, profile: TwistProfile, N: int, deltas=()):
    """Vectorized finite-time exponents on the m = 2 torus, plus visit counts.

    Returns (chi, freqs) where freqs maps each delta to the per-point visit
    frequency of Y_delta (the single crossing square, where Y^1 = Y^2).
    """
    x = np.array(xs, dtype=float)
    y = np.array(ys, dtype=float)
    a = np.ones_like(x)
    b = np.zeros_like(x)
    c = np.zeros_like(x)
    d = np.ones_like(x)
    logs = np.zeros_like(x)
    counts = {delta: np.zeros_like(x) for delta in deltas}
    for step in range(N):
        for delta, acc in counts.items():
            acc += torus_region_mask(x, y, delta, profile.epsilon)
        x, y, (fa, fb, fc, fd) = torus_step_with_cocycle(x, y, exponents, profile)
        a, b, c, d = (
            fa * a + fb * c,
            fa * b + fb * d,
            fc * a + fd * c,
            fc * b + fd * d,
        )
        if (step + 1) % RENORM_EVERY == 0:
            scale = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c), np.abs(d)])
            scale = np.maximum(scale, 1.0)
            a, b, c, d = a / scale, b / scale, c / scale, d / scale
            logs += np.log(scale)
    energy = a * a + b * b + c * c + d * d
    with np.errstate(under="ignore"):
        det = np.exp(-2.0 * logs)
    smax_sq = 0.5 * (energy + np.sqrt(np.maximum(energy * energy - 4.0 * det * det, 0.0)))
    chi = (logs + 0.5 * np.log(smax_sq)) / N
    freqs = {delta: acc / N for delta, acc in counts.items()}
    return chi, freqs


def entropy_lower_bound(grid, cfg, profile: TwistProfile, N: int) -> EntropyEstimate:
    """Pesin-type lower bound: grid average of positive finite-time exponents."""
    xs, ys = grid
    chi, _ = lyapunov_field(xs, ys, cfg.exponents, profile, N)
    pos = np.maximum(chi, 0.0)
    return EntropyEstimate(
        grid_points=int(np.size(chi)),
        steps=N,
        mean_positive_exponent=float(np.mean(chi[chi > 0])) if np.any(chi > 0) else 0.0,
        positive_fraction=float(np.mean(chi > 0)),
        lower_bound=float(np.mean(pos)),
        std_error=float(np.std(pos) / math.sqrt(np.size(pos))),
    )


def composite_inverse(p: FlatPoint, cfg, profile: TwistProfile) -> FlatPoint:
    """One step of the inverse composite: T_1^{-k_1} first, T_m^{-k_m} last."""
    surface = FlatSurface(cfg.m, profile.epsilon)
    for i in range(1, cfg.m + 1):
        p = twist_map(i, -cfg.exponents[i - 1], p, profile, surface)
    return p


def stable_direction(
    p: FlatPoint,
    cfg,
    profile: TwistProfile,
    N: int,
    inverse: bool = False,
    threshold: float = HYPERBOLIC_THRESHOLD,
) -> np.ndarray:
    """Minimizing right-singular direction of the N-step cocycle at p.

    With inverse=True the cocycle of the inverse composite is used, which
    yields the unstable direction of the forward dynamics.
    """
    _, mat, log_scale, _, _ = _scalar_cocycle(p, cfg, profile, N, inverse=inverse)
    svals = np.linalg.svd(mat, compute_uv=False)
    chi = (log_scale + math.log(svals[0])) / N
    if chi < threshold:
        raise ValueError(f"point is not hyperbolic enough (chi = {chi:.3g})")
    if svals[0] / max(svals[1], 1e-300) < 1.0 + 1e-3:
        raise ValueError("singular values too close: direction ill-defined")
    _, _, vt = np.linalg.svd(mat)
    direction = vt[1]
    if direction[0] < 0 or (direction[0] == 0 and direction[1] < 0):
        direction = -direction
    return direction


def _torus_dist(a: FlatPoint, b) -> float:
    return float(
        np.hypot(wrap_angle(a.x - b[0]), wrap_angle(a.y - b[1]))
        if not isinstance(b, FlatPoint)
        else np.hypot(wrap_angle(a.x - b.x), wrap_angle(a.y - b.y))
    )


def stable_curve(
    p: FlatPoint,
    cfg,
    profile: TwistProfile,
    N: int,
    arc_length: float,
    seed_halfwidth: float = 1e-4,
    max_refinements: int = 5,
) -> StableLeafSample:
    """Grow the stable curve through p by pulled-back singular-direction seeds.

    A short segment along the stable direction at the M-step forward image
    of p is pulled back by the inverse composite, which expands it along
    the stable set; the sample is refined until consecutive refinements
    agree within 1e-5 in Hausdorff distance and trimmed to arc_length.
    """
    try:
        direction = stable_direction(p, cfg, profile, N)
    except ValueError:
        # identity-like cocycle: the local dynamics is a translation and
        # any straight segment is invariant
        direction = np.array([1.0, 0.0])
        half = np.linspace(-arc_length / 2, arc_length / 2, 65)
        poly = np.column_stack([p.x + half * direction[0], p.y + half * direction[1]])
        return StableLeafSample(p, direction, poly, np.ones(0), True)
    chi = max(
        finite_time_lyapunov(p, cfg, profile, N).chi_plus, HYPERBOLIC_THRESHOLD
    )
    M = min(60, int(math.ceil(math.log(arc_length / seed_halfwidth) / chi)) + 2)
    q = p
    for _ in range(M):
        q = composite_map(q, cfg, profile)
    e_q = stable_direction(q, cfg, profile, N)
    prev = None
    converged = False
    for refine in range(max_refinements):
        K = 65 * 2**refine
        hs = np.linspace(-seed_halfwidth, seed_halfwidth, K)
        pts = []
        for h in hs:
            z = FlatPoint(q.x + h * e_q[0], q.y + h * e_q[1])
            for _ in range(M):
                z = composite_inverse(z, cfg, profile)
            pts.append(z)
        poly = _trim_polyline(pts, p, arc_length)
        if prev is not None and _hausdorff(prev, poly) < 1e-5:
            converged = True
            prev = poly
            break
        prev = poly
    rates = _contraction_rates(prev, p, cfg, profile, 20)
    return StableLeafSample(p, direction, prev, rates, converged)


def _trim_polyline(pts, p: FlatPoint, arc_length: float) -> np.ndarray:
    mid = int(np.argmin([_torus_dist(p, z) for z in pts]))

    def walk(indices):
        length = 0.0
        last = pts[mid]
        chunk = []
        for j in indices:
            step = np.hypot(
                wrap_angle(pts[j].x - last.x), wrap_angle(pts[j].y - last.y)
            )
            length += step
            if length > arc_length / 2:
                break
            chunk.append((pts[j].x, pts[j].y))
            last = pts[j]
        return chunk

    left = walk(range(mid - 1, -1, -1))
    right = walk(range(mid + 1, len(pts)))
    return np.array(list(reversed(left)) + [(pts[mid].x, pts[mid].y)] + right)


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    def one_way(src, dst):
        dx = wrap_angle(src[:, None, 0] - dst[None, :, 0])
        dy = wrap_angle(src[:, None, 1] - dst[None, :, 1])
        return np.max(np.min(np.hypot(dx, dy), axis=1))

    return float(max(one_way(a, b), one_way(b, a)))


def _contraction_rates(poly, p, cfg, profile, steps):
    if poly.shape[0] < 3:
        return np.ones(0)
    a = FlatPoint(poly[0, 0], poly[0, 1])
    b = FlatPoint(poly[-1, 0], poly[-1, 1])
    dists = []
    for _ in range(steps + 1):
        dists.append(np.hypot(wrap_angle(a.x - b.x), wrap_angle(a.y - b.y)))
        a = composite_map(a, cfg, profile)
        b = composite_map(b, cfg, profile)
    dists = np.array(dists)
    return dists[1:] / np.maximum(dists[:-1], 1e-300)


def lift_stable_leaf(sample: StableLeafSample, cfg, theta_samples: int = 64):
    """Lift a flat stable curve to a rotation-swept Lagrangian leaf."""
    curve = [
        lift_from_flat(FlatPoint(x, y), cfg) for x, y in sample.polyline
    ]
    return _lagrangian_leaf(curve, theta_samples)


# ---------------------------------------------------------------------------
# Doubly periodic points of the two-sphere plumbing: local charts and spectra


def _proj_chart_forward(p: SphereCotangentPoint):
    """Plain-projection chart near the pole (0,0,1) with its cotangent lift."""
    if p.x[2] <= 0.0:
        raise ValueError("point outside the projection chart hemisphere")
    u = p.x[:2].copy()
    w = p.v[:2] - u * (p.v[2] / p.x[2])
    return u, w


def _proj_chart_backward(u, w):
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    x3 = math.sqrt(max(1.0 - float(u @ u), 0.0))
    uw = float(u @ w)
    x = np.array([u[0], u[1], x3])
    y = np.array([w[0] - u[0] * uw, w[1] - u[1] * uw, -x3 * uw])
    return SphereCotangentPoint(2, x, y)


def section8_local_map(u, v, k: int, l: int, profile: TwistProfile):
    """The composite tau_1^k tau_2^{-l} in plain-projection chart coordinates.

    Sphere 2's chart is reached through the plumbing swap J(u, v) = (-v, u);
    both twists are the model fiberwise rotations of their spheres.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    # tau_2^{-l}: move to sphere 2 coordinates, twist, move back
    p2 = _proj_chart_backward(-v, u)
    q2 = dehn_twist(p2, profile, -l)
    u2, v2 = _proj_chart_forward(q2)
    u1, v1 = v2, -u2
    # tau_1^k on sphere 1
    p1 = _proj_chart_backward(u1, v1)
    q1 = dehn_twist(p1, profile, k)
    return _proj_chart_forward(q1)


def section8_fd_jacobian(u, v, k, l, profile: TwistProfile, h: float = 1e-6):
    """Central finite-difference 4x4 Jacobian of section8_local_map."""
    z0 = np.concatenate([np.asarray(u, float), np.asarray(v, float)])
    jac = np.empty((4, 4))
    for i in range(4):
        zp, zm = z0.copy(), z0.copy()
        zp[i] += h
        zm[i] -= h
        up, wp = section8_local_map(zp[:2], zp[2:], k, l, profile)
        um, wm = section8_local_map(zm[:2], zm[2:], k, l, profile)
        jac[:, i] = (np.concatenate([up, wp]) - np.concatenate([um, wm])) / (2 * h)
    return jac


def _rationality_certificate(angle: float, tol: float = 1e-9) -> Fraction:
    frac = Fraction(angle / math.pi).limit_denominator(64)
    if abs(angle / math.pi - float(frac)) > tol:
        raise ValueError(
            f"twist angle {angle:.12g} is not a rational multiple of pi "
            f"(best candidate {frac})"
        )
    return frac


def periodic_point_spectrum(u, v, k: int, l: int, profile: TwistProfile):
    """Exact eigendata of the composite differential at a doubly periodic point.

    With a = l r'(|u|), b = k r'(|v|) and c the cosine between u and v, the
    block matrix [[I + a b c vhat uhat^t, b vhat vhat^t], [a uhat uhat^t, I]]
    has double eigenvalue 1 and the reciprocal pair
    lambda_pm = 1 + a c alpha_pm, alpha_pm = (b c pm sqrt(b^2 c^2 + 4 b/a))/2,
    with eigenvectors (alpha_pm vhat; uhat).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0 or nu >= profile.epsilon or nv >= profile.epsilon:
        raise ValueError("|u| and |v| must lie in (0, epsilon)")
    cert_u = _rationality_certificate(profile.eval(nu))
    cert_v = _rationality_certificate(profile.eval(nv))
    uhat, vhat = u / nu, v / nv
    c = float(uhat @ vhat)
    a = l * profile.deriv(nu)
    b = k * profile.deriv(nv)
    disc = b * b * c * c + 4.0 * b / a
    if disc < 0.0:
        raise ValueError("complex spectrum: exponents must co-rotate")
    alpha_p = (b * c + math.sqrt(disc)) / 2.0
    alpha_m = (b * c - math.sqrt(disc)) / 2.0
    lam1 = 1.0 + a * c * alpha_p
    lam4 = 1.0 + a * c * alpha_m
    w1 = np.concatenate([alpha_p * vhat, uhat])
    w4 = np.concatenate([alpha_m * vhat, uhat])
    return {
        "eigenvalues": (lam1, 1.0, 1.0, lam4),
        "w1": w1 / np.linalg.norm(w1),
        "w4": w4 / np.linalg.norm(w4),
        "trace_block": 2.0 + a * b * c * c,
        "inner": c,
        "certificates": (cert_u, cert_v),
    }


def section8_block_matrix(u, v, k: int, l: int, profile: TwistProfile):
    """The closed-form 4x4 composite differential at a doubly periodic point."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    uhat, vhat = u / nu, v / nv
    a = l * profile.deriv(nu)
    b = k * profile.deriv(nv)
    c = float(uhat @ vhat)
    top_left = np.eye(2) + a * b * c * np.outer(vhat, uhat)
    top_right = b * np.outer(vhat, vhat)
    bottom_left = a * np.outer(uhat, uhat)
    return np.block([[top_left, top_right], [bottom_left, np.eye(2)]])
