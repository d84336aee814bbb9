"""Exact combinatorial layer: torus mapping classes and Floer-rank growth.

Integer 2x2 matrices modulo global sign represent twist compositions on the
torus; trace classifies them as periodic, reducible, or Anosov.  Floer ranks
are geometric intersection numbers of homology classes, computed with exact
big-integer arithmetic, and their exponential growth rate is estimated from
the rank sequence.  A Thurston-type shear representation gives a
consistency-checked stretch-factor certificate for longer twist chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

T1_MATRIX = ((1, 1), (0, 1))
T2_MATRIX = ((1, 0), (-1, 1))


def _matmul(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def _matpow(m, n):
    if n < 0:
        # inverse of a determinant-1 integer matrix stays integral
        m = ((m[1][1], -m[0][1]), (-m[1][0], m[0][0]))
        n = -n
    out = ((1, 0), (0, 1))
    while n:
        if n & 1:
            out = _matmul(out, m)
        m = _matmul(m, m)
        n >>= 1
    return out


@dataclass(frozen=True)
class MappingClass2:
    """An element of PSL(2, Z): integer entries, determinant 1, normalized sign."""

    entries: tuple

    def __post_init__(self):
        ((a, b), (c, d)) = self.entries
        if a * d - b * c != 1:
            raise ValueError("determinant must be 1")
        flat = (a, b, c, d)
        lead = next((x for x in flat if x != 0), 1)
        if lead < 0:
            a, b, c, d = -a, -b, -c, -d
        object.__setattr__(self, "entries", ((a, b), (c, d)))

    @property
    def trace(self) -> int:
        return self.entries[0][0] + self.entries[1][1]

    def __matmul__(self, other: "MappingClass2") -> "MappingClass2":
        return MappingClass2(_matmul(self.entries, other.entries))

    def power(self, n: int) -> "MappingClass2":
        return MappingClass2(_matpow(self.entries, n))

    def apply(self, vec):
        ((a, b), (c, d)) = self.entries
        return (a * vec[0] + b * vec[1], c * vec[0] + d * vec[1])


@dataclass(frozen=True)
class HomClass:
    """Homology class (a, b) in Z^2; primitive (gcd 1) when it represents a curve."""

    a: int
    b: int
    curve: bool = True

    def __post_init__(self):
        if self.curve and math.gcd(self.a, self.b) != 1:
            raise ValueError(f"curve class ({self.a}, {self.b}) is not primitive")


@dataclass
class RankSequence:
    """Ranks rank HF(S1, tau^n S2) for n = 1..N; None marks an undefined entry."""

    values: list
    gamma_estimate: float = field(init=False)

    def __post_init__(self):
        logs = [
            math.log(v) / (n + 1)
            for n, v in enumerate(self.values)
            if v is not None and v > 0
        ]
        self.gamma_estimate = min(logs) if logs else 0.0


@dataclass(frozen=True)
class ChainConfig:
    """A twist chain: m curves in a row, consecutive ones meeting once."""

    m: int
    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(k) for k in self.exponents))
        if len(self.exponents) != self.m or self.m < 2:
            raise ValueError("need one exponent per curve, m >= 2")

    @property
    def penner_applicable(self) -> bool:
        ks = self.exponents
        return all(abs(k) >= 1 for k in ks) and all(
            ks[i] * ks[i + 1] < 0 for i in range(len(ks) - 1)
        )


def composite_matrix(k: int, l: int) -> MappingClass2:
    """Mapping class of the composite T1^l o T2^k (T2 first): [[1-k*l, l], [-k, 1]]."""
    m = _matmul(_matpow(T1_MATRIX, l), _matpow(T2_MATRIX, k))
    assert m == ((1 - k * l, l), (-k, 1))
    return MappingClass2(m)


def generator_product(powers) -> MappingClass2:
    """Product of alternating generator powers T1^{p} / T2^{p}, left to right.

    `powers` is a sequence of (which, p) with which in {1, 2}.
    """
    out = ((1, 0), (0, 1))
    for which, p in powers:
        gen = T1_MATRIX if which == 1 else T2_MATRIX
        out = _matmul(out, _matpow(gen, p))
    return MappingClass2(out)


def classify(m: MappingClass2):
    """Trace trichotomy: |tr|<2 Periodic, =2 Reducible, >2 Anosov with stretch factor.

    For the Anosov case the stretch factor is (|tr| + sqrt(tr^2 - 4)) / 2,
    returned both as a float and as the exact pair (|tr|, tr^2 - 4).
    """
    t = abs(m.trace)
    if t < 2:
        return {"type": "Periodic", "trace": m.trace}
    if t == 2:
        return {"type": "Reducible", "trace": m.trace}
    disc = t * t - 4
    lam = (t + math.sqrt(disc)) / 2.0
    return {
        "type": "Anosov",
        "trace": m.trace,
        "stretch_factor": lam,
        "stretch_exact": (t, disc),
    }


def intersection_number_torus(c1: HomClass, c2: HomClass) -> int:
    """Geometric intersection number on the torus: |a*d - b*c|."""
    return abs(c1.a * c2.b - c1.b * c2.a)


def hf_rank_sequence(k: int, l: int, N: int) -> RankSequence:
    """Ranks rank HF(S1, tau^n S2) = i((1,0), M^n (0,1)), M the composite class.

    Entries where M^n (0,1) is isotopic to (0,1) (the classes coincide up to
    sign) are undefined and stored as None.
    """
    m = composite_matrix(k, l).entries
    ref = HomClass(1, 0)
    values = []
    acc = ((1, 0), (0, 1))
    for _ in range(N):
        acc = _matmul(acc, m)
        vec = (acc[0][1], acc[1][1])  # image of (0, 1)
        rank = intersection_number_torus(ref, HomClass(vec[0], vec[1], curve=False))
        # undefined when the image coincides with either reference class
        if vec in ((0, 1), (0, -1)) or rank == 0:
            values.append(None)
            continue
        values.append(rank)
    return RankSequence(values)


def hf_rank_square_twist(k: int) -> int:
    """rank HF(S_i, tau_j^{2k} S_i) = 2k (square powers of the neighbor twist)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return 2 * k


def growth_rate(seq: RankSequence) -> float:
    """Extrapolated growth rate of log(rank)/n from the tail of the sequence.

    Uses the Richardson-style ratio estimate log(rank(n)/rank(n-1)) on the last
    defined adjacent pair, which cancels the O(1/n) prefactor error of the raw
    liminf.  Requires at least 5 defined entries.
    """
    defined = [(n + 1, v) for n, v in enumerate(seq.values) if v is not None and v > 0]
    if len(defined) < 5:
        raise ValueError("need at least 5 defined entries")
    (n1, v1), (n2, v2) = defined[-2], defined[-1]
    return math.log(Fraction(v2, v1)) / (n2 - n1)


def chain_stretch_factor(cfg: ChainConfig):
    """Thurston-type shear certificate for the stretch factor of a twist chain.

    The chain's curves split into the odd multicurve A and the even multicurve
    B; consecutive curves meet once, all other pairs are disjoint.  With mu the
    top eigenvalue of N N^T (N the bipartite intersection matrix), twists about
    A act as upper shears by sqrt(mu) and twists about B as lower shears; the
    spectral radius of the represented composite estimates the stretch factor.
    This is a consistency-checked heuristic certificate: it reproduces the
    exact torus value for m = 2 and certifies pseudo-Anosov via |trace| > 2.
    """
    if not cfg.penner_applicable:
        raise ValueError("exponent signs must alternate with |k_i| >= 1")
    n_a = (cfg.m + 1) // 2
    n_b = cfg.m // 2
    # bipartite intersection matrix: row per A-curve, column per B-curve;
    # A-curve 2i-1 meets B-curves 2i-2 and 2i (when present) exactly once.
    nn = [[0] * n_a for _ in range(n_a)]  # N N^T
    inter = [[0] * n_b for _ in range(n_a)]
    for i in range(n_a):
        for j in range(n_b):
            if abs((2 * i + 1) - (2 * j + 2)) == 1:
                inter[i][j] = 1
    for i in range(n_a):
        for j in range(n_a):
            nn[i][j] = sum(inter[i][t] * inter[j][t] for t in range(n_b))
    mu = _top_eigenvalue_symmetric(nn)
    s = math.sqrt(mu)
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    for idx, k in enumerate(cfg.exponents):
        t = abs(k) * s
        if idx % 2 == 0:  # A-curve: upper shear
            fa, fb, fc, fd = 1.0, t, 0.0, 1.0
        else:  # B-curve: lower shear
            fa, fb, fc, fd = 1.0, 0.0, t, 1.0
        a, b, c, d = (
            a * fa + b * fc,
            a * fb + b * fd,
            c * fa + d * fc,
            c * fb + d * fd,
        )
    tr = a + d
    disc = tr * tr - 4.0
    if disc <= 0.0:
        lam = 1.0
    else:
        lam = (abs(tr) + math.sqrt(disc)) / 2.0
    return {
        "stretch_factor": lam,
        "trace": tr,
        "mu": mu,
        "pseudo_anosov_certified": abs(tr) > 2.0,
    }


def _top_eigenvalue_symmetric(mat) -> float:
    """Largest eigenvalue of a small symmetric nonnegative matrix (power iteration)."""
    n = len(mat)
    v = [1.0] * n
    lam = 0.0
    for _ in range(10000):
        w = [sum(mat[i][j] * v[j] for j in range(n)) for i in range(n)]
        norm = math.sqrt(sum(x * x for x in w))
        if norm == 0.0:
            return 0.0
        w = [x / norm for x in w]
        new_lam = sum(w[i] * sum(mat[i][j] * w[j] for j in range(n)) for i in range(n))
        if abs(new_lam - lam) < 1e-14:
            return new_lam
        lam, v = new_lam, w
    return lam
