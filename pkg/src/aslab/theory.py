"""Numerical counterparts of the generator's geometry: connection
probability, the expected-cone integral equation, peering probability and
maintenance-cost estimation from measured graphs.

The cone profile solves the Volterra equation

    T(r) = 1 + 1/2 * integral_r^R T(s) exp((s - r)/2) ds

backward from T(R) = 1 on a uniform grid.  The default scheme is an
implicit three-point product rule (third order); plain trapezoid is kept
for comparison.  Differentiating the equation gives T' = 1/2 - T, hence
T(r) = (1 + exp(R - r))/2, which the tests use as an independent oracle
(re-derived and checked by substitution) while the solver stays numerical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .game import GameParams, _as_fraction, clique_size_bound, cone_size_bound
from .graph import LabeledAsGraph, top_clique

# Below this separation the closed-form disk-intersection area (4 e^{l/2})
# stops being a good approximation of the true lens area.
INTERSECTION_AREA_MIN_VALID_L = 1.0


@dataclass(frozen=True)
class TheoryContext:
    """Disk population: node count, radius, and density n / (pi e^R)."""

    n: int
    radius: float
    delta: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.radius <= 0:
            raise ValueError("need n >= 1 and radius > 0")
        object.__setattr__(self, "delta", self.n / (math.pi * math.exp(self.radius)))


def intersection_area(l: float) -> float:
    """Approximate area of the lens between two radius-R disks whose
    centers sit ``l`` apart: 4 e^{l/2}."""
    return 4.0 * math.exp(l / 2.0)


def intersection_area_is_valid(l: float) -> bool:
    """Validity flag for :func:`intersection_area` (poor near l = 0)."""
    return l >= INTERSECTION_AREA_MIN_VALID_L


def connect_prob(ctx: TheoryContext, l: float) -> float:
    """Probability that no other node falls between two nodes ``l`` apart,
    i.e. that the generator links them: exp(-delta * 4 e^{l/2})."""
    return math.exp(-ctx.delta * intersection_area(l))


# ---------------------------------------------------------------------------
# expected customer-cone profile


@dataclass(frozen=True)
class ConeProfile:
    grid: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ValueError("grid and values must align")

    def value_at(self, r: float) -> float:
        return float(np.interp(r, self.grid, self.values))


def solve_cone_profile(
    radius: float, grid_size: int = 1024, scheme: str = "order3"
) -> ConeProfile:
    """Solve the expected-cone Volterra equation on a uniform grid.

    ``scheme='order3'`` (default) is accurate to ~3e-7 relative at 1024
    points; ``'trapezoid'`` is the textbook rule, roughly 7e-5 there.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    if radius <= 0:
        raise ValueError("radius must be positive")
    r = np.linspace(0.0, radius, grid_size)
    if scheme == "trapezoid":
        values = _solve_trapezoid(r)
    elif scheme == "order3":
        values = _solve_order3(r)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("cone-profile solve produced non-finite values")
    return ConeProfile(tuple(r.tolist()), tuple(values.tolist()))


def _solve_trapezoid(r: np.ndarray) -> np.ndarray:
    m = len(r)
    h = r[1] - r[0]
    e = np.exp(r / 2.0)
    values = np.empty(m)
    values[-1] = 1.0
    acc = 0.0  # integral of T(s) e^{s/2} from r_{i+1} to R
    for i in range(m - 2, -1, -1):
        g_next = values[i + 1] * e[i + 1]
        values[i] = (1.0 + 0.5 / e[i] * (acc + 0.5 * h * g_next)) / (1.0 - 0.25 * h)
        acc += 0.5 * h * (values[i] * e[i] + g_next)
    return values


def _solve_order3(r: np.ndarray) -> np.ndarray:
    """Implicit product rule using quadratic interpolation of the integrand
    through three consecutive grid points; the two points next to r = R are
    solved jointly to keep third order from the first step on."""
    m = len(r)
    h = r[1] - r[0]
    e = np.exp(r / 2.0)
    values = np.empty(m)
    acc = np.empty(m)
    values[-1] = 1.0
    acc[-1] = 0.0
    g_last = e[-1]
    # last interval: h(-g2 + 8 g1 + 5 g0)/12 with g0 at R
    # last two intervals (Simpson): h(g2 + 4 g1 + g0)/3
    e2, e1 = e[-3], e[-2]
    a1, b1, c1 = -h / 12.0, 8.0 * h / 12.0, 5.0 * h / 12.0
    a2, b2, c2 = h / 3.0, 4.0 * h / 3.0, h / 3.0
    lhs = np.array(
        [
            [1.0 - 0.5 * b1, -0.5 * a1 * e2 / e1],
            [-0.5 * b2 * e1 / e2, 1.0 - 0.5 * a2],
        ]
    )
    rhs = np.array([1.0 + 0.5 * c1 * g_last / e1, 1.0 + 0.5 * c2 * g_last / e2])
    t1, t2 = np.linalg.solve(lhs, rhs)
    values[-2], values[-3] = t1, t2
    acc[-2] = a1 * t2 * e2 + b1 * t1 * e1 + c1 * g_last
    acc[-3] = a2 * t2 * e2 + b2 * t1 * e1 + c2 * g_last
    for i in range(m - 4, -1, -1):
        g1 = values[i + 1] * e[i + 1]
        g2 = values[i + 2] * e[i + 2]
        partial = acc[i + 1] + h * (8.0 * g1 - g2) / 12.0
        values[i] = (1.0 + 0.5 / e[i] * partial) / (1.0 - 5.0 * h / 24.0)
        acc[i] = acc[i + 1] + h * (5.0 * values[i] * e[i] + 8.0 * g1 - g2) / 12.0
    return values


def angle_integral_check(
    ctx: TheoryContext, s: float, r: float, samples: int = 200_000, seed: int = 0
) -> tuple[float, float]:
    """Monte-Carlo value of the inner angle integral
    ``int_0^{2pi} exp(-4 delta e^{l(s,phi,r,0)/2}) dphi`` against the
    closed-form reduction ``(1/delta) e^{-(s+r)/2}`` that turns the full
    cone equation into its one-dimensional form.
    """
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=samples)
    arg = np.cosh(s) * np.cosh(r) - np.sinh(s) * np.sinh(r) * np.cos(phi)
    l = np.arccosh(np.maximum(arg, 1.0))
    mc = float(np.mean(np.exp(-ctx.delta * 4.0 * np.exp(l / 2.0)))) * 2.0 * math.pi
    approx = math.exp(-(s + r) / 2.0) / ctx.delta
    return mc, approx


# ---------------------------------------------------------------------------
# peering probability


def peering_prob(r2: float, radius: float) -> tuple[float, float]:
    """(exact, approximate) chance that a random more-central node peers
    with a node at radius ``r2``.

    The exact branch is the two-arc intersection formula, clamped and
    cross-faded to 1 over a 1e-6-wide strip at r2 = R/2 where its arccos
    arguments leave their domain; the approximation is
    ``min(1, e^{R/2 - r2})``.
    """
    if r2 <= 0 or r2 > radius:
        raise ValueError("need 0 < r2 <= radius")
    half = radius / 2.0
    approx = 1.0 if r2 < half else math.exp(half - r2)
    if r2 <= half:
        return 1.0, approx
    exact = _peering_exact(r2, radius)
    fade = 1e-6
    if r2 < half + fade:
        w = (r2 - half) / fade
        exact = (1.0 - w) * 1.0 + w * exact
    return exact, approx


def _clamp(x: float) -> float:
    return min(1.0, max(-1.0, x))


def _peering_exact(r2: float, radius: float) -> float:
    ch2, sh2 = math.cosh(r2), math.sinh(r2)
    chr_, shr = math.cosh(radius), math.sinh(radius)
    first = math.acos(_clamp((ch2 * ch2 - chr_) / (sh2 * sh2))) / math.pi
    second = (
        math.exp(radius)
        * math.acos(_clamp((ch2 * chr_ - ch2) / (sh2 * shr)))
        / (math.pi * math.exp(r2))
    )
    return first + second


def peering_prob_by_cone(t2: float, profile: ConeProfile) -> float:
    """Peering likelihood as a function of expected cone size: proportional
    below the half-radius cone scale, saturating at 1 above it."""
    if t2 < 1:
        raise ValueError("cone sizes are at least 1")
    pivot = profile.value_at(profile.grid[-1] / 2.0)
    if t2 > pivot:
        return 1.0
    return t2 / pivot


# ---------------------------------------------------------------------------
# maintenance-cost estimation and bound tables


def estimate_phis(g: LabeledAsGraph, c1: float = 1.1, c2: float = 0.05) -> GameParams:
    """Maintenance costs scaled from edge counts:
    phi_p = N c1 / #cp-edges, phi_r = N c2 / #peer-edges."""
    if not g.cp_edges:
        raise ValueError("graph has no customer-provider edges")
    if not g.peer_edges:
        raise ValueError("graph has no peer edges")
    n = g.node_count
    phi_p = _as_fraction(c1) * n / len(g.cp_edges)
    phi_r = _as_fraction(c2) * n / len(g.peer_edges)
    return GameParams(phi_p, phi_r)


@dataclass(frozen=True)
class BoundRow:
    label: str
    nodes: int
    peer_edges: int
    cp_edges: int
    phi_p: float
    phi_r: float
    clique_size_bound: float
    measured_clique_size: int
    cone_size_bound: float
    measured_max_cone: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def bound_timeseries(
    snapshots: Sequence[tuple[str, LabeledAsGraph]],
    c1: float = 1.1,
    c2: float = 0.05,
) -> list[BoundRow]:
    """Per-snapshot comparison of the stability bounds against measurement:
    estimated phis, the clique-size bound, and the cone bound evaluated at
    the measured top-clique size."""
    if not snapshots:
        raise ValueError("need at least one snapshot")
    rows = []
    for label, g in snapshots:
        params = estimate_phis(g, c1, c2)
        clique = top_clique(g)
        k = max(1, len(clique))
        cone_bound = cone_size_bound(g.node_count, k, params)
        rows.append(
            BoundRow(
                label=label,
                nodes=g.node_count,
                peer_edges=len(g.peer_edges),
                cp_edges=len(g.cp_edges),
                phi_p=float(params.phi_p),
                phi_r=float(params.phi_r),
                clique_size_bound=clique_size_bound(params),
                measured_clique_size=len(clique),
                cone_size_bound=float(cone_bound),
                measured_max_cone=int(g.cone_sizes().max()),
            )
        )
    return rows
