"""Spatial grid, cutoff functions and steplike potentials.

Everything downstream lives on a uniform symmetric grid over [-L, L].
The node count is kept odd so that x = 0 is a node and the reflection
x -> -x is an exact permutation of the nodes; several identities
(j_minus(x) = j_plus(-x), potential symmetry) then hold to machine
precision instead of interpolation accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "Grid",
    "CutoffPair",
    "PotentialField",
    "TailReport",
    "make_grid",
    "make_cutoffs",
    "make_steplike",
    "tail_metrics",
    "mollifier",
    "mollifier_derivative",
    "smoothstep",
    "field_to_csv",
]

PROFILE_KINDS = ("sharp_step", "smooth_step", "smooth_step_plus_bump", "custom")


@dataclass(frozen=True)
class Grid:
    """Uniform grid x_i = -L + i*dx on [-L, L], n odd so 0 is a node."""

    L: float
    n: int
    dx: float
    nodes: np.ndarray

    def interior_mask(self, margin: float) -> np.ndarray:
        """Boolean mask of nodes farther than `margin` from both ends."""
        return np.abs(self.nodes) <= self.L - margin


@dataclass(frozen=True)
class CutoffPair:
    """Smooth channel cutoffs: j_plus = 0 on x<=1, 1 on x>=2, j_minus mirrored."""

    grid: Grid
    j_plus: np.ndarray
    j_minus: np.ndarray
    j: np.ndarray           # j_minus + j_plus
    jj_sum_sq: np.ndarray   # j_minus**2 + j_plus**2


@dataclass(frozen=True)
class PotentialField:
    """Sampled potential with asymptotic values v_minus / v_plus."""

    grid: Grid
    v: np.ndarray
    v_minus: float
    v_plus: float
    profile_kind: str
    v_prime: Optional[np.ndarray] = None
    tail_tol: float = 1e-9
    boundary_deviation: float = field(default=0.0)

    @property
    def differentiable(self) -> bool:
        return self.v_prime is not None


@dataclass(frozen=True)
class TailReport:
    """Decay ladder for the short-/long-range tail conditions."""

    radii: np.ndarray
    short_range_sup_tail: np.ndarray   # sup_{|x|>=R} |x (v - v_pm)|
    long_range_sup_tail: Optional[np.ndarray]  # sup_{|x|>=R} |x v'(x)|
    short_range_ok: bool
    long_range_ok: Optional[bool]
    threshold: float


def mollifier(t: np.ndarray | float) -> np.ndarray:
    """f(t) = exp(-1/t) for t > 0, 0 otherwise.  C-infinity on all of R."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def mollifier_derivative(t: np.ndarray | float) -> np.ndarray:
    """f'(t) = exp(-1/t)/t^2 for t > 0, 0 otherwise."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def smoothstep(x: np.ndarray, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """C-infinity step rising from 0 to 1 on [lo, hi]; returns (s, s')."""
    if hi <= lo:
        raise ValueError("smoothstep needs lo < hi")
    a = mollifier(x - lo)
    b = mollifier(hi - x)
    da = mollifier_derivative(x - lo)
    db = mollifier_derivative(hi - x)
    denom = a + b
    s = a / denom
    # d/dx [a/(a+b)] with da/dx = da, db/dx = -db
    ds = (da * b + a * db) / denom**2
    return s, ds


def make_grid(L: float, n: int) -> Grid:
    if L <= 0:
        raise ValueError(f"half-length L must be positive, got {L}")
    if n < 16:
        raise ValueError(f"node count n must be >= 16, got {n}")
    if n % 2 == 0:
        raise ValueError(f"node count n must be odd so x=0 is a node, got {n}")
    nodes = np.linspace(-L, L, n)
    dx = 2.0 * L / (n - 1)
    return Grid(L=float(L), n=int(n), dx=dx, nodes=nodes)


def make_cutoffs(grid: Grid) -> CutoffPair:
    if grid.L < 4:
        raise ValueError(
            f"domain half-length {grid.L} too small: transition regions "
            "[1,2] and [-2,-1] must lie inside [-L, L] with L >= 4"
        )
    j_plus, _ = smoothstep(grid.nodes, 1.0, 2.0)
    # reflect on the node permutation so j_minus(x) == j_plus(-x) exactly
    j_minus = j_plus[::-1].copy()
    return CutoffPair(
        grid=grid,
        j_plus=j_plus,
        j_minus=j_minus,
        j=j_minus + j_plus,
        jj_sum_sq=j_minus**2 + j_plus**2,
    )


def make_steplike(
    grid: Grid,
    v_minus: float,
    v_plus: float,
    profile: str = "smooth_step",
    bump: Optional[np.ndarray] = None,
    samples: Optional[np.ndarray] = None,
    tail_tol: float = 1e-9,
) -> PotentialField:
    """Steplike potential with limits v_minus / v_plus at the box ends.

    smooth_step uses the mollifier smoothstep rising over [-1, 1]; the
    sharp_step assigns the midpoint value at x = 0.  An optional bump must
    be compactly supported within |x| <= L/2.
    """
    if profile not in PROFILE_KINDS:
        raise ValueError(f"unknown profile {profile!r}, expected one of {PROFILE_KINDS}")
    x = grid.nodes
    v_prime: Optional[np.ndarray] = None

    if profile == "custom":
        if samples is None:
            raise ValueError("custom profile requires samples")
        v = np.asarray(samples, dtype=float)
        if v.shape != x.shape:
            raise ValueError("custom samples must match the grid")
    elif profile == "sharp_step":
        v = np.where(x > 0, float(v_plus), float(v_minus))
        v[x == 0] = 0.5 * (v_minus + v_plus)
    else:
        s, ds = smoothstep(x, -1.0, 1.0)
        v = v_minus + (v_plus - v_minus) * s
        v_prime = (v_plus - v_minus) * ds

    if profile == "smooth_step_plus_bump" or (bump is not None and profile != "sharp_step"):
        if bump is None:
            raise ValueError("smooth_step_plus_bump requires a bump field")
        bump = np.asarray(bump, dtype=float)
        if bump.shape != x.shape:
            raise ValueError("bump must be sampled on the same grid")
        support = np.abs(x[np.abs(bump) > 0])
        if support.size and support.max() > grid.L / 2:
            raise ValueError("bump support must stay within |x| <= L/2")
        v = v + bump
        if v_prime is not None:
            v_prime = v_prime + np.gradient(bump, grid.dx)

    dev = max(abs(v[0] - v_minus), abs(v[-1] - v_plus))
    return PotentialField(
        grid=grid,
        v=v,
        v_minus=float(v_minus),
        v_plus=float(v_plus),
        profile_kind=profile,
        v_prime=v_prime,
        tail_tol=tail_tol,
        boundary_deviation=float(dev),
    )


def tail_metrics(pot: PotentialField, threshold: float = 1e-6) -> TailReport:
    """Sup of |x (v - v_pm)| and |x v'| outside a ladder of radii R."""
    grid = pot.grid
    x = grid.nodes
    radii = np.array([grid.L / 4, grid.L / 2, 3 * grid.L / 4])
    deviation = np.where(x >= 0, pot.v - pot.v_plus, pot.v - pot.v_minus)
    short = np.array(
        [np.max(np.abs(x * deviation)[np.abs(x) >= R]) for R in radii]
    )
    short_ok = bool(np.all(short[1:] <= short[:-1] + 1e-15) and short[-1] < threshold)
    if pot.v_prime is not None:
        long_ = np.array(
            [np.max(np.abs(x * pot.v_prime)[np.abs(x) >= R]) for R in radii]
        )
        long_ok = bool(np.all(long_[1:] <= long_[:-1] + 1e-15) and long_[-1] < threshold)
    else:
        long_ = None
        long_ok = None
    return TailReport(
        radii=radii,
        short_range_sup_tail=short,
        long_range_sup_tail=long_,
        short_range_ok=short_ok,
        long_range_ok=long_ok,
        threshold=threshold,
    )


def field_to_csv(grid: Grid, values: np.ndarray, path) -> None:
    """Write a sampled field as CSV with columns x,value (17 sig digits)."""
    with open(path, "w") as fh:
        fh.write("x,value\n")
        for xi, vi in zip(grid.nodes, values):
            fh.write(f"{xi:.17g},{vi:.17g}\n")
