"""Simulation of Gaussian tent processes by truncated sine-series expansion,
assembly of the Brownian sheet from independent ramps, and simulated tables
of the limiting squared-norm distribution.

A Gaussian tent on a k-dimensional face has covariance
prod_j (min(s_j,t_j) - s_j t_j); its series expansion is

    T(t) = sum over multi-indices v in {1..nu_max}^k of
           Z_v / (v_1 ... v_k * pi^k) * prod_j sqrt(2) sin(v_j pi t_j)

with i.i.d. standard normal Z_v, and the squared L2 norm is the weighted
chi-square sum  sum_v Z_v^2 / ((v_1 ... v_k)^2 pi^(2k)).  Truncating at
nu_max leaves a deterministic gap in the mean, which is added back to every
norm draw by default (the tail variance is negligible at the default
truncation levels).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import RandomStream, enumerate_subsets, mask_cardinality, mask_members
from .decompose import ramp_values

#: Normal variates per derived sub-stream when generating norm tables. The
#: block layout depends only on the table configuration, so results are
#: independent of execution order and thread count.
_BLOCK_ELEMENTS = 1 << 23


def default_nu_max(k: int) -> int:
    """Default series truncation per cardinality, keeping nu_max^k moderate."""
    if k <= 1:
        return 200
    if k == 2:
        return 64
    if k == 3:
        return 24
    return 12


@dataclass(frozen=True)
class KLConfig:
    """Series truncation and evaluation-lattice size for simulation.

    ``nu_max`` of None means the per-cardinality default.
    """

    nu_max: int | None = None
    grid_m: int = 33

    def resolve_nu_max(self, k: int) -> int:
        nu = self.nu_max if self.nu_max is not None else default_nu_max(k)
        if nu < 1:
            raise ValueError("nu_max must be >= 1")
        return nu


@dataclass(frozen=True)
class AsymptoticNormTable:
    """Sorted simulated draws of the limiting squared norm for one cardinality."""

    k: int
    draws: np.ndarray
    nu_max: int
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.draws, dtype=np.float64)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "draws", arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AsymptoticNormTable):
            return NotImplemented
        return (self.k == other.k and self.nu_max == other.nu_max
                and self.seed == other.seed
                and np.array_equal(self.draws, other.draws))


def truncation_tail_mean(k: int, nu_max: int) -> float:
    """Mean of the neglected series tail: 6^(-k) minus the truncated mean."""
    partial = float(np.sum(1.0 / (np.arange(1, nu_max + 1, dtype=np.float64) ** 2
                                  * np.pi ** 2)))
    return 6.0 ** (-k) - partial ** k


def _sine_basis(nu_max: int, t: np.ndarray) -> np.ndarray:
    """Orthonormal sine basis values sqrt(2) sin(v pi t), shape (nu_max, len(t))."""
    v = np.arange(1, nu_max + 1, dtype=np.float64)
    basis = np.sqrt(2.0) * np.sin(np.outer(v, np.pi * t))
    # sin(v*pi) only rounds to ~1e-14 in floats; the basis is exactly 0 there.
    basis[:, t <= 0.0] = 0.0
    basis[:, t >= 1.0] = 0.0
    return basis


def simulate_tent(stream: RandomStream, mask: int, cfg: KLConfig = KLConfig()) -> np.ndarray:
    """One draw of a Gaussian tent on the face of ``mask``, on the lattice.

    Returns an array with one axis of extent grid_m per coordinate in the
    mask. Values at lattice points with a face coordinate of 0 or 1 are
    exactly zero because every sine factor vanishes there.
    """
    k = mask_cardinality(mask)
    if k == 0:
        raise ValueError("subset must be nonempty")
    nu_max = cfg.resolve_nu_max(k)
    t = np.linspace(0.0, 1.0, cfg.grid_m)
    basis = _sine_basis(nu_max, t)
    v = np.arange(1, nu_max + 1, dtype=np.float64)
    z = stream.generator().standard_normal((nu_max,) * k)
    coeff = z / (np.pi ** k)
    for axis in range(k):
        shape = tuple(nu_max if a == axis else 1 for a in range(k))
        coeff = coeff / v.reshape(shape)
    out = coeff
    for _ in range(k):
        out = np.tensordot(out, basis, axes=(0, 0))
    return out


def simulate_sheet(stream: RandomStream, p: int, cfg: KLConfig = KLConfig()) -> np.ndarray:
    """One draw of the Brownian sheet on the lattice over [0,1]^p.

    Built as the sum of independent ramps: one independent Gaussian tent per
    nonempty subset plus, for the empty subset, a single standard normal
    scaled by the product of all coordinates. Covariance of the result is
    prod_j min(s_j, t_j).
    """
    if not 1 <= p <= 4:
        raise ValueError("sheet simulation is limited to p <= 4 (grid memory)")
    m = cfg.grid_m
    corner = stream.child(0).generator().standard_normal()
    sheet = ramp_values(0, np.array(corner), m, p)
    for index, mask in enumerate(enumerate_subsets(p, p), start=1):
        tent = simulate_tent(stream.child(index), mask, cfg)
        sheet += ramp_values(mask, tent, m, p)
    return sheet


def _norm_weights(k: int, nu_max: int) -> np.ndarray:
    """Flattened weights 1/((v_1...v_k)^2 pi^(2k)) over {1..nu_max}^k."""
    inv_sq = 1.0 / np.arange(1, nu_max + 1, dtype=np.float64) ** 2
    grid = reduce(np.multiply.outer, [inv_sq] * k)
    return grid.reshape(-1) / np.pi ** (2 * k)


def asymptotic_norm_draws(
    stream: RandomStream,
    k: int,
    nu_max: int | None = None,
    draws: int = 100_000,
    tail_compensation: bool = True,
) -> AsymptoticNormTable:
    """Simulate ``draws`` values of the limiting squared tent norm.

    Each draw is the truncated weighted chi-square sum; with
    ``tail_compensation`` the deterministic tail mean
    :func:`truncation_tail_mean` is added to every draw.
    """
    if k < 1:
        raise ValueError("cardinality must be >= 1")
    if draws < 1:
        raise ValueError("need at least one draw")
    nu = nu_max if nu_max is not None else default_nu_max(k)
    weights = _norm_weights(k, nu)
    shift = truncation_tail_mean(k, nu) if tail_compensation else 0.0
    out = np.empty(draws)
    n_terms = weights.shape[0]
    block_draws = max(1, _BLOCK_ELEMENTS // n_terms)
    for block, start in enumerate(range(0, draws, block_draws)):
        stop = min(start + block_draws, draws)
        z = stream.child(block).generator().standard_normal((stop - start, n_terms))
        out[start:stop] = (z * z) @ weights + shift
    out.sort()
    return AsymptoticNormTable(k=k, draws=out, nu_max=nu, seed=stream.seed)


def asymptotic_cdf(table: AsymptoticNormTable, x: float) -> float:
    """Empirical c.d.f. of the table draws: fraction of draws <= x."""
    m = table.draws.shape[0]
    if m == 0:
        raise ValueError("table is empty")
    return float(np.searchsorted(table.draws, x, side="right")) / m


def truncated_tent_kernel(s: float, t: float, nu_max: int) -> float:
    """Covariance of the truncated tent series at scalar points (s, t):
    the first nu_max terms of the series for min(s,t) - s*t."""
    v = np.arange(1, nu_max + 1, dtype=np.float64)
    return float(np.sum(2.0 * np.sin(v * np.pi * s) * np.sin(v * np.pi * t)
                        / (v * v * np.pi * np.pi)))


def truncated_sheet_covariance(s, t, cfg: KLConfig = KLConfig()) -> float:
    """Exact covariance of the truncated sheet construction at points (s, t).

    Sums, over every coordinate subset, the product of the outside
    coordinates of both points times the truncated tent kernel of the inside
    coordinates; the difference from prod_j min(s_j, t_j) is the deterministic
    truncation bias of :func:`simulate_sheet`.
    """
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    if s.shape != t.shape:
        raise ValueError("points must share a dimension")
    p = s.shape[0]
    total = float(np.prod(s) * np.prod(t))
    for mask in enumerate_subsets(p, p):
        members = mask_members(mask)
        nu = cfg.resolve_nu_max(len(members))
        term = 1.0
        for j in range(p):
            if j in members:
                term *= truncated_tent_kernel(s[j], t[j], nu)
            else:
                term *= s[j] * t[j]
        total += term
    return total
