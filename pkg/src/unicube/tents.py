"""Tent components of the empirical process on the unit cube and their
squared L2 norms, one per coordinate subset.

For a subset H the tent statistic of a sample U is

    (1/n) * sum_{a,b=1..n} prod_{j in H} f(U[a,j], U[b,j])

with the pair factor f(u, v) = (u^2 + v^2)/2 - max(u, v) + 1/3, which is the
integral over [0,1] of (1{u<=t} - t)(1{v<=t} - t). The double sum is computed
over pairs a <= b only (off-diagonal terms doubled), and per-subset products
are assembled by reusing the product of the subset minus its lowest bit, so a
whole family of subsets costs barely more than a single one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Sample, enumerate_subsets, mask_cardinality


def pair_factor(u: float, v: float) -> float:
    """Per-coordinate pair factor (u^2 + v^2)/2 - max(u, v) + 1/3."""
    return (u * u + v * v) / 2.0 - max(u, v) + 1.0 / 3.0


@dataclass(frozen=True)
class TentNorms:
    """Squared tent norms for every enumerated subset of one sample."""

    norms: dict[int, float]
    n: int
    p: int
    h: int

    def __getitem__(self, mask: int) -> float:
        return self.norms[mask]

    def masks(self) -> list[int]:
        return list(self.norms.keys())


def _pair_factors(batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pair factors for a (B, n, p) batch over pairs a <= b.

    Returns (factors, weights): factors has shape (B, npairs, p), weights has
    shape (npairs,) with 1 on the diagonal pairs and 2 off it.
    """
    _, n, _ = batch.shape
    ia, ib = np.triu_indices(n)
    u = batch[:, ia, :]
    v = batch[:, ib, :]
    factors = (u * u + v * v) / 2.0 - np.maximum(u, v) + 1.0 / 3.0
    weights = np.where(ia == ib, 1.0, 2.0)
    return factors, weights


def _subset_product(mask: int, factors: np.ndarray, cache: dict[int, np.ndarray]) -> np.ndarray:
    """Product over j in mask of factors[..., j], via the lowest-bit recurrence.

    product(H) = product(H minus lowest bit) * factor(lowest bit). Memoized so
    that any request order performs the identical sequence of multiplications.
    """
    found = cache.get(mask)
    if found is not None:
        return found
    low = mask & -mask
    rest = mask ^ low
    j = low.bit_length() - 1
    if rest == 0:
        prod = factors[..., j]
    else:
        prod = _subset_product(rest, factors, cache) * factors[..., j]
    cache[mask] = prod
    return prod


def _canonical_rows(points: np.ndarray) -> np.ndarray:
    """Rows sorted lexicographically (first column primary).

    The statistics are symmetric in the observations but floating-point
    accumulation is not, so a canonical row order makes them bitwise
    invariant under row permutations.
    """
    order = np.lexsort(points.T[::-1])
    return points[order]


def _norms_for_masks(batch: np.ndarray, masks: list[int]) -> np.ndarray:
    """Squared norms for a (B, n, p) batch, one column per mask: (B, len(masks))."""
    n = batch.shape[1]
    batch = np.stack([_canonical_rows(item) for item in batch])
    factors, weights = _pair_factors(batch)
    cache: dict[int, np.ndarray] = {}
    out = np.empty((batch.shape[0], len(masks)))
    for col, mask in enumerate(masks):
        prod = _subset_product(mask, factors, cache)
        out[:, col] = prod @ weights / n
    return out


def tent_norm(sample: Sample, mask: int) -> float:
    """Squared L2 norm of the tent statistic for one nonempty subset."""
    if mask == 0:
        raise ValueError("subset must be nonempty")
    if mask >> sample.p:
        raise ValueError(f"mask {mask:#x} names coordinates beyond p={sample.p}")
    return float(_norms_for_masks(sample.data[None, :, :], [mask])[0, 0])


def all_tent_norms(sample: Sample, h: int) -> TentNorms:
    """Squared norms for every nonempty subset of cardinality <= h.

    Identical output to calling :func:`tent_norm` per subset, at a fraction
    of the cost.
    """
    masks = enumerate_subsets(sample.p, h)
    values = _norms_for_masks(sample.data[None, :, :], masks)[0]
    return TentNorms(dict(zip(masks, values.tolist())), sample.n, sample.p, h)


def tent_eval(sample: Sample, mask: int, t) -> float:
    """Tent component of the empirical process at point t:

        (1/sqrt(n)) * sum_i prod_{j in H} (1{U[i,j] <= t_j} - t_j)
    """
    if mask == 0:
        raise ValueError("subset must be nonempty")
    if mask >> sample.p:
        raise ValueError(f"mask {mask:#x} names coordinates beyond p={sample.p}")
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    if t.shape[0] != sample.p:
        raise ValueError(f"point has {t.shape[0]} coordinates, expected {sample.p}")
    data = sample.data
    prod = None
    m = mask
    while m:
        low = m & -m
        j = low.bit_length() - 1
        col = (data[:, j] <= t[j]).astype(np.float64) - t[j]
        prod = col if prod is None else prod * col
        m ^= low
    return float(prod.sum() / np.sqrt(sample.n))


def null_norm_mean(mask: int) -> float:
    """Expected squared norm under uniformity: 6^(-#H), independent of n."""
    return 6.0 ** (-mask_cardinality(mask))
