"""Decision procedures for testing uniformity on the unit cube.

Two finite-sample rules calibrated by Monte Carlo against a shared null
reference (both consume the same per-subset p-value estimates):

* min-p rule ("m"): reject when the smallest per-subset p-value falls below
  1 - (1 - alpha)^(1/#subsets);
* sum rule ("s"): map each p-value through the one-degree chi-square quantile
  of its complement, sum, and reject above the chi-square quantile with
  #subsets degrees of freedom.

The asymptotic variants ("m-as", "s-as") use simulated tables of the limiting
norm distribution instead of a finite-n null reference and always run the
full subset family. Null references are cached in a plain-text format with a
bit-exact float round trip.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .brownian import AsymptoticNormTable, asymptotic_cdf, asymptotic_norm_draws
from .core import RandomStream, Sample, enumerate_subsets, mask_label
from .special import chisq_quantile
from .tents import _norms_for_masks, all_tent_norms

CACHE_MAGIC = "unicube-null v1"

FINITE_MODES = ("m", "s")
ASYMPTOTIC_MODES = ("m-as", "s-as")

#: Replicates per work unit when building references. Each replicate still
#: owns its own sub-stream, so the grouping never affects the output.
_REPLICATE_BATCH = 256


@dataclass(frozen=True)
class NullReference:
    """Sorted null statistics per subset for one (n, p, h, R, seed) setup."""

    n: int
    p: int
    h: int
    R: int
    seed: int
    norms: dict[int, np.ndarray]

    def __post_init__(self):
        frozen = {}
        for mask, vec in self.norms.items():
            arr = np.asarray(vec, dtype=np.float64).copy()
            arr.flags.writeable = False
            frozen[mask] = arr
        object.__setattr__(self, "norms", frozen)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NullReference):
            return NotImplemented
        return (
            (self.n, self.p, self.h, self.R, self.seed)
            == (other.n, other.p, other.h, other.R, other.seed)
            and list(self.norms) == list(other.norms)
            and all(np.array_equal(self.norms[m], other.norms[m]) for m in self.norms)
        )


@dataclass(frozen=True)
class TestReport:
    """Per-subset statistics and p-values plus the aggregate decision."""

    mode: str
    statistics: dict[int, float]
    p_values: dict[int, float]
    aggregate: float
    threshold: float
    alpha: float
    reject: bool
    n: int
    p: int
    h: int
    R: int
    seed: int

    @property
    def decision(self) -> str:
        return "reject" if self.reject else "not-reject"


def null_statistic_matrix(
    stream: RandomStream,
    n: int,
    p: int,
    masks: list[int],
    replicates: int,
    threads: int = 1,
) -> np.ndarray:
    """Null statistics for ``replicates`` uniform samples, one row each.

    Replicate r draws its sample from ``stream.child(r)``, so the result is
    deterministic for any thread count or execution order.
    """
    out = np.empty((replicates, len(masks)))

    def fill(start: int, stop: int) -> None:
        batch = np.empty((stop - start, n, p))
        for r in range(start, stop):
            batch[r - start] = stream.child(r).generator().random((n, p))
        out[start:stop] = _norms_for_masks(batch, masks)

    spans = [(s, min(s + _REPLICATE_BATCH, replicates))
             for s in range(0, replicates, _REPLICATE_BATCH)]
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda span: fill(*span), spans))
    else:
        for span in spans:
            fill(*span)
    return out


def build_null_reference(
    stream: RandomStream, n: int, p: int, h: int, R: int, threads: int = 1
) -> NullReference:
    """Simulate R independent uniform samples and collect their statistics,
    sorted ascending per subset."""
    if R < 1:
        raise ValueError("R must be >= 1")
    masks = enumerate_subsets(p, h)
    matrix = null_statistic_matrix(stream, n, p, masks, R, threads=threads)
    norms = {mask: np.sort(matrix[:, i]) for i, mask in enumerate(masks)}
    return NullReference(n=n, p=p, h=h, R=R, seed=stream.seed, norms=norms)


def phat(reference: NullReference, mask: int, observed: float) -> float:
    """Monte Carlo p-value estimate (#{null > observed} + 1) / (R + 1).

    Strictly greater: ties between the observed value and null draws do not
    count.
    """
    vec = reference.norms.get(mask)
    if vec is None:
        raise ValueError(f"subset {mask:#x} not present in the reference")
    greater = reference.R - int(np.searchsorted(vec, observed, side="right"))
    return (greater + 1) / (reference.R + 1)


def _q1(x: float) -> float:
    """Quantile of the one-degree chi-square; 0 and 1 map to the closed ends."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return math.inf
    return chisq_quantile(x, 1)


def _minp_threshold(alpha: float, family_size: int) -> float:
    """Per-subset cutoff 1 - (1-alpha)^(1/#subsets), exact for one subset."""
    if family_size == 1:
        return alpha
    return 1.0 - (1.0 - alpha) ** (1.0 / family_size)


def _check_match(sample: Sample, reference: NullReference) -> None:
    if sample.n != reference.n or sample.p != reference.p:
        raise ValueError(
            f"reference built for (n={reference.n}, p={reference.p}) cannot score "
            f"a sample with (n={sample.n}, p={sample.p})")


def run_tests(
    sample: Sample,
    reference: NullReference,
    alpha: float,
    modes: tuple[str, ...] = ("m", "s"),
) -> dict[str, TestReport]:
    """Run the requested finite-sample rules on one sample.

    The per-subset statistics and p-values are computed once and shared by
    all requested modes.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    unknown = [m for m in modes if m not in FINITE_MODES]
    if unknown:
        raise ValueError(f"unknown finite-sample mode(s) {unknown}; use 'm' or 's'")
    _check_match(sample, reference)
    norms = all_tent_norms(sample, reference.h)
    stats = norms.norms
    pvals = {mask: phat(reference, mask, stat) for mask, stat in stats.items()}
    family_size = len(stats)

    reports: dict[str, TestReport] = {}
    common = dict(statistics=stats, p_values=pvals, alpha=alpha, n=sample.n,
                  p=sample.p, h=reference.h, R=reference.R, seed=reference.seed)
    if "m" in modes:
        aggregate = min(pvals.values())
        threshold = _minp_threshold(alpha, family_size)
        reports["m"] = TestReport(mode="m", aggregate=aggregate, threshold=threshold,
                                  reject=aggregate < threshold, **common)
    if "s" in modes:
        aggregate = sum(_q1(1.0 - pv) for pv in pvals.values())
        threshold = chisq_quantile(1.0 - alpha, family_size)
        reports["s"] = TestReport(mode="s", aggregate=aggregate, threshold=threshold,
                                  reject=aggregate > threshold, **common)
    return reports


def m_test(sample: Sample, reference: NullReference, alpha: float) -> TestReport:
    """Min-p rule against a Monte Carlo null reference."""
    return run_tests(sample, reference, alpha, modes=("m",))["m"]


def s_test(sample: Sample, reference: NullReference, alpha: float) -> TestReport:
    """Sum rule against a Monte Carlo null reference."""
    return run_tests(sample, reference, alpha, modes=("s",))["s"]


def build_asymptotic_tables(
    stream: RandomStream,
    p: int,
    nu_max: int | None = None,
    draws: int = 100_000,
) -> dict[int, AsymptoticNormTable]:
    """Simulated limiting-norm tables for every cardinality 1..p.

    Cardinality k uses ``stream.child(k)``; one call covers everything the
    asymptotic tests need.
    """
    return {k: asymptotic_norm_draws(stream.child(k), k, nu_max=nu_max, draws=draws)
            for k in range(1, p + 1)}


def asymptotic_test(
    sample: Sample,
    tables: dict[int, AsymptoticNormTable],
    alpha: float,
    mode: str = "m-as",
) -> TestReport:
    """Large-sample rule using the simulated limiting-norm tables.

    Always runs the full family of 2^p - 1 subsets; p-values are one minus
    the empirical c.d.f. of the matching-cardinality table at the observed
    statistic.
    """
    if mode not in ASYMPTOTIC_MODES:
        raise ValueError(f"unknown asymptotic mode {mode!r}; use 'm-as' or 's-as'")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    p = sample.p
    missing = [k for k in range(1, p + 1) if k not in tables]
    if missing:
        raise ValueError(f"missing limiting-norm tables for cardinalities {missing}")
    norms = all_tent_norms(sample, p)
    stats = norms.norms
    pvals = {mask: 1.0 - asymptotic_cdf(tables[mask.bit_count()], stat)
             for mask, stat in stats.items()}
    family_size = len(stats)
    common = dict(statistics=stats, p_values=pvals, alpha=alpha, n=sample.n, p=p,
                  h=p, R=tables[1].draws.shape[0], seed=tables[1].seed)
    if mode == "m-as":
        aggregate = min(pvals.values())
        threshold = _minp_threshold(alpha, family_size)
        return TestReport(mode=mode, aggregate=aggregate, threshold=threshold,
                          reject=aggregate < threshold, **common)
    aggregate = sum(_q1(1.0 - pv) for pv in pvals.values())
    threshold = chisq_quantile(1.0 - alpha, family_size)
    return TestReport(mode=mode, aggregate=aggregate, threshold=threshold,
                      reject=aggregate > threshold, **common)


# ---------------------------------------------------------------------------
# Cache files. One text format shared by null references and limiting-norm
# tables: a magic line, a configuration line, then one sorted float vector
# per subset at 17 significant digits (bit-exact round trip).
# ---------------------------------------------------------------------------

def reference_filename(n: int, p: int, h: int, R: int, seed: int) -> str:
    return f"null_n{n}_p{p}_h{h}_R{R}_s{seed}.txt"


def table_filename(k: int, nu_max: int, draws: int, seed: int) -> str:
    return f"asym_k{k}_nu{nu_max}_M{draws}_s{seed}.txt"


def _format_cache(n: int, p: int, h: int, R: int, seed: int,
                  vectors: dict[int, np.ndarray]) -> str:
    lines = [CACHE_MAGIC, f"n={n} p={p} h={h} R={R} seed={seed}"]
    for mask, vec in vectors.items():
        body = " ".join("%.17g" % v for v in vec)
        lines.append(f"H={mask:x} : {body}")
    return "\n".join(lines) + "\n"


def _parse_cache(text: str, where: str) -> tuple[dict[str, int], dict[int, np.ndarray]]:
    lines = text.splitlines()
    if not lines or lines[0] != CACHE_MAGIC:
        raise ValueError(f"{where}: not a cache file (bad magic line)")
    if len(lines) < 2:
        raise ValueError(f"{where}: missing configuration line")
    config: dict[str, int] = {}
    for token in lines[1].split():
        key, _, value = token.partition("=")
        config[key] = int(value)
    for key in ("n", "p", "h", "R", "seed"):
        if key not in config:
            raise ValueError(f"{where}: configuration line lacks {key}=")
    vectors: dict[int, np.ndarray] = {}
    for line in lines[2:]:
        if not line.strip():
            continue
        head, _, body = line.partition(":")
        if not head.strip().startswith("H="):
            raise ValueError(f"{where}: malformed subset line {line[:40]!r}")
        mask = int(head.strip()[2:], 16)
        vec = np.array([float(tok) for tok in body.split()])
        if vec.shape[0] != config["R"]:
            raise ValueError(
                f"{where}: subset {mask:#x} has {vec.shape[0]} values, expected R={config['R']}")
        vectors[mask] = vec
    return config, vectors


def save_reference(reference: NullReference, path) -> None:
    text = _format_cache(reference.n, reference.p, reference.h, reference.R,
                         reference.seed, reference.norms)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_reference(path) -> NullReference:
    with open(path, "r", encoding="utf-8") as fh:
        config, vectors = _parse_cache(fh.read(), str(path))
    expected = enumerate_subsets(config["p"], config["h"])
    if list(vectors) != expected:
        raise ValueError(f"{path}: subset lines do not match the (p, h) enumeration")
    return NullReference(n=config["n"], p=config["p"], h=config["h"],
                         R=config["R"], seed=config["seed"], norms=vectors)


def save_table(table: AsymptoticNormTable, path) -> None:
    """Write a limiting-norm table in the shared cache format.

    The ``n`` slot of the configuration line holds the truncation bound, and
    the single subset line uses the lowest mask of cardinality k.
    """
    text = _format_cache(table.nu_max, table.k, table.k, table.draws.shape[0],
                         table.seed, {(1 << table.k) - 1: table.draws})
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_table(path) -> AsymptoticNormTable:
    with open(path, "r", encoding="utf-8") as fh:
        config, vectors = _parse_cache(fh.read(), str(path))
    k = config["p"]
    mask = (1 << k) - 1
    if list(vectors) != [mask]:
        raise ValueError(f"{path}: expected a single subset line for mask {mask:#x}")
    return AsymptoticNormTable(k=k, draws=vectors[mask], nu_max=config["n"],
                               seed=config["seed"])


# ---------------------------------------------------------------------------
# Report rendering (deterministic byte-for-byte).
# ---------------------------------------------------------------------------

def render_report(report: TestReport) -> str:
    lines = [
        f"mode={report.mode} n={report.n} p={report.p} h={report.h} "
        f"R={report.R} seed={report.seed} alpha={report.alpha:g}",
        f"{'subset':<12} {'statistic':>22} {'p-value':>12}",
    ]
    for mask, stat in report.statistics.items():
        lines.append(f"{mask_label(mask):<12} {stat:>22.15g} {report.p_values[mask]:>12.6g}")
    kind = "min-p" if report.mode.startswith("m") else "sum"
    lines.append(
        f"{kind}={report.aggregate:.15g} threshold={report.threshold:.15g} "
        f"decision: {report.decision}")
    return "\n".join(lines) + "\n"


def report_json(report: TestReport) -> str:
    payload = {
        "mode": report.mode,
        "n": report.n,
        "p": report.p,
        "h": report.h,
        "R": report.R,
        "seed": report.seed,
        "alpha": report.alpha,
        "subsets": [
            {
                "mask": f"{mask:#x}",
                "subset": mask_label(mask),
                "statistic": stat,
                "p_value": report.p_values[mask],
            }
            for mask, stat in report.statistics.items()
        ],
        "aggregate": report.aggregate,
        "threshold": report.threshold,
        "decision": report.decision,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))
