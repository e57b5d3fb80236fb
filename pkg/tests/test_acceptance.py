"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test prints a single summary line (visible with ``pytest -s`` or in the
failure output) of the form ``ACCEPTANCE <n> <name>: PASS/FAIL (details)``
after computing its measurements, then asserts.
"""

import math

import numpy as np
from scipy import integrate

from unicube import (KLConfig, RandomStream, Sample,
                     AlternativeSpec, PowerExperiment, asymptotic_norm_draws,
                     asymptotic_test, build_asymptotic_tables,
                     build_null_reference, decompose, enumerate_subsets,
                     estimate_power, GridFunction, load_reference, mask_members,
                     ramp_values, reconstruct, render_report, report_json,
                     run_tests, save_reference, simulate_sheet,
                     tent_bound_constant, tent_norm, truncated_sheet_covariance,
                     uniform_sample)
from unicube.inference import null_statistic_matrix


def announce(number, name, ok, detail):
    print(f"ACCEPTANCE {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})")


# -- 1. statistic correctness against a Riemann integration oracle ----------

def _axis_cells(values: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """m quadrature cells on [0,1] whose edges include the data values.

    The integrand is a polynomial inside every cell then, so the midpoint
    Riemann sum converges at O(1/m^2) instead of the O(1/m) of jump-crossed
    cells. Returns (midpoints, widths).
    """
    inner = np.unique(values[(values > 0.0) & (values < 1.0)])
    base = np.linspace(0.0, 1.0, m + 1 - inner.size)
    edges = np.unique(np.concatenate([base, inner]))
    assert edges.size == m + 1
    return (edges[:-1] + edges[1:]) / 2.0, np.diff(edges)


def riemann_norm_oracle(sample: Sample, mask: int, m: int = 400) -> float:
    """Riemann sum of the squared evaluation formula on an m^k lattice,
    cells aligned to the per-axis jump locations of the integrand."""
    members = [j for j in range(sample.p) if mask >> j & 1]
    k = len(members)
    mids, widths = zip(*(_axis_cells(sample.data[:, j], m) for j in members))
    factors = [
        (sample.data[:, [j]] <= mids[a][None, :]).astype(float) - mids[a][None, :]
        for a, j in enumerate(members)
    ]
    if k == 1:
        total = float(np.sum(widths[0] * factors[0].sum(axis=0) ** 2))
    elif k == 2:
        grid = np.einsum("ia,ib->ab", factors[0], factors[1])
        total = float(np.einsum("a,b,ab->", widths[0], widths[1], grid ** 2))
    else:
        # Slab over the first axis to keep memory at one m x m plane.
        total = 0.0
        for a in range(m):
            plane = np.einsum("i,ib,ic->bc", factors[0][:, a], factors[1], factors[2])
            total += widths[0][a] * float(
                np.einsum("b,c,bc->", widths[1], widths[2], plane ** 2))
    return total / sample.n


def test_acceptance_1_statistic_vs_riemann_oracle():
    root = RandomStream(1001)
    cases = [(1, 5), (1, 20), (1, 12), (1, 7), (1, 17), (1, 3), (1, 9),
             (2, 10), (2, 20), (2, 5), (2, 15), (2, 8), (2, 18), (2, 12),
             (3, 10), (3, 20), (3, 6), (3, 15), (3, 12), (3, 18)]
    assert len(cases) == 20
    worst = 0.0
    for index, (p, n) in enumerate(cases):
        sample = uniform_sample(root.child(index), n, p)
        for mask in enumerate_subsets(p, p):
            exact = tent_norm(sample, mask)
            oracle = riemann_norm_oracle(sample, mask, m=400)
            rel = abs(exact - oracle) / abs(oracle)
            worst = max(worst, rel)
    ok = worst < 0.01
    announce(1, "statistic-vs-riemann-oracle", ok,
             f"20 samples, all subsets, worst relative error {worst:.2e} vs 1e-2")
    assert ok


# -- 2. null mean of the squared norms ---------------------------------------

def test_acceptance_2_null_mean_identity():
    # Scalar oracles first: the two moments behind the 6^-k identity.
    diag, _ = integrate.quad(lambda u: (u * u + u * u) / 2 - u + 1.0 / 3.0, 0, 1)
    cross, _ = integrate.dblquad(
        lambda u, v: (u * u + v * v) / 2 - max(u, v) + 1.0 / 3.0, 0, 1, 0, 1)
    assert abs(diag - 1.0 / 6.0) < 1e-10
    assert abs(cross) < 1e-8

    replicates = 100_000
    failures = []
    details = []
    for index, (n, p) in enumerate([(1, 1), (10, 2), (50, 2)]):
        masks = enumerate_subsets(p, p)
        matrix = null_statistic_matrix(RandomStream(2002 + index), n, p, masks,
                                       replicates)
        for col, mask in enumerate(masks):
            vec = matrix[:, col]
            target = 6.0 ** (-mask.bit_count())
            se = vec.std(ddof=1) / math.sqrt(replicates)
            gap = abs(vec.mean() - target)
            if gap >= 3.0 * se:
                failures.append((n, p, mask, gap, se))
            details.append(gap / se)
    ok = not failures
    announce(2, "null-mean-identity", ok,
             f"10^5 samples x 3 configs, worst |mean gap| {max(details):.2f} se vs 3 se")
    assert ok, failures


# -- 3. decomposition round trip ---------------------------------------------

def test_acceptance_3_decomposition_round_trip():
    m = 9
    rng_root = RandomStream(3003)
    worst_round = 0.0
    worst_face = 0.0
    bound_ok = True
    count = 0
    for p in (1, 2, 3, 4):
        bound = tent_bound_constant(p)
        for rep in (13, 13, 12, 12)[p - 1] * [None]:
            rng = rng_root.child(count).generator()
            count += 1
            values = rng.uniform(-1.0, 1.0, size=(m,) * p)
            for axis in range(p):
                index = [slice(None)] * p
                index[axis] = 0
                values[tuple(index)] = 0.0
            g = GridFunction(values)
            components = decompose(g)
            rebuilt = reconstruct(components, m)
            worst_round = max(worst_round, float(np.max(np.abs(
                rebuilt.values - g.values))))
            sup_g = float(np.max(np.abs(g.values)))
            for component in components:
                if np.max(np.abs(component.tent)) > bound * sup_g + 1e-12:
                    bound_ok = False
                k = component.mask.bit_count()
                if k in (0, p):
                    continue
                full = ramp_values(component.mask, component.tent, m, p)
                for other in enumerate_subsets(p, p):
                    if other.bit_count() != k or other == component.mask:
                        continue
                    members = mask_members(other)
                    idx = tuple(slice(None) if j in members else m - 1
                                for j in range(p))
                    worst_face = max(worst_face, float(np.max(np.abs(full[idx]))))
    ok = worst_round < 1e-12 and worst_face < 1e-12 and bound_ok and count == 50
    announce(3, "decomposition-round-trip", ok,
             f"50 functions, worst round trip {worst_round:.2e}, "
             f"worst face leak {worst_face:.2e}, sup bound {'held' if bound_ok else 'violated'}")
    assert ok


# -- 4. sheet covariance ------------------------------------------------------

def test_acceptance_4_sheet_covariance():
    draws = 20_000
    cfg = KLConfig(nu_max=64, grid_m=17)
    root = RandomStream(4004)
    pair_rng = root.child(0).generator()
    axis = np.linspace(0.0, 1.0, cfg.grid_m)
    pairs = [(tuple(pair_rng.integers(1, cfg.grid_m, size=2)),
              tuple(pair_rng.integers(1, cfg.grid_m, size=2))) for _ in range(10)]
    sheet_stream = root.child(1)
    prods = np.empty((draws, len(pairs)))
    for r in range(draws):
        sheet = simulate_sheet(sheet_stream.child(r), 2, cfg)
        for q, (si, ti) in enumerate(pairs):
            prods[r, q] = sheet[si] * sheet[ti]
    worst_sigma = 0.0
    ok = True
    for q, (si, ti) in enumerate(pairs):
        s = axis[list(si)]
        t = axis[list(ti)]
        target = float(np.prod(np.minimum(s, t)))
        bias = abs(target - truncated_sheet_covariance(s, t, cfg))
        emp = prods[:, q].mean()
        se = prods[:, q].std(ddof=1) / math.sqrt(draws)
        allowance = 3.0 * se + bias
        ok = ok and abs(emp - target) <= allowance
        worst_sigma = max(worst_sigma, (abs(emp - target) - bias) / se)
    announce(4, "sheet-covariance", ok,
             f"2e4 sheets, 10 pairs, worst bias-adjusted deviation "
             f"{worst_sigma:.2f} se vs 3 se")
    assert ok


# -- 5. level calibration ------------------------------------------------------

def test_acceptance_5_level_calibration():
    # Trials are fully independent (each draws its own reference), which is
    # what makes the 3-sigma binomial band around the level the right check:
    # with one shared reference the rate would concentrate on that
    # reference's conditional level, whose own noise at R=499 dwarfs the
    # binomial term.
    n, p, h, R, alpha = 25, 2, 2, 499, 0.05
    trials = 2000
    root = RandomStream(5005)
    rejections = {"m": 0, "s": 0}
    for t in range(trials):
        reference = build_null_reference(root.child(2 * t), n, p, h, R)
        sample = uniform_sample(root.child(2 * t + 1), n, p)
        reports = run_tests(sample, reference, alpha)
        for mode in rejections:
            rejections[mode] += int(reports[mode].reject)
    rate_m = rejections["m"] / trials
    rate_s = rejections["s"] / trials
    ok = 0.035 <= rate_m <= 0.065 and 0.035 <= rate_s <= 0.065
    announce(5, "level-calibration", ok,
             f"m {rate_m:.4f}, s {rate_s:.4f} vs [0.035, 0.065]")
    assert ok


# -- 6. power reproduction, copula grid ----------------------------------------

def test_acceptance_6_power_copulas():
    n, h, R, alpha, trials, seed = 50, 2, 499, 0.05, 500, 6006
    reference = build_null_reference(RandomStream(seed).child(0), n, 2, h, R)
    results = {}
    for family, theta in (("clayton", 2.0), ("amh", 0.9), ("plackett", 5.0)):
        exp = PowerExperiment(alternative=AlternativeSpec(family, theta=theta),
                              n=n, trials=trials, alpha=alpha, h=h, R=R, seed=seed)
        results[family] = estimate_power(exp, reference=reference)
    clayton_ok = (results["clayton"]["m"].power >= 0.95
                  and results["clayton"]["s"].power >= 0.95)
    amh_ok = 0.60 <= results["amh"]["m"].power <= 0.78
    plackett_ok = 0.77 <= results["plackett"]["m"].power <= 0.93
    ok = clayton_ok and amh_ok and plackett_ok
    announce(6, "power-copulas", ok,
             f"clayton m={results['clayton']['m'].power:.3f} s={results['clayton']['s'].power:.3f} (>=0.95), "
             f"amh m={results['amh']['m'].power:.3f} in [0.60,0.78], "
             f"plackett m={results['plackett']['m'].power:.3f} in [0.77,0.93]")
    assert ok, results


# -- 7. partial tests against the six-dimensional copula -----------------------

def test_acceptance_7_partial_tests():
    n, p, R, alpha, trials, seed = 50, 6, 499, 0.05, 300, 7007
    spec = AlternativeSpec("normal-copula", rho=0.30, p=p)
    powers = {}
    for h in (2, 6):
        reference = build_null_reference(RandomStream(seed).child(0), n, p, h, R)
        exp = PowerExperiment(alternative=spec, n=n, trials=trials, alpha=alpha,
                              h=h, R=R, seed=seed)
        powers[h] = estimate_power(exp, reference=reference)
    s2 = powers[2]["s"].power
    m2 = powers[2]["m"].power
    s6 = powers[6]["s"].power
    ok = s2 >= 0.85 and (s2 - m2) >= 0.1 and abs(s6 - 0.857) <= 0.12
    announce(7, "partial-tests", ok,
             f"s(h=2)={s2:.3f} (>=0.85), m(h=2)={m2:.3f} (gap {s2 - m2:.3f} >= 0.1), "
             f"s(h=6)={s6:.3f} vs 0.857 +/- 0.12")
    assert ok, powers


# -- 8. asymptotic machinery ----------------------------------------------------

def test_acceptance_8_asymptotic_machinery():
    root = RandomStream(8008)
    mean_ok = True
    mean_details = []
    for k, draws in ((1, 100_000), (2, 50_000), (3, 20_000)):
        table = asymptotic_norm_draws(root.child(k), k, draws=draws)
        mean = table.draws.mean()
        se = table.draws.std(ddof=1) / math.sqrt(draws)
        mean_ok = mean_ok and abs(mean - 6.0 ** (-k)) < 3.0 * se
        mean_details.append(f"k={k}: {abs(mean - 6.0 ** (-k)) / se:.2f}se")

    n, trials, alpha = 200, 2000, 0.05
    tables = build_asymptotic_tables(root.child(100), p=1, draws=100_000)
    reject_m = 0
    reject_s = 0
    for t in range(trials):
        sample = uniform_sample(root.child(1000 + t), n, 1)
        reject_m += int(asymptotic_test(sample, tables, alpha, mode="m-as").reject)
        reject_s += int(asymptotic_test(sample, tables, alpha, mode="s-as").reject)
    rate_m = reject_m / trials
    rate_s = reject_s / trials
    level_ok = 0.03 <= rate_m <= 0.07 and 0.03 <= rate_s <= 0.07
    ok = mean_ok and level_ok
    announce(8, "asymptotic-machinery", ok,
             f"means {'/'.join(mean_details)} vs 3se; "
             f"level m-as {rate_m:.4f}, s-as {rate_s:.4f} vs [0.03, 0.07]")
    assert ok


# -- 9. determinism and formats -------------------------------------------------

def test_acceptance_9_determinism_and_formats(tmp_path):
    n, p, h, R = 25, 2, 2, 199
    ref_serial = build_null_reference(RandomStream(9009), n, p, h, R, threads=1)
    ref_again = build_null_reference(RandomStream(9009), n, p, h, R, threads=1)
    ref_threads = build_null_reference(RandomStream(9009), n, p, h, R, threads=4)
    path_a = tmp_path / "a.txt"
    path_b = tmp_path / "b.txt"
    path_c = tmp_path / "c.txt"
    save_reference(ref_serial, path_a)
    save_reference(ref_again, path_b)
    save_reference(ref_threads, path_c)
    caches_equal = (path_a.read_bytes() == path_b.read_bytes() == path_c.read_bytes())
    round_trip_equal = load_reference(path_a) == ref_serial

    sample = uniform_sample(RandomStream(909), n, p)
    first = run_tests(sample, ref_serial, 0.05)
    second = run_tests(sample, ref_threads, 0.05)
    reports_equal = all(
        render_report(first[mode]) == render_report(second[mode])
        and report_json(first[mode]) == report_json(second[mode])
        for mode in ("m", "s"))
    ok = caches_equal and round_trip_equal and reports_equal
    announce(9, "determinism-and-formats", ok,
             f"caches byte-identical {caches_equal}, round trip {round_trip_equal}, "
             f"reports identical {reports_equal}")
    assert ok
