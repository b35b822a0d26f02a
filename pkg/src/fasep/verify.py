"""The acceptance suite: one function per criterion, each returning verdicts.

Every function takes a :class:`Scale`; ``Scale.full()`` is the documented
configuration and ``Scale.quick()`` a reduced one for smoke runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .coupling import (coupled_marginal, cylinder_probability, phi, run_coupled)
from .dynamics import (ClockScheme, insulated_window_experiment, run_to_frozen,
                       sample_marginal, sample_uniform_ring, spawn_seeds,
                       stationary_snapshots)
from .exact import (ExactDistribution, absorption_distribution, build_generator,
                    enumerate_states, marginal_at_time, marginal_by_config,
                    stationary_distribution)
from .lattice import LatticeConfig, is_no_adjacent_holes
from .stats import (EmpiricalDistribution, TestVerdict, cylinder_counts, gap_histogram,
                    multinomial_band, pool_tail, tv_distance)
from .tasep import final_config_tasep, gap_law_table, ring_final_measure

P_GRID = ("0", "1/4", "1/2", "3/4", "1")


@dataclass(frozen=True)
class Scale:
    frozen_configs: int = 1000
    min_gaps: int = 100_000
    gap_window: int = 20_000
    cyl_snapshots: int = 2000
    cyl_spacing: int = 20_000
    cyl_burn_in: int = 10_000_000
    cyl_stride: int = 10
    coupled_runs: int = 100
    coupled_events: int = 10_000
    marginal_samples: int = 100_000

    @classmethod
    def full(cls) -> "Scale":
        return cls()

    @classmethod
    def quick(cls) -> "Scale":
        return cls(frozen_configs=100, min_gaps=20_000, cyl_snapshots=200,
                   cyl_spacing=5_000, cyl_burn_in=1_000_000, coupled_runs=10,
                   coupled_events=2_000, marginal_samples=50_000)


def _mismatches(name: str, bad: int, n: int, desc: str) -> TestVerdict:
    return TestVerdict(name, bad, 0, n, desc, strict=False)


def low_density_grid():
    return [(L, N) for L in range(4, 11) for N in range(1, L) if 2 * N < L]


def criterion_1(scale: Scale, seed: int = 0) -> list[TestVerdict]:
    """Frozen law from a uniform start is the same rational vector for every p."""
    bad, n = 0, 0
    for L, N in low_density_grid():
        space = enumerate_states(L, N)
        init = ExactDistribution.uniform(space)
        laws = [absorption_distribution(init, build_generator(space, p)) for p in P_GRID]
        bad += sum(law != laws[0] for law in laws[1:])
        n += 1
    return [_mismatches("1 exact p-independence", bad, n,
                        "differing frozen laws over (L, N) grid, p in {0,1/4,1/2,3/4,1}")]


def criterion_2(scale: Scale, seed: int = 0) -> list[TestVerdict]:
    """Exact frozen law equals the Catalan-product formula."""
    bad, n = 0, 0
    for L, N in low_density_grid():
        space = enumerate_states(L, N)
        law = absorption_distribution(ExactDistribution.uniform(space),
                                      build_generator(space, Fraction(1, 2)))
        bad += law.by_config() != ring_final_measure(L, N)
        n += 1
    return [_mismatches("2 formula match", bad, n, "(L, N) pairs where solver != closed form")]


def criterion_3(scale: Scale, seed: int = 0) -> list[TestVerdict]:
    """Record-set prediction equals a simulated p = 1 run, under both schemes."""
    out = []
    for k, (L, N) in enumerate([(12, 3), (16, 5), (20, 7)]):
        bad = viol = 0
        for s in spawn_seeds(seed + 1000 * k, scale.frozen_configs):
            cfg = sample_uniform_ring(L, N, s)
            want = final_config_tasep(cfg)
            for scheme in ClockScheme:
                rec = run_to_frozen(cfg, 1.0, scheme, s)
                bad += rec.final != want
                viol += rec.violations
        out.append(_mismatches(f"3 TASEP oracle (L={L}, N={N})", bad, 2 * scale.frozen_configs,
                               f"mismatching finals, both schemes; doublez violations={viol}"))
        out[-1].details["violations"] = viol
    return out


def gap_experiment(rho: float, p: float, scale: Scale, seed: int, margin: int = 64):
    hist = EmpiricalDistribution()
    viol = 0
    batch = 0
    while hist.total < scale.min_gaps:
        for s in spawn_seeds(seed + batch, 8):
            rec = insulated_window_experiment(rho, scale.gap_window, p, ClockScheme.SITE, s)
            viol += rec.violations
            hist = hist.merge(gap_histogram([rec], margin))
        batch += 1
    return hist, viol


def criterion_4(scale: Scale, seed: int = 0) -> list[TestVerdict]:
    """Interior record gaps follow the Catalan law, whatever p is."""
    out = []
    for i, rho in enumerate((0.25, 0.35)):
        model = gap_law_table(rho, 20)
        hists = {}
        for j, p in enumerate((0.0, 0.5, 1.0)):
            h, viol = gap_experiment(rho, p, scale, seed + 10_000 * (3 * i + j))
            hists[p] = pool_tail(h, 20)
            v = TestVerdict(f"4 gap law rho={rho} p={p}", tv_distance(hists[p], model), 0.02,
                            h.total, "TV to Catalan law, tail pooled at n>=20")
            v.details["violations"] = viol
            out.append(v)
        for a, b in itertools.combinations(hists, 2):
            out.append(TestVerdict(f"4 gap law rho={rho} p={a} vs p={b}",
                                   tv_distance(hists[a], hists[b]), 0.02,
                                   min(hists[a].total, hists[b].total), "pairwise TV"))
    return out


def criterion_5(scale: Scale, seed: int = 0) -> list[TestVerdict]:
    """High-density stationary law is uniform on configurations without 00."""
    bad, n = 0, 0
    for L, N in [(6, 4), (7, 4), (8, 5), (9, 5), (10, 6)]:
        space = enumerate_states(L, N)
        G = [k for k, c in enumerate(space) if is_no_adjacent_holes(c)]
        target = ExactDistribution.uniform(space, G)
        for p in ("1/4", "1/2", "3/4"):
            bad += stationary_distribution(build_generator(space, p)) != target
            n += 1
    return [_mismatches("5 uniform stationary law on G", bad, n, "non-uniform (L, N, p) cases")]


def valid_patterns(m: int) -> list[str]:
    return ["".join(t) for t in itertools.product("01", repeat=m) if "00" not in "".join(t)]


def marginalization_error(rho: float, m_max: int = 6) -> float:
    worst = 0.0
    for m in range(1, m_max + 1):
        for th in itertools.product("01", repeat=m):
            th = "".join(th)
            c = cylinder_probability(th, rho)
            right = cylinder_probability(th + "0", rho) + cylinder_probability(th + "1", rho)
            left = cylinder_probability("0" + th, rho) + cylinder_probability("1" + th, rho)
            worst = max(worst, abs(right - c), abs(left - c))
    return worst


def criterion_6(scale: Scale, seed: int = 0, rho: float = 0.7, L: int = 1000,
                p: float = 0.75) -> list[TestVerdict]:
    """Stationary pattern frequencies on a large ring against the cylinder formula."""
    N = round(rho * L)
    rec = stationary_snapshots(sample_uniform_ring(L, N, seed), p, ClockScheme.SITE, seed,
                               burn_in=scale.cyl_burn_in, n_snapshots=scale.cyl_snapshots,
                               spacing=scale.cyl_spacing)
    out = []
    for m in range(1, 5):
        model = {th: cylinder_probability(th, rho) for th in valid_patterns(m)}
        emp = cylinder_counts(rec.snapshots, m, scale.cyl_stride)
        v = multinomial_band(emp, model, 3.0, f"6 cylinder formula m={m}")
        v.details["violations"] = rec.violations
        out.append(v)
    out.append(TestVerdict("6 marginalization identities", marginalization_error(rho), 1e-12,
                           0, "max |sum of one-bit extensions - parent|, m <= 6", strict=False))
    return out


def criterion_7(scale: Scale, seed: int = 0) -> list[TestVerdict]:
    """The F-ASEP stays a rotation of the image of the coupled ASEP."""
    viol = checks = 0
    for s in spawn_seeds(seed, scale.coupled_runs):
        rng_cfg = spawn_seeds(s, 3)
        N_hat = 1 + rng_cfg[0] % 49
        p = (rng_cfg[1] % 101) / 100
        run = run_coupled(sample_uniform_ring(50, N_hat, rng_cfg[2]), p, s,
                          max_events=scale.coupled_events)
        viol += run.violations
        checks += run.checks
    out = [_mismatches("7 coupling invariant", viol, checks,
                       f"violations over {scale.coupled_runs} rings of 50 sites")]
    for k, (bits, p) in enumerate([("010011", 0.7), ("0101", 0.3)]):
        z0 = LatticeConfig.ring(bits)
        img = phi(z0)
        space = enumerate_states(img.L, img.sites.count(1))
        exact = marginal_by_config(space, marginal_at_time(
            ExactDistribution.point(space, img), build_generator(space, p), 1.0))
        cpl, v1 = coupled_marginal(z0, p, 1.0, scale.marginal_samples, seed + 7 + k)
        direct, v2 = sample_marginal(img, p, ClockScheme.SITE, 1.0, scale.marginal_samples,
                                     seed + 17 + k)
        n = scale.marginal_samples
        out.append(TestVerdict(f"7 coupled marginal {bits} vs exact", tv_distance(cpl, exact),
                               0.02, n, f"p={p}, t=1, coupling violations={v1}"))
        out.append(TestVerdict(f"7 direct marginal {bits} vs exact", tv_distance(direct, exact),
                               0.02, n, f"p={p}, t=1, doublez violations={v2}"))
        out.append(TestVerdict(f"7 coupled vs direct {bits}", tv_distance(cpl, direct), 0.02, n,
                               "TV between the two empirical laws"))
        out[-3].details["violations"] = v1
        out[-2].details["violations"] = v2
    return out


def criterion_8(scale: Scale, seed: int = 0) -> list[TestVerdict]:
    """Site and particle clocks give the same law at t = 1."""
    cfg = LatticeConfig.ring("111000")
    space = enumerate_states(6, 3)
    exact = marginal_by_config(space, marginal_at_time(
        ExactDistribution.point(space, cfg), build_generator(space, 0.7), 1.0))
    out = []
    for k, scheme in enumerate(ClockScheme):
        emp, viol = sample_marginal(cfg, 0.7, scheme, 1.0, scale.marginal_samples, seed + k)
        v = TestVerdict(f"8 {scheme.value} clocks vs exact", tv_distance(emp, exact), 0.02,
                        scale.marginal_samples, "ring:111000, p=0.7, t=1")
        v.details["violations"] = viol
        out.append(v)
    return out


CRITERIA: dict[int, Callable[..., list[TestVerdict]]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
}


def criterion_9(verdicts: list[TestVerdict]) -> TestVerdict:
    """Structural violations summed over the simulated criteria."""
    total = sum(int(v.details.get("violations", 0)) for v in verdicts)
    return TestVerdict("9 structural invariants", total, 0, len(verdicts),
                       "doublez / G-closure / coupling violations in criteria 3-8", strict=False)


def run_suite(scale: Scale | None = None, seed: int = 0, only=None) -> list[TestVerdict]:
    scale = scale or Scale.full()
    out: list[TestVerdict] = []
    for k, fn in CRITERIA.items():
        if only is None or k in only:
            out.extend(fn(scale, seed))
    if only is None or 9 in only:
        out.append(criterion_9(out))
    return out


def all_passed(verdicts) -> bool:
    return all(v.passed for v in verdicts) and not any(math.isnan(float(v.statistic)) for v in verdicts)
