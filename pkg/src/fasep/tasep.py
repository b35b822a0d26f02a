"""Height profiles, record sets and the closed-form final measures of the F-TASEP.

Under the totally asymmetric dynamics (p = 1) the height profile only grows
and the set of record sites (strict running maxima of the profile) never
changes, which pins down the frozen limit: between consecutive records
``q < q'`` it reads ``(10)^n 0`` with ``q' - q = 2n + 1``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, InconsistentGaps, NoRecords
from .lattice import LatticeConfig, Topology, particle_count


@dataclass(frozen=True)
class HeightProfile:
    """Heights ``h(base), h(base+1), ...``; increments are ``1 - 2*eta``."""

    base: int
    heights: np.ndarray

    def __getitem__(self, i: int) -> int:
        return int(self.heights[i - self.base])

    def __len__(self) -> int:
        return len(self.heights)

    def as_list(self) -> list[int]:
        return [int(h) for h in self.heights]


def height_profile(cfg: LatticeConfig, J: int = 0, lo: int | None = None,
                   hi: int | None = None) -> HeightProfile:
    """Height profile with ``h(0) = 2J``.

    Ring sites are ``0..L-1`` and the configuration is extended periodically,
    so any range ``[lo, hi]`` may be requested (default ``[0, L]``).  Window
    sites are numbered ``1..L`` from the left, with ``h(0)`` the height just
    left of the window; the profile covers ``[0, L]``.
    """
    arr = np.frombuffer(cfg.sites, dtype=np.uint8).astype(np.int64)
    L = cfg.L
    if not cfg.is_ring:
        inc = 1 - 2 * arr
        h = np.concatenate([[0], np.cumsum(inc)]) + 2 * J
        return HeightProfile(0, h)
    lo = 0 if lo is None else lo
    hi = L if hi is None else hi
    idx = np.arange(lo, hi + 1)
    inc = 1 - 2 * arr[idx % L]
    # h(i) - h(lo) = sum of increments over (lo, i]
    rel = np.concatenate([[0], np.cumsum(inc[1:])])
    # anchor h(0) = 2J
    if lo <= 0 <= hi:
        offset = 2 * J - rel[-lo]
    else:
        ref = height_profile(cfg, J, min(lo, 0), max(hi, 0))
        offset = ref[lo] - rel[0]
    return HeightProfile(lo, rel + offset)


def record_set(cfg: LatticeConfig) -> list[int]:
    """Record sites of ``cfg`` (sorted, 0-based site indices).

    On a ring these are the records of the periodic extension lying in
    ``0..L-1``; there are exactly ``L - 2N`` of them.  For a window the
    region left of the window counts as empty, so the profile there falls
    away and imposes no constraint beyond ``h(0)``.
    """
    L, N = cfg.L, particle_count(cfg)
    if cfg.is_ring:
        if 2 * N >= L:
            raise NoRecords(f"ring with N={N} >= L/2={L / 2} has no records")
        h = height_profile(cfg).heights[:L]  # h(0..L-1)
        drift = L - 2 * N
        pre = np.maximum.accumulate(h)  # max h(0..q)
        suf = np.maximum.accumulate(h[::-1])[::-1]  # max h(q..L-1)
        out = []
        for q in range(L):
            before = suf[q] - drift if q == 0 else max(pre[q - 1], suf[q] - drift)
            if h[q] > before:
                out.append(q)
        return out
    if 2 * N >= L:
        raise NoRecords(f"window with density {N}/{L} >= 1/2")
    h = height_profile(cfg).heights  # h(0..L); site j has height h(j+1)
    prev = np.maximum.accumulate(h[:-1])
    return [int(j) for j in np.flatnonzero(h[1:] > prev)]


def gaps_from_records(records: Sequence[int], L: int | None = None) -> list[int]:
    """``n_k`` with ``q_{k+1} - q_k = 2 n_k + 1``; pass ``L`` to close a ring."""
    qs = list(records)
    if L is not None:
        qs = qs + [qs[0] + L]
    out = []
    for a, b in zip(qs, qs[1:]):
        d = b - a
        if d % 2 != 1:
            raise InconsistentGaps(f"record spacing {d} is even")
        out.append((d - 1) // 2)
    return out


def _segment(n: int) -> list[int]:
    return [1, 0] * n + [0]


def final_config_tasep(cfg: LatticeConfig) -> LatticeConfig:
    """Frozen limit of the F-TASEP (p = 1) read off from the record set."""
    L = cfg.L
    if cfg.is_ring:
        qs = record_set(cfg)
        out = np.zeros(L, np.uint8)
        for q, n in zip(qs, gaps_from_records(qs, L)):
            for k, v in enumerate(_segment(n), start=1):
                out[(q + k) % L] = v
        return LatticeConfig(out.tobytes(), Topology.RING)

    # window: empty padding on both sides; the right padding supplies the
    # closing record, and the closed wall means nothing may land there
    pad = np.zeros(L + 2, np.uint8)
    ext = LatticeConfig(np.concatenate([cfg.array(), pad]).tobytes(), Topology.WINDOW)
    qs = [-1] + record_set(ext)
    out = np.zeros(ext.L, np.uint8)
    for a, b in zip(qs, qs[1:]):
        seg = _segment((b - a - 1) // 2)
        out[a + 1:b + 1] = seg
    if out[L:].any():
        raise NoRecords(f"{cfg} has no frozen completion inside its closed ends")
    return LatticeConfig(out[:L].tobytes(), Topology.WINDOW)


# ---------------------------------------------------------------------------
# closed-form measures


def catalan(n: int) -> int:
    """``binom(2n, n) / (n + 1)`` in exact integer arithmetic."""
    if n < 0:
        raise DomainError("catalan numbers need n >= 0")
    return math.comb(2 * n, n) // (n + 1)


def gap_law(n: int, rho: float) -> float:
    """Probability that a record gap equals ``n`` in the frozen limit of a
    Bernoulli(rho) start: ``c_n rho^n (1 - rho)^(n + 1)``."""
    if not 0.0 < rho < 0.5:
        raise DomainError(f"gap law needs 0 < rho < 1/2, got {rho}")
    if n < 0:
        raise DomainError("gap must be non-negative")
    if n <= 300:
        return catalan(n) * rho ** n * (1.0 - rho) ** (n + 1)
    logc = math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - math.log(n + 1)
    return math.exp(logc + n * math.log(rho) + (n + 1) * math.log1p(-rho))


def gap_law_table(rho: float, n_tail: int = 20) -> dict[int | str, float]:
    """``{0: P(0), ..., n_tail-1: P(n_tail-1), f">={n_tail}": tail}``."""
    table: dict[int | str, float] = {n: gap_law(n, rho) for n in range(n_tail)}
    table[f">={n_tail}"] = max(0.0, 1.0 - math.fsum(table.values()))
    return table


def ring_final_weight(gaps: Sequence[int], L: int, N: int) -> Fraction:
    """Probability, given that site 0 is a record, of the frozen ring
    configuration whose record gaps (starting at site 0) are ``gaps``."""
    if not 2 * N < L:
        raise DomainError(f"need N < L/2, got N={N}, L={L}")
    if len(gaps) != L - 2 * N or any(n < 0 for n in gaps) or sum(2 * n + 1 for n in gaps) != L:
        raise InconsistentGaps(f"gaps {tuple(gaps)} do not tile a ring of {L} sites with {N} particles")
    num = L * math.prod(catalan(n) for n in gaps)
    return Fraction(num, (L - 2 * N) * math.comb(L, N))


def config_from_gaps(gaps: Sequence[int]) -> LatticeConfig:
    """Frozen ring configuration with records at ``0, 2n_0+1, ...``."""
    s: list[int] = []
    for n in gaps:
        s.extend(_segment(n))
    # s covers sites 1..L; site L is site 0
    return LatticeConfig(bytes([s[-1]] + s[:-1]), Topology.RING)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def ring_final_measure(L: int, N: int) -> dict[LatticeConfig, Fraction]:
    """Exact law of the frozen limit from a uniform start with ``N < L/2``."""
    if not 0 <= 2 * N < L:
        raise DomainError(f"need 0 <= N < L/2, got N={N}, L={L}")
    out: dict[LatticeConfig, Fraction] = defaultdict(Fraction)
    for gaps in compositions(N, L - 2 * N):
        w = ring_final_weight(gaps, L, N) / L
        base = config_from_gaps(gaps)
        for rot in base.rotations():
            out[rot] += w
    return dict(out)
