"""Empirical distributions and the statistical verdicts built on them."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Optional

import numpy as np
from scipy.stats import chi2

from .errors import EmptyDistribution, InsufficientSamples, InvalidWindow
from .lattice import LatticeConfig
from .tasep import gaps_from_records, record_set


@dataclass
class EmpiricalDistribution:
    """Outcome counts; ``total`` is always the sum of the counts."""

    counts: Counter = field(default_factory=Counter)

    @classmethod
    def from_samples(cls, samples: Iterable[Hashable]) -> "EmpiricalDistribution":
        return cls(Counter(samples))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, key: Hashable, n: int = 1) -> None:
        if n < 0:
            raise ValueError("counts must be non-negative")
        self.counts[key] += n

    def merge(self, other: "EmpiricalDistribution") -> "EmpiricalDistribution":
        return EmpiricalDistribution(self.counts + other.counts)

    def normalized(self) -> dict:
        n = self.total
        if n == 0:
            raise EmptyDistribution("no samples")
        return {k: v / n for k, v in self.counts.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "count"])
        for k in sorted(self.counts, key=str):
            w.writerow([str(k), self.counts[k]])
        return buf.getvalue()


@dataclass
class TestVerdict:
    """Outcome of one check; passes iff the statistic is within the threshold
    (``<`` when ``strict``, else ``<=``)."""

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    threshold: float
    n: int
    description: str = ""
    strict: bool = True
    details: dict[str, Any] = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self):
        s, t = float(self.statistic), float(self.threshold)
        self.passed = bool(s < t if self.strict else s <= t)

    def line(self) -> str:
        op = "<" if self.strict else "<="
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.statistic:.6g} {op} {self.threshold:.6g} (n={self.n}) {self.description}"

    def to_dict(self) -> dict:
        return asdict(self)


def verdicts_to_json(verdicts: Iterable[TestVerdict]) -> str:
    return json.dumps([v.to_dict() for v in verdicts], indent=2, sort_keys=True, default=str)


def _as_probs(d) -> dict:
    if isinstance(d, EmpiricalDistribution):
        return d.normalized()
    tot = math.fsum(float(v) for v in d.values())
    if not d or tot <= 0:
        raise EmptyDistribution("empty or zero-mass distribution")
    return {k: float(v) / tot for k, v in d.items()}


def tv_distance(a: Mapping | EmpiricalDistribution, b: Mapping | EmpiricalDistribution) -> float:
    """Total variation distance after normalizing both sides; missing keys are 0."""
    pa, pb = _as_probs(a), _as_probs(b)
    return 0.5 * math.fsum(abs(pa.get(k, 0.0) - pb.get(k, 0.0)) for k in set(pa) | set(pb))


def chi_square_gof(emp: EmpiricalDistribution, model: Mapping, min_expected: float = 5.0,
                   alpha: float = 0.01, name: str = "chi-square") -> TestVerdict:
    """Pearson goodness of fit.

    Cells with expected count below ``min_expected`` are pooled, smallest
    first, into one tail cell; if the tail is still too small it absorbs the
    next smallest cell.  Observations outside the model support fail outright.
    """
    n = emp.total
    if n == 0:
        raise EmptyDistribution("no samples")
    probs = _as_probs(model)
    outside = sum(c for k, c in emp.counts.items() if probs.get(k, 0.0) <= 0.0)
    cells = sorted(((n * p, emp.counts.get(k, 0)) for k, p in probs.items() if p > 0),
                   key=lambda c: c[0])
    big = [c for c in cells if c[0] >= min_expected]
    small = [c for c in cells if c[0] < min_expected]
    if small:
        tail_e = sum(e for e, _ in small)
        tail_o = sum(o for _, o in small)
        while tail_e < min_expected and big:
            e, o = big.pop(0)
            tail_e += e
            tail_o += o
        big.append((tail_e, tail_o))
    if len(big) < 2:
        raise InsufficientSamples(f"only {len(big)} cell(s) left after pooling")
    stat = math.fsum((o - e) ** 2 / e for e, o in big)
    df = len(big) - 1
    crit = float(chi2.ppf(1.0 - alpha, df))
    if outside:
        stat = math.inf
    return TestVerdict(name, stat, crit, n, f"df={df}, alpha={alpha}", strict=False,
                       details={"p_value": float(chi2.sf(stat, df)) if math.isfinite(stat) else 0.0,
                                "cells": len(big), "outside_support": outside})


def _final_config(r) -> LatticeConfig:
    return r if isinstance(r, LatticeConfig) else r.final


def gap_histogram(records: Iterable, margin: int = 0) -> EmpiricalDistribution:
    """Histogram of record gaps ``n`` in frozen window finals.

    Only gaps between two records of the window count, so the stretches
    touching either end are dropped; ``margin`` additionally drops gaps whose
    segment comes within ``margin`` sites of an end.
    """
    hist = EmpiricalDistribution()
    for r in records:
        cfg = _final_config(r)
        qs = record_set(cfg)
        if len(qs) < 2:
            continue
        for a, n in zip(qs, gaps_from_records(qs)):
            b = a + 2 * n + 1
            if a >= margin and b <= cfg.L - 1 - margin:
                hist.add(n)
    return hist


def pool_tail(emp: EmpiricalDistribution, n_tail: int) -> EmpiricalDistribution:
    """Merge integer keys ``>= n_tail`` into the key ``f">={n_tail}"``."""
    out = EmpiricalDistribution()
    tail = f">={n_tail}"
    out.counts[tail] = 0
    for k, c in emp.counts.items():
        out.add(tail if k >= n_tail else k, c)
    return out


def cylinder_counts(snapshots: Iterable, m: int, stride: int = 1) -> EmpiricalDistribution:
    """Counts of length-``m`` patterns (as bit strings) over all starting
    positions ``0, stride, 2*stride, ...`` of every snapshot.

    Rings wrap around; windows only use patterns lying inside.  Snapshots
    may be configurations or ``(time, configuration)`` pairs.
    """
    if m < 1:
        raise InvalidWindow("pattern length must be positive")
    hist = EmpiricalDistribution()
    weights = 1 << np.arange(m - 1, -1, -1)
    for s in snapshots:
        cfg = s[1] if isinstance(s, tuple) else s
        L = cfg.L
        if m > L:
            raise InvalidWindow(f"pattern length {m} exceeds L={L}")
        a = np.frombuffer(cfg.sites, np.uint8).astype(np.int64)
        starts = np.arange(0, L if cfg.is_ring else L - m + 1, stride)
        idx = (starts[:, None] + np.arange(m)[None, :]) % L
        codes = a[idx] @ weights
        for code, c in enumerate(np.bincount(codes, minlength=1 << m)):
            if c:
                hist.add(format(code, f"0{m}b"), int(c))
    return hist


def multinomial_band(emp: EmpiricalDistribution, model: Mapping, n_sigma: float = 3.0,
                     name: str = "band") -> TestVerdict:
    """Largest standardized deviation ``|O - nP| / sqrt(nP(1-P))`` over the
    model cells with ``0 < P < 1``; observations where ``P = 0`` fail."""
    n = emp.total
    if n == 0:
        raise EmptyDistribution("no samples")
    worst, zs = 0.0, {}
    for k, p in model.items():
        o = emp.counts.get(k, 0)
        if p <= 0:
            z = math.inf if o else 0.0
        elif p >= 1:
            z = 0.0 if o == n else math.inf
        else:
            z = (o - n * p) / math.sqrt(n * p * (1 - p))
        zs[str(k)] = z
        worst = max(worst, abs(z))
    if any(k not in model for k, c in emp.counts.items() if c):
        worst = math.inf
    return TestVerdict(name, worst, n_sigma, n, f"max |z| over {len(model)} cells",
                       strict=False, details={"z": zs})

