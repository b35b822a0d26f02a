"""Exhaustive state spaces and exact linear solves for small rings.

Everything except ``marginal_at_time`` runs in rational arithmetic, so
identities such as the p-independence of the frozen law are checked with
zero tolerance.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import expm_multiply

from .dynamics import Model, RateParams
from .errors import NotAbsorbing, Reducible, SpecError, TooLarge
from .lattice import LatticeConfig, Topology

MAX_L = 16
MAX_EXPM_STATES = 10_000


def as_fraction(p) -> Fraction:
    """Exact rate parameter; floats are read through their shortest repr."""
    if isinstance(p, RateParams):
        p = p.p
    if isinstance(p, float):
        p = repr(p)
    f = Fraction(p)
    if not 0 <= f <= 1:
        raise SpecError(f"p must lie in [0, 1], got {p}")
    return f


@dataclass(frozen=True)
class StateSpace:
    """All ring configurations with ``N`` particles on ``L`` sites, in
    lexicographic order of their bit strings."""

    L: int
    N: int
    states: tuple[LatticeConfig, ...]
    index: Mapping[LatticeConfig, int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


def enumerate_states(L: int, N: int, max_L: int = MAX_L) -> StateSpace:
    if L < 1 or not 0 <= N <= L:
        raise SpecError(f"need 1 <= L and 0 <= N <= L, got L={L}, N={N}")
    if L > max_L:
        raise TooLarge(f"L={L} exceeds the exhaustive cap of {max_L}")
    states = []
    for occ in itertools.combinations(range(L), N):
        bits = bytearray(L)
        for i in occ:
            bits[i] = 1
        states.append(LatticeConfig(bytes(bits), Topology.RING))
    states.sort(key=lambda c: c.sites)
    return StateSpace(L, N, tuple(states), {c: k for k, c in enumerate(states)})


@dataclass(frozen=True)
class GeneratorMatrix:
    """Off-diagonal rates ``rows[s][t]``; zero rates are never stored."""

    space: StateSpace
    p: Fraction
    model: Model
    rows: tuple[dict[int, Fraction], ...]

    def exit_rate(self, s: int) -> Fraction:
        return sum(self.rows[s].values(), Fraction(0))

    def diagonal(self, s: int) -> Fraction:
        return -self.exit_rate(s)

    def absorbing(self) -> list[int]:
        return [s for s, row in enumerate(self.rows) if not row]

    def graph(self) -> csr_matrix:
        n = len(self.rows)
        src = [s for s, row in enumerate(self.rows) for _ in row]
        dst = [t for row in self.rows for t in row]
        return csr_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))

    def to_dense_float(self) -> np.ndarray:
        n = len(self.rows)
        Q = np.zeros((n, n))
        for s, row in enumerate(self.rows):
            for t, r in row.items():
                Q[s, t] = float(r)
            Q[s, s] = -float(self.exit_rate(s))
        return Q


def _swap(sites: bytes, a: int, b: int) -> bytes:
    out = bytearray(sites)
    out[a], out[b] = out[b], out[a]
    return bytes(out)


def build_generator(space: StateSpace, params, model: Model = Model.FASEP) -> GeneratorMatrix:
    """Exact generator of the F-ASEP (or plain ASEP) on ``space``."""
    p = as_fraction(params)
    q = 1 - p
    L = space.L
    rows = []
    for cfg in space.states:
        eta = cfg.sites
        row: dict[int, Fraction] = {}
        for i in range(L):
            a, b = i % L, (i + 1) % L
            if a == b:
                continue
            behind = eta[(i - 1) % L]
            ahead = eta[(i + 2) % L]
            facil = model is Model.ASEP
            if eta[a] == 1 and eta[b] == 0 and p and (facil or behind == 1):
                t = space.index[LatticeConfig(_swap(eta, a, b))]
                row[t] = row.get(t, Fraction(0)) + p
            if eta[a] == 0 and eta[b] == 1 and q and (facil or ahead == 1):
                t = space.index[LatticeConfig(_swap(eta, a, b))]
                row[t] = row.get(t, Fraction(0)) + q
        rows.append(row)
    return GeneratorMatrix(space, p, model, tuple(rows))


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class ExactDistribution:
    """Exact rational weights on the states of ``space`` (zeros omitted)."""

    space: StateSpace
    weights: Mapping[int, Fraction]

    @classmethod
    def uniform(cls, space: StateSpace, subset: Iterable[int] | None = None) -> "ExactDistribution":
        idx = list(range(len(space))) if subset is None else sorted(subset)
        w = Fraction(1, len(idx))
        return cls(space, {k: w for k in idx})

    @classmethod
    def point(cls, space: StateSpace, cfg: LatticeConfig) -> "ExactDistribution":
        return cls(space, {space.index[cfg]: Fraction(1)})

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def support(self) -> list[LatticeConfig]:
        return [self.space.states[k] for k in sorted(self.weights) if self.weights[k]]

    def by_config(self) -> dict[LatticeConfig, Fraction]:
        return {self.space.states[k]: w for k, w in sorted(self.weights.items()) if w}

    def dense(self) -> np.ndarray:
        v = np.zeros(len(self.space))
        for k, w in self.weights.items():
            v[k] = float(w)
        return v

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactDistribution):
            return NotImplemented
        return self.by_config() == other.by_config()

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["config", "numerator", "denominator"])
        for cfg, x in self.by_config().items():
            w.writerow([str(cfg), x.numerator, x.denominator])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"L": self.space.L, "N": self.space.N,
                           "weights": {str(c): str(x) for c, x in self.by_config().items()}},
                          sort_keys=True)


# ---------------------------------------------------------------------------
# exact linear algebra


def _solve(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Solve ``A x = b`` by Gauss-Jordan elimination over the rationals."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        pr = [x * inv for x in M[c]]
        M[c] = pr
        for r in range(n):
            f = M[r][c]
            if r != c and f:
                Mr = M[r]
                for k in range(c, n + 1):
                    if pr[k]:
                        Mr[k] -= f * pr[k]
    return [M[i][n] for i in range(n)]


def _sccs(gen: GeneratorMatrix) -> tuple[int, np.ndarray]:
    return connected_components(gen.graph(), directed=True, connection="strong")


def _topological_classes(gen: GeneratorMatrix, labels: np.ndarray, n_cls: int) -> list[list[int]]:
    members: list[list[int]] = [[] for _ in range(n_cls)]
    for s, c in enumerate(labels):
        members[c].append(s)
    succ = [set() for _ in range(n_cls)]
    indeg = [0] * n_cls
    for s, row in enumerate(gen.rows):
        for t in row:
            a, b = labels[s], labels[t]
            if a != b and b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    order, ready = [], [c for c in range(n_cls) if indeg[c] == 0]
    while ready:
        c = ready.pop()
        order.append(c)
        for d in succ[c]:
            indeg[d] -= 1
            if indeg[d] == 0:
                ready.append(d)
    return [members[c] for c in order]


def absorption_distribution(initial: ExactDistribution, gen: GeneratorMatrix) -> ExactDistribution:
    """Exact law of the absorbing state eventually reached from ``initial``.

    Mass is pushed through the jump chain one strongly connected class at a
    time in topological order; inside a class the expected visit counts solve
    ``v (I - P_CC) = b``.
    """
    n_cls, labels = _sccs(gen)
    absorbing = set(gen.absorbing())
    exit_rates = [gen.exit_rate(s) for s in range(len(gen.rows))]
    inflow = [Fraction(0)] * len(gen.rows)
    for k, w in initial.weights.items():
        inflow[k] += w
    out: dict[int, Fraction] = {}
    for cls in _topological_classes(gen, labels, n_cls):
        if len(cls) == 1 and cls[0] in absorbing:
            s = cls[0]
            if inflow[s]:
                out[s] = inflow[s]
            continue
        pos = {s: k for k, s in enumerate(cls)}
        leaves = any(labels[t] != labels[cls[0]] for s in cls for t in gen.rows[s])
        if not leaves:
            raise NotAbsorbing(f"a closed class of {len(cls)} non-absorbing states "
                               f"(e.g. {gen.space.states[cls[0]]}) never reaches a frozen state")
        if not any(inflow[s] for s in cls):
            continue
        m = len(cls)
        # transpose of (I - P_CC): A[j][i] = delta - P(cls[i] -> cls[j])
        A = [[Fraction(int(i == j)) for i in range(m)] for j in range(m)]
        for i, s in enumerate(cls):
            for t, r in gen.rows[s].items():
                j = pos.get(t)
                if j is not None:
                    A[j][i] -= r / exit_rates[s]
        v = _solve(A, [inflow[s] for s in cls]) if m > 1 else [inflow[cls[0]] / A[0][0]]
        for i, s in enumerate(cls):
            if not v[i]:
                continue
            for t, r in gen.rows[s].items():
                if t not in pos:
                    inflow[t] += v[i] * r / exit_rates[s]
    return ExactDistribution(initial.space, out)


def recurrent_classes(gen: GeneratorMatrix) -> list[list[int]]:
    """Closed communicating classes (absorbing states are singleton classes)."""
    n_cls, labels = _sccs(gen)
    closed = [True] * n_cls
    for s, row in enumerate(gen.rows):
        if any(labels[t] != labels[s] for t in row):
            closed[labels[s]] = False
    return [sorted(int(s) for s in np.flatnonzero(labels == c)) for c in range(n_cls) if closed[c]]


def stationary_distribution(gen: GeneratorMatrix, support_hint: Iterable[int] | None = None) -> ExactDistribution:
    """Unique stationary law, supported on the single recurrent class.

    Raises ``Reducible`` (carrying the closed classes) when there is more
    than one, which is the normal situation for ``N < L/2``.
    """
    classes = recurrent_classes(gen)
    if len(classes) != 1:
        raise Reducible(f"{len(classes)} recurrent classes", classes)
    cls = classes[0]
    if support_hint is not None and set(support_hint) != set(cls):
        raise Reducible("recurrent class differs from the supplied support", classes)
    m = len(cls)
    if m == 1:
        return ExactDistribution(gen.space, {cls[0]: Fraction(1)})
    pos = {s: k for k, s in enumerate(cls)}
    # pi Q = 0 transposed, with the last balance equation swapped for sum(pi) = 1
    A = [[Fraction(0)] * m for _ in range(m)]
    for i, s in enumerate(cls):
        A[i][i] -= gen.exit_rate(s)
        for t, r in gen.rows[s].items():
            A[pos[t]][i] += r
    A[-1] = [Fraction(1)] * m
    b = [Fraction(0)] * (m - 1) + [Fraction(1)]
    pi = _solve(A, b)
    return ExactDistribution(gen.space, {s: pi[i] for i, s in enumerate(cls) if pi[i]})


def marginal_at_time(initial: ExactDistribution, gen: GeneratorMatrix, t: float,
                     max_states: int = MAX_EXPM_STATES) -> np.ndarray:
    """``initial @ expm(t Q)`` in floating point, indexed like ``gen.space``."""
    n = len(gen.rows)
    if n > max_states:
        raise TooLarge(f"{n} states exceeds the matrix-exponential cap of {max_states}")
    p0 = initial.dense()
    if t == 0:
        return p0
    rows, cols, vals = [], [], []
    for s, row in enumerate(gen.rows):
        for u, r in row.items():
            rows.append(u)
            cols.append(s)
            vals.append(float(r))
        rows.append(s)
        cols.append(s)
        vals.append(-float(gen.exit_rate(s)))
    QT = csr_matrix((vals, (rows, cols)), shape=(n, n))
    out = expm_multiply(QT * float(t), p0)
    out = np.clip(out, 0.0, None)
    return out / out.sum()


def marginal_by_config(space: StateSpace, vec: np.ndarray) -> dict[LatticeConfig, float]:
    return {space.states[k]: float(x) for k, x in enumerate(vec) if x > 0}
