"""Continuous-time F-ASEP and ASEP simulation.

Two clock schemes drive the same Markov chain:

* ``SITE``: every bond carries its own rate-p / rate-(1-p) clocks; simulated
  exactly with the Gillespie embedded chain over currently enabled moves.
* ``PARTICLE``: every particle carries a rate-p right clock and a rate-(1-p)
  left clock; a ring of a clock is accepted only if the local rule allows it
  (thinning).  For the F-ASEP the clock belongs to the left particle of an
  ``11`` pair, which exchanges with the ``10`` pair to its right or with the
  hole to its left.

All randomness comes from a PCG64 stream seeded by the caller, so equal seeds
give identical trajectories.
"""

from __future__ import annotations

import enum
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import _kernels as K
from .errors import DomainError, InvalidCount, MaxEventsExceeded, SpecError
from .lattice import LatticeConfig, Topology, is_frozen, particle_count

log = logging.getLogger(__name__)

RNG_CHUNK = 4096


class ClockScheme(enum.Enum):
    SITE = "site"
    PARTICLE = "particle"


class Model(enum.Enum):
    FASEP = "fasep"
    ASEP = "asep"


_MODEL_CODE = {Model.FASEP: K.FASEP, Model.ASEP: K.ASEP}
_SCHEME_CODE = {ClockScheme.SITE: K.SITE, ClockScheme.PARTICLE: K.PARTICLE}


@dataclass(frozen=True)
class RateParams:
    """Right-jump rate ``p``; left jumps occur at rate ``1 - p``."""

    p: float

    def __post_init__(self):
        if not 0.0 <= float(self.p) <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - float(self.p)


def _params(params) -> RateParams:
    return params if isinstance(params, RateParams) else RateParams(float(params))


def _scheme(scheme) -> ClockScheme:
    return scheme if isinstance(scheme, ClockScheme) else ClockScheme(scheme)


def make_rng(seed: int) -> np.random.Generator:
    """The project-wide generator: PCG64 seeded directly by a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed: int, n: int) -> list[int]:
    """``n`` independent 64-bit child seeds derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


# ---------------------------------------------------------------------------
# records


@dataclass
class RunRecord:
    seed: int
    params: RateParams
    scheme: ClockScheme
    initial: LatticeConfig
    final: LatticeConfig
    events: int = 0
    process_time: float = 0.0
    bond_current: int = 0
    snapshots: list[tuple[float, LatticeConfig]] = field(default_factory=list)
    model: Model = Model.FASEP
    attempts: int = 0
    violations: int = 0

    @property
    def J(self) -> int:
        return self.bond_current

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "p": float(self.params.p),
            "scheme": self.scheme.value,
            "model": self.model.value,
            "initial": str(self.initial),
            "final": str(self.final),
            "events": self.events,
            "process_time": self.process_time,
            "bond_current": self.bond_current,
            "attempts": self.attempts,
            "violations": self.violations,
            "snapshots": [[t, str(c)] for t, c in self.snapshots],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            seed=int(d["seed"]),
            params=RateParams(d["p"]),
            scheme=ClockScheme(d["scheme"]),
            model=Model(d.get("model", "fasep")),
            initial=LatticeConfig.parse(d["initial"]),
            final=LatticeConfig.parse(d["final"]),
            events=int(d["events"]),
            process_time=float(d["process_time"]),
            bond_current=int(d["bond_current"]),
            attempts=int(d.get("attempts", 0)),
            violations=int(d.get("violations", 0)),
            snapshots=[(float(t), LatticeConfig.parse(c)) for t, c in d.get("snapshots", [])],
        )


# ---------------------------------------------------------------------------
# pure-Python reference rules


@dataclass(frozen=True)
class Move:
    bond: int
    direction: str  # "right" or "left"
    rate: float


def enabled_moves(cfg: LatticeConfig, params, model: Model = Model.FASEP) -> list[Move]:
    """Every exchange with nonzero rate, scanning bonds in order.

    A right move on bond ``i`` takes the particle at ``i`` to ``i+1``; a left
    move takes the particle at ``i+1`` to ``i``.
    """
    params = _params(params)
    p, q = float(params.p), params.q
    L = cfg.L
    last = L if cfg.is_ring else L - 1
    out = []
    for i in range(last):
        a, b = cfg[i], cfg[i + 1]
        if model is Model.FASEP:
            if p > 0 and cfg[i - 1] and a and not b and (cfg.is_ring or i >= 1):
                out.append(Move(i, "right", p))
            if q > 0 and not a and b and cfg[i + 2] and (cfg.is_ring or i + 2 < L):
                out.append(Move(i, "left", q))
        else:
            if p > 0 and a and not b:
                out.append(Move(i, "right", p))
            if q > 0 and not a and b:
                out.append(Move(i, "left", q))
    return out


def apply_move(cfg: LatticeConfig, move: Move) -> LatticeConfig:
    arr = cfg.array()
    i, j = move.bond % cfg.L, (move.bond + 1) % cfg.L
    arr[i], arr[j] = arr[j], arr[i]
    return LatticeConfig(arr.tobytes(), cfg.topology)


def step_gillespie(cfg: LatticeConfig, params, rng: np.random.Generator,
                   model: Model = Model.FASEP):
    """One embedded-chain step.

    Returns ``(new_cfg, dt, move)``; an absorbed input gives ``(cfg, inf, None)``.
    """
    moves = enabled_moves(cfg, params, model)
    if not moves:
        return cfg, float("inf"), None
    total = sum(m.rate for m in moves)
    dt = rng.exponential(1.0 / total)
    x = rng.random() * total
    acc = 0.0
    chosen = moves[-1]
    for m in moves:
        acc += m.rate
        if x < acc:
            chosen = m
            break
    return apply_move(cfg, chosen), dt, chosen


# ---------------------------------------------------------------------------
# compiled engine driver


class Engine:
    """Mutable simulation state around the compiled kernel."""

    def __init__(self, cfg: LatticeConfig, params, scheme=ClockScheme.SITE,
                 model: Model = Model.FASEP, seed: int = 0, check: bool = True,
                 rng: Optional[np.random.Generator] = None):
        self.params = _params(params)
        self.scheme = _scheme(scheme)
        self.model = model
        self.ring = cfg.is_ring
        self.topology = cfg.topology
        self.check = check
        self.rng = rng if rng is not None else make_rng(seed)
        L = cfg.L
        self.rlist = np.empty(L, np.int64)
        self.rpos = np.empty(L, np.int64)
        self.llist = np.empty(L, np.int64)
        self.lpos = np.empty(L, np.int64)
        self.ist = np.zeros(7, np.int64)
        self.fst = np.zeros(1, np.float64)
        self.u = self.rng.random(RNG_CHUNK)
        self.reset(cfg)

    def reset(self, cfg: LatticeConfig):
        self.eta = cfg.array()
        self.parts = np.flatnonzero(self.eta).astype(np.int64)
        self.part_of = np.full(cfg.L, -1, np.int64)
        self.part_of[self.parts] = np.arange(self.parts.size)
        upos = self.ist[K.I_UPOS]
        self.ist[:] = 0
        self.ist[K.I_UPOS] = upos
        self.fst[0] = 0.0
        K.init_moves(self.eta, self.ring, _MODEL_CODE[self.model],
                     self.rlist, self.rpos, self.llist, self.lpos, self.ist)

    @property
    def time(self) -> float:
        return float(self.fst[0])

    @property
    def events(self) -> int:
        return int(self.ist[K.I_EVENTS])

    @property
    def n_enabled(self) -> int:
        return int(self.ist[K.I_NR] + self.ist[K.I_NL])

    def config(self) -> LatticeConfig:
        return LatticeConfig(self.eta.tobytes(), self.topology)

    def advance(self, t_stop: float, max_events: int) -> int:
        """Run until ``t_stop``; returns a kernel exit code other than NEED_RNG."""
        while True:
            status = K.run(self.eta, self.ring, _MODEL_CODE[self.model],
                           _SCHEME_CODE[self.scheme], float(self.params.p),
                           self.rlist, self.rpos, self.llist, self.lpos,
                           self.parts, self.part_of, self.ist, self.fst, self.u,
                           float(t_stop), int(max_events), self.check)
            if status != K.NEED_RNG:
                return status
            k = int(self.ist[K.I_UPOS])
            self.u = np.concatenate([self.u[k:], self.rng.random(RNG_CHUNK)])
            self.ist[K.I_UPOS] = 0

    def record(self, seed: int, initial: LatticeConfig, snapshots) -> RunRecord:
        return RunRecord(
            seed=seed, params=self.params, scheme=self.scheme, model=self.model,
            initial=initial, final=self.config(), events=self.events,
            process_time=self.time, bond_current=int(self.ist[K.I_J]),
            snapshots=snapshots, attempts=int(self.ist[K.I_ATTEMPTS]),
            violations=int(self.ist[K.I_VIOL]),
        )


def _snapshot_grid(snapshot_every: Optional[float]):
    if snapshot_every is None:
        return None
    if snapshot_every <= 0:
        raise SpecError("snapshot_every must be positive")
    return float(snapshot_every)


def run_for_time(cfg: LatticeConfig, params, scheme=ClockScheme.SITE, seed: int = 0,
                 t_end: float = 1.0, *, snapshot_every: Optional[float] = None,
                 model: Model = Model.FASEP, check: bool = True) -> RunRecord:
    """Evolve ``cfg`` for process time ``t_end``; J counts net jumps across bond (0, 1)."""
    if t_end < 0:
        raise SpecError("t_end must be non-negative")
    eng = Engine(cfg, params, scheme, model, seed, check)
    dt = _snapshot_grid(snapshot_every)
    snaps = []
    huge = np.iinfo(np.int64).max
    if dt is None:
        eng.advance(t_end, huge)
    else:
        k = 0
        while k * dt <= t_end:
            eng.advance(k * dt, huge)
            snaps.append((k * dt, eng.config()))
            k += 1
        eng.advance(t_end, huge)
    eng.fst[0] = t_end
    return eng.record(seed, cfg, snaps)


def run_asep_for_time(cfg: LatticeConfig, params, scheme=ClockScheme.SITE, seed: int = 0,
                      t_end: float = 1.0, **kw) -> RunRecord:
    """Plain exclusion dynamics (no facilitation), same instrumentation."""
    return run_for_time(cfg, params, scheme, seed, t_end, model=Model.ASEP, **kw)


def default_max_events(L: int) -> int:
    return 100 * L * L


def run_to_frozen(cfg: LatticeConfig, params, scheme=ClockScheme.SITE, seed: int = 0,
                  max_events: Optional[int] = None, *,
                  snapshot_every: Optional[float] = None, check: bool = True) -> RunRecord:
    """Run the F-ASEP until no move is enabled; the result must be frozen."""
    if max_events is None:
        max_events = default_max_events(cfg.L)
    if max_events <= 0:
        raise SpecError("max_events must be positive")
    eng = Engine(cfg, params, scheme, Model.FASEP, seed, check)
    dt = _snapshot_grid(snapshot_every)
    snaps = []
    if dt is None:
        status = eng.advance(np.inf, max_events)
    else:
        k = 0
        status = K.REACHED_T
        while status == K.REACHED_T:
            status = eng.advance(k * dt, max_events)
            if status == K.REACHED_T:
                snaps.append((k * dt, eng.config()))
            k += 1
    rec = eng.record(seed, cfg, snaps)
    if status == K.MAX_EVENTS:
        raise MaxEventsExceeded(
            f"no frozen configuration after {max_events} events "
            f"(L={cfg.L}, N={particle_count(cfg)})", rec)
    if not is_frozen(rec.final):
        raise MaxEventsExceeded(
            f"dynamics stopped in a non-frozen configuration {rec.final}", rec)
    return rec


def sample_marginal(cfg: LatticeConfig, params, scheme=ClockScheme.SITE, t_end: float = 1.0,
                    n_samples: int = 1000, seed: int = 0, model: Model = Model.FASEP,
                    check: bool = True) -> tuple[Counter, int]:
    """Empirical law of the state at ``t_end`` over independent runs from ``cfg``.

    Runs share one random stream.  Returns ``(counts, violations)``.
    """
    eng = Engine(cfg, params, scheme, model, seed, check)
    counts: Counter = Counter()
    violations = 0
    huge = np.iinfo(np.int64).max
    for _ in range(n_samples):
        eng.reset(cfg)
        eng.advance(t_end, huge)
        violations += int(eng.ist[K.I_VIOL])
        counts[eng.eta.tobytes()] += 1
    return Counter({LatticeConfig(k, cfg.topology): v for k, v in counts.items()}), violations


def stationary_snapshots(cfg: LatticeConfig, params, scheme=ClockScheme.SITE, seed: int = 0,
                         burn_in: Optional[int] = None, n_snapshots: int = 100,
                         spacing: Optional[int] = None, check: bool = True) -> RunRecord:
    """Snapshots taken every ``spacing`` events after ``burn_in`` events.

    Defaults are ``10 L^2`` events of burn-in and ``2 L`` events between
    snapshots.  Snapshot times in the record are process times.
    """
    L = cfg.L
    burn_in = 10 * L * L if burn_in is None else burn_in
    spacing = 2 * L if spacing is None else spacing
    eng = Engine(cfg, params, scheme, Model.FASEP, seed, check)
    snaps = []
    target = burn_in
    for _ in range(n_snapshots):
        status = eng.advance(np.inf, target)
        if status == K.ABSORBED:
            raise MaxEventsExceeded("dynamics absorbed before the stationary regime",
                                    record=eng.record(seed, cfg, snaps))
        snaps.append((eng.time, eng.config()))
        target += spacing
    return eng.record(seed, cfg, snaps)


# ---------------------------------------------------------------------------
# initial measures


def sample_uniform_ring(L: int, N: int, seed: int) -> LatticeConfig:
    """Uniform draw from the C(L, N) ring configurations with N particles."""
    if L < 1:
        raise InvalidCount("L must be positive")
    if not 0 <= N <= L:
        raise InvalidCount(f"need 0 <= N <= L, got N={N}, L={L}")
    arr = np.zeros(L, np.uint8)
    arr[make_rng(seed).choice(L, size=N, replace=False)] = 1
    return LatticeConfig(arr.tobytes(), Topology.RING)


def sample_bernoulli_window(L: int, rho: float, seed: int) -> LatticeConfig:
    """I.i.d. Bernoulli(rho) sites on a closed window."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    if L < 1:
        raise InvalidCount("L must be positive")
    arr = (make_rng(seed).random(L) < rho).astype(np.uint8)
    return LatticeConfig(arr.tobytes(), Topology.WINDOW)


def _last_record(arr: np.ndarray) -> int:
    """Index of the last strict running maximum of the window's height profile.

    Returns -1 when no site after the first qualifies.
    """
    h = np.cumsum(1 - 2 * arr.astype(np.int64))
    prev_max = np.maximum.accumulate(np.concatenate([[0], h[:-1]]))
    rec = np.flatnonzero(h > prev_max)
    rec = rec[rec >= 1]
    return int(rec[-1]) if rec.size else -1


def insulate(arr: np.ndarray) -> Optional[np.ndarray]:
    """Trim a window to a stretch bounded by insulating ``00`` pairs.

    The left end is cut at the first ``00`` and the right end at the last
    one.  The ends are then pulled inward to the outermost record sites of
    the height profile read in each direction, so that no particle ever
    crosses either end under the totally asymmetric dynamics and the stretch
    always has a frozen completion.  Returns ``None`` if nothing is left.
    """
    dz = np.flatnonzero((arr[:-1] | arr[1:]) == 0)
    if dz.size == 0:
        return None
    a, b = int(dz[0]), int(dz[-1]) + 1
    if b - a < 3:
        return None
    w = arr[a:b + 1]
    r = _last_record(w)
    if r < 1:
        return None
    w = w[:r + 1]
    l = _last_record(w[::-1])
    if l < 1:
        return None
    w = w[len(w) - 1 - l:]
    if len(w) < 4:
        return None
    return w


def insulated_window_experiment(rho: float, L: int, params, scheme=ClockScheme.SITE,
                                seed: int = 0, max_events: Optional[int] = None,
                                max_tries: int = 100) -> RunRecord:
    """Bernoulli window, trimmed to insulating ``00`` pairs, evolved until frozen.

    The window is resampled from fresh substreams of ``seed`` until trimming
    leaves a usable stretch.  The dynamics uses another substream.
    """
    if not 0.0 < rho < 0.5:
        raise DomainError(f"insulated windows need 0 < rho < 1/2, got {rho}")
    sample_seed, dyn_seed = spawn_seeds(seed, 2)
    trims = spawn_seeds(sample_seed, max_tries)
    for s in trims:
        w = insulate(sample_bernoulli_window(L, rho, s).array())
        if w is not None:
            break
    else:
        raise SpecError(f"no insulated stretch found in {max_tries} windows of length {L}")
    cfg = LatticeConfig(w.tobytes(), Topology.WINDOW)
    rec = run_to_frozen(cfg, params, scheme, dyn_seed, max_events)
    rec.seed = seed
    return rec


def run_many(fn, seeds: Iterable[int], *args, **kwargs) -> list[RunRecord]:
    return [fn(*args, seed=s, **kwargs) for s in seeds]
