"""Substitution maps between exclusion and facilitated configurations, the
high-density cylinder formula, and the coupled ASEP / F-ASEP simulation.

The high-density map replaces ``1 -> 1`` and ``0 -> 10``; every block starts
with a particle, so the image never contains ``00``.  The low-density map
``0 -> 0``, ``1 -> 01`` is its mirror and never produces ``11``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import RateParams, _params, make_rng
from .errors import BadAnchor, DomainError, NotInImage, SpecError
from .lattice import LatticeConfig, Topology, particle_count


class SubstitutionMap(enum.Enum):
    HIGH_DENSITY = "high"  # 1 -> 1, 0 -> 10
    LOW_DENSITY = "low"  # 0 -> 0, 1 -> 01

    @property
    def lead(self) -> int:
        """First symbol of every block."""
        return 1 if self is SubstitutionMap.HIGH_DENSITY else 0

    def block(self, s: int) -> tuple[int, ...]:
        lead = self.lead
        return (lead,) if s == lead else (lead, 1 - lead)


@dataclass(frozen=True)
class SiteCorrespondence:
    """``gamma[k]`` is the image site where the block of source site
    ``source_origin + k`` starts."""

    source_origin: int
    image_origin: int
    gamma: tuple[int, ...]

    def __call__(self, i: int) -> int:
        return self.gamma[i - self.source_origin]


def apply_substitution(smap: SubstitutionMap, src: LatticeConfig, origin: int = 0,
                       pin: Optional[int] = None) -> tuple[LatticeConfig, SiteCorrespondence]:
    """Substitute every site of ``src`` by its block.

    ``origin`` is the coordinate of the first source site.  The image is
    placed so that the block of source site ``pin`` starts at image site
    ``pin``.  Rings use ``pin = origin = 0``; windows default to pinning
    site 1 when it is in range, otherwise the first site.
    """
    if pin is None:
        pin = 1 if (not src.is_ring and origin <= 1 < origin + src.L) else origin
    if not origin <= pin < origin + src.L:
        raise SpecError(f"pin {pin} outside the source range")
    out: list[int] = []
    starts: list[int] = []
    for s in src.sites:
        starts.append(len(out))
        out.extend(smap.block(s))
    shift = pin - starts[pin - origin]
    gamma = tuple(g + shift for g in starts)
    return (LatticeConfig(bytes(out), src.topology),
            SiteCorrespondence(origin, gamma[0], gamma))


def phi(src: LatticeConfig) -> LatticeConfig:
    """High-density image with the block of site 0 starting at site 0."""
    return apply_substitution(SubstitutionMap.HIGH_DENSITY, src)[0]


def _check_image(smap: SubstitutionMap, img: LatticeConfig) -> None:
    extra = 1 - smap.lead
    s = img.sites
    pairs = zip(s, s[1:] + s[:1]) if img.is_ring and img.L > 1 else zip(s, s[1:])
    if any(a == extra and b == extra for a, b in pairs):
        raise NotInImage(f"{img} contains {extra}{extra}")


def invert_substitution(smap: SubstitutionMap, img: LatticeConfig, anchor: int = 0) -> LatticeConfig:
    """Recover the source from an image whose block boundary sits at ``anchor``.

    A lone leading symbol at the right edge of a window is read as the short
    block.
    """
    _check_image(smap, img)
    lead, extra = smap.lead, 1 - smap.lead
    L = img.L
    if not 0 <= anchor < L:
        raise BadAnchor(f"anchor {anchor} outside 0..{L - 1}")
    if img.sites[anchor] != lead:
        raise BadAnchor(f"site {anchor} of {img} does not start a block")
    if img.is_ring:
        s = img.sites[anchor:] + img.sites[:anchor]
        fwd_end = L
        back: list[int] = []
    else:
        s = img.sites
        fwd_end = L
        back = []
        y = anchor - 1
        while y >= 0:
            if s[y] == extra:
                if y == 0 or s[y - 1] != lead:
                    raise NotInImage(f"{img} starts inside a block")
                back.append(1 - lead)
                y -= 2
            else:
                back.append(lead)
                y -= 1
    fwd: list[int] = []
    x = anchor if not img.is_ring else 0
    while x < fwd_end:
        if s[x] != lead:
            raise NotInImage(f"{img} has a block not starting with {lead}")
        nxt = s[x + 1] if x + 1 < fwd_end else None
        if nxt == extra:
            fwd.append(1 - lead)
            x += 2
        else:
            fwd.append(lead)
            x += 1
    return LatticeConfig(bytes(back[::-1] + fwd), img.topology)


def true_particles(cfg: LatticeConfig) -> list[int]:
    """Occupied sites immediately followed by another particle."""
    L = cfg.L
    if cfg.is_ring:
        return [i for i in range(L) if cfg.sites[i] and cfg.sites[(i + 1) % L]]
    return [i for i in range(L - 1) if cfg.sites[i] and cfg.sites[i + 1]]


# ---------------------------------------------------------------------------
# cylinder weights of the high-density TIS measure


def cylinder_probability(theta: Sequence[int] | str, rho: float) -> float:
    """Probability of the pattern ``theta`` on consecutive sites.

    Patterns containing ``00`` have probability zero.
    """
    if not 0.5 < rho < 1.0:
        raise DomainError(f"cylinder formula needs 1/2 < rho < 1, got {rho}")
    th = [int(c) for c in theta]
    if not th or any(b not in (0, 1) for b in th):
        raise SpecError(f"bad pattern {theta!r}")
    if any(a + b == 0 for a, b in zip(th, th[1:])):
        return 0.0
    m, s = len(th), sum(th)
    e1 = m - 1 - s
    e2 = 2 * s + 1 - m - th[0] - th[-1]
    return (1 - rho) * ((1 - rho) / rho) ** e1 * ((2 * rho - 1) / rho) ** e2


def mapped_measure_weight(theta: Sequence[int] | str, rho_hat: float) -> float:
    """Cylinder weight of the image of Bernoulli(rho_hat) under the
    high-density measure map, whose density is ``1 / (2 - rho_hat)``."""
    if not 0.0 < rho_hat < 1.0:
        raise DomainError(f"need 0 < rho_hat < 1, got {rho_hat}")
    return cylinder_probability(theta, 1.0 / (2.0 - rho_hat))


def sample_uniform_G_ring(L: int, N: int, seed: int) -> LatticeConfig:
    """Exact uniform sample from ring configurations with no ``00``.

    A uniform exclusion configuration with ``2N - L`` particles on ``N``
    sites is pushed through the high-density map and rotated uniformly;
    every target has exactly ``N`` preimages, so the result is uniform.
    """
    if not (L >= 1 and L / 2 <= N <= L):
        raise DomainError(f"no-00 ring configurations need L/2 <= N <= L, got N={N}, L={L}")
    rng = make_rng(seed)
    n_hat = 2 * N - L
    zeta = np.zeros(N, np.uint8)
    zeta[rng.choice(N, n_hat, replace=False)] = 1
    img = phi(LatticeConfig(zeta.tobytes(), Topology.RING))
    return img.rotate(int(rng.integers(L)))


# ---------------------------------------------------------------------------
# coupled dynamics on a ring


@dataclass(frozen=True)
class CoupledState:
    time: float
    events: int
    asep: LatticeConfig
    fasep: LatticeConfig
    labels: tuple[int, ...]  # ASEP site of particle k
    true_sites: tuple[int, ...]  # F-ASEP site of true particle k
    offset: int  # fasep == rotate(phi(asep), offset)

    def to_dict(self) -> dict:
        return {"time": self.time, "events": self.events, "asep": str(self.asep),
                "fasep": str(self.fasep), "labels": list(self.labels),
                "true_sites": list(self.true_sites), "offset": self.offset}

    @classmethod
    def from_dict(cls, d: dict) -> "CoupledState":
        return cls(d["time"], d["events"], LatticeConfig.parse(d["asep"]),
                   LatticeConfig.parse(d["fasep"]), tuple(d["labels"]),
                   tuple(d["true_sites"]), d["offset"])


@dataclass
class CoupledRun:
    seed: int
    params: RateParams
    snapshots: list[CoupledState] = field(default_factory=list)
    events: int = 0
    attempts: int = 0
    checks: int = 0
    violations: int = 0

    @property
    def final(self) -> CoupledState:
        return self.snapshots[-1]

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "p": self.params.p, "events": self.events,
                           "attempts": self.attempts, "checks": self.checks,
                           "violations": self.violations,
                           "snapshots": [s.to_dict() for s in self.snapshots]}, sort_keys=True)


_HD_BLOCKS = {1: b"\x01", 0: b"\x01\x00"}


def _offset_from_labels(asep: bytearray, xs: list[int], ys: list[int], L_img: int) -> int:
    gamma = 0
    for i in range(xs[0]):
        gamma += 2 - asep[i]
    return (ys[0] - gamma) % L_img


def _invariant_ok(asep: bytearray, fasep: bytearray, xs: list[int], ys: list[int], d: int) -> bool:
    L_hat, L_img = len(asep), len(fasep)
    img = b"".join(_HD_BLOCKS[s] for s in asep)
    img = img[L_img - d:] + img[:L_img - d] if d else img
    if img != bytes(fasep):
        return False
    trues = [i for i in range(L_img) if img[i] and img[(i + 1) % L_img]]
    if trues != sorted(ys):
        return False
    n = len(xs)
    for k in range(n):
        dx = (xs[(k + 1) % n] - xs[k]) % L_hat or L_hat
        dy = (ys[(k + 1) % n] - ys[k]) % L_img
        if dy != (2 * dx - 1) % L_img:
            return False
    return True


def run_coupled(asep0: LatticeConfig, params, seed: int, t_end: Optional[float] = None,
                max_events: Optional[int] = None, snapshot_every: Optional[float] = None,
                check: bool = True, recheck_every: int = 64) -> CoupledRun:
    """Drive an ASEP ring and its F-ASEP image with shared particle clocks.

    ASEP particle ``k`` and true particle ``k`` carry the same right (rate p)
    and left (rate 1-p) clocks.  A right ring moves the ASEP particle if the
    site ahead is empty, and at the same time the true particle trades places
    with the ``10`` pair on its right; left rings act symmetrically.  With
    ``check`` the translation invariant and the spacing relation are checked
    after every event, and the rotation offset is recomputed from the labels
    every ``recheck_every`` events.
    """
    params = _params(params)
    if not asep0.is_ring:
        raise SpecError("the coupling runs on rings")
    L_hat, n_hat = asep0.L, particle_count(asep0)
    if not 1 <= n_hat <= L_hat:
        raise SpecError("the coupled ASEP needs at least one particle")
    if t_end is None and max_events is None:
        raise SpecError("give t_end or max_events")
    t_end = math.inf if t_end is None else float(t_end)
    max_events = math.inf if max_events is None else max_events

    img0, gam = apply_substitution(SubstitutionMap.HIGH_DENSITY, asep0)
    asep = bytearray(asep0.sites)
    fasep = bytearray(img0.sites)
    L_img = len(fasep)
    xs = [i for i in range(L_hat) if asep[i]]
    ys = [gam(i) for i in xs]
    d = 0
    rng = make_rng(seed)
    run = CoupledRun(seed, params)

    def snap(t):
        run.snapshots.append(CoupledState(t, run.events, LatticeConfig(bytes(asep)),
                                          LatticeConfig(bytes(fasep)), tuple(xs), tuple(ys), d))

    if check:
        run.checks += 1
        run.violations += not _invariant_ok(asep, fasep, xs, ys, d)
    snap(0.0)
    next_snap = snapshot_every if snapshot_every else math.inf
    t = 0.0
    p = params.p
    buf = np.empty(0)
    pos = 0
    while run.events < max_events and n_hat < L_hat:
        if pos + 3 > len(buf):
            buf = rng.random(3 * 4096)
            pos = 0
        u0, u1, u2 = buf[pos], buf[pos + 1], buf[pos + 2]
        pos += 3
        t_next = t - math.log1p(-u0) / n_hat
        while next_snap <= min(t_next, t_end):
            snap(next_snap)
            next_snap += snapshot_every
        if t_next > t_end:
            break
        t = t_next
        run.attempts += 1
        k = min(int(u1 * n_hat), n_hat - 1)
        x, y = xs[k], ys[k]
        if u2 < p:
            if asep[(x + 1) % L_hat]:
                continue
            asep[x], asep[(x + 1) % L_hat] = 0, 1
            xs[k] = (x + 1) % L_hat
            a, b = (y + 1) % L_img, (y + 2) % L_img
            if check and not (fasep[y] == 1 and fasep[a] == 1 and fasep[b] == 0):
                run.violations += 1
            fasep[a], fasep[b] = 0, 1
            ys[k] = b
            if x == L_hat - 1:
                d += 1
        else:
            if asep[(x - 1) % L_hat]:
                continue
            asep[x], asep[(x - 1) % L_hat] = 0, 1
            xs[k] = (x - 1) % L_hat
            a, b = (y - 1) % L_img, (y - 2) % L_img
            if check and not (fasep[b] == 1 and fasep[a] == 0 and fasep[y] == 1
                              and fasep[(y + 1) % L_img] == 1):
                run.violations += 1
            fasep[a], fasep[y] = 1, 0
            ys[k] = b
            if x == 0:
                d -= 1
        d %= L_img
        run.events += 1
        if check:
            run.checks += 1
            run.violations += not _invariant_ok(asep, fasep, xs, ys, d)
            if run.events % recheck_every == 0:
                run.violations += _offset_from_labels(asep, xs, ys, L_img) != d
    t_final = t if t_end == math.inf else t_end
    last = run.snapshots[-1]
    if last.time != t_final or last.events != run.events:
        snap(t_final)
    return run


def coupled_marginal(asep0: LatticeConfig, params, t_end: float, n_samples: int,
                     seed: int, check: bool = True):
    """Empirical law of the F-ASEP component at ``t_end`` (Counter, violations)."""
    from collections import Counter

    from .dynamics import spawn_seeds

    counts: Counter = Counter()
    viol = 0
    for s in spawn_seeds(seed, n_samples):
        r = run_coupled(asep0, params, s, t_end=t_end, check=check)
        counts[r.final.fasep] += 1
        viol += r.violations
    return counts, viol
