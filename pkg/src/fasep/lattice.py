"""Lattice configurations and the structural predicates used everywhere else.

A configuration is an immutable 0/1 occupancy sequence on either a periodic
ring or a finite window with closed ends.  Sites are stored as ``bytes`` so a
configuration is hashable and can key a distribution directly.

Text form is ``"ring:0110"`` or ``"window:0110"``, site 0 first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .errors import SpecError


class Topology(enum.Enum):
    RING = "ring"
    WINDOW = "window"


@dataclass(frozen=True)
class LatticeConfig:
    """Occupancy of ``L`` sites; ``sites[i]`` is 1 for a particle, 0 for a hole."""

    sites: bytes
    topology: Topology = Topology.RING

    def __post_init__(self):
        if not isinstance(self.sites, bytes):
            object.__setattr__(self, "sites", bytes(self.sites))
        if len(self.sites) < 1:
            raise SpecError("a configuration needs at least one site")
        if self.sites.strip(b"\x00\x01"):
            raise SpecError("site values must be 0 or 1")

    # construction -------------------------------------------------------

    @classmethod
    def parse(cls, text: str, default: Topology | None = None) -> "LatticeConfig":
        """Parse ``"ring:0101"``/``"window:0101"``; a bare bit string needs ``default``."""
        text = text.strip()
        if ":" in text:
            prefix, bits = text.split(":", 1)
            try:
                topology = Topology(prefix)
            except ValueError:
                raise SpecError(f"unknown topology prefix {prefix!r}") from None
        elif default is not None:
            topology, bits = default, text
        else:
            raise SpecError(f"configuration {text!r} lacks a 'ring:' or 'window:' prefix")
        if not bits or set(bits) - {"0", "1"}:
            raise SpecError(f"bad configuration string {text!r}")
        return cls(bytes(int(c) for c in bits), topology)

    @classmethod
    def ring(cls, bits: str | Iterable[int]) -> "LatticeConfig":
        if isinstance(bits, str):
            return cls.parse(bits, Topology.RING)
        return cls(bytes(int(b) for b in bits), Topology.RING)

    @classmethod
    def window(cls, bits: str | Iterable[int]) -> "LatticeConfig":
        if isinstance(bits, str):
            return cls.parse(bits, Topology.WINDOW)
        return cls(bytes(int(b) for b in bits), Topology.WINDOW)

    @classmethod
    def from_array(cls, arr, topology: Topology = Topology.RING) -> "LatticeConfig":
        return cls(np.asarray(arr, dtype=np.uint8).tobytes(), topology)

    # views --------------------------------------------------------------

    @property
    def L(self) -> int:
        return len(self.sites)

    @property
    def is_ring(self) -> bool:
        return self.topology is Topology.RING

    @property
    def bits(self) -> str:
        return "".join("1" if b else "0" for b in self.sites)

    def array(self) -> np.ndarray:
        """A fresh writable ``uint8`` copy of the occupancy."""
        return np.frombuffer(self.sites, dtype=np.uint8).copy()

    def __str__(self) -> str:
        return f"{self.topology.value}:{self.bits}"

    def __repr__(self) -> str:
        return f"LatticeConfig({str(self)!r})"

    def __len__(self) -> int:
        return len(self.sites)

    def __getitem__(self, i: int) -> int:
        if self.is_ring:
            return self.sites[i % self.L]
        if 0 <= i < self.L:
            return self.sites[i]
        return 0

    def rotate(self, k: int) -> "LatticeConfig":
        """Translate a ring by ``k``: the result has ``out[i] = self[i - k]``."""
        if not self.is_ring:
            raise SpecError("only ring configurations can be rotated")
        k %= self.L
        return LatticeConfig(self.sites[-k:] + self.sites[:-k] if k else self.sites)

    def rotations(self) -> Iterator["LatticeConfig"]:
        for k in range(self.L):
            yield self.rotate(k)


def _pairs(cfg: LatticeConfig) -> tuple[np.ndarray, np.ndarray]:
    a = np.frombuffer(cfg.sites, dtype=np.uint8)
    if cfg.is_ring:
        return a, np.roll(a, -1)
    return a[:-1], a[1:]


def particle_count(cfg: LatticeConfig) -> int:
    return cfg.sites.count(1)


def is_frozen(cfg: LatticeConfig) -> bool:
    """True iff no two adjacent sites are both occupied."""
    a, b = _pairs(cfg)
    if cfg.is_ring and cfg.L == 1:
        return not a[0]
    return not bool(np.any(a & b))


def is_no_adjacent_holes(cfg: LatticeConfig) -> bool:
    """True iff no two adjacent sites are both empty."""
    a, b = _pairs(cfg)
    if cfg.is_ring and cfg.L == 1:
        return bool(a[0])
    return not bool(np.any((a | b) == 0))


def double_zero_bonds(cfg: LatticeConfig) -> frozenset[int]:
    """Bonds ``i`` (between sites i and i+1) that carry a ``00`` pair."""
    a, b = _pairs(cfg)
    return frozenset(np.flatnonzero((a | b) == 0).tolist())


def components(cfg: LatticeConfig) -> list[tuple[int, int]]:
    """Maximal particle blocks separated by at least two adjacent holes.

    Returns ``(start, end)`` site pairs, ordered by start.  On a ring a block
    may wrap, in which case ``end < start``.  A ring with particles but no
    ``00`` pair anywhere is a single component running from its first
    particle to the particle preceding it cyclically.
    """
    occ = [i for i, s in enumerate(cfg.sites) if s]
    if not occ:
        return []
    L = cfg.L
    if not cfg.is_ring:
        out = []
        start = prev = occ[0]
        for i in occ[1:]:
            if i - prev - 1 >= 2:
                out.append((start, prev))
                start = i
            prev = i
        out.append((start, prev))
        return out

    # cut the ring after a gap of >= 2 holes, if one exists
    gaps = [(occ[(k + 1) % len(occ)] - occ[k] - 1) % L for k in range(len(occ))]
    if len(occ) == 1:
        gaps = [L - 1]
    cuts = [k for k, g in enumerate(gaps) if g >= 2]
    if not cuts:
        return [(occ[0], occ[-1])]
    out = []
    n = len(occ)
    first = (cuts[0] + 1) % n
    start = prev_k = first
    for step in range(1, n + 1):
        k = (first + step) % n
        if gaps[prev_k] >= 2:
            out.append((occ[start], occ[prev_k]))
            start = k
        prev_k = k
    return sorted(out)


def component_count(cfg: LatticeConfig) -> int:
    return len(components(cfg))


def density(cfg: LatticeConfig) -> Fraction:
    return Fraction(particle_count(cfg), cfg.L)
