import json
import math

import numpy as np
import pytest

from fasep.dynamics import (ClockScheme, Model, Move, RateParams, RunRecord, enabled_moves,
                            insulate, insulated_window_experiment, make_rng, run_asep_for_time,
                            run_for_time, run_to_frozen, sample_bernoulli_window, sample_marginal,
                            sample_uniform_ring, spawn_seeds, stationary_snapshots, step_gillespie)
from fasep.errors import DomainError, InvalidCount, MaxEventsExceeded, SpecError
from fasep.lattice import LatticeConfig, double_zero_bonds, is_frozen, particle_count

R = LatticeConfig.ring
W = LatticeConfig.window
SCHEMES = list(ClockScheme)


def test_rate_params_validation():
    assert RateParams(0.3).q == pytest.approx(0.7)
    with pytest.raises(SpecError):
        RateParams(1.5)


def test_enabled_moves_examples():
    assert enabled_moves(R("1100"), 0.7) == [Move(1, "right", 0.7), Move(3, "left", pytest.approx(0.3))]
    assert enabled_moves(R("10100"), 0.4) == []
    assert enabled_moves(R("11111"), 0.4) == []


def test_window_moves_stay_inside():
    # the pair at the right wall cannot push a particle out
    assert enabled_moves(W("0011"), 1.0) == []
    assert enabled_moves(W("0011"), 0.0) == [Move(1, "left", 1.0)]


def test_asep_moves_unfacilitated():
    moves = enabled_moves(R("1000"), 0.5, Model.ASEP)
    assert {(m.bond, m.direction) for m in moves} == {(0, "right"), (3, "left")}


def test_step_gillespie_absorbed():
    c = R("10100")
    nxt, dt, move = step_gillespie(c, 0.5, make_rng(0))
    assert nxt == c and dt == math.inf and move is None


@pytest.mark.parametrize("scheme", SCHEMES)
def test_run_to_frozen_examples(scheme):
    r = run_to_frozen(R("1100"), 1.0, scheme, seed=5)
    assert r.final == R("1010") and r.events == 1
    r = run_to_frozen(R("0011"), 0.0, scheme, seed=5)
    assert r.final == R("0101") and r.events == 1
    r = run_to_frozen(R("10100"), 0.3, scheme, seed=5)
    assert r.final == R("10100") and r.events == 0


def test_run_to_frozen_high_density_fails():
    with pytest.raises(MaxEventsExceeded) as e:
        run_to_frozen(R("110110"), 0.5, seed=1, max_events=500)
    assert e.value.record is not None


@pytest.mark.parametrize("scheme", SCHEMES)
def test_run_for_time_examples(scheme):
    r = run_for_time(R("110100"), 0.5, scheme, seed=1, t_end=0.0)
    assert r.final == r.initial and r.J == 0 and r.events == 0
    r = run_for_time(R("11111"), 0.5, scheme, seed=1, t_end=100.0)
    assert r.final == r.initial and r.events == 0
    r = run_for_time(R("110110"), 0.3, scheme, seed=2, t_end=200.0)
    assert not double_zero_bonds(r.final) and r.violations == 0 and r.events > 100


def test_asep_walker_rate():
    r = run_asep_for_time(R("1000"), 1.0, seed=3, t_end=20000.0)
    assert r.events / r.process_time == pytest.approx(1.0, rel=0.03)


def test_bond_current_counts_crossings():
    # a lone walker starting at site 0 crosses bond (0, 1) on jumps 1, 5, 9, ...
    r = run_asep_for_time(R("1000"), 1.0, seed=3, t_end=50.0)
    assert r.events > 0 and r.J == (r.events + 3) // 4
    r = run_asep_for_time(R("1000"), 0.0, seed=3, t_end=50.0)
    assert r.events > 0 and r.J == -((r.events + 0) // 4)


def test_asep_full_and_empty():
    assert run_asep_for_time(R("1111"), 0.5, seed=0, t_end=10).events == 0
    assert run_asep_for_time(R("10"), 0.5, seed=0, t_end=0).final == R("10")


def test_reproducible_and_snapshots():
    a = run_for_time(R("110110100"), 0.4, seed=9, t_end=5.0, snapshot_every=1.0)
    b = run_for_time(R("110110100"), 0.4, seed=9, t_end=5.0, snapshot_every=1.0)
    assert a == b
    assert [t for t, _ in a.snapshots] == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    assert a.snapshots[0][1] == a.initial and a.snapshots[-1][1] == a.final
    assert RunRecord.from_dict(json.loads(json.dumps(a.to_dict()))) == a


def test_samplers():
    assert sample_uniform_ring(4, 0, 1) == R("0000")
    assert sample_uniform_ring(4, 4, 1) == R("1111")
    assert particle_count(sample_uniform_ring(30, 11, 2)) == 11
    assert sample_uniform_ring(30, 11, 2) == sample_uniform_ring(30, 11, 2)
    with pytest.raises(InvalidCount):
        sample_uniform_ring(4, 5, 0)
    w = sample_bernoulli_window(100_000, 0.3, 4)
    assert particle_count(w) / w.L == pytest.approx(0.3, abs=0.01)
    for rho in (0.0, 1.0):
        with pytest.raises(DomainError):
            sample_bernoulli_window(10, rho, 0)


def test_spawn_seeds_distinct():
    s = spawn_seeds(0, 100)
    assert len(set(s)) == 100 and s == spawn_seeds(0, 100)


def test_insulated_window():
    w = insulate(np.array([int(c) for c in "0010100"], np.uint8))
    assert w is not None
    rec = insulated_window_experiment(0.3, 2000, 0.5, seed=1)
    assert is_frozen(rec.final) and rec.violations == 0
    assert particle_count(rec.final) == particle_count(rec.initial)
    with pytest.raises(DomainError):
        insulated_window_experiment(0.5, 100, 0.5)


def test_frozen_window_stays_put():
    rec = run_to_frozen(W("0010100"), 0.5, seed=0)
    assert rec.events == 0 and rec.final == W("0010100")


@pytest.mark.parametrize("scheme", SCHEMES)
def test_particle_conservation_and_no_new_double_zero(scheme):
    for s in range(20):
        c = sample_uniform_ring(40, 12 + s, s)
        r = run_for_time(c, (s % 5) / 4, scheme, seed=s, t_end=3.0, snapshot_every=0.5)
        dz = double_zero_bonds(c)
        for _, snap in r.snapshots:
            assert particle_count(snap) == particle_count(c)
            assert double_zero_bonds(snap) <= dz
            dz = double_zero_bonds(snap)
        assert r.violations == 0


def test_kernel_matches_reference_marginal():
    """Compiled engine vs the pure-Python Gillespie step, same law at t = 0.8."""
    from collections import Counter
    c = R("1101100")
    emp, viol = sample_marginal(c, 0.6, ClockScheme.SITE, 0.8, 20000, seed=1)
    ref = Counter()
    rng = make_rng(2)
    for _ in range(20000):
        x, t = c, 0.0
        while True:
            nxt, dt, move = step_gillespie(x, 0.6, rng)
            if t + dt > 0.8:
                break
            x, t = nxt, t + dt
        ref[x] += 1
    keys = set(emp) | set(ref)
    tv = 0.5 * sum(abs(emp[k] - ref[k]) for k in keys) / 20000
    assert viol == 0 and tv < 0.025


def test_stationary_snapshots_spacing():
    rec = stationary_snapshots(R("110110110"), 0.5, burn_in=100, n_snapshots=5, spacing=10)
    assert len(rec.snapshots) == 5 and rec.events == 140
    times = [t for t, _ in rec.snapshots]
    assert times == sorted(times)


@pytest.mark.parametrize("rho", [0.25, 0.4])
def test_frozen_window_double_zero_density(rho):
    # soft probe: in the frozen interior a fixed bond is 00 with probability 1 - 2 rho
    fr = []
    for s in range(8):
        a = np.frombuffer(insulated_window_experiment(rho, 4000, 0.5, seed=s).final.sites, np.uint8)
        a = a[200:-200]
        fr.append(np.mean((a[:-1] == 0) & (a[1:] == 0)))
    assert abs(np.mean(fr) - (1 - 2 * rho)) < 0.02
