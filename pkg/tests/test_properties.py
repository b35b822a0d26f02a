"""Property tests for the structural invariants."""

import numpy as np
from hypothesis import given, settings, strategies as st

from fasep.coupling import SubstitutionMap, apply_substitution, invert_substitution, true_particles
from fasep.dynamics import ClockScheme, run_for_time
from fasep.lattice import (LatticeConfig, Topology, double_zero_bonds, is_frozen,
                           is_no_adjacent_holes, particle_count)
from fasep.stats import tv_distance
from fasep.tasep import final_config_tasep, gaps_from_records, record_set

HD, LD = SubstitutionMap.HIGH_DENSITY, SubstitutionMap.LOW_DENSITY

bits = st.lists(st.integers(0, 1), min_size=1, max_size=40)
rings = bits.map(LatticeConfig.ring)
windows = bits.map(LatticeConfig.window)


@given(rings)
def test_high_density_ring_round_trip(z):
    img, gam = apply_substitution(HD, z)
    n_hat = particle_count(z)
    assert img.L == 2 * z.L - n_hat and particle_count(img) == z.L
    assert is_no_adjacent_holes(img)
    assert invert_substitution(HD, img, 0) == z
    for i in range(z.L - 1):
        assert gam(i + 1) - gam(i) == 2 - z[i]
    assert [gam(i) for i in range(z.L) if z[i]] == true_particles(img)


@given(windows, st.integers(-5, 5))
def test_window_round_trip(z, origin):
    for smap in (HD, LD):
        img, gam = apply_substitution(smap, z, origin=origin)
        anchor = gam(origin if not origin <= 1 < origin + z.L else 1) - gam.image_origin
        assert invert_substitution(smap, img, anchor) == z
    assert "11" not in apply_substitution(LD, z)[0].bits


@given(rings)
def test_true_particles_spacing(z):
    n = particle_count(z)
    if n < 2 or n == z.L:
        return
    img, gam = apply_substitution(HD, z)
    ks = [i for i in range(z.L) if z[i]]
    for a, b in zip(ks, ks[1:]):
        assert gam(b) - gam(a) == 2 * (b - a) - 1


@given(st.integers(5, 30).flatmap(lambda L: st.tuples(st.just(L), st.integers(0, (L - 1) // 2),
                                                       st.integers(0, 2 ** 32))))
def test_records_parity_and_final(args):
    L, N, seed = args
    arr = np.zeros(L, np.uint8)
    arr[np.random.default_rng(seed).choice(L, N, replace=False)] = 1
    c = LatticeConfig.from_array(arr)
    qs = record_set(c)
    assert len(qs) == L - 2 * N
    assert sum(2 * n + 1 for n in gaps_from_records(qs, L)) == L
    f = final_config_tasep(c)
    assert is_frozen(f) and particle_count(f) == N and record_set(f) == qs


@settings(max_examples=40, deadline=None)
@given(rings, st.sampled_from([0.0, 0.3, 0.5, 1.0]), st.sampled_from(list(ClockScheme)),
       st.integers(0, 2 ** 32))
def test_dynamics_invariants(c, p, scheme, seed):
    r = run_for_time(c, p, scheme, seed, 2.0, snapshot_every=0.5)
    assert r.violations == 0
    prev = double_zero_bonds(c)
    for _, s in r.snapshots:
        assert particle_count(s) == particle_count(c)
        dz = double_zero_bonds(s)
        assert dz <= prev
        prev = dz
    if is_no_adjacent_holes(c):
        assert is_no_adjacent_holes(r.final)


dists = st.dictionaries(st.sampled_from("abcdef"), st.integers(1, 20), min_size=1)


@given(dists, dists, dists)
def test_tv_is_a_metric(a, b, c):
    assert tv_distance(a, a) == 0
    assert abs(tv_distance(a, b) - tv_distance(b, a)) < 1e-12
    assert 0 <= tv_distance(a, b) <= 1
    assert tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-12
