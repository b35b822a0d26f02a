from fractions import Fraction

import numpy as np
import pytest

from fasep.dynamics import Model
from fasep.errors import NotAbsorbing, Reducible, TooLarge
from fasep.exact import (ExactDistribution, absorption_distribution, build_generator,
                         enumerate_states, marginal_at_time, recurrent_classes,
                         stationary_distribution)
from fasep.lattice import LatticeConfig, is_frozen, is_no_adjacent_holes
from fasep.tasep import ring_final_measure

R = LatticeConfig.ring


@pytest.mark.parametrize("L,N,n", [(4, 2, 6), (5, 2, 10), (8, 3, 56)])
def test_enumerate_sizes(L, N, n):
    sp = enumerate_states(L, N)
    assert len(sp) == n and len(set(sp.states)) == n
    assert [c.bits for c in sp] == sorted(c.bits for c in sp)
    assert all(sp.index[c] == k for k, c in enumerate(sp))


def test_enumerate_cap():
    with pytest.raises(TooLarge):
        enumerate_states(17, 3)


def test_generator_rows():
    sp = enumerate_states(4, 2)
    g = build_generator(sp, Fraction(7, 10))
    row = g.rows[sp.index[R("1100")]]
    assert row == {sp.index[R("1010")]: Fraction(7, 10), sp.index[R("0101")]: Fraction(3, 10)}
    assert g.rows[sp.index[R("1010")]] == {}
    ga = build_generator(sp, 1, Model.ASEP)
    assert ga.rows[sp.index[R("1100")]] == {sp.index[R("1010")]: 1}
    for gen in (g, ga, build_generator(sp, "1/3", Model.ASEP)):
        for s in range(len(sp)):
            assert all(r > 0 for r in gen.rows[s].values())
            assert gen.diagonal(s) + sum(gen.rows[s].values()) == 0


def test_absorption_examples():
    sp = enumerate_states(5, 2)
    for p in ("0", "2/7", "1"):
        d = absorption_distribution(ExactDistribution.uniform(sp), build_generator(sp, p))
        assert d.by_config() == {r: Fraction(1, 5) for r in R("10100").rotations()}
    sp = enumerate_states(4, 2)
    d = absorption_distribution(ExactDistribution.uniform(sp), build_generator(sp, "3/5"))
    assert d.by_config() == {R("1010"): Fraction(1, 2), R("0101"): Fraction(1, 2)}


def test_absorption_p_independent_and_formula():
    sp = enumerate_states(8, 3)
    init = ExactDistribution.uniform(sp)
    a = absorption_distribution(init, build_generator(sp, "1/5"))
    b = absorption_distribution(init, build_generator(sp, "9/10"))
    assert a == b and a.total() == 1
    assert all(is_frozen(c) for c in a.support())
    assert a.by_config() == ring_final_measure(8, 3)


def test_absorption_from_point_mass():
    sp = enumerate_states(6, 2)
    d = absorption_distribution(ExactDistribution.point(sp, R("110000")), build_generator(sp, "1/4"))
    assert d.by_config() == {R("101000"): Fraction(1, 4), R("010001"): Fraction(3, 4)}


def test_not_absorbing():
    sp = enumerate_states(6, 4)
    with pytest.raises(NotAbsorbing):
        absorption_distribution(ExactDistribution.uniform(sp), build_generator(sp, "1/2"))


def test_stationary_examples():
    sp = enumerate_states(6, 4)
    pi = stationary_distribution(build_generator(sp, "2/3"))
    G = [c for c in sp if is_no_adjacent_holes(c)]
    assert len(G) == 9 and pi.by_config() == {c: Fraction(1, 9) for c in G}
    sp = enumerate_states(5, 3)
    pi = stationary_distribution(build_generator(sp, "1/3"))
    assert pi.by_config() == {c: Fraction(1, 5) for c in R("10101").rotations()}
    sp = enumerate_states(5, 2)
    pi = stationary_distribution(build_generator(sp, "1/3", Model.ASEP))
    assert pi.by_config() == {c: Fraction(1, 10) for c in sp}


def test_half_filling_recurrent_classes():
    sp = enumerate_states(8, 4)
    with pytest.raises(Reducible) as e:
        stationary_distribution(build_generator(sp, "1/2"))
    closed = {tuple(sp.states[k].bits for k in cls) for cls in e.value.classes}
    assert closed == {("01010101",), ("10101010",)}


def test_reducible_low_density():
    sp = enumerate_states(7, 2)
    g = build_generator(sp, "1/2")
    assert len(recurrent_classes(g)) == 14  # every frozen state
    with pytest.raises(Reducible):
        stationary_distribution(g)


def test_marginal_at_time():
    sp = enumerate_states(6, 4)
    g = build_generator(sp, "1/3")
    init = ExactDistribution.point(sp, R("111100"))
    assert np.array_equal(marginal_at_time(init, g, 0.0), init.dense())
    v = marginal_at_time(init, g, 1.3)
    assert v.sum() == pytest.approx(1.0, abs=1e-10) and v.min() >= 0
    far = marginal_at_time(init, g, 300.0)
    assert np.abs(far - stationary_distribution(g).dense()).max() < 1e-8
    # the pattern 1100 never appears in the stationary support
    pi = stationary_distribution(g)
    assert not any("1100" in (c.bits + c.bits[:3]) for c in pi.support())


def test_marginal_against_dense_expm():
    from scipy.linalg import expm
    sp = enumerate_states(7, 3)
    g = build_generator(sp, "0.35")
    init = ExactDistribution.uniform(sp)
    dense = init.dense() @ expm(0.9 * g.to_dense_float())
    assert np.abs(marginal_at_time(init, g, 0.9) - dense).max() < 1e-10


def test_serialization():
    sp = enumerate_states(4, 2)
    d = absorption_distribution(ExactDistribution.uniform(sp), build_generator(sp, "1/2"))
    assert d.to_csv().splitlines() == ["config,numerator,denominator", "ring:0101,1,2", "ring:1010,1,2"]
    assert '"ring:0101": "1/2"' in d.to_json()
