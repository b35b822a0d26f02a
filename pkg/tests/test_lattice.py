from fractions import Fraction

import pytest

from fasep.errors import SpecError
from fasep.lattice import (LatticeConfig, Topology, component_count, components, density,
                           double_zero_bonds, is_frozen, is_no_adjacent_holes, particle_count)

R = LatticeConfig.ring
W = LatticeConfig.window


def test_parse_and_str_round_trip():
    c = LatticeConfig.parse("window:0110")
    assert c.topology is Topology.WINDOW and c.bits == "0110"
    assert LatticeConfig.parse(str(c)) == c
    assert repr(R("10")) == "LatticeConfig('ring:10')"


@pytest.mark.parametrize("text", ["0110", "ring:012", "ring:", "torus:01"])
def test_parse_rejects(text):
    with pytest.raises(SpecError):
        LatticeConfig.parse(text)


@pytest.mark.parametrize("bits,n", [("10100", 2), ("00000", 0), ("11111", 5)])
def test_particle_count(bits, n):
    assert particle_count(R(bits)) == n


@pytest.mark.parametrize("bits,want", [("10100", True), ("11000", False), ("10101", False)])
def test_is_frozen(bits, want):
    assert is_frozen(R(bits)) is want


def test_frozen_window_ignores_wrap():
    assert is_frozen(W("10101"))


@pytest.mark.parametrize("bits,want", [("110110", True), ("110011", False), ("01101", True)])
def test_no_adjacent_holes(bits, want):
    assert is_no_adjacent_holes(R(bits)) is want


@pytest.mark.parametrize("bits,n", [("0110010100110000", 3), ("00100", 1), ("10101", 1), ("0110010100110100", 3)])
def test_component_count(bits, n):
    assert component_count(R(bits)) == n


def test_components_wrap():
    assert components(R("1001101")) == [(3, 0)]
    assert components(R("1100110")) == [(4, 1)]
    assert components(R("11001100")) == [(0, 1), (4, 5)]
    assert components(W("1100101")) == [(0, 1), (4, 6)]
    assert components(R("0000")) == []


@pytest.mark.parametrize("bits,rho", [("10100", Fraction(2, 5)), ("11111", 1), ("1010", Fraction(1, 2))])
def test_density(bits, rho):
    assert density(R(bits)) == rho


def test_double_zero_bonds_and_rotation():
    c = R("10011")
    assert double_zero_bonds(c) == {1}
    assert c.rotate(1).bits == "11001"
    assert len(set(R("1010").rotations())) == 2
    assert W("0110")[-1] == 0 and R("0110")[-1] == 0 and R("0111")[-1] == 1
