"""Body-channel circuit: capacitive divider, foot coupling and the full network."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abcsim.circuit import (
    ChannelParams,
    DegenerateDividerError,
    FootGeometry,
    foot_capacitance,
    foot_impedance,
    full_transfer,
    gain_vs_distance,
    simplified_gain,
)

EPS0 = 8.8541878128e-12  # F/m, typed in rather than imported so the oracle is independent


def loop_divider(p: ChannelParams, f: float) -> complex:
    """Hand-derived oracle: the network is one series loop, earth -> return
    capacitor -> source -> body path -> floor shunt -> earth, so the floor
    voltage is the shunt's share of the loop impedance."""
    w = 2 * math.pi * f
    z_ret = 1 / (1j * w * p.c_g_tx)
    z_skin = 0 if p.r_skin == 0 else 1 / (1 / p.r_skin + 1j * w * p.c_skin)
    if p.foot.distance == 0:
        z_foot = p.foot.contact_resistance
    else:
        z_foot = 1 / (1j * w * EPS0 * p.foot.area / p.foot.distance)
    z_path = z_skin + p.r_body + z_foot
    z_shunt = 1 / (1j * w * (p.c_csg + p.c_l) + 1 / p.r_l)
    return z_shunt / (z_ret + z_path + z_shunt)


class TestSimplifiedGain:
    def test_no_load_is_unity(self):
        assert simplified_gain(ChannelParams(c_g_tx=1e-12, c_csg=0, c_l=0)) == 1.0

    def test_symmetric_divider(self):
        assert simplified_gain(ChannelParams(c_g_tx=1e-12, c_csg=1e-12, c_l=0)) == 0.5

    def test_one_percent(self):
        g = simplified_gain(ChannelParams(c_g_tx=1e-12, c_csg=98e-12, c_l=1e-12))
        assert g == pytest.approx(0.01, rel=1e-12)

    def test_all_zero_raises(self):
        with pytest.raises(DegenerateDividerError):
            simplified_gain(ChannelParams(c_g_tx=0, c_csg=0, c_l=0))

    @given(st.floats(1e-13, 1e-10), st.floats(1e-13, 1e-9), st.floats(1e-13, 1e-9),
           st.floats(1.01, 10))
    def test_monotone(self, cg, ccsg, cl, k):
        base = simplified_gain(ChannelParams(c_g_tx=cg, c_csg=ccsg, c_l=cl))
        assert simplified_gain(ChannelParams(c_g_tx=cg * k, c_csg=ccsg, c_l=cl)) > base
        assert simplified_gain(ChannelParams(c_g_tx=cg, c_csg=ccsg * k, c_l=cl)) < base
        assert simplified_gain(ChannelParams(c_g_tx=cg, c_csg=ccsg, c_l=cl * k)) < base


class TestFootCoupling:
    def test_plate_capacitance(self):
        c = foot_capacitance(FootGeometry(area=4e-4, distance=1e-3))
        assert c == pytest.approx(EPS0 * 4e-4 / 1e-3, rel=1e-9)
        assert c == pytest.approx(3.54e-12, rel=2e-3)

    def test_halving_distance_doubles(self):
        c1 = foot_capacitance(FootGeometry(distance=2e-3))
        c2 = foot_capacitance(FootGeometry(distance=1e-3))
        assert c2 == pytest.approx(2 * c1, rel=1e-12)

    def test_far_limit(self):
        assert foot_capacitance(FootGeometry(distance=1e6)) < 1e-20

    def test_contact_is_required_distance(self):
        with pytest.raises(ValueError):
            foot_capacitance(FootGeometry(distance=0))

    def test_contact_impedance_real(self):
        z = foot_impedance(FootGeometry(distance=0, contact_resistance=10e3), 500e3)
        assert z == 10e3 + 0j

    def test_lifted_impedance_capacitive(self):
        g = FootGeometry(area=4e-4, distance=1e-3)
        z1, z2 = foot_impedance(g, 500e3), foot_impedance(g, 1e6)
        assert z1.real == 0 and z1.imag < 0
        assert abs(z2) < abs(z1)
        assert abs(z1) == pytest.approx(1 / (2 * math.pi * 5e5 * EPS0 * 4e-4 / 1e-3), rel=1e-9)
        assert abs(z1) == pytest.approx(89.9e3, rel=1e-3)

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            FootGeometry(distance=-1e-3)


class TestFullTransfer:
    def test_shorted_series_matches_divider(self):
        p = ChannelParams(c_g_tx=2e-12, c_csg=50e-12, c_l=10e-12, r_l=1e30, r_skin=0, r_body=0,
                          foot=FootGeometry(distance=0, contact_resistance=0))
        assert abs(full_transfer(p)) == pytest.approx(simplified_gain(p), rel=1e-12)

    def test_dc_limit(self):
        p = ChannelParams(foot=FootGeometry(distance=1e-3))
        assert abs(full_transfer(p, f=1e-3)) < 1e-6
        assert abs(full_transfer(p, f=1.0)) < abs(full_transfer(p, f=1e3))

    def test_fixed_point_against_oracle(self):
        """The reference parameter set with a 10 kOhm resting foot."""
        p = ChannelParams(c_g_tx=2e-12, c_csg=50e-12, c_l=10e-12, r_l=1e6, r_skin=100e3,
                          c_skin=1e-9, r_body=1e3,
                          foot=FootGeometry(distance=0, contact_resistance=10e3))
        h = full_transfer(p, 500e3)
        ref = loop_divider(p, 500e3)
        assert abs(h - ref) <= 1e-12 * abs(ref)
        assert abs(h) == pytest.approx(0.0321, abs=5e-4)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(0.1e-12, 20e-12), st.floats(1e-12, 500e-12), st.floats(0.1e-12, 100e-12),
        st.floats(1e3, 1e9), st.floats(0, 1e6), st.floats(1e-12, 1e-7), st.floats(0, 1e5),
        st.floats(0, 10e-3), st.floats(10e3, 5e6),
    )
    def test_matches_oracle_and_passive(self, cg, ccsg, cl, rl, rs, cs, rb, d, f):
        p = ChannelParams(c_g_tx=cg, c_csg=ccsg, c_l=cl, r_l=rl, r_skin=rs, c_skin=cs, r_body=rb,
                          foot=FootGeometry(distance=d))
        h = full_transfer(p, f)
        ref = loop_divider(p, f)
        assert abs(h - ref) <= 1e-9 * abs(ref) + 1e-15
        assert abs(h) <= 1 + 1e-12

    def test_gain_falls_with_distance(self):
        g = gain_vs_distance(ChannelParams(), [0.0, 0.5e-3, 1e-3, 2e-3, 4e-3, 8e-3])
        assert np.all(np.diff(g) < 0)

    def test_bad_frequency(self):
        with pytest.raises(ValueError):
            full_transfer(ChannelParams(), f=0)

    def test_negative_component_rejected(self):
        with pytest.raises(ValueError, match="c_csg"):
            ChannelParams(c_csg=-1e-12)


class TestNearShortFoot:
    def test_vanishing_gap_is_not_singular(self):
        # a huge foot capacitance must behave like resting contact, not a singular matrix
        p = ChannelParams(r_skin=0, r_body=0, foot=FootGeometry(distance=1.175494351e-38))
        h = full_transfer(p, 10e3)
        assert abs(h - loop_divider(p, 10e3)) <= 1e-9 * abs(h)
