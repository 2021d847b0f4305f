"""Capacitive body-channel model.

The transmitter drives the animal body against its own ground plane; that
ground plane closes the loop to earth through a small return capacitance.
The body reaches the floating conductive floor through skin, bulk tissue and
the feet, and the floor is loaded by its capacitance to earth plus the
receiver probe (R_L in parallel with C_L).

Two evaluations are offered: the quasistatic capacitive divider and an exact
complex solve of the full two-node network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import epsilon_0


class DegenerateDividerError(ValueError):
    """All divider capacitances are zero."""


class SingularNetworkError(ValueError):
    """Nodal matrix is not invertible at the requested frequency."""


@dataclass(frozen=True)
class FootGeometry:
    """Foot-to-floor coupling.

    ``area`` is the effective plate area of the feet (m^2), ``distance`` the
    gap above the floor (m, 0 means resting on it) and ``contact_resistance``
    the resistive contact when the gap is zero.
    """

    area: float = 4e-4
    distance: float = 0.0
    contact_resistance: float = 10e3

    def __post_init__(self):
        if not self.area > 0:
            raise ValueError(f"foot area must be > 0, got {self.area}")
        if not self.distance >= 0:
            raise ValueError(f"foot distance must be >= 0, got {self.distance}")
        if not self.contact_resistance >= 0:
            raise ValueError(
                f"foot contact_resistance must be >= 0, got {self.contact_resistance}"
            )


@dataclass(frozen=True)
class ChannelParams:
    """Component values of the body-channel circuit, SI units.

    Skin is a resistor in parallel with a capacitor; bulk body is a resistor.
    ``r_skin = 0`` or ``r_body = 0`` short the corresponding element.
    The defaults are placeholders (no published component values exist for
    this setup); override them from the scenario config.
    """

    c_g_tx: float = 2e-12
    c_csg: float = 50e-12
    c_l: float = 10e-12
    r_l: float = 1e6
    r_skin: float = 100e3
    c_skin: float = 1e-9
    r_body: float = 1e3
    foot: FootGeometry = field(default_factory=FootGeometry)
    f_carrier: float = 500e3

    def __post_init__(self):
        for name in ("c_g_tx", "c_csg", "c_l", "c_skin", "r_skin", "r_body"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        if not self.r_l > 0:
            raise ValueError(f"r_l must be > 0, got {self.r_l}")
        if not self.f_carrier > 0:
            raise ValueError(f"f_carrier must be > 0, got {self.f_carrier}")

    def with_foot_distance(self, distance: float) -> "ChannelParams":
        return replace(self, foot=replace(self.foot, distance=distance))

    def z_skin(self, f: float) -> complex:
        if self.r_skin == 0:
            return 0j
        return 1 / (1 / self.r_skin + 2j * math.pi * f * self.c_skin)

    def z_body(self, f: float) -> complex:
        return complex(self.r_body)

    def z_foot(self, f: float) -> complex:
        return foot_impedance(self.foot, f)

    def z_series(self, f: float) -> complex:
        return self.z_skin(f) + self.z_body(f) + self.z_foot(f)


def simplified_gain(params: ChannelParams) -> float:
    """Quasistatic capacitive divider ``C_G_TX / (C_G_TX + C_CSG + C_L)``."""
    total = params.c_g_tx + params.c_csg + params.c_l
    if total <= 0:
        raise DegenerateDividerError("c_g_tx + c_csg + c_l must be > 0")
    return params.c_g_tx / total


def foot_capacitance(geom: FootGeometry) -> float:
    """Parallel-plate capacitance between the raised feet and the floor."""
    if geom.distance <= 0:
        raise ValueError("foot_capacitance needs distance > 0; contact is resistive")
    return epsilon_0 * geom.area / geom.distance


def foot_impedance(geom: FootGeometry, f: float) -> complex:
    """Contact resistance on the floor, a pure capacitor once lifted."""
    if not f > 0:
        raise ValueError(f"frequency must be > 0, got {f}")
    if geom.distance == 0:
        return complex(geom.contact_resistance)
    if geom.distance < 0:
        raise ValueError("foot distance must be >= 0")
    # d / (j w eps0 A) directly, so a vanishing gap does not overflow the capacitance
    return -1j * geom.distance / (2 * math.pi * f * epsilon_0 * geom.area)


def full_transfer(params: ChannelParams, f: float | None = None) -> complex:
    """Complex ``V_o / V_in`` of the full network at frequency ``f``.

    Unknowns are the transmitter ground node and the floor node; the source
    sits between transmitter ground and the body, so the body node is folded
    into a supernode with the transmitter ground.
    """
    f = params.f_carrier if f is None else f
    if not f > 0:
        raise ValueError(f"frequency must be > 0, got {f}")
    w = 2 * math.pi * f
    y_ret = 1j * w * params.c_g_tx
    y_floor = 1j * w * (params.c_csg + params.c_l) + 1 / params.r_l
    z_s = params.z_series(f)
    y_s = math.inf if z_s == 0 else 1 / z_s

    if math.isinf(abs(y_s)):
        # series path shorted: body and floor are one node
        if y_ret + y_floor == 0:
            raise SingularNetworkError(f"floor node floats at f={f}")
        return complex(y_ret / (y_ret + y_floor))

    # KCL: supernode {tx ground, body}, floor node; v_in on the right side
    #   [y_ret + y_s, -y_s        ] [v_gnd  ]   [-y_s]
    #   [-y_s,         y_s + y_floor] [v_floor] = [ y_s]
    # Cramer's rule with the y_s^2 terms cancelled by hand, which keeps the
    # solve accurate when the series path is a near short.
    terms = (y_ret * y_s, y_ret * y_floor, y_s * y_floor)
    det = sum(terms)
    if abs(det) <= 1e-14 * sum(abs(t) for t in terms):
        raise SingularNetworkError(f"nodal matrix singular at f={f}")
    v_floor = y_ret * y_s / det
    return complex(v_floor)


def gain_vs_distance(params: ChannelParams, distances, f: float | None = None) -> np.ndarray:
    """|full_transfer| for each foot distance."""
    return np.array([abs(full_transfer(params.with_foot_distance(d), f)) for d in distances])
