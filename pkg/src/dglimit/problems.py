"""Scalar conservation laws and the benchmark catalog.

Every flux routine takes the state ``u``, a unit normal ``n`` (last axis of
length 2) and the physical point ``x`` (last axis of length 2); all inputs
broadcast.  Laws whose flux does not depend on position simply ignore
``x``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class EntropyPair:
    """Convex entropy ``eta`` with entropy variable ``v`` and entropy flux ``q``."""

    eta: Callable
    v: Callable          # eta'
    dv: Callable         # eta''
    q: Callable          # returns (qx, qy)
    flux: Callable       # the law's f(u), needed for the potential

    def potential(self, u):
        """psi(u) = v(u) f(u) - q(u), stacked on the last axis."""
        fx, fy = self.flux(u)
        qx, qy = self.q(u)
        vu = self.v(u)
        return np.stack([vu * fx - qx, vu * fy - qy], axis=-1)


def _dot(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]


class ConservationLaw:
    """Nonlinear law u_t + div f(u) = 0 with a sampled wave-speed bound."""

    linear = False
    position_dependent = False
    n_samples = 16
    safety = 1.1

    def __init__(self, flux: Callable, jacobian: Callable, entropy: Optional[EntropyPair] = None,
                 name: str = "generic"):
        self._flux = flux
        self._jac = jacobian
        self.entropy = entropy
        self.name = name

    def flux(self, u, x=None):
        fx, fy = self._flux(np.asarray(u, dtype=float))
        return np.stack(np.broadcast_arrays(fx, fy), axis=-1)

    def jacobian(self, u, x=None):
        ax, ay = self._jac(np.asarray(u, dtype=float))
        return np.stack(np.broadcast_arrays(ax, ay), axis=-1)

    def normal_flux(self, u, n, x=None):
        fx, fy = self._flux(np.asarray(u, dtype=float))
        n = np.asarray(n, dtype=float)
        return fx * n[..., 0] + fy * n[..., 1]

    def normal_speed(self, u, n, x=None):
        """f'(u) . n"""
        ax, ay = self._jac(np.asarray(u, dtype=float))
        n = np.asarray(n, dtype=float)
        return ax * n[..., 0] + ay * n[..., 1]

    def max_wave_speed(self, uL, uR, n, x=None):
        """Upper bound of |f'(w) . n| for w between uL and uR."""
        uL, uR = np.asarray(uL, dtype=float), np.asarray(uR, dtype=float)
        w = np.linspace(0.0, 1.0, self.n_samples)
        shape = np.broadcast_shapes(uL.shape, uR.shape)
        states = uL[..., None] * (1 - w) + uR[..., None] * w
        n = np.asarray(n, dtype=float)[..., None, :]
        lam = np.abs(self.normal_speed(states, n)).max(axis=-1)
        return self.safety * np.broadcast_to(lam, shape)


class KPP(ConservationLaw):
    """f(u) = (sin u, cos u), with the square entropy u^2/2."""

    def __init__(self, speed: str = "global"):
        if speed not in ("global", "analytic"):
            raise ValueError(f"unknown KPP wave speed strategy {speed!r}")
        self.speed = speed
        flux = lambda u: (np.sin(u), np.cos(u))
        entropy = EntropyPair(
            eta=lambda u: 0.5 * u * u,
            v=lambda u: u,
            dv=lambda u: np.ones_like(u),
            q=lambda u: (u * np.sin(u) + np.cos(u), u * np.cos(u) - np.sin(u)),
            flux=flux,
        )
        super().__init__(flux, lambda u: (np.cos(u), -np.sin(u)), entropy, name="kpp")

    def max_wave_speed(self, uL, uR, n, x=None):
        uL, uR = np.asarray(uL, dtype=float), np.asarray(uR, dtype=float)
        n = np.asarray(n, dtype=float)
        shape = np.broadcast_shapes(uL.shape, uR.shape, n.shape[:-1])
        if self.speed == "global":
            return np.ones(shape)
        # f'(u).n = cos(u + phi); the maximum of |cos| over [a, b] is 1 if the
        # interval contains a multiple of pi
        phi = np.arctan2(n[..., 1], n[..., 0])
        a = np.minimum(uL, uR) + phi
        b = np.maximum(uL, uR) + phi
        hits = np.floor(b / np.pi) >= np.ceil(a / np.pi)
        ends = np.maximum(np.abs(np.cos(a)), np.abs(np.cos(b)))
        return np.broadcast_to(np.where(hits, 1.0, ends), shape).copy()


class LinearAdvection(ConservationLaw):
    """f(u, x) = v(x) u for a (possibly variable) velocity field."""

    linear = True
    position_dependent = True

    def __init__(self, velocity, name: str = "advection"):
        if callable(velocity):
            self.velocity = velocity
            self.constant_velocity = None
        else:
            vel = np.asarray(velocity, dtype=float)
            self.constant_velocity = vel
            self.velocity = lambda x: np.broadcast_to(vel, np.shape(x)[:-1] + (2,))
        self.entropy = None
        self.name = name

    def _v(self, x):
        if x is None:
            if self.constant_velocity is None:
                raise ValueError("variable velocity needs positions")
            return self.constant_velocity
        return np.asarray(self.velocity(np.asarray(x, dtype=float)))

    def flux(self, u, x=None):
        return self._v(x) * np.asarray(u, dtype=float)[..., None]

    def jacobian(self, u, x=None):
        v = self._v(x)
        return np.broadcast_to(v, np.broadcast_shapes(np.shape(u) + (2,), v.shape)).copy()

    def normal_flux(self, u, n, x=None):
        return _dot(self._v(x), np.asarray(n, dtype=float)) * np.asarray(u, dtype=float)

    def normal_speed(self, u, n, x=None):
        vn = _dot(self._v(x), np.asarray(n, dtype=float))
        return np.broadcast_to(vn, np.broadcast_shapes(np.shape(u), np.shape(vn))).copy()

    def max_wave_speed(self, uL, uR, n, x=None):
        return np.abs(self.normal_speed(np.broadcast_arrays(uL, uR)[0], n, x))


def kpp_entropy_potential(u):
    """Closed form of the KPP square-entropy potential, (-cos u, sin u)."""
    u = np.asarray(u, dtype=float)
    return np.stack([-np.cos(u), np.sin(u)], axis=-1)


def entropy_potential(pair: EntropyPair, u):
    return pair.potential(np.asarray(u, dtype=float))


def flux_eval(law: ConservationLaw, u, x=None):
    return law.flux(u, x)


def max_wave_speed(law: ConservationLaw, uL, uR, n, x=None):
    return law.max_wave_speed(uL, uR, n, x)


# ----------------------------------------------------------------------------
# test cases


@dataclass(frozen=True)
class TestCase:
    name: str
    bounds: tuple
    law: ConservationLaw
    initial: Callable            # u0(x, y)
    inflow: Callable             # g(x, y), time independent in every case
    final_time: Optional[float]  # None for steady problems
    exact: Optional[Callable] = None
    dt: Optional[float] = 1e-3
    stencil: str = "isotropic"
    aliases: tuple = ()

    __test__ = False  # not a pytest class

    @property
    def steady(self) -> bool:
        return self.final_time is None

    def cells(self, nx):
        """Cell counts for spacing (x1 - x0)/nx, keeping square cells."""
        x0, x1, y0, y1 = self.bounds
        h = (x1 - x0) / nx
        return nx, int(round((y1 - y0) / h))


def _zero(x, y):
    return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))


def anisotropic_initial(x, y):
    w = np.where((x >= 0.2) & (x <= 0.4), 2.0, 1.0)
    return w * 4.0 * y * (1.0 - y)


def leveque_initial(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    r_hump = np.hypot(x - 0.25, y - 0.5)
    r_cone = np.hypot(x - 0.5, y - 0.25)
    r_cyl = np.hypot(x - 0.5, y - 0.75)
    u = np.zeros(x.shape)
    cyl = (r_cyl <= 0.15) & ((np.abs(x - 0.5) >= 0.025) | (y >= 0.85))
    u = np.where(cyl, 1.0, u)
    u = np.where(r_cone <= 0.15, 1.0 - r_cone / 0.15, u)
    u = np.where(r_hump <= 0.15, 0.25 + 0.25 * np.cos(np.pi * r_hump / 0.15), u)
    return u


def circular_profile(x, y):
    r = np.hypot(x, y)
    bump = np.cos(10.0 * np.pi * (r - 0.7) / 3.0) ** 2
    u = np.where((r >= 0.55) & (r <= 0.85), bump, 0.0)
    return np.where((r >= 0.15) & (r <= 0.45), 1.0, u)


def circular_smooth(x, y):
    r = np.hypot(x, y)
    return np.exp(-100.0 * (r - 0.7) ** 2)


def kpp_initial(x, y):
    return np.where(np.hypot(x, y) <= 1.0, 14.0 * np.pi / 4.0, np.pi / 4.0)


def rotation_velocity(x):
    return np.stack([0.5 - x[..., 1], x[..., 0] - 0.5], axis=-1)


def circular_velocity(x):
    return np.stack([x[..., 1], -x[..., 0]], axis=-1)


def catalog():
    unit = (0.0, 1.0, 0.0, 1.0)
    return [
        TestCase("anisotropic-advection", unit, LinearAdvection((0.0, 1.0)),
                 anisotropic_initial, _zero, 0.4, stencil="layered-horizontal",
                 aliases=("anis", "aa")),
        TestCase("solid-body-rotation", unit, LinearAdvection(rotation_velocity),
                 leveque_initial, _zero, 2.0 * np.pi, exact=leveque_initial, aliases=("sbr",)),
        TestCase("steady-circular", unit, LinearAdvection(circular_velocity),
                 _zero, circular_profile, None, exact=circular_profile, dt=None,
                 aliases=("circ", "cc")),
        TestCase("steady-circular-smooth", unit, LinearAdvection(circular_velocity),
                 _zero, circular_smooth, None, exact=circular_smooth, dt=None,
                 aliases=("circ-smooth", "ccs")),
        TestCase("kpp", (-2.0, 2.0, -2.5, 1.5), KPP(), kpp_initial,
                 lambda x, y: np.full(np.broadcast_shapes(np.shape(x), np.shape(y)), np.pi / 4.0),
                 1.0),
    ]


def get_case(name: str) -> TestCase:
    for case in catalog():
        if name == case.name or name in case.aliases:
            return case
    names = ", ".join(c.name for c in catalog())
    raise KeyError(f"unknown test case {name!r}; choose from {names}")
