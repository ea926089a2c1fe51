"""The cap-volume objective on the unit sphere and its tangential gradient.

For an outer body K and a strictly convex inner body L, the objective at a
unit direction z is the volume of K beyond the supporting hyperplane of L with
normal z.  Its Riemannian gradient on the sphere is
``measure * P_{z_perp}[centroid - touch_point]``, so criticality is exactly
"the section centroid is the touching point of L".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import BodyError, contains_body
from .sections import Hyperplane, SectionData, cap_volume, hyperplane_chart, section

__all__ = [
    "RejectedInstanceError",
    "DegenerateSectionError",
    "FunctionalEval",
    "default_margin",
    "measure_floor",
    "validate_instance",
    "evaluate",
    "fd_tangential_gradient",
    "OffsetFunctional",
]


class RejectedInstanceError(ValueError):
    """The (K, L) pair violates the preconditions (containment margin, strict convexity)."""


class DegenerateSectionError(RuntimeError):
    """The supporting hyperplane produced a section with measure below the floor."""

    def __init__(self, direction, measure):
        super().__init__(f"degenerate section at direction {direction} (measure {measure:g})")
        self.direction = np.asarray(direction, dtype=float)
        self.measure = measure


def default_margin(K):
    """Containment margin keeping the objective strictly inside (0, vol K)."""
    return 1e-6 * K.inradius_lower_bound()


def measure_floor(K):
    """Sections below this (n-1)-measure are treated as degenerate."""
    return 1e-12 * K.volume() ** ((K.dim - 1) / K.dim)


def validate_instance(K, L, margin=None):
    """Raise RejectedInstanceError unless L is strictly convex and L + margin <= K."""
    if K.dim != L.dim:
        raise RejectedInstanceError("K and L must have the same dimension")
    if not L.strictly_convex:
        raise RejectedInstanceError(
            f"inner body must be strictly convex, got {type(L).__name__}"
        )
    m = default_margin(K) if margin is None else margin
    if not contains_body(K, L, m):
        raise RejectedInstanceError("containment margin violated: need L + margin <= K")


@dataclass
class FunctionalEval:
    """Objective value, section data and tangential gradient at one direction."""

    direction: np.ndarray
    f_value: float | None
    touch_point: np.ndarray
    section: SectionData
    tangential_gradient: np.ndarray
    residual: float


def _unit(z):
    z = np.asarray(z, dtype=float)
    nrm = np.linalg.norm(z)
    if nrm == 0:
        raise BodyError("direction must be nonzero")
    return z / nrm


def _touch_and_section(K, L, z, margin=None):
    """Supporting offset, touching point and section for direction z; cheap core of evaluate."""
    t = L.support(z)
    m = default_margin(K) if margin is None else margin
    if K.support(z) - t < m:
        raise RejectedInstanceError(
            f"containment margin violated along direction {z}: "
            f"support gap {K.support(z) - t:g} < {m:g}"
        )
    sec = section(K, Hyperplane(z, t))
    if sec.degenerate or sec.measure <= measure_floor(K):
        raise DegenerateSectionError(z, sec.measure)
    return t, L.touch_point(z), sec


def evaluate(K, L, z, margin=None, with_value=True):
    """Evaluate the objective, section and tangential gradient at unit direction z.

    ``with_value=False`` skips the cap-volume computation (the gradient and
    residual only need the section).
    """
    z = _unit(z)
    t, touch, sec = _touch_and_section(K, L, z, margin)
    diff = sec.centroid - touch
    diff = diff - (diff @ z) * z
    grad = sec.measure * diff
    residual = float(np.linalg.norm(diff))
    f = cap_volume(K, Hyperplane(z, t)) if with_value else None
    return FunctionalEval(z, f, touch, sec, grad, residual)


def fd_tangential_gradient(K, L, z, step=1e-5, margin=None):
    """Central-difference tangential gradient with great-circle retraction.

    Independent of the analytic formula: only cap volumes are evaluated.
    """
    if not (1e-7 <= step <= 1e-3):
        raise BodyError("finite-difference step must lie in [1e-7, 1e-3]")
    z = _unit(z)
    Q = hyperplane_chart(z)
    grad = np.zeros(K.dim)

    def f(direction):
        d = direction / np.linalg.norm(direction)
        t = L.support(d)
        if K.support(d) - t < (default_margin(K) if margin is None else margin):
            raise RejectedInstanceError("containment margin violated during differencing")
        return cap_volume(K, Hyperplane(d, t))

    for j in range(Q.shape[1]):
        w = Q[:, j]
        coeff = (f(z + step * w) - f(z - step * w)) / (2.0 * step)
        grad += coeff * w
    return grad


class OffsetFunctional:
    """Cap volume with a general positive C^1 offset function h on the sphere.

    ``h(z) = const`` reproduces fixed-distance sections; ``h = support of L``
    reproduces the main objective.  ``offset_grad`` must return the ambient
    gradient of (a 1-homogeneous extension of) h.
    """

    def __init__(self, K, offset_fn, offset_grad):
        self.K = K
        self.offset_fn = offset_fn
        self.offset_grad = offset_grad

    def value(self, z):
        z = _unit(z)
        return cap_volume(self.K, Hyperplane(z, self.offset_fn(z)))

    def section(self, z):
        z = _unit(z)
        return section(self.K, Hyperplane(z, self.offset_fn(z)))

    def gradient(self, z):
        """Ambient gradient: -grad_h(z) * measure + P_{z_perp}[moment]."""
        z = _unit(z)
        sec = self.section(z)
        if sec.degenerate:
            raise DegenerateSectionError(z, sec.measure)
        moment = sec.moment
        proj_moment = moment - (moment @ z) * z
        return -np.asarray(self.offset_grad(z), dtype=float) * sec.measure + proj_moment

    def tangential_gradient(self, z):
        z = _unit(z)
        g = self.gradient(z)
        return g - (g @ z) * z
