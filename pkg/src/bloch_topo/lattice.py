"""Equilateral lattice, its dual, K-points, rotation action and rational edge frames.

Covectors are identified with vectors of R^2 through the Euclidean inner product.
Dual-lattice points are indexed by integer pairs ``m`` standing for the
wavevector ``2*pi*(m1*k1 + m2*k2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import ArmchairExcluded, NotCoprime, RotationNotIntegral

TWO_PI = 2.0 * np.pi

# counterclockwise rotation by 2*pi/3
ROTATION = np.array(
    [[np.cos(TWO_PI / 3), -np.sin(TWO_PI / 3)], [np.sin(TWO_PI / 3), np.cos(TWO_PI / 3)]]
)

ELL_VARIANTS = ("kprime-orthogonal", "k-normalized")


@dataclass(frozen=True, eq=False)
class LatticeGeometry:
    a: float
    v1: np.ndarray
    v2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    xiA: np.ndarray
    xiB: np.ndarray

    @property
    def dual_matrix(self) -> np.ndarray:
        """Rows k1, k2."""
        return np.array([self.k1, self.k2])

    @property
    def lattice_matrix(self) -> np.ndarray:
        """Columns v1, v2."""
        return np.column_stack([self.v1, self.v2])

    def wavevector(self, m) -> np.ndarray:
        """2*pi*(m1*k1 + m2*k2) for one index pair or an (N, 2) array of them."""
        return TWO_PI * np.asarray(m, dtype=float) @ self.dual_matrix

    def dual_coordinates(self, xi) -> np.ndarray:
        """(tau1, tau2) with xi = tau1*k1 + tau2*k2."""
        return np.asarray(xi, dtype=float) @ self.lattice_matrix

    def from_dual_coordinates(self, tau) -> np.ndarray:
        return np.asarray(tau, dtype=float) @ self.dual_matrix

    def k_point(self, which: str) -> np.ndarray:
        if which in ("A", "A-point"):
            return self.xiA
        if which in ("B", "B-point"):
            return self.xiB
        raise ValueError(f"unknown K-point {which!r}")

    def dirac_distance(self, xi) -> np.ndarray:
        """rho(xi): distance from xi to {xiA, xiB} + 2*pi*Lambda^*."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        best = np.full(len(xi), np.inf)
        shifts = np.array([(i, j) for i in (-2, -1, 0, 1, 2) for j in (-2, -1, 0, 1, 2)])
        for K in (self.xiA, self.xiB):
            for s in self.wavevector(shifts):
                best = np.minimum(best, np.linalg.norm(xi - K - s, axis=1))
        return best


def build_honeycomb_lattice() -> LatticeGeometry:
    # |Det[v1, v2]| = 2*sqrt(3)*a**2 = 1
    a = (2.0 * np.sqrt(3.0)) ** -0.5
    v1 = a * np.array([np.sqrt(3.0), 1.0])
    v2 = a * np.array([np.sqrt(3.0), -1.0])
    dual = np.linalg.inv(np.column_stack([v1, v2]))
    k1, k2 = dual[0], dual[1]
    xiA = TWO_PI / 3.0 * (2.0 * k1 + k2)
    xiB = TWO_PI / 3.0 * (k1 + 2.0 * k2)
    return LatticeGeometry(a=a, v1=v1, v2=v2, k1=k1, k2=k2, xiA=xiA, xiB=xiB)


def reduce_to_torus(xi, geometry: LatticeGeometry | None = None) -> np.ndarray:
    """Representative of xi in {tau*k1 + tau'*k2 : tau, tau' in [0, 2*pi)}."""
    geometry = geometry or build_honeycomb_lattice()
    tau = geometry.dual_coordinates(xi)
    tau = np.mod(tau, TWO_PI)
    # values within rounding of 2*pi fold back to 0
    tau = np.where(np.isclose(tau, TWO_PI, rtol=0.0, atol=1e-12), 0.0, tau)
    return geometry.from_dual_coordinates(tau)


def rotation_index_action(m, geometry: LatticeGeometry | None = None) -> tuple[int, int]:
    """Index m' such that R^T(m1*k1 + m2*k2) = m'1*k1 + m'2*k2."""
    geometry = geometry or build_honeycomb_lattice()
    M = np.asarray(m, dtype=float) @ geometry.dual_matrix
    coords = geometry.dual_coordinates(ROTATION.T @ M)
    rounded = np.rint(coords)
    if np.max(np.abs(coords - rounded)) > 1e-9:
        raise RotationNotIntegral(f"R^T maps {tuple(m)} off the dual lattice: {coords}")
    return int(rounded[0]), int(rounded[1])


def rotation_index_matrix(geometry: LatticeGeometry | None = None) -> np.ndarray:
    """Integer matrix S with rotation_index_action(m) = S @ m."""
    c1 = rotation_index_action((1, 0), geometry)
    c2 = rotation_index_action((0, 1), geometry)
    return np.array([[c1[0], c2[0]], [c1[1], c2[1]]], dtype=int)


@dataclass(frozen=True, eq=False)
class EdgeFrame:
    a1: int
    a2: int
    b1: int
    b2: int
    v: np.ndarray
    vprime: np.ndarray
    k: np.ndarray
    kprime: np.ndarray
    ell: np.ndarray
    zeta_star: float
    ell_variant: str = "kprime-orthogonal"

    def zeta_star_of(self, xi_star) -> float:
        return float(np.mod(np.dot(xi_star, self.v), TWO_PI))

    def strip_frequencies(self, m) -> np.ndarray:
        """Dual index m -> (p, q) with 2*pi*(m1 k1 + m2 k2) = 2*pi*(p k + q k')."""
        m = np.asarray(m, dtype=int)
        p = m[..., 0] * self.a1 + m[..., 1] * self.a2
        q = m[..., 0] * self.b1 + m[..., 1] * self.b2
        return np.stack([p, q], axis=-1)


def _bezout(a1: int, a2: int) -> tuple[int, int]:
    # one solution of a1*b2 - a2*b1 = 1 via extended Euclid on (a1, -a2)
    def ext(x, y):
        if y == 0:
            return (x, 1, 0) if x >= 0 else (-x, -1, 0)
        g, s, t = ext(y, x % y)
        return g, t, s - (x // y) * t

    g, s, t = ext(a1, -a2)  # s*a1 + t*(-a2) = 1
    b2, b1 = s, t
    assert a1 * b2 - a2 * b1 == 1
    # general solution (b1 + j*a1, b2 + j*a2); minimise |b1|+|b2|, then prefer b2 >= 0
    best = None
    span = abs(b1) + abs(b2) + 2
    for j in range(-span, span + 1):
        c1, c2 = b1 + j * a1, b2 + j * a2
        key = (abs(c1) + abs(c2), 0 if c2 >= 0 else 1, abs(c1))
        if best is None or key < best[0]:
            best = (key, c1, c2)
    return best[1], best[2]


def edge_frame(
    geometry: LatticeGeometry, a1: int, a2: int, ell_variant: str = "kprime-orthogonal"
) -> EdgeFrame:
    """Rational edge v = a1*v1 + a2*v2 with its transverse vector and dual pair."""
    a1, a2 = int(a1), int(a2)
    if gcd(a1, a2) != 1:
        raise NotCoprime(f"gcd({a1}, {a2}) != 1")
    if ell_variant not in ELL_VARIANTS:
        raise ValueError(f"ell_variant must be one of {ELL_VARIANTS}")
    b1, b2 = _bezout(a1, a2)
    v = a1 * geometry.v1 + a2 * geometry.v2
    vprime = b1 * geometry.v1 + b2 * geometry.v2
    k = b2 * geometry.k1 - b1 * geometry.k2
    kprime = -a2 * geometry.k1 + a1 * geometry.k2

    phase = float(np.dot(geometry.xiA, v))
    nearest = np.rint(phase / np.pi)
    if abs(phase - nearest * np.pi) < 1e-9:
        raise ArmchairExcluded(f"<xiA, v> = {phase:.6f} lies in pi*Z for edge ({a1}, {a2})")

    denom = np.dot(kprime, kprime) if ell_variant == "kprime-orthogonal" else np.dot(k, k)
    ell = k - np.dot(k, kprime) / denom * kprime
    return EdgeFrame(
        a1=a1,
        a2=a2,
        b1=b1,
        b2=b2,
        v=v,
        vprime=vprime,
        k=k,
        kprime=kprime,
        ell=ell,
        zeta_star=float(np.mod(phase, TWO_PI)),
        ell_variant=ell_variant,
    )


def as_complex(vec) -> complex:
    """R^2 -> C, (1, 0) -> 1 and (0, 1) -> i."""
    return complex(vec[0], vec[1])
