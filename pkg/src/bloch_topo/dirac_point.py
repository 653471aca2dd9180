"""Dirac points at the K-points: symmetry frame, gap-opening element and Fermi velocity."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bloch import (
    DEFAULT_CUTOFF_BOX,
    PlaneWaveBasis,
    assemble,
    bloch_eigen,
    degeneracy_tol,
    eigensolve,
    w_matrix,
)
from .errors import MultiplicityError, NotDegenerate, RotationMixing
from .lattice import ROTATION, TWO_PI, build_honeycomb_lattice, rotation_index_matrix

OMEGA = np.exp(2j * np.pi / 3)


@dataclass(frozen=True, eq=False)
class DiracPointData:
    xi_star: np.ndarray
    E_star: float
    n: int
    phi1: np.ndarray
    phi2: np.ndarray
    theta_star: float
    nu_star: complex
    nu_F: float
    basis: PlaneWaveBasis
    which: str = "A-point"

    @property
    def theta_F(self) -> float:
        return abs(self.theta_star)

    def frame(self) -> np.ndarray:
        return np.column_stack([self.phi1, self.phi2])

    def to_json(self) -> dict:
        return {
            "which": self.which,
            "xi_star": self.xi_star.tolist(),
            "E_star": self.E_star,
            "n": self.n,
            "theta_star": self.theta_star,
            "nu_star": [self.nu_star.real, self.nu_star.imag],
            "nu_F": self.nu_F,
            "cutoff": self.basis.cutoff,
            "indices": self.basis.indices.tolist(),
            "phi1": [self.phi1.real.tolist(), self.phi1.imag.tolist()],
            "phi2": [self.phi2.real.tolist(), self.phi2.imag.tolist()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DiracPointData":
        geometry = build_honeycomb_lattice()
        xi = np.array(data["xi_star"])
        basis = PlaneWaveBasis(data["cutoff"], np.array(data["indices"], dtype=int), xi, geometry)
        return cls(
            xi_star=xi,
            E_star=data["E_star"],
            n=data["n"],
            phi1=np.array(data["phi1"][0]) + 1j * np.array(data["phi1"][1]),
            phi2=np.array(data["phi2"][0]) + 1j * np.array(data["phi2"][1]),
            theta_star=data["theta_star"],
            nu_star=complex(*data["nu_star"]),
            nu_F=data["nu_F"],
            basis=basis,
            which=data.get("which", "A-point"),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load(cls, path) -> "DiracPointData":
        return cls.from_json(json.loads(Path(path).read_text()))


def rotation_permutation(basis: PlaneWaveBasis, xi_star) -> np.ndarray:
    """Index map for u -> u(R x) on the fiber at xi_star.

    ``(Ru)_coeffs[perm[i]] = u_coeffs[i]``.  The shift s in R^T xi_star = xi_star + 2*pi*s
    keeps the map inside the fiber.
    """
    geometry = basis.geometry
    S = rotation_index_matrix(geometry)
    drift = geometry.dual_coordinates(ROTATION.T @ xi_star - xi_star) / TWO_PI
    s = np.rint(drift).astype(int)
    if np.max(np.abs(drift - s)) > 1e-9:
        raise RotationMixing("rotation does not fix xi_star modulo the dual lattice")
    target = basis.indices @ S.T + s
    lookup = {tuple(G): i for i, G in enumerate(basis.indices)}
    try:
        return np.array([lookup[tuple(G)] for G in target])
    except KeyError as exc:
        raise RotationMixing("basis is not closed under the rotation") from exc


def apply_rotation(perm: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    out[perm] = u
    return out


def _gauge(phi: np.ndarray) -> np.ndarray:
    """Make the largest coefficient real positive; ties go to the first index."""
    mags = np.round(np.abs(phi), 8)
    i = int(np.argmax(mags))
    return phi * np.exp(-1j * np.angle(phi[i]))


def find_degenerate_pair(w: np.ndarray) -> int:
    """1-based n of the lowest exactly twofold coincidence lambda_n = lambda_{n+1}."""
    close = [abs(w[j + 1] - w[j]) < degeneracy_tol(w[j]) for j in range(len(w) - 1)]
    for j, c in enumerate(close):
        if c:
            if (j + 1 < len(close) and close[j + 1]) or (j > 0 and close[j - 1]):
                raise MultiplicityError(f"eigenvalue {w[j]:.8f} has multiplicity above two")
            return j + 1
    raise NotDegenerate("no degenerate pair among the computed bands")


def extract(
    V, A, basis: PlaneWaveBasis | None = None, which: str = "A-point",
    cutoff_box: float = DEFAULT_CUTOFF_BOX, band_window: int = 12,
) -> DiracPointData:
    geometry = build_honeycomb_lattice() if basis is None else basis.geometry
    xi_star = geometry.k_point(which)
    if basis is None:
        basis = PlaneWaveBasis.default(center=xi_star, cutoff_box=cutoff_box, geometry=geometry)
    op = assemble(basis, V, A, xi_star, 0.0, 1)
    w, U = eigensolve(op, min(band_window, len(basis)))
    n = find_degenerate_pair(w)
    E_star = float(0.5 * (w[n - 1] + w[n]))
    Phi = U[:, n - 1 : n + 1]

    perm = rotation_permutation(basis, xi_star)
    RPhi = np.column_stack([apply_rotation(perm, Phi[:, j]) for j in range(2)])
    small = Phi.conj().T @ RPhi
    leak = np.linalg.norm(RPhi - Phi @ small)
    if leak > 1e-6:
        raise RotationMixing(f"eigenspace not rotation invariant (leak {leak:.2e})")
    mu, vecs = np.linalg.eig(small)
    order = np.argsort(np.abs(mu - OMEGA))
    if abs(mu[order[0]] - OMEGA) > 1e-6 or abs(mu[order[1]] - OMEGA.conjugate()) > 1e-6:
        raise RotationMixing(f"rotation eigenvalues {mu} are not exp(+-2i pi/3)")
    phi1 = Phi @ vecs[:, order[0]]
    phi1 = _gauge(phi1 / np.linalg.norm(phi1))
    # parity-conjugation: phi2(x) = conj(phi1(-x)) has conjugated coefficients in the same fiber
    phi2 = phi1.conj()
    if np.linalg.norm(phi2 - Phi @ (Phi.conj().T @ phi2)) > 1e-6:
        raise RotationMixing("parity-conjugate of phi1 leaves the eigenspace")

    W = w_matrix(basis, A, xi_star)
    theta = np.vdot(phi1, W @ phi1)
    q = basis.wavevectors(xi_star)
    nu_star = complex(2 * np.vdot(phi1, q[:, 0] * phi2))
    return DiracPointData(
        xi_star=np.asarray(xi_star, dtype=float),
        E_star=E_star,
        n=n,
        phi1=phi1,
        phi2=phi2,
        theta_star=float(theta.real),
        nu_star=nu_star,
        nu_F=abs(nu_star),
        basis=basis,
        which=which,
    )


def velocity_element(data: DiracPointData, eta) -> complex:
    """2 <phi1, (eta . D) phi2>."""
    q = data.basis.wavevectors(data.xi_star)
    return complex(2 * np.vdot(data.phi1, (q @ np.asarray(eta, dtype=float)) * data.phi2))


def w_matrix_elements(data: DiracPointData, A) -> np.ndarray:
    """2x2 matrix of W in the frame {phi1, phi2}."""
    F = data.frame()
    W = w_matrix(data.basis, A, data.xi_star)
    return F.conj().T @ W @ F


def rotation_eigen_residuals(data: DiracPointData) -> tuple[float, float]:
    perm = rotation_permutation(data.basis, data.xi_star)
    r1 = np.linalg.norm(apply_rotation(perm, data.phi1) - OMEGA * data.phi1)
    r2 = np.linalg.norm(apply_rotation(perm, data.phi2) - OMEGA.conjugate() * data.phi2)
    return float(r1), float(r2)


def cone_fit(V, A, data: DiracPointData, radii, n_angles: int = 12,
             cutoff_box: float = DEFAULT_CUTOFF_BOX) -> tuple[float, float]:
    """Cone slope s from gaps 2*s*r (extrapolated r -> 0) and the even-part residual.

    Returns ``(s, c)`` with ``c = max |lambda_n + lambda_{n+1} - 2 E_star| / r^2``.
    """
    radii = np.asarray(radii, dtype=float)
    angles = TWO_PI * (np.arange(n_angles) + 0.5) / n_angles
    slopes, even = [], []
    for r in radii:
        gaps, sums = [], []
        for a in angles:
            xi = data.xi_star + r * np.array([np.cos(a), np.sin(a)])
            w = bloch_eigen(V, A, xi, 0.0, 1, data.n + 1, cutoff_box)
            gaps.append(w[data.n] - w[data.n - 1])
            sums.append(w[data.n] + w[data.n - 1] - 2 * data.E_star)
        slopes.append(np.mean(gaps) / (2 * r))
        even.append(np.max(np.abs(sums)) / r**2)
    if len(radii) > 1:
        slope = float(np.polyval(np.polyfit(radii, slopes, 1), 0.0))
    else:
        slope = float(slopes[0])
    return slope, float(np.max(even))


def dirac_gap(V, A, data: DiracPointData, delta: float, sign=1,
              cutoff_box: float = DEFAULT_CUTOFF_BOX) -> float:
    """lambda_{n+1}(xi_star) - lambda_n(xi_star) at strength delta."""
    w = bloch_eigen(V, A, data.xi_star, delta, sign, data.n + 1, cutoff_box)
    return float(w[data.n] - w[data.n - 1])
