"""Berry curvature and Chern numbers of the low-lying eigenbundle, plus the two-band model.

Curvature values are reported as the real number B with c1 = (1/2pi) * integral of B
over the dual cell, i.e. B = i * Tr(P [d1 P, d2 P]) in Cartesian xi coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .bloch import (
    DEFAULT_CUTOFF_BOX,
    PlaneWaveBasis,
    assemble,
    degeneracy_tol,
    eigensolve,
    match_indices,
    parallel_map,
    torus_grid,
)
from .errors import GapClosed, SingularLink
from .lattice import TWO_PI, build_honeycomb_lattice

# tau-coordinates (xi = tau1*k1 + tau2*k2) reverse orientation since det[k1; k2] < 0
TAU_ORIENTATION = -1


@dataclass(frozen=True, eq=False)
class ProjectorFrame:
    xi: np.ndarray
    rank: int
    frame: np.ndarray
    basis: PlaneWaveBasis
    gap: float

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.conj().T

    def shifted(self, shift) -> "ProjectorFrame":
        """The same frame seen from xi + 2*pi*shift (index relabelling only)."""
        b = self.basis.shifted(shift)
        xi = self.xi + self.basis.geometry.wavevector(shift)
        return ProjectorFrame(xi, self.rank, self.frame, b, self.gap)


@dataclass(frozen=True, eq=False)
class CurvatureGrid:
    grid_n: int
    tau: np.ndarray
    grid: np.ndarray
    values: np.ndarray
    chern: float
    method: str
    max_real_part: float = 0.0

    def to_csv(self, path) -> None:
        data = np.column_stack([self.tau, self.values])
        np.savetxt(path, data, delimiter=",", header="tau1,tau2,B", comments="", fmt="%.12e")


def projector_frame(
    V, A, delta: float, sign, n: int, xi, basis: PlaneWaveBasis | None = None,
    cutoff_box: float = DEFAULT_CUTOFF_BOX,
) -> ProjectorFrame:
    xi = np.asarray(xi, dtype=float)
    if basis is None:
        basis = PlaneWaveBasis.default(center=xi, cutoff_box=cutoff_box)
    op = assemble(basis, V, A, xi, delta, sign)
    w, U = eigensolve(op, n + 1, check=False)
    gap = float(w[n] - w[n - 1])
    if gap < degeneracy_tol(w[n]):
        raise GapClosed(f"lambda_{n} and lambda_{n + 1} coincide at xi = {xi}")
    Q, _ = np.linalg.qr(U[:, :n])
    return ProjectorFrame(xi, n, Q, basis, gap)


def link(a: ProjectorFrame, b: ProjectorFrame) -> complex:
    """det(Psi_a^dagger Psi_b) over the common plane-wave indices."""
    ia, ib = match_indices(a.basis.indices, b.basis.indices)
    M = a.frame[ia].conj().T @ b.frame[ib]
    return complex(np.linalg.det(M))


def _frames_on_grid(V, A, delta, sign, n, grid_n, cutoff_box, threads):
    geometry = build_honeycomb_lattice()
    tau, xis = torus_grid(grid_n, geometry)
    frames = parallel_map(
        lambda x: projector_frame(V, A, delta, sign, n, x, cutoff_box=cutoff_box), xis, threads
    )
    return tau, xis, frames


def chern_from_frames(frames: list, grid_n: int) -> tuple[float, np.ndarray]:
    """Link-variable Chern number on a row-major grid_n x grid_n torus of frames.

    Returns the integer-valued sum and the per-plaquette curvature (field strength
    divided by plaquette area) as real values in the c1 = (1/2pi) * integral convention.
    """
    N = grid_n
    F = lambda i, j: frames[(i % N) * N + (j % N)]  # noqa: E731

    def at(i, j):
        # step across the seam through the exact index relabelling
        f = F(i, j)
        s = (i // N, j // N)
        return f if s == (0, 0) else f.shifted(s)

    U1 = np.empty((N, N), dtype=complex)
    U2 = np.empty((N, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            U1[i, j] = link(at(i, j), at(i + 1, j))
            U2[i, j] = link(at(i, j), at(i, j + 1))
    smallest = float(min(np.abs(U1).min(), np.abs(U2).min()))
    if smallest < 1e-6:
        raise SingularLink(f"link magnitude {smallest:.2e} < 1e-6; refine the grid")
    loop = U1 * np.roll(U2, -1, axis=0) * np.conj(np.roll(U1, -1, axis=1)) * np.conj(U2)
    # loop phase ~ -(curvature flux) for the tau orientation; see module docstring
    flux = -TAU_ORIENTATION * np.angle(loop)
    geometry = frames[0].basis.geometry
    cell = (TWO_PI / N) ** 2 * abs(np.linalg.det(geometry.dual_matrix))
    chern = float(np.sum(flux) / TWO_PI)
    return chern, (flux / cell).reshape(-1)


def chern_link_variable(
    V, A, delta: float, sign, n: int, grid_n: int,
    cutoff_box: float = DEFAULT_CUTOFF_BOX, threads: int | None = None,
) -> CurvatureGrid:
    tau, xis, frames = _frames_on_grid(V, A, delta, sign, n, grid_n, cutoff_box, threads)
    chern, B = chern_from_frames(frames, grid_n)
    return CurvatureGrid(grid_n, tau, xis, B, float(np.rint(chern)), "link-variable")


def _trace_curvature(P0, Pp1, Pm1, Pp2, Pm2, h) -> complex:
    d1 = (Pp1 - Pm1) / (2 * h)
    d2 = (Pp2 - Pm2) / (2 * h)
    return complex(np.trace(P0 @ (d1 @ d2 - d2 @ d1)))


def curvature_trace(
    V, A, delta: float, sign, n: int, xi, h: float = 1e-4,
    cutoff_box: float = DEFAULT_CUTOFF_BOX, return_raw: bool = False,
):
    """B(xi) = i Tr(P [d1 P, d2 P]) by central differences in a fixed plane-wave basis."""
    xi = np.asarray(xi, dtype=float)
    basis = PlaneWaveBasis.default(center=xi, cutoff_box=cutoff_box)
    P = {}
    for key, step in (("0", (0, 0)), ("+1", (h, 0)), ("-1", (-h, 0)), ("+2", (0, h)), ("-2", (0, -h))):
        P[key] = projector_frame(V, A, delta, sign, n, xi + np.array(step), basis=basis).projector()
    raw = _trace_curvature(P["0"], P["+1"], P["-1"], P["+2"], P["-2"], h)
    B = float((1j * raw).real)
    return (B, raw) if return_raw else B


def chern_curvature_integral(
    V, A, delta: float, sign, n: int, grid_n: int, h: float = 1e-4,
    cutoff_box: float = DEFAULT_CUTOFF_BOX, threads: int | None = None,
) -> CurvatureGrid:
    """(1/2pi) * Riemann sum of the curvature trace over the periodic grid (raw, not rounded)."""
    geometry = build_honeycomb_lattice()
    tau, xis = torus_grid(grid_n, geometry)
    out = parallel_map(
        lambda x: curvature_trace(V, A, delta, sign, n, x, h, cutoff_box, return_raw=True),
        xis, threads,
    )
    B = np.array([o[0] for o in out])
    real_part = float(max(abs(o[1].real) for o in out))
    cell = (TWO_PI / grid_n) ** 2 * abs(np.linalg.det(geometry.dual_matrix))
    return CurvatureGrid(
        grid_n, tau, xis, B, float(np.sum(B) * cell / TWO_PI), "curvature-integral", real_part
    )


def curvature_decay_check(
    V, A, n: int, eps: float, deltas, sign=1, grid_n: int = 24, h: float = 1e-4,
    cutoff_box: float = DEFAULT_CUTOFF_BOX, threads: int | None = None,
) -> list[tuple[float, float]]:
    """[(delta, sup |B_delta| over grid points with rho >= eps)] for each delta."""
    geometry = build_honeycomb_lattice()
    _, xis = torus_grid(grid_n, geometry)
    far = xis[geometry.dirac_distance(xis) >= eps]
    table = []
    for d in deltas:
        B = parallel_map(lambda x: curvature_trace(V, A, d, sign, n, x, h, cutoff_box), far, threads)
        table.append((float(d), float(np.max(np.abs(B))) if len(B) else 0.0))
    return table


@dataclass(frozen=True)
class TwoBandModel:
    E_star: float
    theta_star: float
    nu_star: complex
    delta: float
    xi_star: tuple = (0.0, 0.0)

    @property
    def theta_F(self) -> float:
        return abs(self.theta_star)

    @property
    def nu_F(self) -> float:
        return abs(self.nu_star)

    @classmethod
    def from_dirac(cls, data, delta: float, sign=1) -> "TwoBandModel":
        s = 1 if sign in (1, "+") else -1
        return cls(data.E_star, s * data.theta_star, data.nu_star, delta, tuple(data.xi_star))

    def matrix(self, xi) -> np.ndarray:
        z = complex(xi[0] - self.xi_star[0], xi[1] - self.xi_star[1])
        m = self.delta * self.theta_star
        return np.array(
            [[self.E_star + m, self.nu_star * z], [np.conj(self.nu_star * z), self.E_star - m]]
        )

    def r(self, xi) -> float:
        d = np.asarray(xi, dtype=float) - np.asarray(self.xi_star)
        return float(np.sqrt(self.theta_F**2 * self.delta**2 + self.nu_F**2 * d @ d))

    def eigenvalues(self, xi) -> tuple[float, float]:
        r = self.r(xi)
        return self.E_star - r, self.E_star + r

    def pullback(self, eta) -> np.ndarray:
        """Phi_delta(eta) = xi_star + delta*theta_star*conj(nu_star)*eta / nu_F^2 (as complex numbers)."""
        z = complex(eta[0], eta[1]) * self.delta * self.theta_star * np.conj(self.nu_star) / self.nu_F**2
        return np.asarray(self.xi_star) + np.array([z.real, z.imag])


def unit_model_curvature(eta, band: str = "lower") -> float:
    """Curvature of the lower band of [[1, eta], [conj eta, -1]], reported convention.

    The i-stripped value 1/(2(1+|eta|^2)^(3/2)) times i, times the reporting factor i.
    """
    r2 = float(np.dot(eta, eta))
    b = -0.5 / (1.0 + r2) ** 1.5
    return b if band == "lower" else -b


def twoband_curvature(model: TwoBandModel, xi, band: str = "lower") -> float:
    """Analytic curvature of one eigenbundle of M_delta at xi.

    M_delta(Phi(eta)) = E_star + delta*theta_star*unit(eta): for theta_star < 0 the
    lower band of M_delta is the upper band of the unit model; Phi scales areas by
    (delta*theta_F/nu_F)^2 and preserves orientation.
    """
    d = np.asarray(xi, dtype=float) - np.asarray(model.xi_star)
    scale = model.nu_F / (model.delta * model.theta_F)
    z = complex(d[0], d[1]) * model.nu_star / (model.delta * model.theta_star)
    eta = np.array([z.real, z.imag])
    unit_band = band if model.theta_star > 0 else ("upper" if band == "lower" else "lower")
    return unit_model_curvature(eta, unit_band) * scale**2


def twoband_curvature_closed_form(model: TwoBandModel, xi) -> float:
    """-sgn(theta_star) * nu_F^2 * delta * theta_F / (2 r_delta(xi)^3)."""
    r = model.r(xi)
    return -np.sign(model.theta_star) * model.nu_F**2 * model.delta * model.theta_F / (2 * r**3)


def numeric_twoband_curvature(model: TwoBandModel, xi, h: float = 1e-5, band: str = "lower") -> float:
    """Eigenvector-based finite-difference curvature of M_delta (independent check)."""
    k = 0 if band == "lower" else 1

    def P(x):
        _, U = np.linalg.eigh(model.matrix(x))
        u = U[:, k : k + 1]
        return u @ u.conj().T

    xi = np.asarray(xi, dtype=float)
    e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
    raw = _trace_curvature(P(xi), P(xi + e1), P(xi - e1), P(xi + e2), P(xi - e2), h)
    return float((1j * raw).real)


def twoband_disk_integral(model: TwoBandModel, eps1: float) -> float:
    """(1/2pi) * integral of the lower-band curvature over the disk of radius eps1 about xi_star.

    The integrand is radial, so the angular integral is exact and the radial one
    is done adaptively.
    """
    def radial(rho):
        return twoband_curvature(model, np.asarray(model.xi_star) + np.array([rho, 0.0])) * rho

    scale = model.delta * model.theta_F / model.nu_F
    pts = [p for p in (scale, 10 * scale) if p < eps1]
    val, _ = scipy.integrate.quad(radial, 0.0, eps1, points=pts or None, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def twoband_disk_closed_form(model: TwoBandModel, eps1: float) -> float:
    x = model.nu_F * eps1 / (model.theta_F * model.delta)
    return float(-np.sign(model.theta_star) * 0.5 * (1.0 - (1.0 + x * x) ** -0.5))


def twoband_tail(model: TwoBandModel, eps1: float) -> float:
    """(1/2)(1 + (nu_F*eps1/(theta_F*delta))^2)^(-1/2)."""
    x = model.nu_F * eps1 / (model.theta_F * model.delta)
    return float(0.5 * (1.0 + x * x) ** -0.5)
