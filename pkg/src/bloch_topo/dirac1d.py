"""Effective one-dimensional Dirac family near a Dirac point and its spectral flow.

    D(mu) = [[0, a], [conj a, 0]] D_t + mu [[0, b], [conj b, 0]] + theta_star kappa(t) sigma_3

with a = nu_star * k', b = nu_star * l (covectors read as complex numbers,
(1, 0) -> 1 and (0, 1) -> i) and D_t = -i d/dt.  The line is compactified to
[-Td, Td) with a kink at 0 and an antikink at +-Td; D_t uses its exact Fourier symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .edge import (
    DomainWall,
    EdgeSpectrum,
    WALL_FRACTION,
    periodic_wall,
    spectral_flow,
)
from .errors import BranchAmbiguity, ConfigInvalid
from .lattice import EdgeFrame, as_complex


@dataclass(frozen=True)
class DiracFamilyConfig:
    theta_star: float
    nu_kprime: complex
    nu_ell: complex
    wall: DomainWall = field(default_factory=DomainWall)
    Td: float = 20.0
    Nd: int = 256
    mu_max: float = 4.0

    def __post_init__(self) -> None:
        if self.Td < 10 * self.wall.L:
            raise ConfigInvalid("Td must be at least 10 L")
        if self.Nd % 2:
            raise ConfigInvalid("Nd must be even")
        if self.theta_star == 0:
            raise ConfigInvalid("theta_star must be nonzero")

    @classmethod
    def from_dirac(cls, data, frame: EdgeFrame, sign: int = 1, **kw) -> "DiracFamilyConfig":
        """Parameters at the given Dirac point for the P_{delta, sign} side of the wall."""
        return cls(
            theta_star=sign * data.theta_star,
            nu_kprime=data.nu_star * as_complex(frame.kprime),
            nu_ell=data.nu_star * as_complex(frame.ell),
            **kw,
        )

    @property
    def theta_F(self) -> float:
        return abs(self.theta_star)

    def grid(self) -> np.ndarray:
        return -self.Td + 2.0 * self.Td * np.arange(self.Nd) / self.Nd

    def ell_perp(self) -> float:
        """|b| with its component along a removed: the mu-coupling that survives D_t."""
        a, b = self.nu_kprime, self.nu_ell
        along = (np.conj(a) * b).real / abs(a)
        return float(np.sqrt(max(abs(b) ** 2 - along**2, 0.0)))

    def gap_window(self, mu: float) -> float:
        """Half-width of the constant-mass gap, sqrt(theta_F^2 + mu^2 |b_perp|^2)."""
        return float(np.sqrt(self.theta_F**2 + (mu * self.ell_perp()) ** 2))

    def gap_window_literal(self, mu: float) -> float:
        """sqrt(theta_F^2 + mu^2 nu_F^2 |l|^2) with |l| as given."""
        return float(np.sqrt(self.theta_F**2 + (mu * abs(self.nu_ell)) ** 2))


def derivative_matrix(config: DiracFamilyConfig) -> np.ndarray:
    """-i d/dt on the periodic grid through the exact Fourier symbol.

    The Nyquist mode keeps its (real) symbol: zeroing it would plant a spurious
    massless mode at the grid scale.
    """
    Nd, Td = config.Nd, config.Td
    k = np.pi / Td * np.fft.fftfreq(Nd, 1.0 / Nd)
    F = np.fft.fft(np.eye(Nd), axis=0) / np.sqrt(Nd)
    D = F.conj().T @ (k[:, None] * F)
    return 0.5 * (D + D.conj().T)


def mass_profile(config: DiracFamilyConfig, kappa: float | None = None) -> np.ndarray:
    if kappa is not None:
        return np.full(config.Nd, float(kappa))
    return periodic_wall(config.wall, 1.0, config.Td)(config.grid())


def assemble_dirac(config: DiracFamilyConfig, mu: float, kappa: float | None = None,
                   D: np.ndarray | None = None) -> np.ndarray:
    """Hermitian 2Nd x 2Nd matrix of D(mu); ``kappa`` replaces the wall by a constant."""
    D = derivative_matrix(config) if D is None else D
    a, b = config.nu_kprime, config.nu_ell
    m = config.theta_star * mass_profile(config, kappa)
    eye = np.eye(config.Nd)
    off = a * D + mu * b * eye
    H = np.block([[np.diag(m).astype(complex), off], [off.conj().T, -np.diag(m)]])
    return 0.5 * (H + H.conj().T)


@dataclass(frozen=True, eq=False)
class DiracNode:
    mu: float
    values: np.ndarray
    vectors: np.ndarray
    tags: list
    fractions: np.ndarray

    @property
    def param(self) -> float:
        return self.mu

    def overlap(self, other: "DiracNode", wrap: bool = False) -> np.ndarray:
        return np.abs(self.vectors.conj().T @ other.vectors)


def kink_fraction(config: DiracFamilyConfig, vecs: np.ndarray) -> np.ndarray:
    inner = np.abs(config.grid()) <= config.Td / 2
    w = np.abs(vecs[: config.Nd]) ** 2 + np.abs(vecs[config.Nd :]) ** 2
    return w[inner].sum(axis=0) / w.sum(axis=0)


def dirac_node(config: DiracFamilyConfig, mu: float, D=None, window: float | None = None) -> DiracNode:
    H = assemble_dirac(config, mu, D=D)
    g = config.gap_window(mu) if window is None else window
    w, U = scipy.linalg.eigh(H, subset_by_value=(-g, g), driver="evr")
    frac = kink_fraction(config, U) if len(w) else np.zeros(0)
    tags = ["kink" if f >= WALL_FRACTION else ("antikink" if f <= 1 - WALL_FRACTION else "mixed")
            for f in frac]
    return DiracNode(float(mu), w, U, tags, frac)


def dirac_branches(config: DiracFamilyConfig, mu_grid_n: int = 64, tag: str = "kink") -> EdgeSpectrum:
    """In-gap spectrum of D(mu) on an mu grid and the signed zero crossings of ``tag`` branches."""
    mus = np.linspace(-config.mu_max, config.mu_max, mu_grid_n)
    D = derivative_matrix(config)
    nodes = [dirac_node(config, mu, D) for mu in mus]
    ref = np.zeros(len(mus))
    g = np.array([config.gap_window(mu) for mu in mus])
    for nd, gi in ((nodes[0], g[0]), (nodes[-1], g[-1])):
        # the chiral branch only approaches the window edge, so ask for the outer half
        stuck = [v for v, t in zip(nd.values, nd.tags) if t == tag and abs(v) < 0.5 * gi]
        if tag is not None and stuck:
            raise BranchAmbiguity(f"mu_max = {config.mu_max} too small: {tag} branch mid-gap at mu = {nd.mu}")
    flow, crossings, ids = spectral_flow(nodes, ref, -g, g, periodic=False, tag=tag)
    return EdgeSpectrum(mus, nodes, np.column_stack([-g, g]), ref, int(flow), crossings, ids)


def dirac_flow(config: DiracFamilyConfig, mu_grid_n: int = 64, tag: str = "kink") -> int:
    if mu_grid_n % 2:
        raise ConfigInvalid("mu_grid_n must be even so that mu = 0 is not a node")
    return dirac_branches(config, mu_grid_n, tag).flow


def edge_near_dirac(V, A, edge_config, E_star: float, mus, tau_n: int = 64,
                    zeta_star: float | None = None, threads: int | None = None) -> EdgeSpectrum:
    """Edge spectra at zeta = zeta_star + delta*mu with their bulk windows (no flow count)."""
    from .edge import bulk_gap_window, node_spectrum

    delta = edge_config.delta
    zs = edge_config.frame.zeta_star if zeta_star is None else zeta_star
    zetas = zs + delta * np.asarray(mus, dtype=float)
    win = np.array([
        bulk_gap_window(V, A, delta, edge_config.frame, z, tau_n, edge_config.n,
                        cutoff_box=edge_config.cutoff_box, threads=threads)
        for z in zetas
    ])
    nodes = [node_spectrum(V, A, edge_config, z, w) for z, w in zip(zetas, win)]
    return EdgeSpectrum(zetas, nodes, win, np.full(len(zetas), E_star), 0, [])


@dataclass(frozen=True)
class ShadowReport:
    delta: float
    mus: tuple
    edge_z: tuple
    dirac_z: tuple
    windows: tuple
    counts_match: bool
    max_deviation: float
    edge_slope: float
    dirac_slope: float


def _slope(mus, values) -> float:
    pts = [(m, v[0]) for m, v in zip(mus, values) if len(v) == 1]
    if len(pts) < 2:
        return float("nan")
    m, v = np.array(pts).T
    return float(np.polyfit(m, v, 1)[0])


def edge_vs_effective(compare: EdgeSpectrum, config: DiracFamilyConfig, delta: float,
                      zeta_star: float, E_star: float, margin: float | None = None) -> ShadowReport:
    """Rescaled edge branches z = (lambda - E_star)/delta against D(mu) at mu = (zeta - zeta_star)/delta.

    Both are restricted to the common window: the rescaled bulk window intersected
    with the Dirac gap, pulled in by ``margin`` (default theta_F/4) at each end so
    weakly bound states hugging the continuum are not counted.
    """
    margin = 0.25 * config.theta_F if margin is None else margin
    D = derivative_matrix(config)
    mus, ez, dz, wins = [], [], [], []
    count_ok, dev = True, 0.0
    for nd, (lo, hi), zeta in zip(compare.nodes, compare.gap_window, compare.zetas):
        mu = (zeta - zeta_star) / delta
        g = config.gap_window(mu)
        zlo = max((lo - E_star) / delta, -g) + margin
        zhi = min((hi - E_star) / delta, g) - margin
        z_edge = sorted((v - E_star) / delta for v, t in zip(nd.values, nd.tags) if t == "wall")
        z_edge = [z for z in z_edge if zlo < z < zhi]
        dn = dirac_node(config, mu, D)
        z_dir = sorted(v for v, t in zip(dn.values, dn.tags) if t == "kink" and zlo < v < zhi)
        mus.append(float(mu))
        ez.append(tuple(z_edge))
        dz.append(tuple(z_dir))
        wins.append((zlo, zhi))
        if len(z_edge) != len(z_dir):
            count_ok = False
        elif z_edge:
            dev = max(dev, float(np.max(np.abs(np.array(z_edge) - np.array(z_dir)))))
    return ShadowReport(delta, tuple(mus), tuple(ez), tuple(dz), tuple(wins), count_ok, dev,
                        _slope(mus, ez), _slope(mus, dz))
