"""Cylinder operator with a magnetic domain wall along a rational edge, and its spectral flow.

Strip coordinates are s = <k, x> (longitudinal, period 1) and t = <k', x>.  States in
L^2[zeta] are expanded in plane waves exp(i <xi, x>) with

    xi = (zeta + 2*pi*m) k + (2*pi*j / Lt) k',     Lt = 2T,

i.e. a transverse supercell of length 2T.  The wall profile is compactified to a
kink at t = 0 and an antikink at t = +-T; states are tagged ``wall`` when at
least 70% of their mass lies in |t| <= T/2, which discards the antikink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .bloch import DEFAULT_CUTOFF_BOX, bloch_eigen, cutoff_radius, match_indices, parallel_map
from .errors import BranchAmbiguity, ConfigInvalid, ConvergenceFailure, CrossingOnNode
from .lattice import TWO_PI, EdgeFrame

# Weight of a branch crossing the reference downwards as the parameter increases.
# Counting downward crossings as +1 negates both the edge and the effective-model
# integers relative to c1(+) - c1(-) computed from the bulk; -1 (upward = +1, the
# usual spectral-flow orientation) makes them agree.  This is the only switch.
DOWNWARD = -1

WALL_FRACTION = 0.7
MATCH_THRESHOLD = 0.5
NODE_TOL = 1e-10


def smoothstep5(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


@dataclass(frozen=True)
class DomainWall:
    L: float = 1.0
    profile: str = "quintic"

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise ConfigInvalid("wall half-width L must be positive")
        if self.profile not in ("quintic", "tanh"):
            raise ConfigInvalid("profile must be 'quintic' or 'tanh'")

    def kappa(self, t):
        """Odd profile, -1 for t <= -L and +1 for t >= L (exactly, quintic case)."""
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        if self.profile == "quintic":
            g = 2.0 * smoothstep5(0.5 * (a / self.L + 1.0)) - 1.0
        else:
            g = np.tanh(3.0 * a / self.L)
        return np.sign(t) * g


def periodic_wall(wall: DomainWall, delta: float, T: float):
    """kappa(delta*t) near t = 0 with an antikink at t = +-T, period 2T, odd in t."""

    def k(t):
        t = np.asarray(t, dtype=float)
        u = np.mod(t + T, 2 * T) - T
        inner = np.abs(u) <= T / 2
        mirrored = np.where(u > 0, T - u, -T - u)
        return np.where(inner, wall.kappa(delta * u), wall.kappa(delta * mirrored))

    return k


@dataclass(frozen=True)
class EdgeOperatorConfig:
    frame: EdgeFrame
    delta: float
    wall: DomainWall = field(default_factory=DomainWall)
    T: int | None = None
    cutoff_box: float = DEFAULT_CUTOFF_BOX
    n: int = 1
    kappa_const: float | None = None

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ConfigInvalid("delta must be positive")
        if self.T is None:
            object.__setattr__(self, "T", default_T(self.wall, self.delta))
        if int(self.T) != self.T or self.T <= 0:
            raise ConfigInvalid("T must be a positive integer")
        object.__setattr__(self, "T", int(self.T))
        if self.delta * self.T < 2 * self.wall.L:
            raise ConfigInvalid(f"delta*T = {self.delta * self.T:.3f} < 2L = {2 * self.wall.L}")

    @property
    def Lt(self) -> int:
        return 2 * self.T


def default_T(wall: DomainWall, delta: float) -> int:
    """Smallest integer T with T >= 3L/delta and T >= 2."""
    return max(2, math.ceil(3.0 * wall.L / delta - 1e-12))


@dataclass(frozen=True, eq=False)
class StripBasis:
    zeta: float
    indices: np.ndarray  # rows (m, j)
    xi: np.ndarray  # physical wavevectors
    Lt: int


def strip_basis(config: EdgeOperatorConfig, zeta: float) -> StripBasis:
    f, Lt = config.frame, config.Lt
    R = cutoff_radius(config.cutoff_box)
    # <xi, v> = zeta + 2 pi m and <xi, v'> = 2 pi j / Lt bound the index box
    mmax = int(np.ceil(R * np.linalg.norm(f.v) / TWO_PI)) + 2
    jmax = int(np.ceil(R * np.linalg.norm(f.vprime) * Lt / TWO_PI)) + 2
    m, j = np.meshgrid(np.arange(-mmax, mmax + 1), np.arange(-jmax, jmax + 1), indexing="ij")
    idx = np.column_stack([m.ravel(), j.ravel()])
    xi = np.outer(zeta + TWO_PI * idx[:, 0], f.k) + np.outer(TWO_PI * idx[:, 1] / Lt, f.kprime)
    keep = np.linalg.norm(xi, axis=1) <= R * (1 + 1e-12)
    return StripBasis(float(zeta), idx[keep], xi[keep], Lt)


def _wall_coefficients(config: EdgeOperatorConfig, rmax: int) -> np.ndarray:
    """Fourier coefficients kappa_r, |r| <= rmax, of the periodic wall on [-T, T)."""
    if config.kappa_const is not None:
        out = np.zeros(2 * rmax + 1, dtype=complex)
        out[rmax] = config.kappa_const
        return out
    nfft = 1 << max(14, int(np.ceil(np.log2(8 * (2 * rmax + 1)))))
    t = -config.T + 2.0 * config.T * np.arange(nfft) / nfft
    vals = periodic_wall(config.wall, config.delta, config.T)(t)
    # c_r = (1/Lt) int kappa(t) exp(-2 pi i r t / Lt) dt, grid starting at -T
    c = np.fft.fft(vals) / nfft * np.exp(1j * np.pi * np.fft.fftfreq(nfft, 1.0 / nfft))
    r = np.arange(-rmax, rmax + 1)
    return c[r % nfft]


def _coupling_table(config: EdgeOperatorConfig, field_, with_wall: bool, rmax: int) -> dict:
    """(dm, dj) -> coefficient of exp(i(2 pi dm s + 2 pi dj t / Lt)) for V or kappa*A."""
    f, Lt = config.frame, config.Lt
    table = {}
    if not with_wall:
        for g, c in field_.coeffs.items():
            p, q = f.strip_frequencies(np.array(g))
            table[(int(p), int(q) * Lt)] = c
        return table
    kap = _wall_coefficients(config, rmax)
    for g, c in field_.coeffs.items():
        p, q = f.strip_frequencies(np.array(g))
        for r in range(-rmax, rmax + 1):
            kr = kap[r + rmax]
            if abs(kr) < 1e-15:
                continue
            key = (int(p), int(q) * Lt + r)
            table[key] = table.get(key, 0) + kr * c
    return table


def _lookup(table: dict, dm: np.ndarray, dj: np.ndarray, shape: tuple) -> np.ndarray:
    out = np.zeros(dm.shape + shape, dtype=complex)
    for (p, q), c in table.items():
        mask = (dm == p) & (dj == q)
        if mask.any():
            out[mask] = c
    return out


def assemble_edge(V, A, config: EdgeOperatorConfig, zeta: float, sign: int = 1,
                  basis: StripBasis | None = None):
    """Hermitian matrix of -Lap + V + sign*delta*(A~.D + D.A~), A~ = kappa_delta*A, on L^2[zeta]."""
    basis = basis or strip_basis(config, zeta)
    idx, xi = basis.indices, basis.xi
    dm = idx[:, None, 0] - idx[None, :, 0]
    dj = idx[:, None, 1] - idx[None, :, 1]
    H = _lookup(_coupling_table(config, V, False, 0), dm, dj, ())
    H[np.diag_indices(len(xi))] += np.sum(xi * xi, axis=1)
    if not A.is_zero():
        rmax = int(np.max(np.abs(dj)))
        Atab = _coupling_table(config, A, True, rmax)
        # only differences actually realised by some pair matter
        Ahat = _lookup_vector(Atab, dm, dj)
        W = np.einsum("abk,abk->ab", Ahat, xi[:, None, :] + xi[None, :, :])
        H = H + (sign * config.delta) * W
    H = 0.5 * (H + H.conj().T)
    return H, basis


def _lookup_vector(table: dict, dm: np.ndarray, dj: np.ndarray) -> np.ndarray:
    # dense 2D array over the realised difference box for speed
    p0, q0 = int(dm.min()), int(dj.min())
    grid = np.zeros((int(dm.max()) - p0 + 1, int(dj.max()) - q0 + 1, 2), dtype=complex)
    for (p, q), c in table.items():
        if 0 <= p - p0 < grid.shape[0] and 0 <= q - q0 < grid.shape[1]:
            grid[p - p0, q - q0] = c
    return grid[dm - p0, dj - q0]


def wall_fraction(basis: StripBasis, vecs: np.ndarray) -> np.ndarray:
    """Fraction of each column's mass in |t| <= T/2 (exact for the supercell expansion)."""
    vecs = np.atleast_2d(vecs.T).T
    Lt = basis.Lt
    out = np.zeros(vecs.shape[1])
    for m in np.unique(basis.indices[:, 0]):
        sel = basis.indices[:, 0] == m
        j = basis.indices[sel, 1]
        d = j[None, :] - j[:, None]
        # (1/Lt) int_{-Lt/4}^{Lt/4} exp(2 pi i d t / Lt) dt = sin(pi d / 2) / (pi d)
        K = np.where(d == 0, 0.5, np.sin(0.5 * np.pi * d) / (np.pi * np.where(d == 0, 1, d)))
        c = vecs[sel]
        out += np.real(np.einsum("ia,ij,ja->a", c.conj(), K, c))
    return out


def bulk_gap_window(V, A, delta: float, frame: EdgeFrame, zeta: float, tau_n: int = 64,
                    n: int = 1, signs=(1, -1), cutoff_box: float = DEFAULT_CUTOFF_BOX,
                    threads: int | None = None) -> tuple[float, float]:
    """(max_tau lambda_n, min_tau lambda_{n+1}) on the line zeta*k + tau*k', over the given signs."""
    taus = TWO_PI * np.arange(tau_n) / tau_n
    xis = zeta * frame.k[None, :] + taus[:, None] * frame.kprime[None, :]
    items = [(s, x) for s in signs for x in xis]
    ws = parallel_map(lambda it: bloch_eigen(V, A, it[1], delta, it[0], n + 1, cutoff_box),
                      items, threads)
    ws = np.array(ws)
    return float(np.max(ws[:, n - 1])), float(np.min(ws[:, n]))


@dataclass(frozen=True, eq=False)
class NodeSpectrum:
    zeta: float
    values: np.ndarray
    vectors: np.ndarray
    tags: list
    fractions: np.ndarray
    basis: StripBasis

    @property
    def param(self) -> float:
        return self.zeta

    def overlap(self, other: "NodeSpectrum", wrap: bool = False) -> np.ndarray:
        """|<psi_a, psi_b>| on common (m, j) labels; ``wrap`` views other at zeta + 2pi."""
        return overlap_matrix(self, other, 1 if wrap else 0)


@dataclass(frozen=True, eq=False)
class EdgeSpectrum:
    zetas: np.ndarray
    nodes: list
    gap_window: np.ndarray
    reference: np.ndarray
    flow: int
    crossings: list
    branch_ids: list = field(default_factory=list)

    @property
    def branches(self) -> list:
        return [list(zip(nd.values.tolist(), nd.tags)) for nd in self.nodes]

    def rows(self) -> list:
        out = []
        for nd, ids in zip(self.nodes, self.branch_ids):
            for val, tag, b in zip(nd.values, nd.tags, ids):
                out.append((nd.zeta, float(val), tag, int(b)))
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("zeta,value,tag,branch_id\n")
            for z, v, tag, b in self.rows():
                fh.write(f"{z:.12e},{v:.12e},{tag},{b}\n")


def node_spectrum(V, A, config: EdgeOperatorConfig, zeta: float, window) -> NodeSpectrum:
    H, basis = assemble_edge(V, A, config, zeta)
    lo, hi = window
    try:
        w, U = scipy.linalg.eigh(H, subset_by_value=(lo, hi), driver="evr")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"edge eigensolve failed at zeta={zeta}: {exc}", where=zeta) from exc
    frac = wall_fraction(basis, U) if len(w) else np.zeros(0)
    tags = ["wall" if f >= WALL_FRACTION else "boundary" for f in frac]
    return NodeSpectrum(float(zeta), w, U, tags, frac, basis)


def overlap_matrix(a: NodeSpectrum, b: NodeSpectrum, shift_m: int = 0) -> np.ndarray:
    """|<psi_a, psi_b>| on common (m, j) labels; b's m-labels are shifted by -shift_m."""
    ib_idx = b.basis.indices - np.array([shift_m, 0])
    ia, ib = match_indices(a.basis.indices, ib_idx)
    return np.abs(a.vectors[ia].conj().T @ b.vectors[ib])


def spectral_flow(nodes: list, reference, lo=None, hi=None, periodic: bool = True,
                  tag: str | None = "wall") -> tuple[int, list, list]:
    """Signed count of matched branch crossings of the reference curve.

    Nodes need ``values``, ``tags``, ``param`` and ``overlap(other, wrap)``.  Only
    states tagged ``tag`` at the earlier node are counted (all if None).  Returns
    (flow, crossings, branch_ids); downward crossings count ``DOWNWARD``.
    """
    reference = np.asarray(reference, dtype=float)
    N = len(nodes)
    for nd, ref in zip(nodes, reference):
        if len(nd.values) and np.min(np.abs(nd.values - ref)) < NODE_TOL:
            raise CrossingOnNode(f"branch within {NODE_TOL} of the reference at {nd.param}")
    flow, crossings = 0, []
    ids = [np.full(len(nd.values), -1) for nd in nodes]
    next_id = 0
    if N:
        ids[0] = np.arange(len(nodes[0].values))
        next_id = len(nodes[0].values)
    for i in range(N if periodic else N - 1):
        a, ip = nodes[i], (i + 1) % N
        b = nodes[ip]
        partner = np.full(len(a.values), -1)
        if len(a.values) and len(b.values):
            O = a.overlap(b, wrap=periodic and ip == 0)
            ra, cb = linear_sum_assignment(-(O**2))
            for x, y in zip(ra, cb):
                if O[x, y] >= MATCH_THRESHOLD:
                    partner[x] = y
        if ip != 0:
            for x, y in enumerate(partner):
                if y >= 0:
                    ids[ip][y] = ids[i][x]
            for y in range(len(b.values)):
                if ids[ip][y] < 0:
                    ids[ip][y], next_id = next_id, next_id + 1
        for x in range(len(a.values)):
            if tag is not None and a.tags[x] != tag:
                continue
            y = partner[x]
            if y < 0:
                # losing a branch in the middle of the gap means the grid is too coarse
                if lo is not None and hi is not None:
                    mid, width = 0.5 * (lo[i] + hi[i]), hi[i] - lo[i]
                    if abs(a.values[x] - mid) < 0.25 * width:
                        raise BranchAmbiguity(
                            f"no overlap match >= {MATCH_THRESHOLD} at {a.param:.6f}"
                        )
                continue
            ea, eb = a.values[x] - reference[i], b.values[y] - reference[ip]
            if ea > 0 > eb:
                flow += DOWNWARD
                crossings.append((a.param, b.param, DOWNWARD))
            elif ea < 0 < eb:
                flow -= DOWNWARD
                crossings.append((a.param, b.param, -DOWNWARD))
    return flow, crossings, ids


def gap_windows(V, A, config: EdgeOperatorConfig, zetas, tau_n: int = 64,
                threads: int | None = None) -> np.ndarray:
    return np.array([
        bulk_gap_window(V, A, config.delta, config.frame, z, tau_n, config.n,
                        cutoff_box=config.cutoff_box, threads=threads)
        for z in zetas
    ])


def edge_branches(V, A, config: EdgeOperatorConfig, zeta_grid_n: int = 64, tau_n: int = 64,
                  reference=None, threads: int | None = None, windows=None) -> EdgeSpectrum:
    """In-gap spectrum over a uniform zeta grid of [0, 2pi) and the wall spectral flow.

    ``reference`` is None (window midpoints), a constant, or a callable of zeta.
    """
    zetas = TWO_PI * np.arange(zeta_grid_n) / zeta_grid_n
    win = gap_windows(V, A, config, zetas, tau_n, threads) if windows is None else np.asarray(windows)
    lo, hi = win[:, 0], win[:, 1]
    if np.any(hi <= lo):
        bad = zetas[hi <= lo]
        raise ConfigInvalid(f"bulk gap window empty at zeta = {bad[:4]}")

    def ref_at(z, k):
        if reference is None:
            return 0.5 * (lo[k] + hi[k])
        return float(reference(z)) if callable(reference) else float(reference)

    def solve(k, z):
        return node_spectrum(V, A, config, z, (lo[k], hi[k]))

    nodes = parallel_map(lambda k: solve(k, zetas[k]), range(zeta_grid_n), threads)
    refs = np.array([ref_at(z, k) for k, z in enumerate(zetas)])
    # a branch sitting on the reference at a node: move that node half a step
    h = TWO_PI / zeta_grid_n
    for k, nd in enumerate(nodes):
        if len(nd.values) and np.min(np.abs(nd.values - refs[k])) < NODE_TOL:
            z = zetas[k] + 0.5 * h
            zetas[k] = z
            nodes[k] = solve(k, z)
            refs[k] = ref_at(z, k)
    flow, crossings, ids = spectral_flow(nodes, refs, lo, hi)
    return EdgeSpectrum(zetas, nodes, win, refs, int(flow), crossings, ids)
