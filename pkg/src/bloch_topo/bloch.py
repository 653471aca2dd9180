"""Plane-wave discretization of the perturbed honeycomb Bloch operators.

A coefficient vector ``c`` over a basis with indices ``G`` represents
``u(x) = sum_G c_G exp(i <xi + 2*pi*G, x>)`` in the fiber at quasimomentum xi.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
from threadpoolctl import threadpool_limits

from .errors import BasisNotClosed, ConfigInvalid, ConvergenceFailure
from .fields import FourierField
from .lattice import TWO_PI, LatticeGeometry, build_honeycomb_lattice, rotation_index_matrix

DEFAULT_CUTOFF_BOX = 6


def degeneracy_tol(E: float) -> float:
    return 1e-7 * (1.0 + abs(E))


def parse_sign(sign) -> int:
    if sign in (1, "+", "plus", "+1"):
        return 1
    if sign in (-1, "-", "minus", "-1"):
        return -1
    raise ConfigInvalid(f"sign must be + or -, got {sign!r}")


def cutoff_radius(cutoff_box: float, geometry: LatticeGeometry | None = None) -> float:
    """Wavevector radius 2*pi*cutoff_box*|k1| reached by the box corner (cutoff_box, 0)."""
    geometry = geometry or build_honeycomb_lattice()
    return TWO_PI * cutoff_box * float(np.linalg.norm(geometry.k1))


@dataclass(frozen=True, eq=False)
class PlaneWaveBasis:
    cutoff: float
    indices: np.ndarray
    center: np.ndarray
    geometry: LatticeGeometry

    @classmethod
    def disk(cls, cutoff: float, center=(0.0, 0.0), geometry: LatticeGeometry | None = None):
        """All G with |center + 2*pi*G| <= cutoff, sorted lexicographically."""
        geometry = geometry or build_honeycomb_lattice()
        center = np.asarray(center, dtype=float)
        # |2*pi*G| <= cutoff + |center| bounds each |G_i| by a safe box
        reach = int(np.ceil((cutoff + np.linalg.norm(center)) / (TWO_PI * 0.5))) + 2
        g = np.arange(-reach, reach + 1)
        G = np.array(np.meshgrid(g, g, indexing="ij")).reshape(2, -1).T
        q = center + geometry.wavevector(G)
        keep = np.linalg.norm(q, axis=1) <= cutoff * (1 + 1e-12)
        G = G[keep]
        order = np.lexsort((G[:, 1], G[:, 0]))
        return cls(cutoff=float(cutoff), indices=G[order], center=center, geometry=geometry)

    @classmethod
    def default(cls, center=(0.0, 0.0), cutoff_box: float = DEFAULT_CUTOFF_BOX, geometry=None):
        geometry = geometry or build_honeycomb_lattice()
        return cls.disk(cutoff_radius(cutoff_box, geometry), center, geometry)

    def __len__(self) -> int:
        return len(self.indices)

    def wavevectors(self, xi) -> np.ndarray:
        return np.asarray(xi, dtype=float) + self.geometry.wavevector(self.indices)

    def keys(self) -> np.ndarray:
        return index_keys(self.indices)

    def position(self, G) -> int:
        hit = np.nonzero((self.indices[:, 0] == G[0]) & (self.indices[:, 1] == G[1]))[0]
        return int(hit[0]) if len(hit) else -1

    def is_closed_under(self, matrix: np.ndarray, shift=(0, 0)) -> bool:
        mapped = self.indices @ np.asarray(matrix).T + np.asarray(shift)
        return bool(np.all(np.isin(index_keys(mapped), self.keys())))

    def is_closed_under_symmetries(self) -> bool:
        """Closure under negation and the rotation action (meaningful for center 0)."""
        return self.is_closed_under(-np.eye(2, dtype=int)) and self.is_closed_under(
            rotation_index_matrix(self.geometry)
        )

    def shifted(self, shift) -> "PlaneWaveBasis":
        """Same plane waves seen from quasimomentum center + 2*pi*shift (G -> G - shift)."""
        shift = np.asarray(shift, dtype=int)
        return PlaneWaveBasis(
            self.cutoff, self.indices - shift, self.center + self.geometry.wavevector(shift),
            self.geometry,
        )

    def permuted(self, order) -> "PlaneWaveBasis":
        return PlaneWaveBasis(self.cutoff, self.indices[np.asarray(order)], self.center, self.geometry)


def index_keys(G: np.ndarray) -> np.ndarray:
    """Injective integer encoding of index pairs (|G_i| < 2**20)."""
    G = np.asarray(G, dtype=np.int64)
    return (G[..., 0] + (1 << 20)) * (1 << 21) + (G[..., 1] + (1 << 20))


def match_indices(G_a: np.ndarray, G_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Positions (ia, ib) with G_a[ia] == G_b[ib]."""
    _, ia, ib = np.intersect1d(index_keys(G_a), index_keys(G_b), return_indices=True)
    return ia, ib


@dataclass(frozen=True, eq=False)
class BlochOperator:
    xi: np.ndarray
    delta: float
    sign: int
    matrix: np.ndarray
    basis: PlaneWaveBasis


def _check_box(basis: PlaneWaveBasis, f: FourierField) -> None:
    if f.zero_padded or f.is_zero():
        return
    span = basis.indices.max(axis=0) - basis.indices.min(axis=0)
    if np.max(span) > f.box:
        raise BasisNotClosed(
            f"basis differences reach {int(np.max(span))} beyond the field box {f.box}"
        )


def potential_matrix(basis: PlaneWaveBasis, V: FourierField) -> np.ndarray:
    dG = basis.indices[:, None, :] - basis.indices[None, :, :]
    return V.lookup(dG)


def w_matrix(basis: PlaneWaveBasis, A: FourierField, xi) -> np.ndarray:
    """Matrix of A.D + D.A: entries A^(G-G') . (q_G + q_G') with q_G = xi + 2*pi*G."""
    q = basis.wavevectors(xi)
    dG = basis.indices[:, None, :] - basis.indices[None, :, :]
    Ahat = A.lookup(dG)
    return np.einsum("ijk,ijk->ij", Ahat, q[:, None, :] + q[None, :, :])


def assemble(
    basis: PlaneWaveBasis,
    V: FourierField,
    A: FourierField,
    xi,
    delta: float,
    sign=1,
) -> BlochOperator:
    if V.kind != "scalar" or A.kind != "vector2":
        raise ConfigInvalid("V must be scalar and A must be vector2")
    if delta < 0:
        raise ConfigInvalid("delta must be nonnegative")
    s = parse_sign(sign)
    _check_box(basis, V)
    _check_box(basis, A)
    xi = np.asarray(xi, dtype=float)
    q = basis.wavevectors(xi)
    H = potential_matrix(basis, V)
    H[np.diag_indices(len(q))] += np.sum(q * q, axis=1)
    if delta != 0 and not A.is_zero():
        H = H + (s * delta) * w_matrix(basis, A, xi)
    # the entries are Hermitian by construction; symmetrize away rounding
    H = 0.5 * (H + H.conj().T)
    return BlochOperator(xi=xi, delta=float(delta), sign=s, matrix=H, basis=basis)


def eigensolve(op, count: int | None = None, check: bool = True):
    """Lowest ``count`` eigenpairs of a Hermitian matrix or BlochOperator, ascending."""
    H = op.matrix if isinstance(op, BlochOperator) else np.asarray(op)
    N = H.shape[0]
    count = N if count is None else int(count)
    if not 0 < count <= N:
        raise ConfigInvalid(f"count must be in [1, {N}]")
    try:
        if count == N:
            w, U = scipy.linalg.eigh(H, driver="evd")
        else:
            w, U = scipy.linalg.eigh(H, subset_by_index=[0, count - 1], driver="evr")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc
    if check:
        resid = np.linalg.norm(H @ U - U * w, axis=0)
        worst = float(np.max(resid / (1.0 + np.abs(w))))
        if worst > 1e-9:
            raise ConvergenceFailure("eigenpair residual too large", residual=worst)
        ortho = float(np.max(np.abs(U.conj().T @ U - np.eye(count))))
        if ortho > 1e-10:
            raise ConvergenceFailure("eigenvectors not orthonormal", residual=ortho)
    return w, U


def bloch_eigen(
    V, A, xi, delta: float, sign=1, count: int = 8, cutoff_box: float = DEFAULT_CUTOFF_BOX,
    geometry=None, vectors: bool = False,
):
    """Eigenpairs at xi with a basis centered on xi (periodic in xi exactly)."""
    basis = PlaneWaveBasis.default(center=xi, cutoff_box=cutoff_box, geometry=geometry)
    op = assemble(basis, V, A, xi, delta, sign)
    w, U = eigensolve(op, count, check=vectors)
    return (w, U, basis) if vectors else w


def torus_grid(grid_n: int, geometry: LatticeGeometry | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(tau, xi) for the uniform grid_n x grid_n grid of the dual cell, row-major in (i, j)."""
    geometry = geometry or build_honeycomb_lattice()
    t = TWO_PI * np.arange(grid_n) / grid_n
    tau = np.array(np.meshgrid(t, t, indexing="ij")).reshape(2, -1).T
    return tau, geometry.from_dual_coordinates(tau)


def default_threads() -> int:
    return os.cpu_count() or 1


def parallel_map(fn, items, threads: int | None = None) -> list:
    """Map in a thread pool with single-threaded BLAS; output in input order."""
    threads = default_threads() if threads is None else max(1, int(threads))
    items = list(items)
    with threadpool_limits(limits=1):
        if threads == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))


@dataclass(frozen=True, eq=False)
class BandSurface:
    grid_n: int
    tau: np.ndarray
    grid: np.ndarray
    bands: np.ndarray

    @property
    def band_count(self) -> int:
        return self.bands.shape[1]

    def to_csv(self, path) -> None:
        header = ["tau1", "tau2", "xi_x", "xi_y"] + [f"lambda_{j + 1}" for j in range(self.band_count)]
        data = np.column_stack([self.tau, self.grid, self.bands])
        np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.12e")


def band_surface(
    V, A, delta: float, sign, grid_n: int, band_count: int,
    cutoff_box: float = DEFAULT_CUTOFF_BOX, threads: int | None = None,
) -> BandSurface:
    if grid_n < 4:
        raise ConfigInvalid("grid_n must be at least 4")
    geometry = build_honeycomb_lattice()
    tau, xis = torus_grid(grid_n, geometry)

    def one(i):
        try:
            return bloch_eigen(V, A, xis[i], delta, sign, band_count, cutoff_box, geometry)
        except ConvergenceFailure as exc:
            exc.where = (int(i // grid_n), int(i % grid_n))
            raise

    bands = np.array(parallel_map(one, range(len(xis)), threads))
    return BandSurface(grid_n=grid_n, tau=tau, grid=xis, bands=bands)


def gap_at(V, A, n: int, xi, delta: float, sign=1, cutoff_box: float = DEFAULT_CUTOFF_BOX) -> float:
    w = bloch_eigen(V, A, xi, delta, sign, n + 1, cutoff_box)
    return float(w[n] - w[n - 1])


def gap_scan(
    V, A, n: int, delta: float, grid_n: int, sign=1,
    cutoff_box: float = DEFAULT_CUTOFF_BOX, threads: int | None = None,
    return_argmin: bool = False,
):
    """Grid minimum of lambda_{n+1} - lambda_n over the dual cell."""
    surf = band_surface(V, A, delta, sign, grid_n, n + 1, cutoff_box, threads)
    gaps = surf.bands[:, n] - surf.bands[:, n - 1]
    i = int(np.argmin(gaps))
    return (float(gaps[i]), surf.grid[i]) if return_argmin else float(gaps[i])


def min_gap(V, A, n: int, delta: float, sign=1, grid_n: int = 12,
            cutoff_box: float = DEFAULT_CUTOFF_BOX, polish: int = 3, threads=None):
    """Minimum of the n-th gap over the torus: grid search then local polishing."""
    surf = band_surface(V, A, delta, sign, grid_n, n + 1, cutoff_box, threads)
    gaps = surf.bands[:, n] - surf.bands[:, n - 1]
    best_val, best_xi = float(np.min(gaps)), surf.grid[int(np.argmin(gaps))]
    for i in np.argsort(gaps)[:polish]:
        res = scipy.optimize.minimize(
            lambda x: gap_at(V, A, n, x, delta, sign, cutoff_box),
            surf.grid[i], method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 400},
        )
        if res.fun < best_val:
            best_val, best_xi = float(res.fun), res.x
    return best_val, np.asarray(best_xi)


@dataclass(frozen=True)
class DeltaSharpEstimate:
    delta_sharp: float
    xi_closing: np.ndarray
    gap_at_closing: float
    scan: tuple


def estimate_delta_sharp(
    V, A, n: int, sign=1, step: float = 0.1, delta_max: float = 20.0,
    grid_n: int = 12, cutoff_box: float = DEFAULT_CUTOFF_BOX, tol: float = 1e-6,
    threads: int | None = None,
) -> DeltaSharpEstimate:
    """Smallest delta > 0 at which the n-th gap closes somewhere on the torus.

    The polished gap minimum g(delta) is scanned on a delta grid; every local
    minimum of the scan seeds a joint (xi, delta) minimisation of the gap, and
    the first seed driving the gap below ``tol`` gives the estimate.  g is not
    monotone, so plain bisection would be unreliable.
    """
    if A.is_zero():
        raise ConfigInvalid("A = 0 never opens a gap")
    deltas, values, points = [], [], []

    def joint(d0, x0):
        def f(p):
            return gap_at(V, A, n, p[:2], abs(p[2]), sign, cutoff_box)

        lo, hi = max(0.5 * step, d0 - step), d0 + step
        simplex = np.array([[*x0, d0], [*(x0 + [0.05, 0]), d0], [*(x0 + [0, 0.05]), d0],
                            [*x0, min(hi, d0 + 0.5 * step)]])
        bounds = [(None, None), (None, None), (lo, hi)]
        res = scipy.optimize.minimize(
            f, np.array([*x0, d0]), method="Nelder-Mead", bounds=bounds,
            options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 4000, "initial_simplex": simplex},
        )
        return float(res.fun), res.x

    d = step
    while d <= delta_max + 1e-12:
        g, x = min_gap(V, A, n, d, sign, grid_n, cutoff_box, threads=threads)
        deltas.append(d)
        values.append(g)
        points.append(x)
        k = len(values) - 2
        # interior local minima only: the boundary seed would slide to the delta = 0 closing
        if k >= 1 and values[k] <= values[k + 1] and values[k] <= values[k - 1]:
            val, p = joint(deltas[k], points[k])
            if val < tol and abs(p[2]) > 0:
                return DeltaSharpEstimate(abs(float(p[2])), p[:2], val, tuple(zip(deltas, values)))
        d += step
    raise ConvergenceFailure(f"no gap closing found for delta <= {delta_max}")
