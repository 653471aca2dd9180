"""Lambda-periodic scalar and vector fields stored as dual-lattice Fourier series.

A field is ``sum_m c(m) exp(i <2*pi*(m1*k1 + m2*k2), x>)`` with finitely many
nonzero ``c(m)``.  Scalar coefficients are complex numbers, vector coefficients
are complex 2-vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lattice import LatticeGeometry, build_honeycomb_lattice, rotation_index_action

KINDS = ("scalar", "vector2")
SYMMETRIES = ("honeycomb-even", "odd-periodic", "none")

# R-orbit of the shortest nonzero dual vectors
BASE_ORBIT = ((1, 0), (0, 1), (-1, -1))


@dataclass(frozen=True, eq=False)
class FourierField:
    kind: str
    coeffs: dict
    symmetry: str = "none"
    box: int | None = None
    zero_padded: bool = True
    _table: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.symmetry not in SYMMETRIES:
            raise ValueError(f"symmetry must be one of {SYMMETRIES}")
        clean = {}
        for m, c in self.coeffs.items():
            m = (int(m[0]), int(m[1]))
            c = complex(c) if self.kind == "scalar" else np.asarray(c, dtype=complex).reshape(2)
            if np.any(np.abs(c) > 0):
                clean[m] = c
        object.__setattr__(self, "coeffs", clean)
        support_box = max((max(abs(m[0]), abs(m[1])) for m in clean), default=0)
        if self.box is None:
            object.__setattr__(self, "box", support_box)
        elif support_box > self.box:
            raise ValueError(f"support reaches index {support_box} outside declared box {self.box}")

    @property
    def shape(self) -> tuple:
        return () if self.kind == "scalar" else (2,)

    def coeff(self, m):
        zero = 0j if self.kind == "scalar" else np.zeros(2, dtype=complex)
        return self.coeffs.get((int(m[0]), int(m[1])), zero)

    def table(self) -> tuple[int, np.ndarray]:
        """Dense coefficient array indexed by ``m + box`` (cached)."""
        if "dense" not in self._table:
            B = self.box
            arr = np.zeros((2 * B + 1, 2 * B + 1) + self.shape, dtype=complex)
            for (m1, m2), c in self.coeffs.items():
                arr[m1 + B, m2 + B] = c
            self._table["dense"] = arr
        return self.box, self._table["dense"]

    def lookup(self, dm: np.ndarray) -> np.ndarray:
        """Coefficients at an integer array of differences ``dm[..., 2]``; zero off support."""
        B, arr = self.table()
        d1, d2 = dm[..., 0], dm[..., 1]
        inside = (np.abs(d1) <= B) & (np.abs(d2) <= B)
        out = np.zeros(dm.shape[:-1] + self.shape, dtype=complex)
        out[inside] = arr[d1[inside] + B, d2[inside] + B]
        return out

    def scaled(self, factor: float) -> "FourierField":
        return FourierField(
            self.kind,
            {m: factor * c for m, c in self.coeffs.items()},
            self.symmetry,
            self.box,
            self.zero_padded,
        )

    def is_zero(self) -> bool:
        return not self.coeffs

    def to_json(self) -> dict:
        rows = []
        for m in sorted(self.coeffs):
            c = self.coeffs[m]
            if self.kind == "scalar":
                rows.append({"m": list(m), "re": c.real, "im": c.imag})
            else:
                rows.append({"m": list(m), "re": c.real.tolist(), "im": c.imag.tolist()})
        return {"kind": self.kind, "symmetry": self.symmetry, "coeffs": rows}

    @classmethod
    def from_json(cls, data: dict) -> "FourierField":
        kind = data["kind"]
        coeffs = {}
        for row in data["coeffs"]:
            re, im = np.asarray(row["re"], dtype=float), np.asarray(row["im"], dtype=float)
            c = re + 1j * im
            coeffs[tuple(row["m"])] = complex(c) if kind == "scalar" else c
        return cls(kind, coeffs, data.get("symmetry", "none"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load(cls, path) -> "FourierField":
        return cls.from_json(json.loads(Path(path).read_text()))


def zero_field(kind: str = "scalar") -> FourierField:
    return FourierField(kind, {}, "none")


def canonical_potential(amplitude: float = 10.0) -> FourierField:
    """Three-cosine honeycomb potential with coefficient amplitude/2 on the six shortest dual vectors."""
    if amplitude == 0:
        raise ValueError("amplitude must be nonzero")
    coeffs = {}
    for m in BASE_ORBIT:
        coeffs[m] = amplitude / 2
        coeffs[(-m[0], -m[1])] = amplitude / 2
    return FourierField("scalar", coeffs, "honeycomb-even")


def canonical_vector_potential(
    amplitude: float = 1.0, parity: str = "odd", geometry: LatticeGeometry | None = None
) -> FourierField:
    """Real transverse vector field built on the shortest R-orbit.

    ``parity="odd"`` gives sine modes (A(-x) = -A(x)); ``parity="even"`` gives
    cosine modes and exists only for experiments.
    """
    if amplitude == 0:
        raise ValueError("amplitude must be nonzero")
    if parity not in ("odd", "even"):
        raise ValueError("parity must be 'odd' or 'even'")
    geometry = geometry or build_honeycomb_lattice()
    coeffs = {}
    for m in BASE_ORBIT:
        M = geometry.wavevector(m)
        u = np.array([-M[1], M[0]]) / np.linalg.norm(M)
        if parity == "odd":
            c = amplitude / 2j * u
            coeffs[m], coeffs[(-m[0], -m[1])] = c, -c
        else:
            c = amplitude / 2 * u.astype(complex)
            coeffs[m], coeffs[(-m[0], -m[1])] = c, c
    return FourierField("vector2", coeffs, "odd-periodic" if parity == "odd" else "none")


def evaluate(f: FourierField, x, geometry: LatticeGeometry | None = None):
    """Pointwise value at x (a 2-vector or an (N, 2) array); the real part is returned."""
    geometry = geometry or build_honeycomb_lattice()
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    if f.is_zero():
        out = np.zeros((len(xs),) + f.shape)
    else:
        ms = np.array(list(f.coeffs.keys()))
        cs = np.array(list(f.coeffs.values()))
        phase = np.exp(1j * xs @ geometry.wavevector(ms).T)
        vals = phase @ cs
        imag = np.max(np.abs(vals.imag)) if vals.size else 0.0
        if imag > 1e-10 * max(1.0, np.max(np.abs(vals))):
            raise ValueError(f"field is not real: imaginary part {imag:.3e}")
        out = vals.real
    return out[0] if single else out


def _orbit(m, use_rotation: bool, use_parity: bool) -> list:
    pts = [tuple(m)]
    if use_rotation:
        r1 = rotation_index_action(m)
        pts += [r1, rotation_index_action(r1)]
    if use_parity:
        pts += [(-p[0], -p[1]) for p in pts]
    return pts


def symmetrize(f: FourierField, target: str) -> FourierField:
    """Project onto real fields with the target symmetry by group averaging."""
    if target not in SYMMETRIES:
        raise ValueError(f"target must be one of {SYMMETRIES}")
    # reality projection: c(m) <- (c(m) + conj c(-m)) / 2
    keys = set(f.coeffs) | {(-m[0], -m[1]) for m in f.coeffs}
    real = {m: 0.5 * (f.coeff(m) + np.conj(f.coeff((-m[0], -m[1])))) for m in keys}
    g = FourierField(f.kind, real, "none")
    if target == "none":
        return FourierField(f.kind, g.coeffs, "none", f.box)
    out = {}
    if target == "honeycomb-even":
        if f.kind != "scalar":
            raise ValueError("honeycomb-even applies to scalar fields")
        keys = set()
        for m in g.coeffs:
            keys.update(_orbit(m, True, True))
        for m in keys:
            orb = _orbit(m, True, True)
            out[m] = sum(g.coeff(p) for p in orb) / len(orb)
    else:
        keys = set(g.coeffs) | {(-m[0], -m[1]) for m in g.coeffs}
        for m in keys:
            out[m] = 0.5 * (g.coeff(m) - g.coeff((-m[0], -m[1])))
    return FourierField(f.kind, out, target)


def symmetry_residuals(f: FourierField) -> dict:
    """Maximal coefficient defects for reality, parity and rotation invariance."""
    res = {"reality": 0.0, "even": 0.0, "odd": 0.0, "rotation": 0.0}
    for m, c in f.coeffs.items():
        neg = f.coeff((-m[0], -m[1]))
        res["reality"] = max(res["reality"], float(np.max(np.abs(neg - np.conj(c)))))
        res["even"] = max(res["even"], float(np.max(np.abs(neg - c))))
        res["odd"] = max(res["odd"], float(np.max(np.abs(neg + c))))
        if f.kind == "scalar":
            res["rotation"] = max(res["rotation"], abs(f.coeff(rotation_index_action(m)) - c))
    return res
