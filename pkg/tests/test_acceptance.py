"""End-to-end acceptance checks on the canonical fixture.

Each test records one PASS/FAIL line; the lines are repeated in the terminal
summary under "acceptance criteria".
"""

import filecmp
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from bloch_topo.bloch import torus_grid
from bloch_topo.dirac1d import DiracFamilyConfig, dirac_branches, edge_near_dirac, edge_vs_effective
from bloch_topo.dirac_point import cone_fit, dirac_gap, extract, velocity_element, w_matrix_elements
from bloch_topo.edge import DomainWall, EdgeOperatorConfig, default_T, edge_branches, gap_windows
from bloch_topo.lattice import TWO_PI
from bloch_topo.topology import (
    TwoBandModel,
    chern_curvature_integral,
    chern_link_variable,
    curvature_decay_check,
    curvature_trace,
    twoband_disk_integral,
    twoband_tail,
)

from conftest import ACCEPTANCE_LINES, DELTA_SHARP

pytestmark = pytest.mark.slow


def record(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def sgn(dirac):
    return int(np.sign(dirac.theta_star))


def test_01_bulk_chern_numbers(V, A, sgn):
    got, slowest = {}, 0.0
    for frac in (0.5, 0.8):
        for grid in (12, 24):
            for sign in ("+", "-"):
                t = time.perf_counter()
                got[(frac, grid, sign)] = chern_link_variable(V, A, frac * DELTA_SHARP, sign, 1, grid).chern
                slowest = max(slowest, time.perf_counter() - t)
    ok = all(c == (-sgn if s == "+" else sgn) for (_, _, s), c in got.items()) and slowest <= 300
    vals = ", ".join(f"{f}/{g}/{s}:{int(c):+d}" for (f, g, s), c in got.items())
    record(1, "c1(+) = -sgn(theta), c1(-) = +sgn(theta)", ok, f"{vals}; slowest {slowest:.1f}s")


def test_02_edge_flow(V, A, zigzag, sgn):
    delta = 0.8 * DELTA_SHARP
    t0 = time.perf_counter()
    base = EdgeOperatorConfig(zigzag, delta)
    double = EdgeOperatorConfig(zigzag, delta, T=2 * base.T)
    flows = {}
    for N in (48, 96):
        zetas = TWO_PI * np.arange(N) / N
        win = gap_windows(V, A, base, zetas, tau_n=64)
        flows[(N, base.T)] = edge_branches(V, A, base, N, windows=win).flow
        if N == 48:
            flows[(N, double.T)] = edge_branches(V, A, double, N, windows=win).flow
    elapsed = time.perf_counter() - t0
    ok = all(f == -2 * sgn for f in flows.values()) and elapsed <= 1800
    detail = ", ".join(f"N={N} T={T}: {f:+d}" for (N, T), f in flows.items())
    record(2, "edge flow = -2 sgn(theta), stable in N and T", ok, f"{detail}; {elapsed:.0f}s")


def test_03_effective_flow(V, A, zigzag, sgn):
    t0 = time.perf_counter()
    rows = []
    for which in ("A-point", "B-point"):
        d = extract(V, A, which=which)
        cfg = DiracFamilyConfig.from_dirac(d, zigzag)
        kink = dirac_branches(cfg, 64, "kink").flow
        anti = dirac_branches(cfg, 64, "antikink").flow
        rows.append((which, kink, anti))
    elapsed = time.perf_counter() - t0
    ok = all(k == -sgn and k + a == 0 for _, k, a in rows) and elapsed <= 60
    detail = ", ".join(f"{w}: kink {k:+d} antikink {a:+d}" for w, k, a in rows)
    record(3, "dirac_flow = -sgn(theta) per kink, total 0", ok, f"{detail}; {elapsed:.1f}s")


def test_04_gap_asymptotics(V, A, dirac):
    ratios = []
    for c in (0.02, 0.01, 0.005):
        delta = c / dirac.theta_F
        ratios.append(dirac_gap(V, A, dirac, delta) / (delta * dirac.theta_F))
    ok = all(1.8 <= r <= 2.2 for r in ratios)
    record(4, "gap / (delta theta_F) in [1.8, 2.2]", ok, ", ".join(f"{r:.6f}" for r in ratios))


def test_05_fermi_velocity(V, A, dirac):
    s, _ = cone_fit(V, A, dirac, [0.01, 0.02, 0.04])
    rel = abs(s - dirac.nu_F) / dirac.nu_F
    d2 = velocity_element(dirac, (0.0, 1.0))
    lin = abs(d2 - 1j * dirac.nu_star) / abs(dirac.nu_star)
    ok = rel < 0.05 and lin < 1e-6
    record(5, "cone slope vs nu_F, eta-linearity", ok, f"slope {s:.6f} vs {dirac.nu_F:.6f} ({rel:.2e}); linearity {lin:.1e}")


def test_06_curvature_vanishes_without_field(V, A, geometry):
    _, xis = torus_grid(24, geometry)
    far = xis[geometry.dirac_distance(xis) >= 0.5]
    B = np.array([curvature_trace(V, A, 0.0, 1, 1, x) for x in far])
    Bm = np.array([curvature_trace(V, A, 0.0, 1, 1, -x) for x in far])
    peak, anti = float(np.max(np.abs(B))), float(np.max(np.abs(B + Bm)))
    ok = peak < 1e-5 and anti < 1e-6
    record(6, "B_0 = 0 away from the K-points", ok, f"{len(far)} points, max|B| {peak:.1e}, max|B(x)+B(-x)| {anti:.1e}")


def test_07_curvature_linear_decay(V, A):
    deltas = [0.4, 0.2, 0.1, 0.05, 0.025]
    table = curvature_decay_check(V, A, 1, 0.5, deltas, grid_n=16)
    ratios = [table[i][1] / table[i + 1][1] for i in range(len(table) - 1)]
    ok = all(1.4 <= r <= 2.6 for r in ratios)
    record(7, "sup |B_delta| halves with delta", ok, "ratios " + ", ".join(f"{r:.3f}" for r in ratios))


def test_08_twoband_disk_integral(dirac):
    worst, rows = -np.inf, []
    for delta in (0.05, 0.01):
        for sign in (1, -1):
            m = TwoBandModel.from_dirac(dirac, delta, sign)
            target = -0.5 * np.sign(m.theta_star)
            for eps1 in (0.01, 0.05, 0.2, 0.5):
                dev = abs(twoband_disk_integral(m, eps1) - target)
                worst = max(worst, dev - (twoband_tail(m, eps1) + 1e-6))
            rows.append(f"{delta}/{'+' if sign > 0 else '-'}: {twoband_disk_integral(m, 0.5):+.6f}")
    ok = worst <= 0
    record(8, "disk integral -> -sgn(theta)/2 within the tail", ok, "; ".join(rows))


def test_09_oracle_equivalence(V, A):
    rows, ok = [], True
    delta = 0.5 * DELTA_SHARP
    for grid in (12, 24):
        link = chern_link_variable(V, A, delta, 1, 1, grid).chern
        raw = chern_curvature_integral(V, A, delta, 1, 1, grid).chern
        ok &= link == np.rint(raw) and abs(raw - np.rint(raw)) <= 0.02
        rows.append(f"grid {grid}: link {int(link):+d}, integral {raw:+.7f}")
    record(9, "link variable = rounded curvature integral", bool(ok), "; ".join(rows))


def test_10_w_matrix_structure(A, dirac):
    W = w_matrix_elements(dirac, A)
    off = float(max(abs(W[0, 1]), abs(W[1, 0])))
    tr = float(abs(np.trace(W)))
    ok = off < 1e-7 and tr < 1e-9
    record(10, "W is diagonal and traceless on the Dirac frame", ok, f"off-diag {off:.1e}, trace {tr:.1e}")


def test_11_spectral_shadow(V, A, zigzag, dirac):
    fam = DiracFamilyConfig.from_dirac(dirac, zigzag)
    mus = (-1.0, -0.5, -0.25, 0.25, 0.5, 1.0)
    reports = []
    for frac in (0.2, 0.1):
        delta = frac * DELTA_SHARP
        cfg = EdgeOperatorConfig(zigzag, delta, T=4 * default_T(DomainWall(), delta), cutoff_box=4)
        spec = edge_near_dirac(V, A, cfg, dirac.E_star, mus)
        reports.append(edge_vs_effective(spec, fam, delta, zigzag.zeta_star, dirac.E_star))
    coarse, fine = reports
    slopes = all(abs(r.edge_slope / r.dirac_slope - 1) <= 0.15 for r in reports)
    ok = fine.max_deviation < 0.9 * coarse.max_deviation and fine.counts_match and slopes
    detail = "; ".join(
        f"delta {r.delta:.3f}: max dev {r.max_deviation:.3f}, counts {'match' if r.counts_match else 'differ'}, "
        f"slope {r.edge_slope:.3f} vs {r.dirac_slope:.3f}" for r in reports
    )
    record(11, "edge branches shadow D(mu) as delta halves", ok, detail)


def _verify(out, threads):
    cmd = [sys.executable, "-m", "bloch_topo.cli", "verify", "--output-dir", str(out), "--threads", str(threads),
           "--grids-bz", "12", "--grids-zeta", "48", "--grids-mu", "32", "--tau-n", "32"]
    return subprocess.run(cmd, capture_output=True, text=True)


def test_12_determinism(tmp_path):
    out = tmp_path / "run"
    snaps, codes = [], []
    for i, threads in enumerate((1, 1, max(4, os.cpu_count() or 1))):
        res = _verify(out, threads)
        codes.append(res.returncode)
        snap = tmp_path / f"snap{i}"
        snap.mkdir()
        for f in sorted(out.iterdir()):
            (snap / f.name).write_bytes(f.read_bytes())
        snaps.append(snap)
    names = sorted(p.name for p in snaps[0].iterdir())
    same = all(
        sorted(p.name for p in s.iterdir()) == names
        and all(filecmp.cmp(snaps[0] / n, s / n, shallow=False) for n in names)
        for s in snaps[1:]
    )
    ok = same and codes == [0, 0, 0]
    record(12, "cmd_verify output is bit-identical", ok, f"exit codes {codes}, files {names}")
