"""Command line entry point: ``bloch-topo <subcommand> --config path [--key value]...``.

Exit codes: 0 pass, 1 theorem check failed, 2 numerical failure, 3 config error.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import numpy as np

from . import bloch, dirac1d, edge, topology
from .dirac_point import DiracPointData, extract, w_matrix_elements
from .errors import BlochTopoError, ConfigInvalid
from .fields import canonical_potential, canonical_vector_potential
from .lattice import ELL_VARIANTS, build_honeycomb_lattice, edge_frame

EXIT_PASS, EXIT_THEOREM, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2, 3
AUTO_FRACTION = 0.8


@dataclass(frozen=True)
class Grids:
    bz: int = 24
    zeta: int = 64
    mu: int = 64


@dataclass(frozen=True)
class RunConfig:
    potential_amplitude: float = 10.0
    vector_amplitude: float = 1.0
    cutoff_box: int = 6
    delta: float | str = "auto"
    edge: tuple = (1, 0)
    grids: Grids = field(default_factory=Grids)
    ell_variant: str = "kprime-orthogonal"
    output_dir: str = "bloch_topo_out"
    sign: str = "+"
    band_count: int = 4
    tau_n: int = 64
    fixture: str | None = None

    def __post_init__(self) -> None:
        for name in ("potential_amplitude", "vector_amplitude"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigInvalid(f"{name} must be a finite number")
            if v == 0:
                # no Dirac points (V = 0) or no gap (A = 0): nothing to verify
                raise ConfigInvalid(f"{name} must be nonzero")
        if self.delta != "auto":
            if not isinstance(self.delta, (int, float)) or not math.isfinite(self.delta) or self.delta <= 0:
                raise ConfigInvalid("delta must be 'auto' or a positive number")
        for name in ("bz", "zeta", "mu"):
            if getattr(self.grids, name) < 8:
                raise ConfigInvalid(f"grids.{name} must be at least 8")
        if self.grids.mu % 2:
            raise ConfigInvalid("grids.mu must be even")
        if self.ell_variant not in ELL_VARIANTS:
            raise ConfigInvalid(f"ell_variant must be one of {ELL_VARIANTS}")
        if self.sign not in ("+", "-"):
            raise ConfigInvalid("sign must be '+' or '-'")
        if self.cutoff_box < 2 or self.band_count < 2 or self.tau_n < 8:
            raise ConfigInvalid("cutoff_box >= 2, band_count >= 2 and tau_n >= 8 are required")
        if len(self.edge) != 2:
            raise ConfigInvalid("edge must be a pair [a1, a2]")

    def to_json(self) -> dict:
        d = asdict(self)
        d["edge"] = {"a1": int(self.edge[0]), "a2": int(self.edge[1])}
        return d

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        if "grids" in data:
            g = data["grids"]
            bad = set(g) - set(Grids.__dataclass_fields__)
            if bad:
                raise ConfigInvalid(f"unknown grids keys: {sorted(bad)}")
            data["grids"] = Grids(**{k: int(v) for k, v in g.items()})
        if "edge" in data:
            e = data["edge"]
            data["edge"] = (int(e["a1"]), int(e["a2"])) if isinstance(e, dict) else tuple(int(x) for x in e)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from exc


def load_config(path: str | None, overrides: dict) -> RunConfig:
    data: dict = {}
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    grids = dict(data.get("grids", {}))
    for key, value in overrides.items():
        if value is None:
            continue
        if key.startswith("grids_"):
            grids[key[len("grids_"):]] = value
        else:
            data[key] = value
    if grids:
        data["grids"] = grids
    if isinstance(data.get("delta"), str) and data["delta"] != "auto":
        try:
            data["delta"] = float(data["delta"])
        except ValueError as exc:
            raise ConfigInvalid(f"delta must be 'auto' or a number, got {data['delta']!r}") from exc
    return RunConfig.from_mapping(data)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


class Run:
    """Shared state for one invocation: fields, fixture and lazily computed delta."""

    def __init__(self, config: RunConfig, threads: int | None):
        self.config = config
        self.threads = threads
        self.out = Path(config.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.V = canonical_potential(config.potential_amplitude)
        self.A = canonical_vector_potential(config.vector_amplitude)
        self.geometry = build_honeycomb_lattice()
        self.summary: dict = {}
        self.stage = "setup"
        self._data = None
        self._delta = None

    @property
    def data(self) -> DiracPointData:
        if self._data is None:
            self.stage = "extract"
            if self.config.fixture:
                self._data = DiracPointData.load(self.config.fixture)
            else:
                self._data = extract(self.V, self.A, cutoff_box=self.config.cutoff_box)
            self.summary.update(theta_star=self._data.theta_star, nu_F=self._data.nu_F,
                                E_star=self._data.E_star, n=self._data.n)
        return self._data

    @property
    def delta(self) -> float:
        if self._delta is None:
            if self.config.delta == "auto":
                n = self.data.n
                self.stage = "gap_scan"
                est = bloch.estimate_delta_sharp(self.V, self.A, n, grid_n=12,
                                                 cutoff_box=self.config.cutoff_box, threads=self.threads)
                self.summary["delta_sharp_est"] = est.delta_sharp
                self.summary["xi_closing"] = est.xi_closing
                self._delta = AUTO_FRACTION * est.delta_sharp
            else:
                self.summary["delta_sharp_est"] = None
                self._delta = float(self.config.delta)
            self.summary["delta"] = self._delta
        return self._delta

    def frame(self):
        self.stage = "edge_frame"
        return edge_frame(self.geometry, *self.config.edge, ell_variant=self.config.ell_variant)

    def sgn(self) -> int:
        return 1 if self.data.theta_star > 0 else -1

    def write_summary(self, **extra) -> None:
        body = {"config": self.config.to_json(), **self.summary, **extra}
        text = json.dumps(_jsonable(body), indent=2, sort_keys=True)
        (self.out / "summary.json").write_text(text + "\n", encoding="utf-8")


def _run(config: RunConfig, threads: int | None, body) -> None:
    run = None
    try:
        run = Run(config, threads)
        code = body(run)
    except ConfigInvalid as exc:
        click.echo(f"config error: {type(exc).__name__}: {exc}", err=True)
        code = EXIT_CONFIG
    except BlochTopoError as exc:
        stage = run.stage if run else "setup"
        click.echo(f"numerical failure in stage {stage}: {type(exc).__name__}: {exc}", err=True)
        if run is not None:
            run.write_summary(failed_stage=stage, error=f"{type(exc).__name__}: {exc}", **{"pass": False})
        code = EXIT_NUMERICAL
    sys.exit(code)


def _common(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON run configuration."),
        click.option("--threads", type=int, default=None, help="Worker count (default: all cores)."),
        click.option("--potential-amplitude", type=float, default=None),
        click.option("--vector-amplitude", type=float, default=None),
        click.option("--cutoff-box", type=int, default=None),
        click.option("--delta", type=str, default=None, help="Number or 'auto' (0.8 x estimated delta-sharp)."),
        click.option("--edge", type=str, default=None, help="Edge direction as 'a1,a2'."),
        click.option("--grids-bz", type=int, default=None),
        click.option("--grids-zeta", type=int, default=None),
        click.option("--grids-mu", type=int, default=None),
        click.option("--ell-variant", type=click.Choice(ELL_VARIANTS), default=None),
        click.option("--output-dir", type=str, default=None),
        click.option("--sign", type=click.Choice(["+", "-"]), default=None),
        click.option("--band-count", type=int, default=None),
        click.option("--tau-n", type=int, default=None),
        click.option("--fixture", type=click.Path(dir_okay=False), default=None,
                     help="DiracPointData JSON to use instead of extracting."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _resolve(kw: dict) -> tuple[RunConfig | None, int | None]:
    path = kw.pop("config_path")
    threads = kw.pop("threads")
    if kw.get("edge") is not None:
        try:
            kw["edge"] = tuple(int(x) for x in kw["edge"].split(","))
        except ValueError:
            click.echo("config error: --edge must look like '1,0'", err=True)
            sys.exit(EXIT_CONFIG)
    try:
        return load_config(path, kw), threads
    except ConfigInvalid as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _sign(run: Run) -> int:
    return bloch.parse_sign(run.config.sign)


@click.group()
def main() -> None:
    """Bulk and edge topology of magnetically perturbed honeycomb Schroedinger operators."""


@main.command("bands")
@_common
def cmd_bands(**kw) -> None:
    """Band surface on the dual cell and the grid gap minimum."""
    config, threads = _resolve(kw)

    def body(run: Run) -> int:
        c = run.config
        n, delta = run.data.n, run.delta
        run.stage = "bands"
        surf = bloch.band_surface(run.V, run.A, delta, _sign(run), c.grids.bz,
                                  max(c.band_count, n + 1), c.cutoff_box, run.threads)
        surf.to_csv(run.out / "bands.csv")
        gaps = surf.bands[:, n] - surf.bands[:, n - 1]
        run.write_summary(gap_scan=float(np.min(gaps)), rows=len(surf.grid), band_count=surf.band_count)
        return EXIT_PASS

    _run(config, threads, body)


@main.command("dirac")
@_common
def cmd_dirac(**kw) -> None:
    """Extract the Dirac point data and write it as a reusable fixture."""
    config, threads = _resolve(kw)

    def body(run: Run) -> int:
        d = run.data
        d.save(run.out / "dirac_point.json")
        run.stage = "w_matrix"
        Wm = w_matrix_elements(d, run.A)
        run.write_summary(xi_star=d.xi_star, nu_star=d.nu_star, w_matrix=[[complex(x) for x in r] for r in Wm])
        return EXIT_PASS

    _run(config, threads, body)


def _chern_pair(run: Run) -> tuple[topology.CurvatureGrid, topology.CurvatureGrid]:
    c, n, delta = run.config, run.data.n, run.delta
    run.stage = "chern_plus"
    plus = topology.chern_link_variable(run.V, run.A, delta, 1, n, c.grids.bz, c.cutoff_box, run.threads)
    run.stage = "chern_minus"
    minus = topology.chern_link_variable(run.V, run.A, delta, -1, n, c.grids.bz, c.cutoff_box, run.threads)
    return plus, minus


@main.command("chern")
@_common
def cmd_chern(**kw) -> None:
    """Link-variable Chern numbers of both perturbations."""
    config, threads = _resolve(kw)

    def body(run: Run) -> int:
        s = run.sgn()
        plus, minus = _chern_pair(run)
        (plus if run.config.sign == "+" else minus).to_csv(run.out / "curvature.csv")
        ok = plus.chern == -s and minus.chern == s
        run.write_summary(chern_plus=int(plus.chern), chern_minus=int(minus.chern), **{"pass": ok})
        return EXIT_PASS if ok else EXIT_THEOREM

    _run(config, threads, body)


def _edge(run: Run) -> edge.EdgeSpectrum:
    c = run.config
    frame = run.frame()
    delta = run.delta
    run.stage = "edge_branches"
    cfg = edge.EdgeOperatorConfig(frame, delta, cutoff_box=c.cutoff_box, n=run.data.n)
    spec = edge.edge_branches(run.V, run.A, cfg, c.grids.zeta, c.tau_n, threads=run.threads)
    spec.to_csv(run.out / "edge_branches.csv")
    lo, hi = spec.gap_window[:, 0], spec.gap_window[:, 1]
    run.summary.update(window_min=float(np.min(lo)), window_max=float(np.max(hi)),
                       window_width_min=float(np.min(hi - lo)), T=cfg.T)
    return spec


@main.command("edge")
@_common
def cmd_edge(**kw) -> None:
    """Wall spectrum along a rational edge and its spectral flow."""
    config, threads = _resolve(kw)

    def body(run: Run) -> int:
        spec = _edge(run)
        ok = spec.flow == -2 * run.sgn()
        run.write_summary(edge_flow=spec.flow, expected=-2 * run.sgn(), **{"pass": ok})
        return EXIT_PASS if ok else EXIT_THEOREM

    _run(config, threads, body)


def _dirac1d(run: Run) -> edge.EdgeSpectrum:
    frame = run.frame()
    run.stage = "dirac_flow"
    cfg = dirac1d.DiracFamilyConfig.from_dirac(run.data, frame)
    spec = dirac1d.dirac_branches(cfg, run.config.grids.mu)
    with open(run.out / "dirac1d.csv", "w", encoding="utf-8") as fh:
        fh.write("mu,value,tag,branch_id\n")
        for mu, v, tag, b in _dirac_rows(spec):
            fh.write(f"{mu:.12e},{v:.12e},{tag},{b}\n")
    return spec


def _dirac_rows(spec):
    for nd, ids in zip(spec.nodes, spec.branch_ids):
        for v, tag, b in zip(nd.values, nd.tags, ids):
            yield nd.mu, float(v), tag, int(b)


@main.command("dirac1d")
@_common
def cmd_dirac1d(**kw) -> None:
    """Spectral flow of the effective one-dimensional Dirac family."""
    config, threads = _resolve(kw)

    def body(run: Run) -> int:
        spec = _dirac1d(run)
        ok = spec.flow == -run.sgn()
        run.write_summary(dirac1d_flow=spec.flow, expected=-run.sgn(), **{"pass": ok})
        return EXIT_PASS if ok else EXIT_THEOREM

    _run(config, threads, body)


@main.command("twoband")
@_common
def cmd_twoband(**kw) -> None:
    """Curvature integral of the two-band model on shrinking disks."""
    config, threads = _resolve(kw)

    def body(run: Run) -> int:
        delta = run.delta
        run.stage = "twoband"
        model = topology.TwoBandModel.from_dirac(run.data, delta, _sign(run))
        rows = []
        for eps1 in (0.05, 0.1, 0.2, 0.4):
            val = topology.twoband_disk_integral(model, eps1)
            rows.append({"eps1": eps1, "integral": val,
                         "closed_form": topology.twoband_disk_closed_form(model, eps1),
                         "tail": topology.twoband_tail(model, eps1)})
        target = -0.5 * np.sign(model.theta_star)
        ok = all(abs(r["integral"] - target) <= r["tail"] + 1e-6 for r in rows)
        run.write_summary(disks=rows, limit=target, **{"pass": bool(ok)})
        return EXIT_PASS if ok else EXIT_THEOREM

    _run(config, threads, body)


@main.command("verify")
@_common
def cmd_verify(**kw) -> None:
    """Full pipeline: Dirac point, gap, both Chern numbers, edge flow and effective flow."""
    config, threads = _resolve(kw)

    def body(run: Run) -> int:
        run.frame()  # armchair / non-coprime edges fail before any heavy work
        s = run.sgn()
        delta = run.delta
        run.stage = "gap_scan"
        g, _ = bloch.min_gap(run.V, run.A, run.data.n, delta, 1, 12, run.config.cutoff_box, threads=run.threads)
        run.summary["gap_min"] = g
        plus, minus = _chern_pair(run)
        plus.to_csv(run.out / "curvature.csv")
        spec = _edge(run)
        dspec = _dirac1d(run)
        checks = {
            "chern_plus": (int(plus.chern), -s),
            "chern_minus": (int(minus.chern), s),
            "edge_flow": (spec.flow, -2 * s),
            "dirac1d_flow": (dspec.flow, -s),
        }
        ok = all(got == want for got, want in checks.values())
        failed = [k for k, (got, want) in checks.items() if got != want]
        run.write_summary(**{k: v[0] for k, v in checks.items()}, failed=failed, **{"pass": ok})
        if not ok:
            click.echo(f"theorem check failed: {', '.join(failed)}", err=True)
        return EXIT_PASS if ok else EXIT_THEOREM

    _run(config, threads, body)


if __name__ == "__main__":  # pragma: no cover
    main()
