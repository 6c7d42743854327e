"""Experiment orchestration: presets, validation, and CSV/JSON emission.

Every preset writes plain CSV data files plus a JSON run manifest.  The
CSV bodies are deterministic for a fixed configuration and seed (floats
are written with 17 significant digits, row order is fixed by the grid);
wall-clock information lives only in the manifest.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import eigenstate_entropy_table, fit_log_slope, normalized_fluctuation, resolve_mid_count
from .dynamics import quench_entropy_table
from .model import ModelParams

PRESETS = ("fig1", "fig3", "fig4", "fig5", "custom")


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the full diagnostics list."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one run; see the preset table for defaults."""

    preset: str = "custom"
    L: tuple = (256,)
    delta: tuple = (1.0,)
    m: tuple = (1,)
    basis: str = "real"  # real | momentum | both
    bc: str = "open"
    n_phi: int = 100
    seed: int = 42
    mid_count: object = 10  # int | "all" | "L/<k>"
    selector: str = "mid"  # mid | ground
    t_min: float = 0.1
    t_max: float = 100.0
    t_points: int = 60
    times: tuple | None = None  # explicit grid overrides t_min/t_max/t_points
    fit_window: tuple = (3.0, 30.0)
    initial_site: int | None = None
    momentum_order: str = "index"  # index | kinetic
    jobs: int = 1
    out: str = "."

    def time_grid(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return np.geomspace(self.t_min, self.t_max, self.t_points)

    def basis_tags(self) -> tuple:
        return ("real", "momentum") if self.basis == "both" else (self.basis,)


_PRESET_DEFAULTS = {
    "fig1": dict(L=(256,), delta=(0.5, 1.0, 2.0, 3.0, 4.0), m=None, basis="real", mid_count=10),
    "fig3": dict(L=(256,), delta=(1.0, 2.0, 3.0), m=(1, 4, 16, 256), basis="real",
                 t_min=0.1, t_max=100.0, t_points=60, fit_window=(3.0, 30.0)),
    "fig4": dict(L=(128, 256), delta=tuple(round(0.25 * k, 10) for k in range(1, 17)),
                 m=(1, 2, 4), basis="both", mid_count="L/8"),
    "fig5": dict(L=(16, 32, 64, 128), delta=tuple(round(0.2 * k, 10) for k in range(1, 21)),
                 m=(1, 2, 4), basis="real", mid_count="L/8"),
    "custom": dict(),
}


def make_config(preset: str = "custom", **overrides) -> ExperimentConfig:
    """Fill preset defaults, then apply explicit overrides."""
    if preset not in PRESETS:
        raise ConfigError([f"unknown preset {preset!r}; expected one of {PRESETS}"])
    merged = dict(_PRESET_DEFAULTS[preset])
    merged.update({k: v for k, v in overrides.items() if v is not None})
    merged["preset"] = preset
    cfg = ExperimentConfig(**_normalized(merged))
    if cfg.m is None:  # fig1 default: every dyadic block size of the lattice
        L0 = cfg.L[0]
        cfg = replace(cfg, m=tuple(2**k for k in range(int(math.log2(L0)) + 1)))
    return cfg


def _normalized(d: dict) -> dict:
    out = dict(d)
    for key in ("L", "m"):
        if out.get(key) is not None:
            seq = out[key] if isinstance(out[key], (list, tuple)) else [out[key]]
            out[key] = tuple(int(x) for x in seq)
    for key in ("delta", "times", "fit_window"):
        if out.get(key) is not None:
            seq = out[key] if isinstance(out[key], (list, tuple)) else [out[key]]
            out[key] = tuple(float(x) for x in seq)
    if out.get("out") is not None:
        out["out"] = str(out["out"])
    return out


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build a config from a parsed config file (flags merged by the CLI)."""
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(mapping) - known
    if unknown:
        raise ConfigError([f"unknown config field(s): {', '.join(sorted(unknown))}"])
    preset = mapping.get("preset", "custom")
    return make_config(preset, **{k: v for k, v in mapping.items() if k != "preset"})


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def validate(config: ExperimentConfig) -> list:
    """All configuration violations, without executing anything."""
    diags = []
    if config.preset not in PRESETS:
        diags.append(f"unknown preset {config.preset!r}")
    if not config.L:
        diags.append("L list is empty")
    for L in config.L:
        if L < 2:
            diags.append(f"L={L} is below the minimum lattice size 2")
        elif not _is_pow2(L):
            diags.append(f"L={L} is not a power of 2")
    if not config.m:
        diags.append("m list is empty")
    for m in config.m:
        if m < 1:
            diags.append(f"m={m} is not a positive block size")
            continue
        for L in config.L:
            if L >= 2 and L % m != 0:
                diags.append(f"m={m} does not divide L={L}")
    if not config.delta:
        diags.append("delta list is empty")
    for delta in config.delta:
        if delta < 0:
            diags.append(f"delta={delta} is negative")
    if config.basis not in ("real", "momentum", "both"):
        diags.append(f"basis must be real, momentum, or both; got {config.basis!r}")
    if config.bc not in ("open", "periodic"):
        diags.append(f"bc must be open or periodic; got {config.bc!r}")
    if config.selector not in ("mid", "ground"):
        diags.append(f"selector must be mid or ground; got {config.selector!r}")
    if config.momentum_order not in ("index", "kinetic"):
        diags.append(f"momentum_order must be index or kinetic; got {config.momentum_order!r}")
    if config.n_phi < 1:
        diags.append(f"n_phi={config.n_phi} must be >= 1")
    if config.seed < 0:
        diags.append(f"seed={config.seed} must be >= 0")
    if config.jobs < 1:
        diags.append(f"jobs={config.jobs} must be >= 1")
    try:
        for L in config.L:
            if L >= 2:
                resolve_mid_count(config.mid_count, L)
    except ValueError as exc:
        diags.append(str(exc))
    needs_times = config.preset == "fig3" or (config.preset == "custom" and config.times is not None)
    if needs_times:
        try:
            grid = config.time_grid()
            if grid.size == 0:
                diags.append("time grid is empty")
            elif grid[0] < 0 or np.any(np.diff(grid) <= 0):
                diags.append("time grid must be non-negative and strictly ascending")
        except ValueError as exc:
            diags.append(f"time grid is invalid: {exc}")
        if config.times is None and (config.t_min <= 0 or config.t_max <= config.t_min or config.t_points < 2):
            diags.append("log time grid needs 0 < t_min < t_max and t_points >= 2")
        lo, hi = config.fit_window
        if not lo < hi:
            diags.append(f"fit window [{lo}, {hi}] is empty")
    if config.initial_site is not None:
        for L in config.L:
            if not 1 <= config.initial_site <= L:
                diags.append(f"initial_site={config.initial_site} outside 1..{L}")
    return diags


# ---------------------------------------------------------------------------
# grid jobs (module level so a process pool can pickle them)

def _eig_job(args):
    (L, delta, m_list, bases, n_phi, seed, mid_count, selector, bc, momentum_order) = args
    return eigenstate_entropy_table(
        L, delta, m_list, bases, n_phi=n_phi, seed=seed, mid_count=mid_count,
        selector=selector, bc=bc, momentum_order=momentum_order,
    )


def _quench_job(args):
    (L, delta, m_list, times, n_phi, seed, basis_tag, bc, initial_site, momentum_order) = args
    params = ModelParams(L=L, delta=delta, bc=bc)
    return quench_entropy_table(
        params, np.asarray(times), m_list, n_phi=n_phi, seed=seed,
        basis_tag=basis_tag, initial_site=initial_site, momentum_order=momentum_order,
    )


def _map_jobs(fn, arg_list, jobs: int):
    if jobs <= 1 or len(arg_list) <= 1:
        return [fn(a) for a in arg_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, arg_list))


# ---------------------------------------------------------------------------
# output helpers

def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=",", lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _eig_tables(config: ExperimentConfig, grid):
    """Run eigenstate jobs over [(L, delta)] and key the results."""
    bases = config.basis_tags()
    args = [
        (L, delta, tuple(m for m in config.m if L % m == 0), bases, config.n_phi,
         config.seed, config.mid_count, config.selector, config.bc, config.momentum_order)
        for (L, delta) in grid
    ]
    results = _map_jobs(_eig_job, args, config.jobs)
    return dict(zip(grid, results))


def _run_fig1(config: ExperimentConfig, out_dir: Path):
    L = config.L[0]
    grid = [(L, delta) for delta in config.delta]
    tables = _eig_tables(config, grid)
    basis = config.basis_tags()[0]
    rows = [
        (delta, m, *tables[(L, delta)][(m, basis)], config.n_phi)
        for delta in config.delta
        for m in config.m
    ]
    _write_csv(out_dir / "fig1.csv", ("delta", "m", "mean_S", "stderr_S", "n_phi"), rows)
    return ["fig1.csv"]


def _run_fig3(config: ExperimentConfig, out_dir: Path):
    L = config.L[0]
    times = config.time_grid()
    m_list = tuple(m for m in config.m if L % m == 0)
    basis = config.basis_tags()[0]
    args = [
        (L, delta, m_list, tuple(times), config.n_phi, config.seed, basis,
         config.bc, config.initial_site, config.momentum_order)
        for delta in config.delta
    ]
    tables = dict(zip(config.delta, _map_jobs(_quench_job, args, config.jobs)))
    rows = []
    slope_rows = []
    for delta in config.delta:
        for m in m_list:
            mean, stderr = tables[delta][m]
            rows.extend(
                (delta, m, t, mean[i], stderr[i]) for i, t in enumerate(times)
            )
            try:
                fit = fit_log_slope(times, mean, config.fit_window)
            except ValueError:
                continue  # window not covered by this grid; flagged by validate()
            slope_rows.append(
                (delta, m, config.fit_window[0], config.fit_window[1],
                 fit.slope, fit.intercept, fit.r_squared)
            )
    _write_csv(out_dir / "fig3.csv", ("delta", "m", "t", "mean_S", "stderr_S"), rows)
    _write_csv(
        out_dir / "fig3_slopes.csv",
        ("delta", "m", "t_lo", "t_hi", "slope", "intercept", "r_squared"),
        slope_rows,
    )
    return ["fig3.csv", "fig3_slopes.csv"]


def _run_fig4(config: ExperimentConfig, out_dir: Path):
    grid = [(L, delta) for L in config.L for delta in config.delta]
    tables = _eig_tables(config, grid)
    rows = [
        (basis, L, delta, m, *tables[(L, delta)][(m, basis)], config.n_phi)
        for basis in config.basis_tags()
        for L in config.L
        for delta in config.delta
        for m in config.m
        if L % m == 0
    ]
    _write_csv(
        out_dir / "fig4.csv",
        ("basis", "L", "delta", "m", "mean_S", "stderr_S", "n_phi"),
        rows,
    )
    return ["fig4.csv"]


def _run_fig5(config: ExperimentConfig, out_dir: Path):
    grid = [(L, delta) for L in config.L for delta in config.delta]
    tables = _eig_tables(config, grid)
    basis = config.basis_tags()[0]
    rows = [
        (L, delta, m, *tables[(L, delta)][(m, basis)])
        for L in config.L
        for delta in config.delta
        for m in config.m
        if L % m == 0
    ]
    _write_csv(out_dir / "fig5_curves.csv", ("L", "delta", "m", "mean_S", "stderr_S"), rows)
    f_rows = []
    for delta in config.delta:
        for m in config.m:
            if all(L % m == 0 for L in config.L):
                f = normalized_fluctuation([tables[(L, delta)][(m, basis)][0] for L in config.L])
                f_rows.append((delta, m, f))
    _write_csv(out_dir / "fig5_fluctuation.csv", ("delta", "m", "f"), f_rows)
    return ["fig5_curves.csv", "fig5_fluctuation.csv"]


def _run_custom(config: ExperimentConfig, out_dir: Path):
    grid = [(L, delta) for L in config.L for delta in config.delta]
    tables = _eig_tables(config, grid)
    rows = [
        (basis, L, delta, m, *tables[(L, delta)][(m, basis)], config.n_phi)
        for basis in config.basis_tags()
        for L in config.L
        for delta in config.delta
        for m in config.m
        if L % m == 0
    ]
    _write_csv(
        out_dir / "sweep.csv",
        ("basis", "L", "delta", "m", "mean_S", "stderr_S", "n_phi"),
        rows,
    )
    outputs = ["sweep.csv"]
    if config.times is not None:
        outputs.extend(_run_fig3_like_quench(config, out_dir))
    return outputs


def _run_fig3_like_quench(config: ExperimentConfig, out_dir: Path):
    times = config.time_grid()
    basis = config.basis_tags()[0]
    rows = []
    for L in config.L:
        m_list = tuple(m for m in config.m if L % m == 0)
        args = [
            (L, delta, m_list, tuple(times), config.n_phi, config.seed, basis,
             config.bc, config.initial_site, config.momentum_order)
            for delta in config.delta
        ]
        tables = dict(zip(config.delta, _map_jobs(_quench_job, args, config.jobs)))
        for delta in config.delta:
            for m in m_list:
                mean, stderr = tables[delta][m]
                rows.extend((L, delta, m, t, mean[i], stderr[i]) for i, t in enumerate(times))
    _write_csv(out_dir / "quench.csv", ("L", "delta", "m", "t", "mean_S", "stderr_S"), rows)
    return ["quench.csv"]


_PRESET_RUNNERS = {
    "fig1": _run_fig1,
    "fig3": _run_fig3,
    "fig4": _run_fig4,
    "fig5": _run_fig5,
    "custom": _run_custom,
}


def run(config: ExperimentConfig) -> list:
    """Validate, execute the preset, and write CSV outputs plus a manifest.

    Returns the list of written file paths.  Raises :class:`ConfigError`
    for invalid configurations; numerical failures propagate.
    """
    diagnostics = validate(config)
    if diagnostics:
        raise ConfigError(diagnostics)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    outputs = _PRESET_RUNNERS[config.preset](config, out_dir)
    manifest = {
        "preset": config.preset,
        "config": asdict(config),
        "versions": {
            "obsent": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "started_utc": started.isoformat(),
        "wall_time_s": time.perf_counter() - t0,
        "outputs": outputs,
    }
    with open(out_dir / "run_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=list)
        fh.write("\n")
    return [out_dir / name for name in outputs] + [out_dir / "run_manifest.json"]
