"""Benchmark harness: phase-transition grids, scene studies, timing.

Instance seeds are derived with :func:`csbench.rng.combine_seeds` from
(base seed, cell, trial), so results are independent of execution order
and of the worker count. The grid runner honors the ``CSBENCH_THREADS``
environment variable (default 1) as a cap on its process pool.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from dataclasses import dataclass, field, replace
from statistics import median

import numpy as np

from . import cmatio
from .baselines import CpConfig, OmpConfig, chambolle_pock_bp, omp
from .errors import NotConverged, NumericalFailure, RankDeficient
from .metrics import (detections, fa_md, image_contrast, image_entropy,
                      l2_error, metrics_csv_row, metrics_json_record,
                      METRIC_CSV_HEADER, rrmse, tcr)
from .nkf import NkfConfig, solve as solve_nkf
from .problem import SensingProblem
from .rng import combine_seeds
from .sensing import (SceneSpec, SignalSpec, gen_partial_fourier_2d,
                      gen_scene, gen_sparse_signal, gen_gaussian_matrix,
                      measure, reference_image, region_mask, round_half_up)

KNOWN_SOLVERS = ("nkf", "cp", "omp")


@dataclass(frozen=True)
class SolverSettings:
    """Per-solver configuration bundle used by the harness."""

    nkf: NkfConfig = field(default_factory=NkfConfig)
    cp: CpConfig = field(default_factory=CpConfig)
    omp: OmpConfig = field(default_factory=OmpConfig)


@dataclass(frozen=True)
class DtGridConfig:
    """A (delta, rho) phase-transition sweep at fixed signal length n."""

    n: int = 128
    steps: int = 16
    trials_per_cell: int = 20
    solvers: tuple = ("nkf", "cp")
    seed_base: int = 0
    success_threshold: float = 1e-3

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.steps < 2:
            raise ValueError("steps must be at least 2")
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be at least 1")
        if not self.solvers:
            raise ValueError("need at least one solver")
        for s in self.solvers:
            if s not in KNOWN_SOLVERS:
                raise ValueError(f"unknown solver {s!r}")
        if self.success_threshold <= 0:
            raise ValueError("success_threshold must be positive")


@dataclass
class SolverCellStats:
    """Aggregates for one solver on one grid cell."""

    trials: int
    successes: int
    failures: int
    mean_l2_error: float | None
    median_wall_time_ms: float | None

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials


@dataclass
class DtCellResult:
    delta: float
    rho: float
    m: int
    s: int
    per_solver: dict


def make_instance(n: int, m: int, s: int, seed: int):
    """Matrix, signal, and noiseless measurements for one trial."""
    c = gen_gaussian_matrix(m, n, combine_seeds(seed, 1))
    x = gen_sparse_signal(SignalSpec(n=n, s=s, seed=combine_seeds(seed, 2)))
    return c, x, c @ x


def solve_one(solver: str, problem: SensingProblem,
              settings: SolverSettings, s_hint: int | None = None):
    """Dispatch one solver; atom budget for OMP defaults to s_hint."""
    if solver == "nkf":
        return solve_nkf(problem, settings.nkf)
    if solver == "cp":
        return chambolle_pock_bp(problem, settings.cp)
    if solver == "omp":
        cfg = settings.omp
        if cfg.max_atoms is None and s_hint is not None:
            cfg = replace(cfg, max_atoms=min(s_hint, problem.m, problem.n))
        return omp(problem, cfg)[0]
    raise ValueError(f"unknown solver {solver!r}")


def _worker_count() -> int:
    raw = os.environ.get("CSBENCH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_cell(args) -> DtCellResult:
    config, settings, i_delta, j_rho = args
    steps = config.steps
    delta = i_delta / (steps - 1)
    rho = j_rho / (steps - 1)
    m = min(max(round_half_up(delta * config.n), 1), config.n)
    s = min(max(round_half_up(rho * m), 0), m)
    errors = {sv: [] for sv in config.solvers}
    times = {sv: [] for sv in config.solvers}
    successes = {sv: 0 for sv in config.solvers}
    failures = {sv: 0 for sv in config.solvers}
    for t in range(config.trials_per_cell):
        if s == 0:
            # Zero measurements of the zero signal: trivially recovered.
            for sv in config.solvers:
                successes[sv] += 1
                errors[sv].append(0.0)
                times[sv].append(0.0)
            continue
        seed = combine_seeds(config.seed_base, i_delta, j_rho, t)
        c, x, y = make_instance(config.n, m, s, seed)
        problem = SensingProblem(c, y)
        for sv in config.solvers:
            try:
                result = solve_one(sv, problem, settings, s_hint=s)
            except (NotConverged, NumericalFailure) as exc:
                failures[sv] += 1
                result = exc.result
                if result is None:
                    continue
            except RankDeficient:
                failures[sv] += 1
                continue
            else:
                err = l2_error(x, result.x_hat)
                if err <= config.success_threshold:
                    successes[sv] += 1
                errors[sv].append(err)
                times[sv].append(result.wall_time_ms)
                continue
            # failure path with a partial result: score it, never count
            # it as success
            errors[sv].append(l2_error(x, result.x_hat))
            times[sv].append(result.wall_time_ms)
    per_solver = {}
    for sv in config.solvers:
        per_solver[sv] = SolverCellStats(
            trials=config.trials_per_cell,
            successes=successes[sv],
            failures=failures[sv],
            mean_l2_error=(
                float(np.mean(errors[sv])) if errors[sv] else None
            ),
            median_wall_time_ms=(
                float(median(times[sv])) if times[sv] else None
            ),
        )
    return DtCellResult(delta=delta, rho=rho, m=m, s=s, per_solver=per_solver)


def run_dt_grid(config: DtGridConfig,
                settings: SolverSettings | None = None) -> list:
    """Run the sweep; returns rows indexed [rho_idx][delta_idx]."""
    settings = settings if settings is not None else SolverSettings()
    payloads = [
        (config, settings, i, j)
        for j in range(config.steps)
        for i in range(config.steps)
    ]
    workers = min(_worker_count(), len(payloads))
    if workers > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            flat = pool.map(_run_cell, payloads)
    else:
        flat = [_run_cell(p) for p in payloads]
    steps = config.steps
    return [flat[j * steps:(j + 1) * steps] for j in range(steps)]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_grid_results_csv(grid, path) -> None:
    """Deterministic per-cell, per-solver table (no timing columns)."""
    lines = ["delta_index,rho_index,delta,rho,m,s,solver,trials,"
             "successes,success_rate,mean_l2_error,failures"]
    for j, row in enumerate(grid):
        for i, cell in enumerate(row):
            for sv, st in cell.per_solver.items():
                lines.append(",".join([
                    str(i), str(j), repr(cell.delta), repr(cell.rho),
                    str(cell.m), str(cell.s), sv, str(st.trials),
                    str(st.successes), repr(st.success_rate),
                    _fmt(st.mean_l2_error), str(st.failures),
                ]))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def write_grid_timing_csv(grid, path) -> None:
    """Wall-clock medians, kept out of the deterministic results file."""
    lines = ["delta_index,rho_index,solver,median_wall_time_ms"]
    for j, row in enumerate(grid):
        for i, cell in enumerate(row):
            for sv, st in cell.per_solver.items():
                lines.append(",".join([
                    str(i), str(j), sv, _fmt(st.median_wall_time_ms),
                ]))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def heatmap_values(grid, field: str) -> np.ndarray:
    """Matrix of one per-solver statistic, rho rows ascending.

    ``field`` is "<stat>.<solver>", e.g. "success_rate.nkf". Cells with
    no data take the maximum finite value present (or 0 if none).
    """
    stat, _, solver = field.partition(".")
    if stat not in ("success_rate", "mean_l2_error", "median_wall_time_ms"):
        raise ValueError(f"unknown heatmap field {stat!r}")
    steps = len(grid)
    out = np.full((steps, steps), np.nan)
    for j, row in enumerate(grid):
        for i, cell in enumerate(row):
            if solver not in cell.per_solver:
                raise ValueError(f"solver {solver!r} not present in grid")
            v = getattr(cell.per_solver[solver], stat)
            if stat == "success_rate":
                v = cell.per_solver[solver].success_rate
            out[j, i] = np.nan if v is None else v
    if np.isnan(out).any():
        finite = out[np.isfinite(out)]
        out[np.isnan(out)] = finite.max() if finite.size else 0.0
    return out


def emit_heatmap(grid, field: str, out_base) -> tuple[str, str]:
    """Write <out_base>.csv and <out_base>.pgm for one statistic.

    CSV rows run over rho ascending with delta as columns. The PGM is
    plain (P2), 255 max, linearly scaled min -> 0, max -> 255, with the
    top row holding the largest rho; a constant field maps to mid-gray
    (128).
    """
    values = heatmap_values(grid, field)
    steps = values.shape[0]
    axis = [i / (steps - 1) for i in range(steps)]
    csv_path = f"{out_base}.csv"
    pgm_path = f"{out_base}.pgm"

    lines = ["rho/delta," + ",".join(repr(d) for d in axis)]
    for j in range(steps):
        lines.append(
            repr(axis[j]) + "," + ",".join(repr(float(v)) for v in values[j])
        )
    with open(csv_path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")

    lo = float(values.min())
    hi = float(values.max())
    if hi > lo:
        scaled = np.rint((values - lo) / (hi - lo) * 255.0).astype(int)
    else:
        scaled = np.full_like(values, 128.0).astype(int)
    pgm_lines = ["P2", f"{steps} {steps}", "255"]
    for j in range(steps - 1, -1, -1):  # top row = largest rho
        pgm_lines.append(" ".join(str(int(v)) for v in scaled[j]))
    with open(pgm_path, "w", encoding="ascii") as fh:
        fh.write("\n".join(pgm_lines))
        fh.write("\n")
    return csv_path, pgm_path


def run_scene_experiment(scene: SceneSpec, keep_fraction: float,
                         solvers, seeds, settings: SolverSettings | None = None,
                         threshold_db: float = -30.0,
                         noise_sigma: float = 0.0,
                         out_dir=None) -> list:
    """Reconstructions of a random scene from undersampled 2-D spectra.

    For each run seed, draws a scene and a sampling pattern, solves with
    every requested solver, and scores each reconstruction against the
    noise-free fully-sampled reference image. ``noise_sigma`` adds
    complex Gaussian noise of that per-measurement standard deviation to
    the undersampled measurements (the reference stays clean). Solvers
    run with the settings as given; in particular the OMP atom budget is
    not tied to the scatterer count, since a real measurement campaign
    does not know it. Returns one record dict per (seed, solver), plus a
    "reference" record per seed; writes a metrics CSV, a JSON file, and
    reconstruction images when ``out_dir`` is given.
    """
    settings = settings if settings is not None else SolverSettings()
    for sv in solvers:
        if sv not in KNOWN_SOLVERS:
            raise ValueError(f"unknown solver {sv!r}")
    n_r, n_a = scene.n_r, scene.n_a
    total = n_r * n_a
    records = []
    images = []
    for run_seed in seeds:
        spec = replace(scene, seed=combine_seeds(run_seed, 1))
        x_scene = gen_scene(spec)
        c, kept = gen_partial_fourier_2d(
            n_r, n_a, keep_fraction, combine_seeds(run_seed, 2))
        y = measure(c, x_scene, noise_sigma, combine_seeds(run_seed, 3))
        m = c.shape[0]
        full_spectrum = (np.fft.fft2(x_scene.reshape(n_r, n_a))
                         / math.sqrt(total)).ravel()
        reference = reference_image(full_spectrum, np.arange(total), n_r, n_a)
        target = region_mask(spec)
        clutter = ~target
        det_ref = detections(reference, threshold_db)
        ref_pixels = np.nonzero(det_ref.ravel())[0]

        def image_values(img, fa_md_pair=None, rrmse_val=None):
            return {
                "rrmse": rrmse_val,
                "tcr_db": tcr(img, target, clutter) if clutter.any() else None,
                "ie": image_entropy(img),
                "ic": image_contrast(img),
                "fa": None if fa_md_pair is None else fa_md_pair[0],
                "md": None if fa_md_pair is None else fa_md_pair[1],
            }

        if np.abs(reference).max() > 0.0:
            records.append({
                "seed": run_seed,
                **metrics_json_record("reference", total, m,
                                      spec.n_scatterers,
                                      image_values(reference), None),
            })
        images.append((run_seed, "reference", reference))
        for sv in solvers:
            result = solve_one(sv, SensingProblem(c, y), settings)
            recon = result.x_hat.reshape(n_r, n_a)
            rr = None
            if ref_pixels.size and np.abs(recon).max() > 0.0:
                rr = rrmse(reference.ravel()[ref_pixels],
                           recon.ravel()[ref_pixels])
            vals = (image_values(recon, fa_md(recon, reference, threshold_db),
                                 rr)
                    if np.abs(recon).max() > 0.0 else
                    {"rrmse": rr, "tcr_db": None, "ie": None, "ic": None,
                     "fa": 0, "md": int(det_ref.sum())})
            record = {
                "seed": run_seed,
                **metrics_json_record(sv, total, m, spec.n_scatterers, vals,
                                      result.wall_time_ms),
            }
            record["l2_error"] = l2_error(x_scene, result.x_hat)
            records.append(record)
            images.append((run_seed, sv, recon))
    if out_dir is not None:
        _write_scene_outputs(records, images, out_dir)
    return records


def _write_scene_outputs(records, images, out_dir) -> None:
    import json

    os.makedirs(out_dir, exist_ok=True)
    lines = [METRIC_CSV_HEADER + ",seed"]
    for rec in records:
        lines.append(metrics_csv_row(rec) + f",{rec['seed']}")
    with open(os.path.join(out_dir, "scene_metrics.csv"), "w",
              encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
    with open(os.path.join(out_dir, "scene_metrics.json"), "w",
              encoding="ascii") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
    img_dir = os.path.join(out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)
    for run_seed, name, img in images:
        cmatio.save_matrix(
            os.path.join(img_dir, f"seed_{run_seed}_{name}.cmat"), img)


def time_crossover(n: int, s: int, deltas, solvers, repeats: int,
                   seed_base: int = 0,
                   settings: SolverSettings | None = None) -> list:
    """Median solve times per (delta, solver) at fixed n and s.

    Problem generation is excluded from the timing; each solver's wall
    time covers its full solve (factorization included). Runs serially
    so timings are not polluted by sibling processes.
    """
    settings = settings if settings is not None else SolverSettings()
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    rows = []
    for di, delta in enumerate(deltas):
        m = min(max(round_half_up(delta * n), 1), n)
        if s > m:
            raise ValueError(f"s={s} exceeds m={m} at delta={delta}")
        for sv in solvers:
            times = []
            for t in range(repeats):
                seed = combine_seeds(seed_base, di, t)
                c, x, y = make_instance(n, m, s, seed)
                problem = SensingProblem(c, y)
                try:
                    result = solve_one(sv, problem, settings, s_hint=s)
                except (NotConverged, NumericalFailure) as exc:
                    if exc.result is None:
                        continue
                    result = exc.result
                times.append(result.wall_time_ms)
            rows.append({
                "delta": delta,
                "m": m,
                "solver": sv,
                "median_wall_time_ms": float(median(times)) if times else None,
                "repeats": repeats,
            })
    return rows


def write_crossover_csv(rows, path) -> None:
    lines = ["delta,m,solver,repeats,median_wall_time_ms"]
    for r in rows:
        lines.append(",".join([
            repr(float(r["delta"])), str(r["m"]), r["solver"],
            str(r["repeats"]), _fmt(r["median_wall_time_ms"]),
        ]))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
