"""Pipeline stages: data generation, surrogate construction, inversion,
timing benchmarks, and index-set comparison.

Each stage reads a :class:`~eitmcmc.config.RunConfig`, writes plain-text
artifacts into an output directory, and returns the paths it wrote.  File
formats live with their owning modules; this module only orchestrates.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from .config import RunConfig
from .forward import (
    ForwardSolver,
    ParametricForward,
    read_voltage_file,
    write_voltage_file,
)
from .interpolation import adapt, build_from_set, iso_set, load_surrogate, save_surrogate
from .mcmc import ChainConfig, Observation, run_chain, write_chain_summary
from .priors import write_pixels

OBSERVATION_FILE = "observation.txt"
SURROGATE_FILE = "surrogate.txt"
SURROGATE_REPORT_FILE = "surrogate_report.txt"
BENCHMARK_FILE = "benchmark.txt"
INDEX_REPORT_FILE = "index_set_report.txt"


def _outdir(out_dir) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _forward_evaluator(config: RunConfig, level: int | None = None) -> ParametricForward:
    mesh, layout = config.build_geometry(level)
    solver = ForwardSolver(mesh, layout)
    return ParametricForward(solver, config.build_model())


def generate_data(config: RunConfig, out_dir) -> Path:
    """Solve the forward map at the truth and write a noisy observation.

    The noise level is ``noise.factor`` times the voltage range over all
    patterns; factor zero writes the exact voltages (and an inversion run
    on such a file is rejected, since the misfit needs sd > 0).
    """
    out = _outdir(out_dir)
    model = config.build_model()
    truth = config.resolve_truth(model.J)
    level = config.data_mesh_level if config.data_mesh_level is not None else config.mesh_level
    forward = _forward_evaluator(config, level)
    clean = forward(truth)
    sd = config.noise_factor * (clean.max() - clean.min())
    if sd > 0.0:
        delta = clean + np.random.default_rng(config.noise_seed).normal(0.0, sd, len(clean))
    else:
        delta = clean
    path = out / OBSERVATION_FILE
    write_voltage_file(
        path,
        config.K,
        level,
        delta,
        extra={
            "sd": format(sd, ".17g"),
            "noise_factor": format(config.noise_factor, ".17g"),
            "noise_seed": config.noise_seed,
            "model_kind": config.model_kind,
            "truth": " ".join(format(v, ".17g") for v in truth),
        },
    )
    return path


def read_observation(path) -> tuple[Observation, dict]:
    """Parse an observation file into an Observation plus its raw header."""
    header, values = read_voltage_file(path)
    if "sd" not in header:
        raise ValueError("observation file is missing the sd header")
    sd = float(header["sd"])
    if sd <= 0.0:
        raise ValueError("observation has zero noise; regenerate with noise.factor > 0")
    K = int(header["K"])
    return Observation(data=values, sd=sd, K=K, n_patterns=int(header["patterns"])), header


def build_surrogate(config: RunConfig, out_dir) -> tuple[Path, Path]:
    """Run the adaptive construction against the forward map and save it.

    The report records the admitted count, the total forward solves
    (admitted plus frontier candidates), the wall time, and the greedy
    score trace.
    """
    out = _outdir(out_dir)
    forward = _forward_evaluator(config)
    model = forward.model
    surr, report = adapt(
        forward,
        model.J,
        budget=config.n_budget,
        score_norm=config.score_norm,
        use_h_factor=config.use_h_factor,
    )
    surr_path = out / SURROGATE_FILE
    save_surrogate(surr, surr_path)
    report_path = out / SURROGATE_REPORT_FILE
    with open(report_path, "w") as fh:
        fh.write(f"J = {model.J}\n")
        fh.write(f"K = {config.K}\n")
        fh.write(f"mesh_level = {config.mesh_level}\n")
        fh.write(f"n_admitted = {report.n_admitted}\n")
        fh.write(f"n_forward_solves = {report.n_evals}\n")
        fh.write(f"seconds = {report.seconds:.17g}\n")
        fh.write(f"frontier_max_score = {report.frontier_max_score:.17g}\n")
        trace = " ".join(format(score, ".17g") for _, _, score in report.trace)
        fh.write(f"score_trace = {trace}\n")
    return surr_path, report_path


def read_surrogate_report(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            key, _, value = line.strip().partition("=")
            key, value = key.strip(), value.strip()
            if key in ("J", "K", "mesh_level", "n_admitted", "n_forward_solves"):
                out[key] = int(value)
            elif key == "score_trace":
                out[key] = np.array([float(tok) for tok in value.split()])
            elif key:
                out[key] = float(value)
    return out


def run_inversion(
    config: RunConfig,
    out_dir,
    observation_path,
    surrogate_path=None,
    plain: bool = False,
) -> tuple[Path, Path]:
    """Sample the posterior and write the chain summary and mean grid.

    With a surrogate file the chain never touches the finite-element
    solver; with ``plain=True`` every step solves the forward problem on
    the run mesh.
    """
    if plain == (surrogate_path is not None):
        raise ValueError("give a surrogate path or plain=True, not both")
    out = _outdir(out_dir)
    obs, header = read_observation(observation_path)
    if obs.K != config.K:
        raise ValueError(f"observation has K={obs.K}, config has K={config.K}")
    model = config.build_model()
    if "truth" in header and len(header["truth"].split()) != model.J:
        raise ValueError("observation was generated with a different model dimension")

    if plain:
        evaluator = _forward_evaluator(config)
        suffix = "_plain"
    else:
        surr = load_surrogate(surrogate_path)
        if surr.J != model.J:
            raise ValueError(f"surrogate has J={surr.J}, model has J={model.J}")
        if surr.m != len(obs.data):
            raise ValueError(
                f"surrogate output length {surr.m} does not match observation {len(obs.data)}"
            )
        evaluator = surr.evaluate
        suffix = ""

    chain_config = ChainConfig(
        proposal=config.proposal,
        step=config.beta,
        n_samples=config.n_samples,
        burn_in=config.burn_in,
        seed=config.seed,
        J=model.J,
    )
    result = run_chain(evaluator, obs, chain_config, model=model, resolution=config.resolution)

    summary_path = out / f"chain_summary{suffix}.txt"
    write_chain_summary(summary_path, result, chain_config)
    grid_path = out / f"posterior_mean{suffix}.txt"
    write_pixels(result.mean_sigma, grid_path)
    return summary_path, grid_path


def benchmark(config: RunConfig, out_dir) -> Path:
    """Time the offline build and the online per-sample cost against N.

    For each budget in ``bench.budgets`` the surrogate is rebuilt from
    scratch (offline wall time) and then evaluated at ``bench.samples``
    prior samples (online time per sample).  The plain forward map is
    timed on the same samples for the speedup ratio.  Zero samples skip
    the online measurements; an empty budget list yields an empty table.
    """
    out = _outdir(out_dir)
    forward = _forward_evaluator(config)
    model = forward.model
    points = np.random.default_rng(config.compare_seed).uniform(
        -1.0, 1.0, (config.bench_samples, model.J)
    )

    rows = []
    for budget in config.bench_budgets:
        t0 = time.perf_counter()
        surr, _ = adapt(
            forward,
            model.J,
            budget=budget,
            score_norm=config.score_norm,
            use_h_factor=config.use_h_factor,
        )
        offline = time.perf_counter() - t0
        online = np.nan
        if config.bench_samples > 0:
            t0 = time.perf_counter()
            for y in points:
                surr.evaluate(y)
            online = (time.perf_counter() - t0) / config.bench_samples
        rows.append((budget, offline, online))

    plain_per_sample = np.nan
    if config.bench_samples > 0:
        t0 = time.perf_counter()
        for y in points:
            forward(y)
        plain_per_sample = (time.perf_counter() - t0) / config.bench_samples

    path = out / BENCHMARK_FILE
    with open(path, "w") as fh:
        fh.write(f"J = {model.J}\n")
        fh.write(f"K = {config.K}\n")
        fh.write(f"mesh_level = {config.mesh_level}\n")
        fh.write(f"online_samples = {config.bench_samples}\n")
        fh.write(f"plain_seconds_per_sample = {plain_per_sample:.17g}\n")
        fh.write("columns = N offline_seconds online_seconds_per_sample\n")
        for budget, offline, online in rows:
            fh.write(f"{budget} {offline:.17g} {online:.17g}\n")
    return path


def read_benchmark(path) -> dict:
    """Parse a benchmark file; the table becomes a (rows, 3) float array."""
    out = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if "=" in line:
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key in ("J", "K", "mesh_level", "online_samples"):
                    out[key] = int(value)
                elif key == "columns":
                    out[key] = value.split()
                else:
                    out[key] = float(value)
            else:
                rows.append([float(tok) for tok in line.split()])
    out["table"] = np.array(rows, dtype=float).reshape(-1, 3)
    return out


def compare_index_sets(config: RunConfig, out_dir) -> Path:
    """Contrast the adaptive index set with the isotropic simplex.

    Builds both surrogates from the same forward map, measures their sup
    errors over shared random test points, and reports the adaptive set's
    per-coordinate degree statistics.
    """
    out = _outdir(out_dir)
    forward = _forward_evaluator(config)
    model = forward.model
    adaptive, _ = adapt(
        forward,
        model.J,
        budget=config.n_budget,
        score_norm=config.score_norm,
        use_h_factor=config.use_h_factor,
    )
    iso_indices = iso_set(model.J, config.compare_w)
    iso_surr = build_from_set(forward, iso_indices, family=adaptive.family)

    rng = np.random.default_rng(config.compare_seed)
    points = rng.uniform(-1.0, 1.0, (config.compare_samples, model.J))
    sup_adaptive = 0.0
    sup_iso = 0.0
    for y in points:
        exact = forward(y)
        sup_adaptive = max(sup_adaptive, np.max(np.abs(adaptive.evaluate(y) - exact)))
        sup_iso = max(sup_iso, np.max(np.abs(iso_surr.evaluate(y) - exact)))

    degrees = adaptive.indices
    path = out / INDEX_REPORT_FILE
    with open(path, "w") as fh:
        fh.write(f"J = {model.J}\n")
        fh.write(f"adaptive_N = {adaptive.N}\n")
        fh.write(f"iso_w = {config.compare_w}\n")
        fh.write(f"iso_cardinality = {len(iso_indices)}\n")
        fh.write(f"test_samples = {config.compare_samples}\n")
        fh.write(f"adaptive_sup_error = {sup_adaptive:.17g}\n")
        fh.write(f"iso_sup_error = {sup_iso:.17g}\n")
        max_deg = " ".join(str(d) for d in degrees.max(axis=0))
        mean_deg = " ".join(format(d, ".17g") for d in degrees.mean(axis=0))
        fh.write(f"coordinate_max_degrees = {max_deg}\n")
        fh.write(f"coordinate_mean_degrees = {mean_deg}\n")
    return path


def read_index_report(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            key, _, value = line.strip().partition("=")
            key, value = key.strip(), value.strip()
            if key in ("J", "adaptive_N", "iso_w", "iso_cardinality", "test_samples"):
                out[key] = int(value)
            elif key == "coordinate_max_degrees":
                out[key] = np.array([int(tok) for tok in value.split()])
            elif key == "coordinate_mean_degrees":
                out[key] = np.array([float(tok) for tok in value.split()])
            elif key:
                out[key] = float(value)
    return out
