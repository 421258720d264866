"""Metropolis-Hastings samplers on the coefficient cube ``[-1, 1]^J``.

Two proposal kernels target the posterior induced by a voltage observation:
an independence sampler that redraws from the uniform prior, and a
reflection random walk that perturbs each coordinate and folds the result
back into ``[-1, 1]``.  Both use the standard Metropolis acceptance rule
with the likelihood misfit ``0.5 * ||(data - g) / sd||^2``.

The chain accepts any evaluator ``y -> voltages``, so a sparse-grid
surrogate and the exact finite-element map are interchangeable; with
matched seeds their chains can be compared trajectory by trajectory.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .priors import PixelGrid, pixel_centers

_PROPOSALS = ("is", "rrwm")


@dataclass(frozen=True)
class Observation:
    """Measured electrode voltages with iid (or per-entry) Gaussian noise.

    Parameters
    ----------
    data : ndarray, shape (K * n_patterns,)
        Observed voltages, pattern-major.
    sd : float or ndarray
        Noise standard deviation; a scalar applies to every entry.
    K : int
        Electrode count.
    n_patterns : int
        Number of current patterns.
    """

    data: np.ndarray
    sd: float | np.ndarray
    K: int
    n_patterns: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 1 or len(data) != self.K * self.n_patterns:
            raise ValueError(
                f"expected {self.K * self.n_patterns} data values, got shape {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("observation data must be finite")
        sd = np.asarray(self.sd, dtype=float)
        if sd.ndim not in (0, 1) or (sd.ndim == 1 and len(sd) != len(data)):
            raise ValueError("sd must be a scalar or match the data length")
        if not np.all(np.isfinite(sd)) or np.any(sd <= 0.0):
            raise ValueError("noise standard deviation must be positive")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sd", sd)


@dataclass(frozen=True)
class ChainConfig:
    """Sampler settings.

    ``proposal`` is ``"is"`` (independence) or ``"rrwm"`` (reflection random
    walk); ``step`` is the walk size, capped at 1 so a single reflection
    keeps proposals inside the cube.  ``burn_in`` is the fraction of samples
    discarded from all estimators.
    """

    proposal: str
    step: float
    n_samples: int
    burn_in: float
    seed: int
    J: int

    def __post_init__(self):
        if self.proposal not in _PROPOSALS:
            raise ValueError(f"proposal must be one of {_PROPOSALS}, got {self.proposal!r}")
        if not 0.0 < self.step <= 1.0:
            raise ValueError("step must lie in (0, 1]")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if not 0.0 <= self.burn_in < 1.0:
            raise ValueError("burn_in fraction must lie in [0, 1)")
        if self.J < 1:
            raise ValueError("J must be positive")


@dataclass(frozen=True)
class ChainAccumulators:
    """Running post-burn-in sums: coefficients and pixel renders."""

    sum_y: np.ndarray
    sum_pixels: np.ndarray | None
    n_retained: int


@dataclass(frozen=True)
class ChainResult:
    """Chain output: posterior means, diagnostics, and raw accumulators."""

    mean_y: np.ndarray
    mean_sigma: PixelGrid | None
    acceptance_rate: float
    misfit_trace: np.ndarray
    final_state: np.ndarray
    seconds_per_sample: float
    total_seconds: float
    n_samples: int
    n_burn_in: int
    accumulators: ChainAccumulators
    samples: np.ndarray | None = field(default=None, repr=False)


def misfit(g, obs: Observation) -> float:
    """Half squared noise-weighted distance between ``g`` and the data."""
    g = np.asarray(g, dtype=float)
    if g.shape != obs.data.shape:
        raise ValueError(f"expected shape {obs.data.shape}, got {g.shape}")
    r = (obs.data - g) / obs.sd
    return 0.5 * float(r @ r)


def reflect(t):
    """Fold ``t`` from [-2, 2] back into [-1, 1] by reflection at the ends.

    Accepts scalars or arrays; values beyond ``|t| = 2`` would need more
    than one reflection and are rejected.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(np.abs(arr) > 2.0):
        raise ValueError("reflection argument must lie in [-2, 2]")
    out = np.where(arr < -1.0, -2.0 - arr, np.where(arr > 1.0, 2.0 - arr, arr))
    return float(out) if np.isscalar(t) else out


def propose(y: np.ndarray, config: ChainConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw one proposal from the configured kernel."""
    if config.proposal == "is":
        return rng.uniform(-1.0, 1.0, config.J)
    xi = rng.uniform(-1.0, 1.0, config.J)
    return reflect(y + config.step * xi)


def accept_prob(phi_current: float, phi_candidate: float) -> float:
    """Metropolis acceptance probability from the two misfits.

    Only the difference enters, so any constant offset in the misfit
    cancels.  The exponential is never evaluated on a positive argument,
    which avoids overflow for very favorable candidates.
    """
    if np.isnan(phi_current) or np.isnan(phi_candidate):
        raise ValueError("misfit is NaN")
    diff = phi_current - phi_candidate
    if diff >= 0.0:
        return 1.0
    return float(np.exp(diff))


def run_chain(
    forward,
    obs: Observation,
    config: ChainConfig,
    *,
    model=None,
    resolution: int = 64,
    trace_every: int = 100,
    keep_samples: bool = False,
) -> ChainResult:
    """Run a Metropolis-Hastings chain against the given forward evaluator.

    The first sample is drawn uniformly from the cube; each of the
    ``n_samples - 1`` transitions consumes the proposal draw(s) and then one
    acceptance uniform, so chains with equal seeds and equal evaluators are
    reproducible draw for draw.  When ``model`` is given, pixel renders of
    the conductivity are accumulated after burn-in on a ``resolution`` x
    ``resolution`` grid.

    Parameters
    ----------
    forward : callable
        Maps a coefficient vector in [-1, 1]^J to the voltage vector.
    obs : Observation
    config : ChainConfig
    model : WaveletModel or TrigModel, optional
        Needed for the posterior-mean conductivity; omit to track only y.
    resolution : int
        Pixel grid edge length for the conductivity accumulator.
    trace_every : int
        Store the misfit of every ``trace_every``-th sample.
    keep_samples : bool
        Also store the retained states (post burn-in), row per sample.
    """
    rng = np.random.default_rng(config.seed)
    n_burn = int(np.floor(config.burn_in * config.n_samples))

    basis = None
    if model is not None:
        if model.J != config.J:
            raise ValueError(f"model has J={model.J} but config has J={config.J}")
        basis = model.basis_matrix(pixel_centers(resolution, resolution))

    def evaluate(state):
        try:
            g = np.asarray(forward(state), dtype=float)
        except Exception as exc:
            raise RuntimeError(f"forward evaluator failed at state {state!r}") from exc
        if not np.all(np.isfinite(g)):
            raise RuntimeError(f"forward evaluator returned non-finite values at state {state!r}")
        return g

    def pixel_field(state):
        u = basis @ state
        return np.exp(u) if model.is_log else model.baseline + u

    t0 = time.perf_counter()
    y = rng.uniform(-1.0, 1.0, config.J)
    phi = misfit(evaluate(y), obs)

    sum_y = np.zeros(config.J)
    sum_pixels = np.zeros(resolution * resolution) if model is not None else None
    n_retained = 0
    n_accepted = 0
    n_counted = 0
    trace = []
    kept = [] if keep_samples else None

    for i in range(1, config.n_samples + 1):
        if i > 1:
            s = propose(y, config, rng)
            phi_s = misfit(evaluate(s), obs)
            alpha = accept_prob(phi, phi_s)
            accepted = rng.uniform() < alpha
            if accepted:
                y, phi = s, phi_s
            if i > n_burn:
                n_counted += 1
                n_accepted += int(accepted)
        if (i - 1) % trace_every == 0:
            trace.append((i, phi))
        if i > n_burn:
            n_retained += 1
            sum_y += y
            if sum_pixels is not None:
                sum_pixels += pixel_field(y)
            if kept is not None:
                kept.append(y.copy())

    total = time.perf_counter() - t0
    acc = ChainAccumulators(
        sum_y=sum_y,
        sum_pixels=None if sum_pixels is None else sum_pixels.reshape(resolution, resolution),
        n_retained=n_retained,
    )
    return ChainResult(
        mean_y=sum_y / n_retained,
        mean_sigma=None if model is None else posterior_mean_sigma(acc, model, resolution),
        acceptance_rate=n_accepted / n_counted if n_counted else 0.0,
        misfit_trace=np.array(trace, dtype=float).reshape(-1, 2),
        final_state=y,
        seconds_per_sample=total / config.n_samples,
        total_seconds=total,
        n_samples=config.n_samples,
        n_burn_in=n_burn,
        accumulators=acc,
        samples=np.array(kept) if kept is not None else None,
    )


def posterior_mean_sigma(acc: ChainAccumulators, model, resolution: int) -> PixelGrid:
    """Average the accumulated conductivity renders into a pixel grid.

    For the affine model this coincides with rendering at the mean
    coefficient vector; for the log model it does not, which is why the
    renders are summed inside the chain.
    """
    if acc.n_retained < 1:
        raise ValueError("no retained samples to average")
    if acc.sum_pixels is None:
        raise ValueError("chain was run without a conductivity model")
    if acc.sum_pixels.shape != (resolution, resolution):
        raise ValueError(
            f"accumulated grid is {acc.sum_pixels.shape}, requested {resolution}"
        )
    return PixelGrid(values=acc.sum_pixels / acc.n_retained)


def write_chain_summary(path, result: ChainResult, config: ChainConfig) -> None:
    """Write the chain diagnostics as ``key = value`` text."""
    mean = " ".join(format(v, ".17g") for v in result.mean_y)
    with open(path, "w") as fh:
        fh.write(f"proposal = {config.proposal}\n")
        fh.write(f"step = {config.step:.17g}\n")
        fh.write(f"J = {config.J}\n")
        fh.write(f"n_samples = {result.n_samples}\n")
        fh.write(f"n_burn_in = {result.n_burn_in}\n")
        fh.write(f"seed = {config.seed}\n")
        fh.write(f"acceptance_rate = {result.acceptance_rate:.17g}\n")
        fh.write(f"posterior_mean_y = {mean}\n")
        fh.write(f"seconds_per_sample = {result.seconds_per_sample:.17g}\n")
        fh.write(f"total_seconds = {result.total_seconds:.17g}\n")


def read_chain_summary(path) -> dict:
    """Parse a chain summary back into a dict of typed values."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not key or not value:
                raise ValueError(f"malformed summary line: {line!r}")
            if key == "posterior_mean_y":
                out[key] = np.array([float(tok) for tok in value.split()])
            elif key in ("J", "n_samples", "n_burn_in", "seed"):
                out[key] = int(value)
            elif key == "proposal":
                out[key] = value
            else:
                out[key] = float(value)
    return out
