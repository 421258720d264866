"""Run configuration: flat ``key = value`` files with a fixed key set.

Every pipeline stage is driven by one config file so that a file plus its
seeds determines every output byte.  Unknown keys are hard errors; silent
typos in reproducibility settings are worse than a failed run.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from .geometry import build_unit_square_mesh, classify_boundary_edges, electrode_layout
from .priors import TrigModel, WaveletModel

_MODEL_KINDS = ("wavelet", "log_trig")
_SCORE_NORMS = ("l2", "max")
_PROPOSALS = ("is", "rrwm")


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split())


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, tuple):
        return " ".join(_fmt(v) for v in value)
    return str(value)


# config key -> (dataclass field, parser)
_SCHEMA = {
    "model.kind": ("model_kind", str),
    "model.gamma": ("gamma", float),
    "model.levels": ("levels", int),
    "model.baseline": ("baseline", float),
    "model.amplitude": ("amplitude", float),
    "model.offset": ("offset", float),
    "model.length_scale": ("length_scale", float),
    "model.smoothness": ("smoothness", float),
    "model.max_freq": ("max_freq", int),
    "model.scale": ("scale", float),
    "geometry.K": ("K", int),
    "mesh.level": ("mesh_level", int),
    "data.mesh_level": ("data_mesh_level", int),
    "interp.N": ("n_budget", int),
    "interp.score_norm": ("score_norm", str),
    "interp.use_h_factor": ("use_h_factor", _parse_bool),
    "chain.proposal": ("proposal", str),
    "chain.beta": ("beta", float),
    "chain.M": ("n_samples", int),
    "chain.burn_in": ("burn_in", float),
    "chain.seed": ("seed", int),
    "noise.factor": ("noise_factor", float),
    "noise.seed": ("noise_seed", int),
    "truth.values": ("truth_values", _parse_float_list),
    "truth.file": ("truth_file", str),
    "output.resolution": ("resolution", int),
    "output.dir": ("out_dir", str),
    "bench.budgets": ("bench_budgets", _parse_int_list),
    "bench.samples": ("bench_samples", int),
    "compare.w": ("compare_w", int),
    "compare.samples": ("compare_samples", int),
    "compare.seed": ("compare_seed", int),
}


@dataclass(frozen=True)
class RunConfig:
    """All knobs of the pipeline, with the defaults of the main experiment."""

    model_kind: str = "wavelet"
    gamma: float = 3.0
    levels: int = 1
    baseline: float = 1.1
    amplitude: float = 0.1
    offset: float = 0.3
    length_scale: float = 10.0**-1.5
    smoothness: float = 5.0
    max_freq: int = 7
    scale: float = 1.0
    K: int = 16
    mesh_level: int = 5
    data_mesh_level: int | None = None
    n_budget: int = 2000
    score_norm: str = "l2"
    use_h_factor: bool = True
    proposal: str = "rrwm"
    beta: float = 0.001
    n_samples: int = 100_000
    burn_in: float = 0.2
    seed: int = 0
    noise_factor: float = 1e-4
    noise_seed: int = 1
    truth_values: tuple[float, ...] | None = None
    truth_file: str | None = None
    resolution: int = 64
    out_dir: str = "out"
    bench_budgets: tuple[int, ...] = (250, 500, 1000, 2000, 4000)
    bench_samples: int = 1000
    compare_w: int = 4
    compare_samples: int = 200
    compare_seed: int = 7

    def __post_init__(self):
        if self.model_kind not in _MODEL_KINDS:
            raise ValueError(f"model.kind must be one of {_MODEL_KINDS}")
        if self.score_norm not in _SCORE_NORMS:
            raise ValueError(f"interp.score_norm must be one of {_SCORE_NORMS}")
        if self.proposal not in _PROPOSALS:
            raise ValueError(f"chain.proposal must be one of {_PROPOSALS}")
        electrode_layout(self.K)
        for level in (self.mesh_level, self.data_mesh_level):
            if level is None:
                continue
            if level < 1:
                raise ValueError("mesh levels must be at least 1")
            if (2**level) % self.K != 0:
                raise ValueError(
                    f"electrode endpoints need node spacing dividing 1/{self.K}; "
                    f"level {level} does not align"
                )
        if self.n_budget < 1:
            raise ValueError("interp.N must be at least 1")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("chain.beta must lie in (0, 1]")
        if self.n_samples < 1:
            raise ValueError("chain.M must be at least 1")
        if not 0.0 <= self.burn_in < 1.0:
            raise ValueError("chain.burn_in must lie in [0, 1)")
        if self.noise_factor < 0.0:
            raise ValueError("noise.factor must be nonnegative")
        if self.truth_values is not None and self.truth_file is not None:
            raise ValueError("give truth.values or truth.file, not both")
        if self.resolution < 1:
            raise ValueError("output.resolution must be positive")
        if self.bench_samples < 0:
            raise ValueError("bench.samples must be nonnegative")
        if any(n < 1 for n in self.bench_budgets):
            raise ValueError("bench.budgets must be positive")
        if self.compare_w < 0:
            raise ValueError("compare.w must be nonnegative")
        if self.compare_samples < 1:
            raise ValueError("compare.samples must be positive")

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
            if key not in _SCHEMA:
                raise ValueError(f"line {lineno}: unknown config key {key!r}")
            attr, parse = _SCHEMA[key]
            if attr in kwargs:
                raise ValueError(f"line {lineno}: duplicate key {key!r}")
            try:
                kwargs[attr] = parse(value)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad value for {key}: {exc}") from exc
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def to_text(self) -> str:
        """Serialize every setting, resolved defaults included."""
        by_attr = {attr: key for key, (attr, _) in _SCHEMA.items()}
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{by_attr[f.name]} = {_fmt(value)}")
        return "\n".join(lines) + "\n"

    def with_updates(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)

    def build_model(self):
        if self.model_kind == "wavelet":
            return WaveletModel(decay=self.gamma, levels=self.levels, baseline=self.baseline)
        return TrigModel(
            amplitude=self.amplitude,
            offset=self.offset,
            length_scale=self.length_scale,
            smoothness=self.smoothness,
            max_freq=self.max_freq,
            scale=self.scale,
        )

    def build_geometry(self, level: int | None = None):
        """Classified mesh and electrode layout at the given (or run) level."""
        layout = electrode_layout(self.K)
        mesh = build_unit_square_mesh(self.mesh_level if level is None else level)
        return classify_boundary_edges(mesh, layout), layout

    def resolve_truth(self, J: int) -> np.ndarray:
        """The truth coefficient vector: inline values, a file, or zero."""
        if self.truth_values is not None:
            truth = np.asarray(self.truth_values, dtype=float)
        elif self.truth_file is not None:
            with open(self.truth_file) as fh:
                truth = np.array([float(tok) for tok in fh.read().split()])
        else:
            truth = np.zeros(J)
        if truth.shape != (J,):
            raise ValueError(f"truth vector has length {len(truth)}, model needs {J}")
        if np.any(np.abs(truth) > 1.0):
            raise ValueError("truth coefficients must lie in [-1, 1]")
        return truth
