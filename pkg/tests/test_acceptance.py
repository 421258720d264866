"""Acceptance suite: one test per headline claim of the package.

Each test re-runs its experiment from scratch at the stated scale,
asserts the quantitative claim at the stated tolerance, checks its
wall-clock budget, and prints the measured numbers.  Run with
``pytest -v -rA tests/test_acceptance.py`` to see one line per claim.
"""

import time
from pathlib import Path

import numpy as np
from scipy import stats

from eitmcmc.config import RunConfig
from eitmcmc.forward import ForwardSolver, ParametricForward, forward_map, standard_patterns
from eitmcmc.geometry import build_unit_square_mesh, classify_boundary_edges, electrode_layout
from eitmcmc.interpolation import (
    RLejaFamily,
    adapt,
    build_from_set,
    grid_point,
    iso_set,
    lebesgue_estimate,
    lower_neighbors,
    rleja_nodes,
)
from eitmcmc.mcmc import ChainConfig, Observation, read_chain_summary, run_chain
from eitmcmc.pipeline import benchmark, build_surrogate, generate_data, read_benchmark, run_inversion
from eitmcmc.priors import WaveletModel, read_pixels, sample_prior

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def make_geometry(level, K=16):
    layout = electrode_layout(K)
    mesh = classify_boundary_edges(build_unit_square_mesh(level), layout)
    return mesh, layout


def make_forward(level, K=16):
    mesh, layout = make_geometry(level, K)
    model = WaveletModel(decay=3.0, levels=1)
    return ParametricForward(ForwardSolver(mesh, layout), model), model


def sup_l2_error(surrogate, exact_values, samples):
    """Largest Euclidean output-vector error of the surrogate over samples."""
    approx = surrogate.evaluate_batch(samples)
    return float(np.max(np.linalg.norm(approx - exact_values, axis=1)))


def test_fe_convergence_rate():
    # electrode voltages at the constant background field, refined meshes
    # against a level-7 reference; empirical order from the log2 error slope
    start = time.monotonic()
    model = WaveletModel(decay=3.0, levels=1)
    y = np.zeros(model.J)

    voltages = {}
    for level in (4, 5, 6, 7):
        mesh, layout = make_geometry(level)
        voltages[level] = forward_map(y, model, mesh, layout)

    levels = np.array([4, 5, 6])
    errors = np.array([np.max(np.abs(voltages[l] - voltages[7])) for l in levels])
    order = -stats.linregress(levels, np.log2(errors)).slope
    elapsed = time.monotonic() - start

    print("fe convergence order %.3f (need >= 1.8), errors %s, %.0f s"
          % (order, np.array2string(errors, precision=3), elapsed))
    assert order >= 1.8
    assert elapsed <= 120


def test_forward_reciprocity_and_grounding():
    start = time.monotonic()
    mesh, layout = make_geometry(5)
    solver = ForwardSolver(mesh, layout)
    model = WaveletModel(decay=3.0, levels=1)
    patterns = standard_patterns(16)
    rng = np.random.default_rng(0)

    worst_recip = 0.0
    worst_ground = 0.0
    for _ in range(20):
        y = sample_prior(rng, model.J)
        sigma = solver.sigma_on_elements(model, y)
        V = solver.solve(solver.assemble(sigma), patterns).voltages
        scale = 1 + np.max(np.abs(V))
        worst_ground = max(worst_ground, float(np.max(np.abs(V.sum(axis=1)))))
        for a in range(len(patterns)):
            for b in range(a):
                gap = abs(patterns[a] @ V[b] - patterns[b] @ V[a])
                worst_recip = max(worst_recip, gap / scale)
        assert worst_recip <= 1e-10
        assert worst_ground <= 1e-12
    elapsed = time.monotonic() - start

    print("reciprocity worst %.2e (need <= 1e-10), grounding worst %.2e "
          "(need <= 1e-12), %.0f s" % (worst_recip, worst_ground, elapsed))
    assert elapsed <= 60


def _random_lower_set(rng, J, size, max_degree=10):
    # the per-coordinate degree cap keeps the monomial cross-check system
    # well conditioned; a one-coordinate set saturates at max_degree + 1
    lam = [(0,) * J]
    size = min(size, (max_degree + 1) ** J)
    while len(lam) < size:
        nbrs = [nu for nu in lower_neighbors(lam) if max(nu) <= max_degree]
        lam.append(nbrs[rng.integers(len(nbrs))])
    return lam


def test_interpolation_exactness():
    start = time.monotonic()
    rng = np.random.default_rng(314)
    family = RLejaFamily()

    worst_exact = 0.0
    worst_cross = 0.0
    for _ in range(50):
        J = int(rng.integers(1, 9))
        lam = _random_lower_set(rng, J, size=int(rng.integers(1, 61)))
        coeffs = {nu: float(rng.uniform(-1, 1)) for nu in lam}

        def poly(y):
            return sum(c * np.prod(np.asarray(y) ** np.array(nu)) for nu, c in coeffs.items())

        surr = build_from_set(poly, lam, family=family)
        points = rng.uniform(-1, 1, (200, J))
        newton = surr.evaluate_batch(points)[:, 0]
        direct = np.array([poly(p) for p in points])
        worst_exact = max(worst_exact, float(np.max(np.abs(newton - direct))))

        nodes = np.array([grid_point(family, nu) for nu in lam])
        system = np.column_stack([np.prod(nodes ** np.array(nu), axis=1) for nu in lam])
        mono_coeffs = np.linalg.solve(system, np.array([poly(p) for p in nodes]))
        basis = np.column_stack([np.prod(points ** np.array(nu), axis=1) for nu in lam])
        worst_cross = max(worst_cross, float(np.max(np.abs(newton - basis @ mono_coeffs))))
    elapsed = time.monotonic() - start

    print("interpolation exactness worst %.2e (need <= 1e-9), monomial "
          "cross-check worst %.2e (need <= 1e-8), %.0f s"
          % (worst_exact, worst_cross, elapsed))
    assert worst_exact <= 1e-9
    assert worst_cross <= 1e-8
    assert elapsed <= 60


def test_rleja_nodes_and_lebesgue_growth():
    start = time.monotonic()
    half_sqrt2 = np.sqrt(2.0) / 2.0
    outer = np.cos(np.pi / 8.0)
    inner = np.sin(np.pi / 8.0)
    expected = np.array([1.0, -1.0, 0.0, half_sqrt2, -half_sqrt2,
                         outer, -outer, -inner, inner])
    np.testing.assert_allclose(rleja_nodes(9), expected, atol=1e-9)

    constants = np.array([lebesgue_estimate(n) for n in range(51)])
    bounds = (np.arange(51) + 1.0) ** 2
    tightest = float(np.max(constants / bounds))
    elapsed = time.monotonic() - start

    print("first 9 nodes match to 1e-9; lebesgue ratio to (n+1)^2 worst "
          "%.3f (need <= 1), %.0f s" % (tightest, elapsed))
    assert np.all(constants <= bounds)
    assert elapsed <= 60


def test_surrogate_error_decay():
    start = time.monotonic()
    fwd, model = make_forward(4)
    surr, _ = adapt(fwd, model.J, 1000)

    rng = np.random.default_rng(2025)
    samples = rng.uniform(-1.0, 1.0, (200, model.J))
    exact = np.array([fwd(y) for y in samples])
    errors = [sup_l2_error(surr.prefix(n), exact, samples) for n in (10, 100, 1000)]
    elapsed = time.monotonic() - start

    print("surrogate sup error at N=10,100,1000: %.3f %.3f %.3f, ratio %.3f "
          "(need <= 0.1, non-increasing), %.0f s"
          % (errors[0], errors[1], errors[2], errors[2] / errors[0], elapsed))
    assert errors[2] <= 0.1 * errors[0]
    assert errors[0] >= errors[1] >= errors[2]
    assert elapsed <= 900


def test_desk_scale_reconstruction(tmp_path):
    start = time.monotonic()
    config = RunConfig.from_file(CONFIG_DIR / "flagship_desk.txt")

    observation = generate_data(config, tmp_path)
    surrogate_path, _ = build_surrogate(config, tmp_path)
    run_inversion(config, tmp_path, observation, surrogate_path=surrogate_path)
    run_inversion(config, tmp_path, observation, plain=True)

    summary = read_chain_summary(tmp_path / "chain_summary.txt")
    inclusion = np.asarray(summary["posterior_mean_y"])[9:12]
    grid = read_pixels(tmp_path / "posterior_mean.txt").values
    grid_plain = read_pixels(tmp_path / "posterior_mean_plain.txt").values
    gap = float(np.max(np.abs(grid - grid_plain)))
    elapsed = time.monotonic() - start

    print("desk reconstruction inclusion means %s (need all <= -0.3), "
          "surrogate-vs-plain grid gap %.4f (need <= 0.1), %.0f s"
          % (np.array2string(inclusion, precision=3), gap, elapsed))
    assert np.all(inclusion <= -0.3)
    assert gap <= 0.1
    assert elapsed <= 3600


def test_surrogate_speedup():
    start = time.monotonic()
    fwd, model = make_forward(6)
    truth = np.array([0.025, 0.025, -0.025, 0, 0, 0, 0, 0, 0,
                      -0.8, -0.8, -0.8, 0, 0, 0])
    data = fwd(truth)
    obs = Observation(data, 1e-4 * (data.max() - data.min()), 16, 15)

    surr, _ = adapt(fwd, model.J, 5000)
    chain = ChainConfig(proposal="rrwm", step=0.001, n_samples=1000,
                        burn_in=0.2, seed=5, J=model.J)
    fast = run_chain(surr.evaluate, obs, chain)
    slow = run_chain(fwd, obs, chain)
    ratio = slow.seconds_per_sample / fast.seconds_per_sample
    elapsed = time.monotonic() - start

    print("per-sample %.3f ms surrogate vs %.3f ms plain, speedup %.1fx "
          "(need >= 10x), %.0f s"
          % (1e3 * fast.seconds_per_sample, 1e3 * slow.seconds_per_sample,
             ratio, elapsed))
    assert ratio >= 10.0
    assert elapsed <= 600


def test_adaptive_beats_isotropic():
    start = time.monotonic()
    fwd, model = make_forward(5)
    adaptive, _ = adapt(fwd, model.J, 2000)
    isotropic = build_from_set(fwd, iso_set(model.J, 4), family=adaptive.family)

    rng = np.random.default_rng(2025)
    samples = rng.uniform(-1.0, 1.0, (200, model.J))
    exact = np.array([fwd(y) for y in samples])
    err_adaptive = sup_l2_error(adaptive, exact, samples)
    err_isotropic = sup_l2_error(isotropic, exact, samples)

    degrees = np.array(adaptive.indices, dtype=float)
    lead = degrees[:, :3].mean()
    tail = degrees[:, 3:].mean()
    elapsed = time.monotonic() - start

    print("sup error %.3f adaptive (%d terms) vs %.3f isotropic (%d terms); "
          "mean degree %.2f coords 1-3 vs %.3f coords 4-15, ratio %.1f "
          "(need >= 3), %.0f s"
          % (err_adaptive, adaptive.N, err_isotropic, isotropic.N,
             lead, tail, lead / tail, elapsed))
    assert err_adaptive < err_isotropic
    assert lead >= 3.0 * tail
    assert elapsed <= 1200


def test_chain_statistics():
    start = time.monotonic()

    # flat likelihood: the independence sampler accepts everything and the
    # retained samples stay uniform per coordinate
    flat_obs = Observation(np.zeros(1), 1.0, 1, 1)
    flat_cfg = ChainConfig(proposal="is", step=0.5, n_samples=100_000,
                           burn_in=0.2, seed=17, J=15)
    result = run_chain(lambda y: np.zeros(1), flat_obs, flat_cfg, keep_samples=True)
    assert result.acceptance_rate == 1.0
    retained = result.samples[result.n_burn_in:]
    worst_p = 1.0
    for column in retained.T:
        counts = np.histogram(column, bins=20, range=(-1.0, 1.0))[0]
        worst_p = min(worst_p, stats.chisquare(counts).pvalue)
    assert worst_p > 0.001

    # posterior-mean standard error halves 10x as the chain grows 100x
    target = build_from_set(
        lambda y: np.array([2.0 + 0.8 * y[0] + 0.3 * y[0] ** 2]),
        [(0,), (1,), (2,)],
    )
    obs = Observation(np.array([2.3]), 0.5, 1, 1)
    spread = {}
    for samples in (1_000, 100_000):
        cfgs = (ChainConfig(proposal="is", step=0.5, n_samples=samples,
                            burn_in=0.2, seed=seed, J=1) for seed in range(50))
        means = [run_chain(target.evaluate, obs, cfg).mean_y[0] for cfg in cfgs]
        spread[samples] = float(np.std(means, ddof=1))
    ratio = spread[1_000] / spread[100_000]
    elapsed = time.monotonic() - start

    print("uniformity worst p %.4f (need > 0.001); standard error ratio %.2f "
          "over a 100x longer chain (need within [5, 20]), %.0f s"
          % (worst_p, ratio, elapsed))
    assert 5.0 <= ratio <= 20.0
    assert elapsed <= 600


def test_stage_time_linearity(tmp_path):
    start = time.monotonic()
    config = RunConfig.from_text(
        """
        model.kind = wavelet
        model.gamma = 3
        model.levels = 1
        geometry.K = 16
        mesh.level = 4
        bench.budgets = 250 500 1000 2000 4000
        bench.samples = 2000
        """
    )
    table = read_benchmark(benchmark(config, tmp_path))["table"]

    fits = {}
    for column, name in ((1, "offline"), (2, "online")):
        fit = stats.linregress(table[:, 0], table[:, column])
        fits[name] = fit.rvalue ** 2
    elapsed = time.monotonic() - start

    print("stage time linearity R^2: offline %.4f, online %.4f "
          "(need >= 0.9), %.0f s" % (fits["offline"], fits["online"], elapsed))
    assert fits["offline"] >= 0.9
    assert fits["online"] >= 0.9
    assert elapsed <= 1800
