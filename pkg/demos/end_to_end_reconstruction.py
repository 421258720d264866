"""
End-to-end reconstruction at demo scale
=======================================

The full pipeline in one sitting: synthesize a noisy observation for a
known conductivity, build a surrogate of the forward map offline, then
sample the posterior with the reflection random walk.  Scaled down from
the flagship configuration so it finishes in about a minute.

Run from the repository root:

    python3 demos/end_to_end_reconstruction.py
"""

from pathlib import Path

from eitmcmc import pipeline
from eitmcmc.config import RunConfig
from eitmcmc.mcmc import read_chain_summary
from eitmcmc.priors import read_pixels

# coarser mesh and a smaller surrogate than the flagship; the chain is
# nearly free on the surrogate, so take a longer walk with a bigger step
# instead of inheriting the flagship's fine-tuned small one
config = RunConfig.from_file("configs/flagship_desk.txt").with_updates(
    mesh_level=4,
    n_budget=1000,
    n_samples=100_000,
    beta=0.01,
    burn_in=0.3,
    out_dir="runs/demo",
)
out = Path(config.out_dir)

# offline: data once, surrogate once
obs_path = pipeline.generate_data(config, out)
print(f"observation written to {obs_path}")
surr_path, report_path = pipeline.build_surrogate(config, out)
report = pipeline.read_surrogate_report(report_path)
print(f"surrogate: {report['n_admitted']} terms, "
      f"{report['n_forward_solves']} solves, {report['seconds']:.1f} s")

# online: sampling never touches the finite-element solver
summary_path, grid_path = pipeline.run_inversion(
    config, out, obs_path, surrogate_path=surr_path
)
summary = read_chain_summary(summary_path)
print(f"acceptance rate {summary['acceptance_rate']:.3f}, "
      f"{summary['seconds_per_sample'] * 1e3:.2f} ms per sample")

# the truth puts -0.8 into coefficients 10, 11, 12 (one-based); the
# posterior mean should recover their sign and rough size
truth = config.resolve_truth(15)
mean = summary["posterior_mean_y"]
print("\ncoef   truth   posterior mean")
for j in (0, 1, 2, 9, 10, 11):
    print(f"y_{j + 1:<3d} {truth[j]:7.3f} {mean[j]:10.3f}")

grid = read_pixels(grid_path)
print(f"\nposterior-mean conductivity on a {grid.rows}x{grid.cols} grid "
      f"in [{grid.values.min():.3f}, {grid.values.max():.3f}]  ({grid_path})")
