"""
Forward model walkthrough
=========================

Builds the electrode geometry, solves the forward problem for a random
conductivity, and checks the two structural properties every solve must
satisfy: grounded voltages and reciprocity between current patterns.
Finishes with a small mesh-refinement table.

Run from the repository root:

    python3 demos/forward_model_study.py
"""

import numpy as np

from eitmcmc.forward import ForwardSolver, ParametricForward, standard_patterns
from eitmcmc.geometry import build_unit_square_mesh, classify_boundary_edges, electrode_layout
from eitmcmc.priors import WaveletModel, sample_prior

# sixteen electrodes, four per side, covering half the boundary
K = 16
layout = electrode_layout(K)
print(f"{K} electrodes, each of arc length {layout.electrode_length}")

# the electrode endpoints sit on mesh nodes from level 4 upward
mesh = classify_boundary_edges(build_unit_square_mesh(5), layout)
print(f"mesh level 5: {len(mesh.nodes)} nodes, {len(mesh.triangles)} triangles")

model = WaveletModel(levels=1)
solver = ForwardSolver(mesh, layout)
forward = ParametricForward(solver, model)

# voltages at the prior baseline (constant conductivity 1.1)
baseline = forward(np.zeros(model.J))
print(f"baseline voltage range: [{baseline.min():.4f}, {baseline.max():.4f}]")

# one random conductivity from the prior
rng = np.random.default_rng(0)
y = sample_prior(rng, model.J)
voltages = forward(y).reshape(K - 1, K)

# grounding: each pattern's electrode voltages sum to zero
print(f"max |sum of voltages| over patterns: {np.abs(voltages.sum(axis=1)).max():.2e}")

# reciprocity: driving pattern a and reading with pattern b is symmetric
patterns = standard_patterns(K)
gram = patterns @ voltages.T
print(f"max reciprocity defect: {np.abs(gram - gram.T).max():.2e}")

# halving the mesh width roughly quarters the voltage error
reference = ParametricForward(
    ForwardSolver(classify_boundary_edges(build_unit_square_mesh(7), layout), layout), model
)(y)
print("\nlevel   max error vs level 7")
for level in (4, 5, 6):
    coarse_mesh = classify_boundary_edges(build_unit_square_mesh(level), layout)
    coarse = ParametricForward(ForwardSolver(coarse_mesh, layout), model)(y)
    print(f"  {level}     {np.abs(coarse - reference).max():.3e}")
