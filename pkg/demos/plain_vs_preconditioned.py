"""Why the diagonal gains matter.

Once sensors leave their neighbors' triangles some coefficients turn
negative and x <- C x + B a can blow up.  Per-cluster gains K pull the
spectrum back inside the unit disk.  Run: python3 demos/plain_vs_preconditioned.py
"""
import numpy as np

from rangeloc import GlobalPreconditioner, GenerationConfig, generate, run
from rangeloc.eigen import spectral_radius
from rangeloc.errors import Diverged
from rangeloc.pipeline import build_system, sensor_radius
from rangeloc.preconditioner import design_preconditioner, iteration_radius

print(" seed   rho(C)   plain                  preconditioned")
for seed in range(12):
    s = generate(GenerationConfig(seed=seed))
    sys, _ = build_system(s)
    rho_c = sensor_radius(sys, s.partition)

    try:
        plain = run(sys, GlobalPreconditioner.identity(sys.n_sensors), max_iter=2000)
        plain_txt = f"{plain.reason} in {plain.iterations}"
    except Diverged:
        plain_txt = "diverged"

    K = design_preconditioner(sys, s.partition)
    tr = run(sys, K)
    rho_t = iteration_radius(K, sys, s.partition)
    print(f"{seed:5d}   {rho_c:6.3f}   {plain_txt:<22} {tr.reason} in {tr.iterations} (rho {rho_t:.3f})")

# One cluster in detail.
s = generate(GenerationConfig(seed=0))
sys, _ = build_system(s)
K = design_preconditioner(sys, s.partition)
print("\ngains for seed 0:", np.round(K.gains, 4))
print("spectral radius of full C:", round(spectral_radius(sys.C), 4))
