"""Demo 3: model error persists as data accumulate; parametric uncertainty does not.

A quadratic is fit to noisy samples of a non-polynomial truth for growing N.
Several replicas per N give medians of the two variance components. Takes a
few minutes; pass a replica count as the first argument to shorten it.

    python3 demos/demo3_convergence.py [replicas]
"""
import sys

from embedcal.config import RunConfig
from embedcal.runner import run_replicas

replicas = int(sys.argv[1]) if len(sys.argv) > 1 else 5
cfg = RunConfig.from_dict({
    "data": {"demo": "demo3-quadratic", "n": 10, "sigma": 0.5},
    "likelihood": {"kind": "independent_normal", "sigma": 0.5},
    "mcmc": {"steps": 20000},
})
table = run_replicas(cfg, [10, 100, 1000], replicas, ["demo3-linear", "demo3-quadratic", "demo3-true"])
print(table.to_csv(), end="")
