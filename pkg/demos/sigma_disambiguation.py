"""Inferring the noise level with a misspecified model.

Without an embedded error term, the only way to explain the misfit is a
larger data noise, so the classical sigma estimate is inflated. Embedding
error in the slope lets sigma settle near the true 0.1.

    python3 demos/sigma_disambiguation.py
"""
import numpy as np

from embedcal import EmbeddingSpec, LikelihoodSpec, PriorSpec, generate_data, get_demo
from embedcal.mcmc import AmcmcConfig
from embedcal.workflow import calibrate

demo = get_demo("demo3-linear")
data = generate_data("demo3-linear", 200, 0.1, seed=10)
for label, spec, kind in (("embedded", EmbeddingSpec("triangular", 2, (1,)), "independent_normal"),
                          ("classical", EmbeddingSpec("classical", 2), "classical")):
    res = calibrate(demo.model, data, spec, LikelihoodSpec(kind, sigma=None), PriorSpec(demo.bounds),
                    steps=20000, mcmc=AmcmcConfig(seed=10))
    print(f"{label:>9}: posterior mean sigma = {np.exp(res.chain.samples[:, -1]).mean():.3f} (true 0.1)")
