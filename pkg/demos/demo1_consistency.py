"""Demo 1: embedded vs classical calibration of a misspecified exponential model.

The classical posterior tightens around a curve that cannot match the data,
so its bands say nothing about how far off the model is. The embedded run
widens the predictive band until it is consistent with the actual misfit.

    python3 demos/demo1_consistency.py
"""
import numpy as np

from embedcal import EmbeddingSpec, LikelihoodSpec, NispConfig, PriorSpec, generate_data, get_demo
from embedcal.workflow import calibrate, predict

demo = get_demo("demo1")
data = generate_data("demo1", 50, 0.1, seed=1)
prior = PriorSpec(demo.bounds)

runs = {
    "classical": (EmbeddingSpec("classical", 2), LikelihoodSpec("classical", sigma=0.1)),
    "embedded": (EmbeddingSpec("triangular", 2), LikelihoodSpec("abc", sigma=0.1, epsilon=1e-4)),
}
for label, (spec, lik) in runs.items():
    res = calibrate(demo.model, data, spec, lik, prior, NispConfig(1), steps=20000, lam_guess=demo.guess)
    pp = predict(res, mode="posterior_predictive")
    misfit = np.abs(pp.mu_pf - data.ys).mean()
    band = np.sqrt(pp.var_total).mean()
    print(f"{label:>9}: mean |mu - y| = {misfit:.3f}, mean predictive sd = {band:.3f}, "
          f"model-error sd = {np.sqrt(pp.var_model_error).mean():.3f}")
