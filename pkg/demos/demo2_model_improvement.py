"""Demo 2: a richer model leaves less room for model error.

Noiseless data from a two-scale decay are fit with a single exponential and
with a quadratic-exponent variant. Same ABC settings for both; the better
model ends up with a smaller model-error variance.

    python3 demos/demo2_model_improvement.py
"""
from embedcal import EmbeddingSpec, LikelihoodSpec, NispConfig, PriorSpec, generate_data, get_demo
from embedcal.workflow import calibrate, predict

data = generate_data("demo2", 10)
for demo_id in ("demo2", "demo2q"):
    demo = get_demo(demo_id)
    res = calibrate(demo.model, data, EmbeddingSpec("triangular", demo.model.dim),
                    LikelihoodSpec("abc", sigma=0.0, epsilon=1e-3), PriorSpec(demo.bounds),
                    NispConfig(3), steps=20000, lam_guess=demo.guess)
    pf = predict(res)
    print(f"{demo_id:>7}: var_model_error {pf.var_model_error.mean():.2e}, "
          f"var_posterior {pf.var_posterior.mean():.2e}, acceptance {res.chain.acceptance_rate:.2f}")
