"""Built-in truth/fit model pairs and synthetic data generation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .likelihood import Dataset
from .nisp import ForwardModel


class VectorModel(ForwardModel):
    """Closed-form model written for xs (N, 1) and lams (Q, d) broadcasting."""

    def __init__(self, name: str, func: Callable, dim: int, xdim: int = 1):
        self.name = name
        self.func = func
        self.dim = dim
        self.xdim = xdim

    def evaluate(self, xs, lams):
        x = np.asarray(xs, dtype=float)[:, 0][None, :]          # (1, N)
        lams = np.atleast_2d(np.asarray(lams, dtype=float))
        cols = [lams[:, j][:, None] for j in range(self.dim)]   # each (Q, 1)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.broadcast_to(self.func(x, *cols), (lams.shape[0], x.shape[1])).astype(float)

    def __repr__(self):
        return f"VectorModel({self.name!r}, dim={self.dim})"


def _g1(x):
    return np.tanh(3.0 * (x - 0.3))


def _g2(x):
    return np.exp(-0.5 * x) + np.exp(-2.0 * x)


def _g3(x):
    return 6.0 + x ** 2 - 0.5 * (x + 1.0) ** 3.5


@dataclass(frozen=True)
class Demo:
    id: str
    truth: Callable[[np.ndarray], np.ndarray]
    model: VectorModel
    domain: tuple[float, float]
    design: str          # "random" or "grid"
    sigma: float         # default data noise
    bounds: tuple        # default prior box for lambda
    guess: tuple         # starting guess for least squares


DEMOS: dict[str, Demo] = {
    "demo1": Demo(
        "demo1", _g1,
        VectorModel("exp-growth", lambda x, l1, l2: l2 * np.exp(l1 * x) - 2.0, 2),
        (0.0, 1.0), "random", 0.1, ((-10.0, 10.0), (-10.0, 10.0)), (1.0, 1.0)),
    "demo2": Demo(
        "demo2", _g2,
        VectorModel("exp-decay", lambda x, l1, l2: np.exp(-(l1 + l2 * x)), 2),
        (0.0, 5.0), "grid", 0.0, ((-5.0, 5.0), (-5.0, 5.0)), (0.0, 0.5)),
    "demo2q": Demo(
        "demo2q", _g2,
        VectorModel("quad-exp-decay", lambda x, l1, l2, l3: np.exp(-(l1 + l2 * x + l3 * x ** 2)), 3),
        (0.0, 5.0), "grid", 0.0, ((-5.0, 5.0), (-5.0, 5.0), (-5.0, 5.0)), (0.0, 0.5, 0.0)),
    "demo3-linear": Demo(
        "demo3-linear", _g3,
        VectorModel("linear", lambda x, a, b: a + b * x, 2),
        (-1.0, 1.0), "random", 0.5, ((-20.0, 20.0),) * 2, (0.0,) * 2),
    "demo3-quadratic": Demo(
        "demo3-quadratic", _g3,
        VectorModel("quadratic", lambda x, a, b, c: a + b * x + c * x ** 2, 3),
        (-1.0, 1.0), "random", 0.5, ((-20.0, 20.0),) * 3, (0.0,) * 3),
    "demo3-cubic": Demo(
        "demo3-cubic", _g3,
        VectorModel("cubic", lambda x, a, b, c, e: a + b * x + c * x ** 2 + e * x ** 3, 4),
        (-1.0, 1.0), "random", 0.5, ((-20.0, 20.0),) * 4, (0.0,) * 4),
    "demo3-true": Demo(
        "demo3-true", _g3,
        VectorModel("true-order",
                    lambda x, a, b, c, e: a + b * x + c * x ** 2 + e * (x + 1.0) ** 3.5, 4),
        (-1.0, 1.0), "random", 0.5, ((-20.0, 20.0),) * 4, (0.0,) * 4),
}


def get_demo(demo_id: str) -> Demo:
    try:
        return DEMOS[demo_id]
    except KeyError:
        raise ValueError(f"unknown demo id {demo_id!r}; choose from {sorted(DEMOS)}") from None


def design_points(demo_id: str, n: int, rng: np.random.Generator) -> np.ndarray:
    demo = get_demo(demo_id)
    lo, hi = demo.domain
    if demo.design == "grid":
        return np.linspace(lo, hi, n)
    return rng.uniform(lo, hi, n)


def generate_data(demo_id: str, n: int, sigma: float | None = None, seed: int = 0) -> Dataset:
    """Noisy observations of the demo's truth function.

    Demo 2 uses an equidistant grid on [0, 5]; the others draw x uniformly on
    the demo domain. ``sigma=None`` uses the demo default (0 for Demo 2).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    demo = get_demo(demo_id)
    rng = np.random.default_rng(seed)
    x = design_points(demo_id, n, rng)
    s = demo.sigma if sigma is None else float(sigma)
    y = demo.truth(x)
    if s > 0:
        y = y + s * rng.standard_normal(n)
    return Dataset(x, y)
