"""Shared fixtures-in-spirit for the test suite: catalog sweeps and tensors."""

import numpy as np

from gradpower.expfam import catalog_model

# one representative fixed-constant choice per catalog entry
CATALOG_FIXED = {
    "normal-variance": {"mu": 0.7},
    "normal-mean": {"theta": 1.5},
    "invnormal-theta": {"mu": 1.2},
    "invnormal-mu": {"theta": 2.0},
    "gamma": {"k": 2.0},
    "tev": {},
    "pareto": {"k": 1.5},
    "laplace": {"k": -0.3},
    "power": {"phi": 3.0},
}

# entries whose beta'' vanishes identically (score and gradient statistics coincide)
BETA2_ZERO = ("normal-variance", "normal-mean", "invnormal-mu", "tev", "laplace")

# natural entries (alpha'' = 0): both gradient-coefficient sources agree
NATURAL = ("invnormal-theta", "gamma", "pareto", "power")


def all_models():
    return [(name, catalog_model(name, fixed)) for name, fixed in CATALOG_FIXED.items()]


def theta_grid(name):
    if name == "normal-mean":
        return (-1.3, 0.4, 2.0)
    return (0.4, 1.0, 2.7)


def random_theta(rng, name):
    if name == "normal-mean":
        return float(rng.uniform(-2.0, 2.0))
    return float(rng.uniform(0.3, 3.0))


def random_tensors(rng, p, q=0, with_k111=False):
    """A random valid cumulant-tensor set of dimension p."""
    from gradpower.expansion import CumulantTensors

    R = rng.normal(size=(p, p))
    K = R @ R.T + p * np.eye(p)
    k3 = rng.normal(size=(p, p, p))
    k3 = sum(
        np.transpose(k3, perm)
        for perm in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    ) / 6.0
    k21 = rng.normal(size=(p, p, p))
    k21 = 0.5 * (k21 + np.transpose(k21, (0, 2, 1)))
    k111 = None
    if with_k111:
        k111 = rng.normal(size=(p, p, p))
        k111 = sum(
            np.transpose(k111, perm)
            for perm in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        ) / 6.0
    return CumulantTensors(p=p, q=q, K=K, k3=k3, k21=k21, k111=k111)
