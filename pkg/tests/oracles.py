"""Independent generators for the estimator oracles.

Plain numpy loops with no use of the package's simulation code, so a fit
recovering the generating parameters checks the estimator rather than a
shared convention.
"""
import numpy as np

from l96varx.l96 import SampleSeries

# generating parameters of the VARX recovery fixture
VARX_TRUE = {"a0": 0.1, "a_p": 0.9, "d": 0.05, "sigma": 0.2}

# N1110 generating set with coefficients large enough for 2% recovery
N1110_TRUE = {"mu": 0.05, "a1": 0.9, "b": (-0.1, 0.02, -0.003), "c11": -0.02, "sigma2": 0.01}


def varx_fixture(seed=0, K=32, N=100_000, p=1, sigma=VARX_TRUE["sigma"]):
    """``b[n] = 0.1 + 0.9 b[n-p] + 0.05 x[n] + sigma xi`` with white ``x ~ N(0, 4)``."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(N, K)) * 2.0
    xi = rng.normal(size=(N, K))
    b = np.zeros((N, K))
    for n in range(N):
        prev = b[n - p] if n >= p else 1.0
        b[n] = 0.1 + 0.9 * prev + 0.05 * x[n] + sigma * xi[n]
    return SampleSeries(x, b, 0.01, f"varx-fixture-{seed}")


def ar1(a, N, seed=0, K=1):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=(N, K))
    out = np.empty((N, K))
    out[0] = e[0] / np.sqrt(1 - a * a)
    for n in range(1, N):
        out[n] = a * out[n - 1] + e[n]
    return out if K > 1 else out[:, 0]


def l96_resolved(x, F):
    """``x_{k-1} (x_{k+1} - x_{k-2}) - x_k + F`` by explicit indexing."""
    K = x.shape[-1]
    out = np.empty_like(x)
    for k in range(K):
        out[..., k] = x[..., k - 1] * (x[..., (k + 1) % K] - x[..., k - 2]) - x[..., k] + F
    return out


def n1110_fixture(seed=0, K=8, N=100_000, F=10.0, params=N1110_TRUE):
    """N1110 output driven by a smooth synthetic ``x`` (AR(1) around 2)."""
    rng = np.random.default_rng(seed)
    x = 2.0 + 3.0 * ar1(0.98, N, seed + 1000, K) * np.sqrt(1 - 0.98 ** 2)
    R = l96_resolved(x, F)
    b11, b12, b13 = params["b"]
    noise = rng.normal(size=(N, K)) * np.sqrt(params["sigma2"])
    z = np.zeros((N, K))
    for n in range(1, N):
        xc = x[n]
        z[n] = (params["mu"] + params["a1"] * z[n - 1] + b11 * xc + b12 * xc ** 2
                + b13 * xc ** 3 + params["c11"] * R[n] + noise[n])
    return SampleSeries(x, z, 0.01, f"n1110-fixture-{seed}")
