"""Embedded vertex sets and model parameters used by the reproduction harness."""
import numpy as np

# five planar vertices for the nerve-factorization example
FACTORIZATION_VERTICES = np.array([
    [0.2065, 0.3149],
    [0.6383, -0.1193],
    [0.9225, -0.2544],
    [-0.8863, 0.0816],
    [0.3043, -0.9310],
])

# five planar vertices for the filtration / decomposable-graph trace
TRACE_VERTICES = np.array([
    [0.686, 0.151],
    [0.214, 0.194],
    [0.846, 0.420],
    [0.411, 0.567],
    [0.089, 0.553],
])

# six planar vertices whose Alpha nerve gives the hypergraph example
HYPERGRAPH_VERTICES = np.array([
    [-0.0936, 0.6340],
    [-0.4817, 0.7876],
    [0.0019, 0.0055],
    [0.0930, 0.0351],
    [0.2605, -0.0702],
    [-0.5028, 0.2839],
])

# precision matrix of the six-variable Gaussian example
GAUSSIAN_PRECISION = np.array([
    [18.18, -6.55, 0.0, 2.26, -6.27, 0.0],
    [-6.55, 14.21, 0.0, -4.90, 0.0, 0.0],
    [0.0, 0.0, 10.47, 0.0, 0.0, -3.65],
    [2.26, -4.90, 0.0, 10.69, 0.0, 0.0],
    [-6.27, 0.0, 0.0, 0.0, 27.26, 0.0],
    [0.0, 0.0, -3.65, 0.0, 0.0, 7.41],
])


def hiw_scale(n: int = 6) -> np.ndarray:
    return 0.4 * np.eye(n) + 0.6 * np.ones((n, n))
