"""Undirected weighted network topology with Laplacian spectral quantities."""

from dataclasses import dataclass, field

import numpy as np

from .errors import Disconnected, NegativeWeight, NonSymmetric

SYMMETRY_TOL = 1e-12
CONNECTIVITY_TOL = 1e-12


@dataclass(frozen=True)
class Network:
    """Connected undirected weighted graph with derived spectral data.

    The Laplacian is l_ii = sum_j a_ij, l_ij = -a_ij.  lambda2 (algebraic
    connectivity) and lambdaN (largest eigenvalue) feed the event-trigger
    parameter bounds.
    """

    n_agents: int
    adjacency: np.ndarray
    laplacian: np.ndarray
    lambda2: float
    lambdaN: float
    neighbor_lists: tuple = field(default=())

    @property
    def degrees(self) -> np.ndarray:
        """Laplacian diagonal l_ii."""
        return np.diag(self.laplacian).copy()


def spectral_eigenvalues(laplacian: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix.

    Raises NonSymmetric if the matrix is not symmetric.
    """
    laplacian = np.asarray(laplacian, dtype=float)
    if laplacian.ndim != 2 or laplacian.shape[0] != laplacian.shape[1]:
        raise NonSymmetric("matrix must be square")
    if not np.allclose(laplacian, laplacian.T, atol=SYMMETRY_TOL):
        raise NonSymmetric("matrix must be symmetric")
    return np.linalg.eigvalsh(laplacian)


def build_network(adjacency) -> Network:
    """Build a Network from a symmetric nonnegative adjacency matrix.

    Fails with Disconnected when the algebraic connectivity is below
    tolerance; floating-point eigenvalues of singular Laplacians motivate
    the 1e-12 cut.
    """
    adjacency = np.array(adjacency, dtype=float)
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise NonSymmetric("adjacency must be a square matrix")
    if not np.allclose(adjacency, adjacency.T, atol=SYMMETRY_TOL):
        raise NonSymmetric("adjacency must be symmetric")
    if np.any(adjacency < 0):
        raise NegativeWeight("adjacency weights must be nonnegative")
    n = adjacency.shape[0]
    adjacency[np.diag_indices(n)] = 0.0

    laplacian = np.diag(adjacency.sum(axis=1)) - adjacency
    eigs = spectral_eigenvalues(laplacian)
    lambda2 = float(eigs[1]) if n > 1 else 0.0
    lambdaN = float(eigs[-1])
    if lambda2 <= CONNECTIVITY_TOL:
        raise Disconnected(f"graph is disconnected (lambda2 = {lambda2:.3e})")

    neighbors = tuple(
        tuple(int(j) for j in np.nonzero(adjacency[i])[0]) for i in range(n)
    )
    return Network(
        n_agents=n,
        adjacency=adjacency,
        laplacian=laplacian,
        lambda2=lambda2,
        lambdaN=lambdaN,
        neighbor_lists=neighbors,
    )


def cycle_adjacency(n: int, weight: float = 1.0) -> np.ndarray:
    """Unit-weight ring topology on n agents."""
    adj = np.zeros((n, n))
    for i in range(n):
        adj[i, (i + 1) % n] = weight
        adj[(i + 1) % n, i] = weight
    return adj
