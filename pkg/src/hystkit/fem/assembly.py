"""P1 element geometry and sparse assembly for the two potential forms.

Both formulations share the same machinery: the scalar form works with
element gradients of the nodal basis, the vector form with their
90-degree rotation (the out-of-plane curl).  All assembly is vectorized
over elements and deterministic (fixed numpy reduction order).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh2D


class ElementGeometry:
    """Per-element areas and basis-function derivative tables."""

    def __init__(self, mesh: Mesh2D):
        self.mesh = mesh
        p = mesh.nodes[mesh.triangles]  # (M, 3, 2)
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        if np.any(det <= 0):
            raise ValueError("mesh contains non-positively-oriented triangles")
        self.area = 0.5 * det
        # grad phi_i = (b_i, c_i) / (2 A) with the usual cyclic coefficients
        b = np.stack([p[:, 1, 1] - p[:, 2, 1],
                      p[:, 2, 1] - p[:, 0, 1],
                      p[:, 0, 1] - p[:, 1, 1]], axis=1)
        c = np.stack([p[:, 2, 0] - p[:, 1, 0],
                      p[:, 0, 0] - p[:, 2, 0],
                      p[:, 1, 0] - p[:, 0, 0]], axis=1)
        self.grad = np.stack([b, c], axis=2) / det[:, None, None]  # (M, 3, 2)
        # Curl phi_i = (d phi/dy, -d phi/dx)
        self.curl = np.stack([self.grad[:, :, 1], -self.grad[:, :, 0]], axis=2)

    def field_from_nodal(self, values, basis) -> np.ndarray:
        """Piecewise-constant vector field sum_i v_i * basis_i per element.

        ``basis`` is ``self.grad`` (gives grad v) or ``self.curl``
        (gives Curl v)."""
        ve = values[self.mesh.triangles]  # (M, 3)
        return np.einsum("mi,mij->mj", ve, basis)

    def assemble_stiffness(self, D, basis) -> sp.csr_matrix:
        """Sparse SPD matrix sum_T area (basis_i . D basis_j)."""
        Ke = np.einsum("m,mia,mab,mjb->mij", self.area, basis, D, basis)
        tri = self.mesh.triangles
        rows = np.repeat(tri, 3, axis=1).ravel()
        cols = np.tile(tri, (1, 3)).ravel()
        n = self.mesh.n_nodes
        return sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    def assemble_flux_divergence(self, field, basis) -> np.ndarray:
        """Nodal vector sum_T area (field . basis_i); the weak divergence
        (scalar form) or weak curl (vector form) of an element field."""
        contrib = np.einsum("m,mij,mj->mi", self.area, basis, field)
        out = np.zeros(self.mesh.n_nodes)
        np.add.at(out, self.mesh.triangles.ravel(), contrib.ravel())
        return out

    def assemble_load(self, density) -> np.ndarray:
        """Nodal vector of ∫ density * phi_i dx for piecewise-constant
        density (one third of the element integral per vertex)."""
        contrib = np.broadcast_to((self.area * density / 3.0)[:, None],
                                  (self.mesh.n_triangles, 3))
        out = np.zeros(self.mesh.n_nodes)
        np.add.at(out, self.mesh.triangles.ravel(), contrib.ravel())
        return out


def isotropic_tensor(values) -> np.ndarray:
    """(M, 2, 2) array of values[m] * Identity."""
    values = np.asarray(values, dtype=float)
    D = np.zeros(values.shape + (2, 2))
    D[..., 0, 0] = values
    D[..., 1, 1] = values
    return D
