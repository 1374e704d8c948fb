"""Non-rigorous dimension estimates for 2x2 tuples by discretizing RP^1.

The transfer operator

    (L_s f)(u) = sum_i w_i(u, s) f(A_i u / |A_i u|)

with w_i = |A_i u|^s for s <= 1 and |A_i u|^{2-s} |det A_i|^{s-1} for
1 <= s <= 2 is collocated on M evenly spaced lines: each mesh line is sent to
the mesh line nearest its image.  The spectral radius of the resulting
matrix stands in for exp(P(s)).  Results carry no error bound and every
report marks them as non-rigorous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import BracketFailed, DimensionMismatch, PowerIterationStalled, SecantDiverged, SingularMatrix
from .linalg import RationalMatrix

POWER_TOL = 1e-12
POWER_CAP = 100_000
SOLVE_TOL = 1e-12
MAX_ITERATIONS = 64


@dataclass(frozen=True)
class ProjectiveMesh:
    """M lines through the origin at angles (j + 1/2) pi / M, j = 0..M-1."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("mesh size must be positive")

    @property
    def angles(self) -> np.ndarray:
        return (np.arange(self.size) + 0.5) * (math.pi / self.size)

    def nearest(self, theta: np.ndarray) -> np.ndarray:
        """Index of the closest mesh angle, with theta taken mod pi."""
        cell = math.pi / self.size
        idx = np.rint(np.mod(theta, math.pi) / cell - 0.5).astype(np.int64)
        return np.mod(idx, self.size)


@dataclass(frozen=True)
class DiscretizedOperator:
    matrix: sp.csr_matrix
    s: float
    mesh: ProjectiveMesh


def _as_arrays(matrices: Sequence) -> list[np.ndarray]:
    arrays = []
    for a in matrices:
        arr = np.array(a.to_float() if isinstance(a, RationalMatrix) else a, dtype=float)
        if arr.shape != (2, 2):
            raise DimensionMismatch("the discretized operator is implemented for 2x2 matrices only")
        exact_det = a.det() if isinstance(a, RationalMatrix) else np.linalg.det(arr)
        if exact_det == 0:
            raise SingularMatrix("every matrix must be invertible")
        arrays.append(arr)
    if not arrays:
        raise DimensionMismatch("need at least one matrix")
    return arrays


def assemble_operator(matrices: Sequence, s: float, mesh: ProjectiveMesh) -> DiscretizedOperator:
    """Sparse M x M matrix with one weight per (mesh point, map)."""
    if not 0 <= s <= 2:
        raise ValueError("s must lie in [0, 2]")
    arrays = _as_arrays(matrices)
    theta = mesh.angles
    u = np.stack([np.cos(theta), np.sin(theta)])
    m = mesh.size
    rows, cols, vals = [], [], []
    for a in arrays:
        image = a @ u
        norm = np.hypot(image[0], image[1])
        if s <= 1:
            weight = norm**s
        else:
            weight = norm ** (2 - s) * abs(np.linalg.det(a)) ** (s - 1)
        rows.append(np.arange(m))
        cols.append(mesh.nearest(np.arctan2(image[1], image[0])))
        vals.append(weight)
    # Duplicate (row, col) pairs are summed by the constructor.
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
    )
    return DiscretizedOperator(matrix, float(s), mesh)


def spectral_radius_power(op: DiscretizedOperator | sp.spmatrix | np.ndarray, tol: float = POWER_TOL, cap: int = POWER_CAP) -> float:
    """Power iteration from the all-ones vector for a nonnegative matrix.

    The growth estimate is sum(L v) / sum(v); iteration stops once two
    successive estimates differ by less than ``tol``.
    """
    mat = op.matrix if isinstance(op, DiscretizedOperator) else op
    v = np.ones(mat.shape[0])
    previous = None
    for _ in range(cap):
        w = mat @ v
        total = v.sum()
        estimate = w.sum() / total
        top = np.abs(w).max()
        if top == 0:
            return 0.0
        v = w / top
        if previous is not None and abs(estimate - previous) < tol:
            return float(estimate)
        previous = estimate
    raise PowerIterationStalled(f"power iteration did not settle within {cap} steps")


def discrete_pressure(matrices: Sequence, s: float, mesh: ProjectiveMesh, tol: float = POWER_TOL) -> float:
    """rho of the collocated operator; approximates exp(P(s))."""
    return spectral_radius_power(assemble_operator(matrices, s, mesh), tol)


def solve_dimension_discretized(matrices: Sequence, mesh_size: int, tol: float = SOLVE_TOL) -> float:
    """Root of rho_M(s) - 1 on [0, 2] by safeguarded secant (NON-RIGOROUS)."""
    arrays = _as_arrays(matrices)
    mesh = ProjectiveMesh(mesh_size)

    def f(s: float) -> float:
        return discrete_pressure(arrays, s, mesh) - 1

    a, fa = 0.0, f(0.0)
    b, fb = 2.0, f(2.0)
    if fa < 0 or fb > 0:
        raise BracketFailed("rho_M(s) - 1 does not change sign on [0, 2]")
    if fa == 0:
        return a
    if fb == 0:
        return b
    s_prev, f_prev, s_cur, f_cur = b, fb, a, fa
    for _ in range(MAX_ITERATIONS):
        if f_cur == f_prev:
            break
        s_next = s_cur - f_cur * (s_cur - s_prev) / (f_cur - f_prev)
        if not a < s_next < b:
            s_next = (a + b) / 2
        f_next = f(s_next)
        if f_next == 0:
            return s_next
        if f_next > 0:
            a, fa = s_next, f_next
        else:
            b, fb = s_next, f_next
        if abs(s_next - s_cur) <= tol or b - a <= tol:
            return s_next
        s_prev, f_prev, s_cur, f_cur = s_cur, f_cur, s_next, f_next
    # Secant stalled: finish by bisection inside the maintained bracket.
    for _ in range(200):
        m = (a + b) / 2
        fm = f(m)
        if fm > 0:
            a = m
        else:
            b = m
        if b - a <= tol:
            return (a + b) / 2
    raise SecantDiverged("discretized solve did not reach tolerance")
