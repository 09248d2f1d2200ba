"""Row coisometries on l2 of the vertex set, and the transfer map sigma.

Matrix entry convention used throughout the package: the scalar
``T[i, i'] = <T (i), (i')>`` is *stored* at (row i', column i), i.e. matrices
act on column vectors indexed by the source walk's vertices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .walks import LabeledWalk, validate_walk

COISOMETRY_TOL = 1e-12


class InvalidWalkError(ValueError):
    pass


@dataclass(frozen=True)
class Coisometry:
    """The operator family (V_lam) on l2 of the vertices.

    ``V[lam]`` acts by V_lam(j) = conj(alpha[i, lam]) * (i) when i --lam--> j
    and kills (j) otherwise; ``Vstar[lam]`` is its conjugate transpose,
    Vstar_lam(i) = alpha[i, lam] * (i.lam).  Each column of V[lam] has at most
    one nonzero entry.
    """

    walk: LabeledWalk
    V: dict[object, sp.csc_matrix]
    Vstar: dict[object, sp.csc_matrix]

    @property
    def dim(self) -> int:
        return self.walk.n_vertices

    def defect(self) -> float:
        """Max-norm residual of sum_lam V_lam V_lam* - I."""
        n = self.dim
        acc = sp.csc_matrix((n, n), dtype=complex)
        for lam in self.walk.labels:
            acc = acc + self.V[lam] @ self.Vstar[lam]
        return float(np.abs((acc - sp.identity(n, dtype=complex, format="csc")).toarray()).max())


def build_coisometry(w: LabeledWalk, row_tol: float = 1e-9) -> Coisometry:
    """Materialize (V_lam) as sparse matrices; raises on an invalid walk."""
    report = validate_walk(w, row_tol)
    # out-injectivity does not enter the matrix construction, so degenerate
    # Cayley walks (e.g. a 2-cycle with two coinciding generators) still get
    # a perfectly good coisometry; row normalization and in-injectivity are
    # required.
    hard = [v for v in report.violations if v.kind in ("row_normalization", "in_injectivity")]
    if hard:
        raise InvalidWalkError("; ".join(v.detail for v in hard))
    n = w.n_vertices
    V = {}
    Vstar = {}
    for lam in w.labels:
        rows, cols, vals = [], [], []
        for i in w.vertices:
            e = w.edges.get((i, lam))
            if e is None:
                continue
            j, a = e
            # Vstar column i has entry alpha at row j
            rows.append(w.vindex[j])
            cols.append(w.vindex[i])
            vals.append(a)
        vs = sp.csc_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)
        Vstar[lam] = vs
        V[lam] = vs.conj().T.tocsc()
    c = Coisometry(w, V, Vstar)
    if c.defect() > COISOMETRY_TOL:
        raise InvalidWalkError(f"coisometry identity residual {c.defect():.3e} exceeds {COISOMETRY_TOL}")
    return c


def apply_sigma(c: Coisometry, c2: Coisometry, T: np.ndarray) -> np.ndarray:
    """One application of the transfer map: sum_lam V'_lam T V_lam*.

    ``c`` is the source walk's coisometry (columns of T), ``c2`` the target's
    (rows of T).  With c == c2 this is the completely positive map whose fixed
    points parametrize the commutant of the Cuntz dilation.
    """
    if set(c.walk.labels) != set(c2.walk.labels):
        raise ValueError("walks must share the same label alphabet")
    T = np.asarray(T, dtype=complex)
    if T.shape != (c2.dim, c.dim):
        raise ValueError(f"shape mismatch: T is {T.shape}, expected {(c2.dim, c.dim)}")
    out = np.zeros_like(T)
    for lam in c.walk.labels:
        out += c2.V[lam] @ T @ c.Vstar[lam]
    return out
