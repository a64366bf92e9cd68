"""Response matrices over families of sources and the corrected family.

A source family {omega_1, ..., omega_2p} responds at each edge through
the junction coefficients v_10 of the cylinder-limit solve.  Arranging
(Re, Im) of the responses per edge gives a real 2p x 2p matrix V; when
det V != 0 the family can be renormalized so V becomes the identity,
and appending a row of Re v_30 responses (the (2p+1)-square matrix)
produces a source with vanishing v_10 at every edge and unit Re v_30 at
a chosen edge.

The corrected family subtracts the finite-s response combination from a
seed source so the finite-neck coefficient u_10 vanishes exactly at
every edge, then reports the rescaled e^{3s/4} u_30 floor and the
source-size bounds over an s-grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ModelGeometry
from .grids import GridSpec
from .modes import SourceSpec, coefficient, combine, cylinder_coefficient, random_source


class BasisError(ValueError):
    """Raised for dimension mismatches or singular response matrices."""


def _responses_to_rows(values):
    """Interleave per-end complex responses into (Re, Im) rows."""
    rows = []
    for v in values:
        rows.append(v.real)
        rows.append(v.imag)
    return rows


@dataclass
class ResponseMatrix:
    """Real response matrix: rows = ends x (Re, Im) [+ optional v30 row]."""

    matrix: np.ndarray
    sources: list
    p: int
    extra_end: int | None = None   # end carrying the Re v30 row, if any

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix)):
            raise BasisError("response matrix contains non-finite entries")

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.matrix))

    def scaled_det(self) -> float:
        """Determinant after normalizing each row to unit sup norm."""
        M = self.matrix.copy()
        norms = np.max(np.abs(M), axis=1)
        norms[norms == 0] = 1.0
        return float(np.linalg.det(M / norms[:, None]))


def assemble_V(sources, geom: ModelGeometry,
               spec: GridSpec = GridSpec(level=2)) -> ResponseMatrix:
    """2p x 2p matrix of cylinder-limit v_10 responses."""
    if len(sources) != 2 * geom.p:
        raise BasisError(f"need 2p = {2 * geom.p} sources, got {len(sources)}")
    cols = []
    for src in sources:
        vals = [cylinder_coefficient(geom, 1, 0, src, spec, end=e)
                for e in range(geom.p)]
        cols.append(_responses_to_rows(vals))
    M = np.array(cols).T
    return ResponseMatrix(M, list(sources), geom.p)


@dataclass
class NormalizedBasis:
    """Sources combined so the response matrix is the identity."""

    sources: list                   # renormalized SourceSpecs
    coeff_matrix: np.ndarray        # columns express new sources in the old
    original: list

    def source(self, k: int) -> SourceSpec:
        return self.sources[k]


def normalize_basis(V: ResponseMatrix, det_floor: float = 1e-8) -> NormalizedBasis:
    """Invert the response relation; identity responses by construction."""
    if abs(V.scaled_det()) < det_floor:
        raise BasisError(
            f"response matrix numerically singular (row-scaled det "
            f"{V.scaled_det():.3e}); reseed the interior or the sources")
    C = np.linalg.solve(V.matrix, np.eye(V.matrix.shape[0]))
    new = []
    for k in range(C.shape[1]):
        parts = [(C[j, k], V.sources[j]) for j in range(C.shape[0])]
        new.append(combine(parts, label=f"normalized[{k}]"))
    return NormalizedBasis(new, C, list(V.sources))


def assemble_V_tilde(sources, extra: SourceSpec, geom: ModelGeometry, k_end: int = 0,
                     spec: GridSpec = GridSpec(level=2)) -> ResponseMatrix:
    """(2p+1)-square matrix with the Re v30 row at edge k_end appended."""
    if len(sources) != 2 * geom.p:
        raise BasisError(f"need 2p = {2 * geom.p} sources, got {len(sources)}")
    all_sources = list(sources) + [extra]
    cols = []
    for src in all_sources:
        v10 = [cylinder_coefficient(geom, 1, 0, src, spec, end=e)
               for e in range(geom.p)]
        v30 = cylinder_coefficient(geom, 3, 0, src, spec, end=k_end)
        cols.append(_responses_to_rows(v10) + [v30.real])
    M = np.array(cols).T
    return ResponseMatrix(M, all_sources, geom.p, extra_end=k_end)


def solve_unit_v30(Vt: ResponseMatrix, det_floor: float = 1e-10) -> SourceSpec:
    """Source with zero v10 at all ends and unit Re v30 at the marked end."""
    if Vt.extra_end is None:
        raise BasisError("matrix lacks the v30 row")
    M = Vt.matrix
    if abs(Vt.scaled_det()) < det_floor:
        raise BasisError(
            f"augmented response matrix singular (row-scaled det {Vt.scaled_det():.3e})")
    rhs = np.zeros(M.shape[0])
    rhs[-1] = 1.0
    x = np.linalg.solve(M, rhs)
    return combine(list(zip(x, Vt.sources)), label="unit-v30")


# -- corrected family over an s-grid ---------------------------------------


def finite_response_matrix(sources, geom: ModelGeometry,
                           spec: GridSpec = GridSpec(level=2)) -> np.ndarray:
    """Finite-neck analogue of assemble_V built from u_10 extractions."""
    cols = []
    for src in sources:
        vals = [coefficient(geom, 1, 0, src, spec, end=e)[0] for e in range(geom.p)]
        cols.append(_responses_to_rows(vals))
    return np.array(cols).T


@dataclass
class OmegaReport:
    """Corrected-source diagnostics at one neck length."""

    s: float
    a2_residuals: list          # |u_10| per end after correction
    v30: list                   # e^{3s/4} u_30 per end
    source_sup: float
    correction_coeffs: np.ndarray
    degenerate: bool = False


def construct_omega_s(sigma: SourceSpec, basis_sources, geom: ModelGeometry,
                      spec: GridSpec = GridSpec(level=2),
                      degenerate_tol: float = 1e-10) -> tuple:
    """Subtract the finite-s basis combination so u_10 vanishes at every end.

    Returns (corrected SourceSpec, OmegaReport).  The subtraction is an
    exact linear solve against the finite-s response matrix; the report
    flags the degenerate case where sigma lies in the basis span (the
    corrected source is then numerically zero).
    """
    if len(basis_sources) != 2 * geom.p:
        raise BasisError(f"need 2p = {2 * geom.p} basis sources")
    s = geom.s[0]
    M = finite_response_matrix(basis_sources, geom, spec)
    resp = [coefficient(geom, 1, 0, sigma, spec, end=e)[0] for e in range(geom.p)]
    rhs = np.array(_responses_to_rows(resp))
    scale = np.max(np.abs(M), axis=1)
    scale[scale == 0] = 1.0
    c = np.linalg.solve(M / scale[:, None], rhs / scale)
    corrected = combine([(1.0, sigma)] + [(-c[j], basis_sources[j])
                                          for j in range(len(basis_sources))],
                        label=f"{sigma.label}|u10-free")
    # diagnostics
    a2 = [abs(coefficient(geom, 1, 0, corrected, spec, end=e)[0])
          for e in range(geom.p)]
    grow = float(np.exp(0.75 * s))
    v30 = [grow * coefficient(geom, 3, 0, corrected, spec, end=e)[0]
           for e in range(geom.p)]
    sup = corrected.sup_norm()
    degenerate = sup < degenerate_tol * max(sigma.sup_norm(), 1e-300)
    report = OmegaReport(s, a2, v30, sup, c, degenerate)
    return corrected, report


def seeded_source_family(geom: ModelGeometry, seed: int, count: int | None = None,
                         n_list=(1, 3), m_list=(0,)) -> list:
    """Distinct seeded sources standing in for distinct classes."""
    count = count if count is not None else 2 * geom.p
    return [random_source(f"omega[{k}]", seed + 101 * k, geom,
                          n_list=n_list, m_list=m_list)
            for k in range(count)]
