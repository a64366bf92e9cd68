"""Two-dimensional finite-difference oracle for the mode solver.

Discretizes the (r, phi) reduction of the problem (theta already in
Fourier form, m fixed) without separating the phi variable: unknowns
live on a polar grid with antiperiodic wrap u(r, phi + pi) = -u(r, phi),
which enforces the antisymmetric (odd-n) sector.  The edge uses a cut
cell at r_min with the exact zero-flux condition at r = 0 (the volume
density vanishes there) instead of the mode solver's series closure, so
the two discretizations share no machinery beyond the coefficients.

Intended purely for cross-validation: discrepancies against superposed
1D mode solves should shrink at second order under grid doubling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import ModelGeometry
from .grids import GridSpec, build_radial_grid


class OracleError(RuntimeError):
    """2D solve failed to converge or was fed inconsistent sizes."""


ORACLE_SPEC = GridSpec(level=0, r_min=1e-4, edge_per_decade=8, h_body=0.25)


@dataclass
class OracleSolution:
    r: np.ndarray
    phi: np.ndarray           # [0, pi), antiperiodic
    values: np.ndarray        # shape (N_r, N_phi), complex
    m: int


def oracle_grid(geom: ModelGeometry, level: int = 0) -> np.ndarray:
    spec = GridSpec(level=level, r_min=ORACLE_SPEC.r_min,
                    edge_per_decade=ORACLE_SPEC.edge_per_decade,
                    h_body=ORACLE_SPEC.h_body)
    return build_radial_grid(geom, spec, alpha=0.0)


def solve_fd_oracle(geom: ModelGeometry, m: int, source, level: int = 0,
                    n_phi: int = 16) -> OracleSolution:
    """Solve (Delta + angular) u = f on the (r, phi) grid at one level.

    source(r, phi) -> complex; must vanish outside the interior region.
    n_phi counts nodes on [0, pi) and doubles with the level.
    """
    if geom.p != 1:
        raise OracleError("oracle is implemented for the capped closure")
    r = oracle_grid(geom, level)
    n_phi = n_phi * 2**level
    N_r = len(r)
    if N_r > 512 or n_phi > 64:
        raise OracleError(f"oracle grid {N_r} x {n_phi} exceeds the sanctioned size")
    phi = np.arange(n_phi) * np.pi / n_phi
    h_phi = np.pi / n_phi

    a = geom.coeff_a(r)
    b = geom.coeff_b(r)
    rho = a * b
    mid = 0.5 * (r[:-1] + r[1:])
    p_mid = geom.coeff_a(mid) * geom.coeff_b(mid)
    h = np.diff(r)

    # radial control widths; cut cell at the axis, zero flux there exactly
    w = np.empty(N_r)
    w[0] = 0.5 * (r[0] + r[1])
    w[1:-1] = 0.5 * (r[2:] - r[:-2])
    w[-1] = 0.5 * h[-1]

    sub = np.zeros(N_r)
    sup = np.zeros(N_r)
    sub[1:] = -p_mid / (h * rho[1:] * w[1:])
    sup[:-1] = -p_mid / (h * rho[:-1] * w[:-1])
    diag_r = -(sub + sup) + (m * m) / (b * b)
    c_phi = 1.0 / (a * a * h_phi * h_phi)

    def idx(i, j):
        return i * n_phi + j

    rows, cols, vals = [], [], []
    I = np.arange(N_r)
    J = np.arange(n_phi)
    II, JJ = np.meshgrid(I, J, indexing="ij")
    base = (II * n_phi + JJ).ravel()

    def add(rr, cc, vv):
        rows.append(rr)
        cols.append(cc)
        vals.append(vv)

    add(base, base, (diag_r[:, None] + 2.0 * c_phi[:, None] + np.zeros((1, n_phi))).ravel())
    # radial couplings
    mask = II >= 1
    add(base[mask.ravel()], (base - n_phi)[mask.ravel()],
        np.broadcast_to(sub[:, None], II.shape)[mask].ravel())
    mask = II <= N_r - 2
    add(base[mask.ravel()], (base + n_phi)[mask.ravel()],
        np.broadcast_to(sup[:, None], II.shape)[mask].ravel())
    # phi couplings with antiperiodic wrap
    jp = (JJ + 1) % n_phi
    sgn_p = np.where(JJ + 1 >= n_phi, -1.0, 1.0)
    jm = (JJ - 1) % n_phi
    sgn_m = np.where(JJ - 1 < 0, -1.0, 1.0)
    cphi2 = np.broadcast_to(c_phi[:, None], II.shape)
    add(base, (II * n_phi + jp).ravel(), (-cphi2 * sgn_p).ravel())
    add(base, (II * n_phi + jm).ravel(), (-cphi2 * sgn_m).ravel())

    A = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N_r * n_phi, N_r * n_phi))
    R, PH = np.meshgrid(r, phi, indexing="ij")
    f = np.asarray(source(R, PH), dtype=complex).ravel()
    try:
        u = spla.spsolve(A, f)
    except Exception as exc:  # pragma: no cover
        raise OracleError(f"sparse solve failed: {exc}") from exc
    if not np.all(np.isfinite(u)):
        raise OracleError("oracle produced non-finite values")
    return OracleSolution(r, phi, u.reshape(N_r, n_phi), m)


def mode_source_2d(source, geom: ModelGeometry, modes, m: int):
    """(r, phi) source from per-mode radial profiles at fixed m."""
    off = geom.interior_start

    def f(R, PH):
        out = np.zeros_like(R, dtype=complex)
        for n in modes:
            prof = source.eval_mode(n, m, R - off)
            out += prof * np.exp(1j * n * PH)
        return out

    return f


def oracle_discrepancy(geom: ModelGeometry, source, modes, m: int,
                       level: int, ref_solutions) -> float:
    """Sup-norm gap between the 2D solve and superposed 1D references.

    ref_solutions: {n: RadialSolution} at a resolution far beyond the
    oracle's, interpolated to the oracle nodes.
    """
    sol = solve_fd_oracle(geom, m, mode_source_2d(source, geom, modes, m),
                          level=level)
    ref = np.zeros_like(sol.values)
    for n in modes:
        prof = ref_solutions[n].interp(sol.r)
        ref += prof[:, None] * np.exp(1j * n * sol.phi)[None, :]
    scale = np.max(np.abs(ref))
    if scale == 0:
        return float(np.max(np.abs(sol.values)))
    return float(np.max(np.abs(sol.values - ref)) / scale)
