"""Conservative tridiagonal discretization of the separated radial operator.

Each Fourier mode of the Laplacian reduces to

    (Delta u)_mode = -(1/rho) (p u')' + V u

with weight rho = sqrt(det g), flux coefficient p = rho * g^rr and
potential V = n^2/g_phiphi + m^2/g_thetatheta.  The scheme differences
fluxes p*u' at cell midpoints.  Scaling row i by rho_i * w_i (w = control
width) makes the matrix symmetric positive definite, and the system is
solved by banded Cholesky *without pivoting*: on this M-matrix the
factorization is componentwise stable, so solution values remain
relatively accurate even when they are exponentially small across a long
neck.  (A partially pivoting general-band solver smears O(eps * |big
row|) absolute error into the tiny edge values; that failure mode is why
pivoting is avoided here.)

Boundary closures:
  frobenius(n, m)    u_end = gamma * u_neighbor with gamma the two-term
                     series ratio of the edge-regular branch (folded in)
  reflective         zero flux through the end face
  transparent(alpha) exact discrete outgoing-decay relation for a
                     uniform flat extension (the consistent second-order
                     realization of u' = alpha * u at a cylinder junction)
  dirichlet(value)   pinned value (used for truncated-cylinder checks)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded


class SolveError(RuntimeError):
    """Raised when a mode solve cannot be completed."""


def frobenius_gamma(n: int, m: int, r0: float, r1: float) -> float:
    """Ratio u(r0)/u(r1) of the edge-regular solution, two-term series.

    The regular branch is r^nu (1 + a1 r^2 + O(r^4)) with nu = |n|/2 and
    a1 = m^2 / (2|n| + 4), the coefficient forced by the separated radial
    equation on the identity zone.
    """
    nu = abs(n) / 2.0
    a1 = m * m / (2.0 * abs(n) + 4.0)
    return (r0 / r1) ** nu * (1.0 + a1 * r0 * r0) / (1.0 + a1 * r1 * r1)


def transparent_mu(alpha: float, h: float) -> float:
    """Per-cell growth factor of the discrete mode on a uniform flat cylinder.

    Root > 1 of mu^2 - (2 + (alpha h)^2) mu + 1 = 0; the outgoing-decay
    ghost relation is u_ghost = u_boundary / mu.
    """
    eps = (alpha * h) ** 2
    return 1.0 + 0.5 * eps + np.sqrt(eps + 0.25 * eps * eps)


@dataclass(frozen=True)
class BC:
    kind: str
    alpha: float = 0.0
    value: complex = 0.0
    n: int = 0
    m: int = 0

    @staticmethod
    def frobenius(n: int, m: int) -> "BC":
        return BC("frobenius", n=n, m=m)

    @staticmethod
    def reflective() -> "BC":
        return BC("reflective")

    @staticmethod
    def transparent(alpha: float) -> "BC":
        return BC("transparent", alpha=alpha)

    @staticmethod
    def dirichlet(value: complex = 0.0) -> "BC":
        return BC("dirichlet", value=value)


@dataclass
class RadialOperator:
    """Sampled coefficients of one separated mode on a fixed grid."""

    r: np.ndarray       # strictly increasing nodes
    p_mid: np.ndarray   # flux coefficient at midpoints, len N-1
    rho: np.ndarray     # weight at nodes, len N
    V: np.ndarray       # potential at nodes, len N

    def __post_init__(self):
        N = len(self.r)
        if len(self.p_mid) != N - 1 or len(self.rho) != N or len(self.V) != N:
            raise ValueError("coefficient arrays inconsistent with grid")

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.r)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """-(1/rho)(p u')' + V u at interior nodes (length N-2)."""
        h = self.h
        w = 0.5 * (self.r[2:] - self.r[:-2])
        flux = self.p_mid * np.diff(u) / h
        return -np.diff(flux) / (self.rho[1:-1] * w) + self.V[1:-1] * u[1:-1]


def solve_radial(op: RadialOperator, f: np.ndarray, left: BC, right: BC,
                 r_left_origin: float = 0.0,
                 r_right_origin: float | None = None) -> np.ndarray:
    """Solve (-(1/rho)(p u')' + V) u = f with the given closures.

    For frobenius closures the edge coordinate is the distance to the
    relevant origin (r_left_origin resp. r_right_origin).
    """
    r, p_mid, rho, V = op.r, op.p_mid, op.rho, op.V
    N = len(r)
    h = op.h

    # symmetric form: row i scaled by rho_i * w_i
    off = -p_mid / h                      # coupling between i and i+1
    diag = np.zeros(N)
    diag[:-1] -= off
    diag[1:] -= off
    w = np.empty(N)
    w[1:-1] = 0.5 * (r[2:] - r[:-2])
    w[0] = 0.5 * h[0]
    w[-1] = 0.5 * h[-1]
    gammas = [None, None]   # reconstruction data for eliminated end nodes

    def closure_terms(side: str, bc: BC):
        """Returns (eliminate, diag_add, w_end) and records reconstruction."""
        i, j = (0, 1) if side == "left" else (N - 1, N - 2)
        hb = h[0] if side == "left" else h[-1]
        o = off[0] if side == "left" else off[-1]
        if bc.kind == "frobenius":
            if side == "left":
                xi_i, xi_j = r[0] - r_left_origin, r[1] - r_left_origin
            else:
                org = r_right_origin if r_right_origin is not None else r[-1]
                xi_i, xi_j = org - r[-1], org - r[-2]
            gamma = frobenius_gamma(bc.n, bc.m, xi_i, xi_j)
            gammas[0 if side == "left" else 1] = ("ratio", gamma)
            return True, o * gamma, None
        if bc.kind == "dirichlet":
            gammas[0 if side == "left" else 1] = ("value", bc.value)
            return True, 0.0, None
        if bc.kind == "reflective":
            return False, 0.0, 0.5 * hb
        if bc.kind == "transparent":
            mu = transparent_mu(bc.alpha, hb)
            # ghost cell of width hb continuing a uniform flat extension
            return False, rho[i] * (1.0 - 1.0 / mu) / hb, hb
        raise SolveError(f"unknown boundary closure {bc.kind!r}")

    elim_l, add_l, w_l = closure_terms("left", left)
    elim_r, add_r, w_r = closure_terms("right", right)
    if w_l is not None:
        w[0] = w_l
    if w_r is not None:
        w[-1] = w_r
    diag = diag + V * rho * w
    rhs = np.asarray(f, dtype=complex) * rho * w

    lo = 1 if elim_l else 0
    hi = N - 1 if elim_r else N
    d = diag[lo:hi].copy()
    o = off[lo:hi - 1].copy() if hi - lo > 1 else off[0:0]
    b = rhs[lo:hi].copy()
    if elim_l:
        kind, val = gammas[0]
        if kind == "ratio":
            d[0] += off[0] * val
        else:
            b[0] -= off[0] * val
    else:
        d[0] += add_l
    if elim_r:
        kind, val = gammas[1]
        if kind == "ratio":
            d[-1] += off[-1] * val
        else:
            b[-1] -= off[-1] * val
    else:
        d[-1] += add_r

    ab = np.zeros((2, hi - lo))
    ab[0, 1:] = o
    ab[1, :] = d
    try:
        core = solveh_banded(ab, np.column_stack([b.real, b.imag]), lower=False)
    except np.linalg.LinAlgError as exc:
        raise SolveError(f"mode system not positive definite: {exc}") from exc
    ucore = core[:, 0] + 1j * core[:, 1]

    u = np.empty(N, dtype=complex)
    u[lo:hi] = ucore
    if elim_l:
        kind, val = gammas[0]
        u[0] = val * u[1] if kind == "ratio" else val
    if elim_r:
        kind, val = gammas[1]
        u[-1] = val * u[-2] if kind == "ratio" else val
    if not np.all(np.isfinite(u)):
        raise SolveError("mode solve produced non-finite values")
    return u
