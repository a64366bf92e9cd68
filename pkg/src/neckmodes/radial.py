"""Edge-normalized radial solutions of the separated harmonic equation.

On the boundary and neck regions each antisymmetric Fourier mode
(n odd, m integer) of a harmonic function satisfies

    (1/rho) (rho u')' - (n^2 / (4 rho^2) + m^2) u = 0,      rho = rho(r),

a regular-singular ODE at r = 0 whose bounded branch behaves like
r^(|n|/2).  I_nm denotes that branch normalized to leading coefficient
one.  On the identity zone rho = r the equation is the modified Bessel
equation of order |n|/2 in the variable |m| r, which supplies an
independent oracle; for m = 0 it integrates in closed form to

    I_n0(r) = exp( (|n|/2) (log r_a + int_{r_a}^r drho / rho) ),

a pure growing exponential exp(|n| (r - R0) / 4) on the flat neck.

The growing branch is integrated in logarithmic form (log-magnitude plus
Riccati slope q = I'/I), which is immune to overflow for any neck length
and keeps the forward integration stable: the growing solution is the
attracting one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gamma as gamma_fn
from scipy.special import iv

from .geometry import ModelGeometry

_LOG_HUGE = 700.0  # below exp overflow


class ModeError(ValueError):
    """Invalid mode index or use of a radial solution outside its domain."""


class MatchError(RuntimeError):
    """Two-exponential neck match failed to reproduce the solution."""


def validate_mode(n: int, m: int):
    if n % 2 == 0:
        raise ModeError(f"phi-frequency must be odd (antisymmetry), got n={n}")
    if n <= 0:
        raise ModeError("store modes with n > 0; negative n follows by conjugation")


def mode_alpha(n: int, m: int) -> float:
    """Neck exponent sqrt(n^2/16 + m^2)."""
    return float(np.hypot(n / 4.0, m))


def frobenius_a1(n: int, m: int) -> float:
    """Second series coefficient of the regular branch r^(n/2)(1 + a1 r^2 + ...).

    The product structure forces the first correction at relative order
    r^2 (not r^(1/2)); a1 = m^2 / (2|n| + 4) follows by substituting the
    series into the separated equation on the identity zone.
    """
    return m * m / (2.0 * abs(n) + 4.0)


@dataclass
class InmSolution:
    """Log-form radial solution with dense evaluation on [r_start, r_end]."""

    geom: ModelGeometry
    n: int
    m: int
    r_start: float
    r_end: float
    _dense: object

    @property
    def alpha(self) -> float:
        return mode_alpha(self.n, self.m)

    def _eval(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r_start - 1e-15) or np.any(r > self.r_end * (1 + 1e-12)):
            raise ModeError(
                f"radial solution evaluated outside [{self.r_start}, {self.r_end}]")
        out = self._dense(np.clip(r, self.r_start, self.r_end))
        return out

    def log_mag(self, r):
        """log I_nm(r); safe for any neck length."""
        return self._eval(r)[0]

    def slope(self, r):
        """q = I'/I."""
        return self._eval(r)[1]

    def value(self, r):
        lm = self.log_mag(r)
        if np.any(np.asarray(lm) > _LOG_HUGE):
            raise ModeError(
                "I_nm magnitude exceeds double range; use log_mag or value_rel")
        return np.exp(lm)

    def value_rel(self, r, r_ref):
        """I_nm(r) / I_nm(r_ref), overflow-safe."""
        return np.exp(self.log_mag(r) - self.log_mag(r_ref))

    def deriv(self, r):
        return self.value(r) * self.slope(r)


def integrate_Inm(geom: ModelGeometry, n: int, m: int, r_end: float | None = None,
                  r_start: float = 1e-6, rtol: float = 1e-10,
                  atol: float = 1e-12) -> InmSolution:
    """Integrate the edge-regular branch outward in log form.

    The equation is the boundary+neck one, so r_end may not pass the
    interior junction.  Initialization uses the two-term series at
    r_start; positivity and monotonicity hold automatically (the slope
    q stays positive because the potential is positive).
    """
    validate_mode(n, m)
    if r_end is None:
        r_end = geom.R0
    if r_end > geom.interior_start + 1e-12:
        raise ModeError("I_nm lives on the boundary+neck regions only")
    if not 0 < r_start < geom.profile.r_a:
        raise ModeError("series start must lie inside the identity zone")

    prof = geom.profile
    nu = n / 2.0
    a1 = frobenius_a1(n, m)

    def rhs(r, y):
        rho, drho, _ = prof.eval(r)
        V = (n * n) / (4.0 * rho * rho) + m * m
        q = y[1]
        return (q, V - q * q - (drho / rho) * q)

    q0 = nu / r_start + 2.0 * a1 * r_start / (1.0 + a1 * r_start**2)
    psi0 = nu * np.log(r_start) + np.log1p(a1 * r_start**2)
    sol = solve_ivp(rhs, (r_start, r_end), np.array([psi0, q0]), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True,
                    first_step=r_start / 8.0)
    if not sol.success:
        raise ModeError(f"radial integration failed: {sol.message}")
    return InmSolution(geom, n, m, r_start, r_end, sol.sol)


def closed_form_In0(geom: ModelGeometry, n: int, r):
    """Explicit m = 0 solution via the profile integral; vanishes at r = 0."""
    validate_mode(n, 0)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > geom.interior_start + 1e-12):
        raise ModeError("closed form is defined on the boundary+neck regions")
    pos = np.where(r > 0, r, 1.0)
    out = np.where(r > 0, np.exp(geom.profile.log_growth(n, pos)), 0.0)
    return out if out.ndim else float(out)


def log_In0(geom: ModelGeometry, n: int, r):
    """log of the closed-form m = 0 solution (overflow-safe)."""
    return geom.profile.log_growth(n, r)


@dataclass(frozen=True)
class NeckCoefficients:
    """I_nm = c (e^{alpha(r-R0)} + c' e^{-alpha(r-R0)}) on the neck."""

    n: int
    m: int
    alpha: float
    c: float
    cprime: float
    residual: float


def neck_coefficients(inm: InmSolution, check_to: float | None = None,
                      tol: float = 1e-8) -> NeckCoefficients:
    """Match the two-exponential neck form from value and slope at R0.

    c > 0 and -1 < c' <= 1 are asserted; if the solution extends past R0
    the matched form is re-evaluated there and the relative residual
    must stay below tol.
    """
    geom, n, m = inm.geom, inm.n, inm.m
    R0 = geom.R0
    if inm.r_end < R0 - 1e-12:
        raise ModeError("solution must reach R0 to match neck coefficients")
    alpha = inm.alpha
    q = float(inm.slope(R0))
    cprime = (alpha - q) / (alpha + q)
    log_IR0 = float(inm.log_mag(R0))
    c = np.exp(log_IR0) / (1.0 + cprime)
    if not c > 0:
        raise MatchError(f"growing coefficient must be positive, got c={c}")
    if not -1.0 < cprime <= 1.0 + 1e-12:
        raise MatchError(f"decaying coefficient out of (-1, 1], got c'={cprime}")

    residual = 0.0
    hi = min(check_to if check_to is not None else inm.r_end, inm.r_end)
    if hi > R0 + 1e-9:
        rr = np.linspace(R0, hi, 33)
        pred = np.log(c) + alpha * (rr - R0) + np.log1p(cprime * np.exp(-2 * alpha * (rr - R0)))
        residual = float(np.max(np.abs(np.expm1(pred - inm.log_mag(rr)))))
        if residual > tol:
            raise MatchError(
                f"neck match residual {residual:.3e} exceeds {tol:.1e} for (n,m)=({n},{m})")
    return NeckCoefficients(n, m, alpha, float(c), float(cprime), residual)


def ratio_bound(geom: ModelGeometry, n: int, m: int, s: float) -> float:
    """(I_nm(R0)/I_nm(R0+s)) e^{alpha s} = (1 + c') / (1 + c' e^{-2 alpha s}) <= 2."""
    if s <= 0:
        raise ModeError(f"neck length must be positive, got s={s}")
    inm = integrate_Inm(geom, n, m, r_end=geom.R0)
    nc = neck_coefficients(inm)
    return (1.0 + nc.cprime) / (1.0 + nc.cprime * np.exp(-2.0 * nc.alpha * s))


def bessel_reference(n: int, m: int, r):
    """Classical modified Bessel branch normalized to leading coefficient one.

    Valid wherever the profile is the identity: Gamma(nu+1) (2/|m|)^nu
    I_nu(|m| r) with nu = |n|/2.  Independent oracle for integrate_Inm.
    """
    validate_mode(n, m)
    if m == 0:
        return np.asarray(r, dtype=float) ** (abs(n) / 2.0)
    nu = abs(n) / 2.0
    z = abs(m) * np.asarray(r, dtype=float)
    return gamma_fn(nu + 1.0) * (2.0 / abs(m)) ** nu * iv(nu, z)
