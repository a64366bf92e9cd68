"""Edge profile of the model metric.

The metric on the boundary and neck regions is

    g = dr^2 + 4 rho(r)^2 dphi^2 + dtheta^2,

where the profile rho satisfies rho(r) = r on [0, r_a] (cone-like edge at
r = 0) and rho(r) = 2 for r >= r_a + w (flat cylinder).  The transition is
built in derivative form,

    rho'(r) = 1 - step((r - r_a) / w),

with a polynomial step whose first four derivatives vanish at both ends.
Defining the blend through its derivative keeps rho nondecreasing and
<= 2 by construction; the width w = 2*(2 - r_a) is forced by requiring
the flat value to be exactly 2 while joining r and the constant 2 with
C^5 contact.

On the transition the profile is a degree-10 polynomial, so quantities
derived from it (the integral of 1/rho in particular) are analytic there
and are evaluated to near machine precision with a Chebyshev
antiderivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as npcheb


class ProfileError(ValueError):
    """Raised when profile parameters violate an invariant."""


# Polynomial step with step(0)=0, step(1)=1 and derivatives 1..4 zero at
# both ends; symmetric about t = 1/2, so its integral over [0,1] is 1/2.
_STEP_COEFFS = (126.0, -420.0, 540.0, -315.0, 70.0)  # t^5 .. t^9
_STEP_INT_COEFFS = (21.0, -60.0, 67.5, -35.0, 7.0)   # t^6 .. t^10


def smoothstep(t):
    """C^4 polynomial step on [0, 1], clamped outside."""
    t = np.clip(t, 0.0, 1.0)
    acc = np.zeros_like(t)
    for c in reversed(_STEP_COEFFS):
        acc = (acc + c) * t
    return acc * t**4


def smoothstep_deriv(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.where(inside, t, 0.5)
    acc = np.zeros_like(tc)
    for k, c in zip(range(9, 4, -1), reversed(_STEP_COEFFS)):
        acc = acc * tc + k * c
    out = acc * tc**4
    return np.where(inside, out, 0.0)


def smoothstep_integral(t):
    """Antiderivative of the step, zero at t = 0; equals 1/2 + (t - 1) for t >= 1."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    acc = np.zeros_like(tc)
    for c in reversed(_STEP_INT_COEFFS):
        acc = (acc + c) * tc
    return acc * tc**5 + np.maximum(t - 1.0, 0.0)


@dataclass
class NeckProfile:
    """Radial blend rho(r) between the cone edge and the flat cylinder.

    r_a     -- end of the identity zone, rho(r) = r for r <= r_a
    R0      -- width of the boundary region; the neck starts at R0
    margin  -- required slack between the end of the transition and R0
    """

    r_a: float = 1.0
    R0: float = 4.0
    margin: float = 0.5
    _inv_cheb: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.r_a < 2.0:
            raise ProfileError(f"r_a must lie in (0, 2), got {self.r_a}")
        if self.margin < 0.0:
            raise ProfileError(f"margin must be nonnegative, got {self.margin}")
        if self.r_a + self.width + self.margin > self.R0 + 1e-12:
            raise ProfileError(
                "transition does not fit before R0: "
                f"r_a + w + margin = {self.r_a + self.width + self.margin} > R0 = {self.R0}"
            )
        # Antiderivative of w / rho(r_a + w t) on t in [0, 1]; the integrand
        # is analytic on the closed interval, so 96 Chebyshev nodes suffice.
        w = self.width

        def integrand(t):
            return w / self._transition_value(np.asarray(t, dtype=float))

        cheb = npcheb.Chebyshev.interpolate(integrand, deg=96, domain=[0.0, 1.0])
        self._inv_cheb = cheb.integ(lbnd=0.0)

    @property
    def width(self) -> float:
        return 2.0 * (2.0 - self.r_a)

    @property
    def flat_start(self) -> float:
        return self.r_a + self.width

    def _transition_value(self, t):
        # P(t) = int_0^t (1 - step); the step symmetry 1 - step(1-x) =
        # step(x) gives P(t) = 1/2 - Sint(1-t) for the upper half, which
        # approaches 1/2 from below without cancellation.  Correct for
        # all t: reduces to r_a + (r - r_a) below 0 and to 2 above 1.
        t = np.asarray(t, dtype=float)
        lo = np.minimum(t, 0.5)
        hi = np.clip(1.0 - t, 0.0, 0.5)
        P = np.where(t <= 0.5,
                     lo - smoothstep_integral(lo),
                     0.5 - smoothstep_integral(hi))
        return self.r_a + self.width * P

    def __call__(self, r):
        return self.value(r)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ProfileError("profile evaluated at negative radius")
        t = (r - self.r_a) / self.width
        out = np.where(r >= self.flat_start, 2.0, self._transition_value(t))
        return out if out.ndim else float(out)

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ProfileError("profile evaluated at negative radius")
        t = (r - self.r_a) / self.width
        out = np.where(r >= self.flat_start, 0.0, 1.0 - smoothstep(t))
        return out if out.ndim else float(out)

    def second_deriv(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ProfileError("profile evaluated at negative radius")
        t = (r - self.r_a) / self.width
        out = -smoothstep_deriv(t) / self.width
        return out if out.ndim else float(out)

    def eval(self, r):
        """Return (value, first derivative, second derivative)."""
        return self.value(r), self.deriv(r), self.second_deriv(r)

    def cum_inv(self, r):
        """Integral of 1/rho from r_a to r (negative for r < r_a).  Vectorized."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ProfileError("integral of 1/rho reaches the singular origin")
        t = np.clip((r - self.r_a) / self.width, 0.0, 1.0)
        cone = np.log(np.minimum(r, self.r_a) / self.r_a)
        trans = self._inv_cheb(t)
        flat = np.maximum(r - self.flat_start, 0.0) / 2.0
        out = cone + trans + flat
        return out if out.ndim else float(out)

    def inv_integral(self, a, b):
        """Integral of 1/rho over [a, b]."""
        return self.cum_inv(b) - self.cum_inv(a)

    def log_growth(self, n: int, r):
        """log of the explicit m = 0 radial solution: (|n|/2)(log r_a + int_{r_a}^r 1/rho).

        Equals (|n|/2) log r on the identity zone, i.e. the solution has
        leading coefficient one at the edge.  Vectorized in r.
        """
        return 0.5 * abs(n) * (np.log(self.r_a) + self.cum_inv(r))
