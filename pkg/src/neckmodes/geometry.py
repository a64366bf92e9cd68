"""Radial model geometry: boundary region(s), flat neck(s), product interior.

The manifold is modeled radially.  A coordinate r runs from an edge at
r = 0 through

    boundary region   [0, R0)      metric  dr^2 + 4 rho(r)^2 dphi^2 + dtheta^2
    neck              [R0, R0+s)   metric  dr^2 + 16 dphi^2 + dtheta^2
    interior segment  length L     metric  dr^2 + 4 rho_phi^2 dphi^2 + rho_theta^2 dtheta^2

and then either stops at a reflecting cap (p = 1) or continues through a
second neck and boundary region to a second edge (p = 2).  The interior
profiles rho_phi, rho_theta are smooth seeded perturbations of the
constants (2, 1), equal to those constants near the junctions, so every
(phi, theta) Fourier mode decouples into a scalar radial problem.

Stretching the neck inserts flat cylinder: geometries with different s
agree on [0, R0] and, after translation, on the interior segment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .profile import NeckProfile, ProfileError


class GeometryError(ValueError):
    """Raised when a geometry configuration violates an invariant."""


def _bump(y):
    """C-infinity bump on (-1, 1), normalized to 1 at y = 0."""
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) < 1.0
    yc = np.where(inside, y, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - yc * yc)), 0.0)


@dataclass
class InteriorProfile:
    """Seeded smooth radial profiles (rho_phi, rho_theta) on [0, L].

    Both profiles equal their junction values (2 and 1) outside the bump
    supports, which are kept away from the segment ends, so the metric
    joins the necks smoothly and reflects evenly across a cap.
    """

    length: float = 8.0
    seed: int = 7
    amp_phi: float = 0.35
    amp_theta: float = 0.2
    n_bumps: int = 3
    _params: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.length <= 2.0:
            raise GeometryError(f"interior length must exceed 2, got {self.length}")
        if not (0 <= self.amp_phi < 0.9 and 0 <= self.amp_theta < 0.45):
            raise GeometryError("interior profile amplitudes out of safe range")
        rng = np.random.default_rng(self.seed)
        L = self.length
        widths = rng.uniform(0.08 * L, 0.16 * L, size=(2, self.n_bumps))
        lo = 0.08 * L + widths
        hi = 0.92 * L - widths
        centers = rng.uniform(lo, hi)
        raw = rng.uniform(-1.0, 1.0, size=(2, self.n_bumps))
        # scale so the summed amplitudes stay within the declared budget
        amps = np.empty_like(raw)
        for row, budget in ((0, self.amp_phi), (1, self.amp_theta)):
            total = np.sum(np.abs(raw[row])) or 1.0
            amps[row] = raw[row] / total * budget
        self._params = (centers, widths, amps)

    def _sum_bumps(self, x, row):
        centers, widths, amps = self._params
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, w, a in zip(centers[row], widths[row], amps[row]):
            out = out + a * _bump((x - c) / w)
        return out

    def rho_phi(self, x):
        return 2.0 + self._sum_bumps(x, 0)

    def rho_theta(self, x):
        return 1.0 + self._sum_bumps(x, 1)


_CLOSURES = ("capped_end", "two_ends")


@dataclass
class Region:
    kind: str          # "boundary" | "neck" | "interior"
    r_range: tuple     # [lo, hi)
    end: int | None = None  # which edge a boundary/neck belongs to


@dataclass
class ModelGeometry:
    """Immutable radial description of the model manifold.

    For p = 2 the second boundary region mirrors the first profile:
    coefficients near the far edge are functions of r_total - r.
    """

    profile: NeckProfile
    s: tuple            # neck length per end, len p
    interior: InteriorProfile
    p: int = 1

    def __post_init__(self):
        if self.p not in (1, 2):
            raise GeometryError(f"unsupported closure: p must be 1 or 2, got {self.p}")
        s = tuple(float(v) for v in (self.s if np.iterable(self.s) else (self.s,) * self.p))
        if len(s) != self.p:
            raise GeometryError(f"need {self.p} neck lengths, got {len(s)}")
        if any(v <= 0 for v in s):
            raise GeometryError(f"neck lengths must be positive, got {s}")
        self.s = s

    # -- radial layout -------------------------------------------------

    @property
    def R0(self) -> float:
        return self.profile.R0

    @property
    def interior_start(self) -> float:
        return self.R0 + self.s[0]

    @property
    def interior_end(self) -> float:
        return self.interior_start + self.interior.length

    @property
    def r_total(self) -> float:
        if self.p == 1:
            return self.interior_end
        return self.interior_end + self.s[1] + self.R0

    @property
    def closure(self) -> str:
        return _CLOSURES[self.p - 1]

    def regions(self):
        regs = [
            Region("boundary", (0.0, self.R0), end=0),
            Region("neck", (self.R0, self.interior_start), end=0),
            Region("interior", (self.interior_start, self.interior_end)),
        ]
        if self.p == 2:
            regs.append(Region("neck", (self.interior_end, self.interior_end + self.s[1]), end=1))
            regs.append(Region("boundary", (self.interior_end + self.s[1], self.r_total), end=1))
        return regs

    def region_of(self, r: float) -> Region:
        for reg in self.regions():
            lo, hi = reg.r_range
            if lo <= r < hi:
                return reg
        if abs(r - self.r_total) <= 1e-12:
            return self.regions()[-1]
        raise GeometryError(f"radius {r} outside [0, {self.r_total}]")

    def edge_distance(self, r):
        """Distance to the nearest edge, i.e. the mirrored coordinate for end 1."""
        r = np.asarray(r, dtype=float)
        if self.p == 1:
            return r
        return np.minimum(r, self.r_total - r)

    # -- metric coefficients --------------------------------------------
    #
    # a(r), b(r) with g = dr^2 + a^2 dphi^2 + b^2 dtheta^2; a = 2*rho on
    # boundary+neck, b = 1 there.  Everything below is vectorized.

    def _interior_x(self, r):
        return np.asarray(r, dtype=float) - self.interior_start

    def coeff_a(self, r):
        r = np.asarray(r, dtype=float)
        self._check_range(r)
        x = self._interior_x(r)
        in_int = (x >= 0.0) & (x <= self.interior.length)
        rx = np.clip(x, 0.0, self.interior.length)
        a_int = 2.0 * self.interior.rho_phi(rx)
        a_out = 2.0 * self.profile.value(np.where(in_int, self.profile.flat_start, self.edge_distance(r)))
        out = np.where(in_int, a_int, a_out)
        return out if out.ndim else float(out)

    def coeff_b(self, r):
        r = np.asarray(r, dtype=float)
        self._check_range(r)
        x = self._interior_x(r)
        in_int = (x >= 0.0) & (x <= self.interior.length)
        rx = np.clip(x, 0.0, self.interior.length)
        out = np.where(in_int, self.interior.rho_theta(rx), 1.0)
        return out if out.ndim else float(out)

    def metric_coeffs(self, r):
        """(g_rr, g_phiphi, g_thetatheta) at radius r."""
        a = self.coeff_a(r)
        b = self.coeff_b(r)
        return (np.ones_like(np.asarray(a)) if np.ndim(a) else 1.0, a * a, b * b)

    def volume_density(self, r):
        """sqrt(det g) = a * b; equals 2*rho on boundary/neck, 4 on the flat neck."""
        return self.coeff_a(r) * self.coeff_b(r)

    def potential(self, n: int, m: int, r):
        """Separated angular potential n^2/a^2 + m^2/b^2."""
        a = self.coeff_a(r)
        b = self.coeff_b(r)
        return (n * n) / (a * a) + (m * m) / (b * b)

    def _check_range(self, r):
        if np.any(r < -1e-12) or np.any(r > self.r_total + 1e-12):
            raise GeometryError(f"radius outside [0, {self.r_total}]")

    def conformal_coeffs(self, r):
        """Coefficients (rho^-2, 4, rho^-2) of the rescaled metric on boundary+neck."""
        d = self.edge_distance(r)
        if np.any(np.asarray(d) > self.interior_start + 1e-12):
            raise GeometryError("conformal coefficients are defined on boundary+neck only")
        rho = self.profile.value(d)
        return rho**-2, 4.0 * np.ones_like(np.asarray(rho, dtype=float)), rho**-2

    def with_neck_length(self, s) -> "ModelGeometry":
        """Same profile and interior, different neck length(s)."""
        return ModelGeometry(profile=self.profile, s=s, interior=self.interior, p=self.p)


DEFAULT_CONFIG = {
    "r_a": 1.0,
    "R0": 4.0,
    "margin": 0.5,
    "s": 10.0,
    "p": 1,
    "interior_seed": 7,
    "interior_length": 8.0,
    "amp_phi": 0.35,
    "amp_theta": 0.2,
}


def build_geometry(config: dict | None = None) -> ModelGeometry:
    """Validated geometry from a flat key-value configuration.

    Unknown keys are rejected so config typos fail loudly.  Interior
    profiles are deterministic functions of interior_seed.
    """
    cfg = dict(DEFAULT_CONFIG)
    for key, val in (config or {}).items():
        if key not in DEFAULT_CONFIG:
            raise GeometryError(f"unknown geometry key: {key!r}")
        cfg[key] = val
    p = int(cfg["p"])
    if p not in (1, 2):
        raise GeometryError(f"unsupported closure: p must be 1 or 2, got {p}")
    s = cfg["s"]
    s = tuple(float(v) for v in (s if np.iterable(s) else (s,) * p))
    if any(v <= 0 for v in s):
        raise GeometryError(f"neck length must be positive, got {s}")
    try:
        prof = NeckProfile(r_a=float(cfg["r_a"]), R0=float(cfg["R0"]), margin=float(cfg["margin"]))
    except ProfileError as exc:
        raise GeometryError(str(exc)) from exc
    interior = InteriorProfile(
        length=float(cfg["interior_length"]),
        seed=int(cfg["interior_seed"]),
        amp_phi=float(cfg["amp_phi"]),
        amp_theta=float(cfg["amp_theta"]),
    )
    return ModelGeometry(profile=prof, s=s, interior=interior, p=p)
