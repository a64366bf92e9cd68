"""Mode-by-mode solves of Delta u = f on the radial model.

Sources stand in for (minus the codifferential of) compactly supported
antisymmetric 1-forms: per mode (n odd, m) a complex radial profile
supported strictly inside the interior segment.  Because the geometry is
a product in (phi, theta), each mode solves an independent tridiagonal
problem; near an edge the solution is an exact multiple of the
edge-normalized branch I_nm, and that multiple u_nm is the extracted
boundary datum.

The cylinder-limit problem replaces boundary+neck by a semi-infinite
flat cylinder, closed at the junction by the discrete outgoing-decay
relation; its coefficient v_nm is read off at the junction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fd1d import BC, RadialOperator, solve_radial
from .geometry import ModelGeometry, _bump
from .grids import GridSpec, build_interior_grid, build_radial_grid
from .radial import integrate_Inm, log_In0, mode_alpha, validate_mode


class SourceError(ValueError):
    """Source violates compact-support or mode constraints."""


class ExtractionError(RuntimeError):
    """Boundary-region solution is not a clean multiple of I_nm."""


# -- sources -----------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    """Unit-height smooth bump of ((x - center)/halfwidth), support (c-w, c+w)."""

    center: float
    halfwidth: float

    def __call__(self, x):
        return _bump((np.asarray(x, dtype=float) - self.center) / self.halfwidth)

    @property
    def support(self):
        return (self.center - self.halfwidth, self.center + self.halfwidth)


@dataclass(frozen=True)
class SourceSpec:
    """Per-mode radial source profiles in interior-local coordinates.

    terms: tuple of (amplitude, (n, m), Bump).  Only n > 0 is stored;
    the conjugate modes are implied by realness of the field.
    """

    label: str
    terms: tuple

    def __post_init__(self):
        for amp, (n, m), bump in self.terms:
            validate_mode(n, m)

    def modes(self):
        return sorted({nm for _, nm, _ in self.terms})

    def eval_mode(self, n: int, m: int, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for amp, nm, bump in self.terms:
            if nm == (n, m):
                out = out + complex(amp) * bump(x)
        return out

    def validate(self, geom: ModelGeometry, margin: float = 0.5):
        L = geom.interior.length
        for amp, nm, bump in self.terms:
            lo, hi = bump.support
            if lo < margin or hi > L - margin:
                raise SourceError(
                    f"source {self.label!r} mode {nm} support ({lo:.3g},{hi:.3g}) "
                    f"leaves the interior margin [{margin}, {L - margin}]")
        return self

    def scaled(self, c) -> "SourceSpec":
        return SourceSpec(self.label, tuple((complex(c) * a, nm, b) for a, nm, b in self.terms))

    def plus(self, other: "SourceSpec", label: str | None = None) -> "SourceSpec":
        return SourceSpec(label or f"{self.label}+{other.label}", self.terms + other.terms)

    def sup_norm(self) -> float:
        """Coarse size: net amplitude per (mode, bump), summed per mode.

        Amplitudes on the same bump cancel first, so an exact linear
        combination that collapses to zero reports size zero.
        """
        net = {}
        for amp, nm, bump in self.terms:
            net[(nm, bump)] = net.get((nm, bump), 0.0) + complex(amp)
        totals = {}
        for (nm, _), amp in net.items():
            totals[nm] = totals.get(nm, 0.0) + abs(amp)
        return max(totals.values()) if totals else 0.0


def combine(parts, label: str) -> SourceSpec:
    """Linear combination [(coeff, SourceSpec), ...] -> SourceSpec."""
    terms = []
    for c, src in parts:
        terms.extend((complex(c) * a, nm, b) for a, nm, b in src.terms)
    return SourceSpec(label, tuple(terms))


def random_source(label: str, seed: int, geom: ModelGeometry,
                  n_list=(1, 3), m_list=(-2, -1, 0, 1, 2),
                  margin: float = 1.0) -> SourceSpec:
    """Seeded generic source touching every requested mode."""
    rng = np.random.default_rng(seed)
    L = geom.interior.length
    terms = []
    for n in n_list:
        for m in m_list:
            w = rng.uniform(0.08 * L, 0.18 * L)
            c = rng.uniform(margin + w, L - margin - w)
            amp = rng.normal() + 1j * rng.normal()
            terms.append((amp, (n, m), Bump(c, w)))
    return SourceSpec(label, tuple(terms)).validate(geom, margin=margin * 0.99)


# -- solutions ----------------------------------------------------------


@dataclass
class RadialSolution:
    """One mode of a solved field on the full radial grid."""

    grid: np.ndarray
    values: np.ndarray
    n: int
    m: int
    geom: ModelGeometry

    @property
    def alpha(self) -> float:
        return mode_alpha(self.n, self.m)

    def interp(self, r):
        re = np.interp(r, self.grid, self.values.real)
        im = np.interp(r, self.grid, self.values.imag)
        return re + 1j * im

    def deriv_interp(self, r):
        """du/dr sampled by second-order differences on the solve grid."""
        d = np.gradient(self.values, self.grid, edge_order=2)
        re = np.interp(r, self.grid, d.real)
        im = np.interp(r, self.grid, d.imag)
        return re + 1j * im


def finite_operator(geom: ModelGeometry, n: int, m: int, grid: np.ndarray) -> RadialOperator:
    rho = geom.volume_density(grid)
    mid = 0.5 * (grid[:-1] + grid[1:])
    p_mid = geom.volume_density(mid)
    V = geom.potential(n, m, grid)
    return RadialOperator(grid, p_mid, rho, V)


def solve_mode_finite(geom: ModelGeometry, n: int, m: int, source: SourceSpec,
                      spec: GridSpec = GridSpec()) -> RadialSolution:
    """Solve the separated problem with edge regularity at each edge."""
    validate_mode(n, m)
    source.validate(geom, margin=0.2)
    grid = build_radial_grid(geom, spec, alpha=mode_alpha(n, m))
    op = finite_operator(geom, n, m, grid)
    f = source.eval_mode(n, m, grid - geom.interior_start)
    left = BC.frobenius(n, m)
    right = BC.frobenius(n, m) if geom.p == 2 else BC.reflective()
    u = solve_radial(op, f, left, right, r_left_origin=0.0, r_right_origin=geom.r_total)
    return RadialSolution(grid, u, n, m, geom)


@dataclass
class CylinderSolution:
    """Interior-segment solve closed by outgoing decay at the junction(s).

    x is the interior-local coordinate; junction values are the mode
    coefficients of the cylinder-limit expansion (unit normalization at
    the junction).
    """

    x: np.ndarray
    values: np.ndarray
    n: int
    m: int
    geom: ModelGeometry

    @property
    def alpha(self) -> float:
        return mode_alpha(self.n, self.m)

    def junction_value(self, end: int = 0) -> complex:
        if end == 0:
            return complex(self.values[np.argmin(np.abs(self.x))])
        if end == 1 and self.geom.p == 2:
            return complex(self.values[-1])
        raise ValueError(f"no cylinder end {end} for p={self.geom.p}")

    def interp(self, x):
        """Values on [x_min, L]; below the numeric range the exact decay applies."""
        re = np.interp(x, self.x, self.values.real)
        im = np.interp(x, self.x, self.values.imag)
        return re + 1j * im


def cylinder_operator(geom: ModelGeometry, n: int, m: int, x: np.ndarray) -> RadialOperator:
    xr = np.clip(x, 0.0, geom.interior.length)
    a = np.where(x < 0, 4.0, 2.0 * geom.interior.rho_phi(xr))
    b = np.where(x < 0, 1.0, geom.interior.rho_theta(xr))
    rho = a * b
    xm = 0.5 * (x[:-1] + x[1:])
    xmr = np.clip(xm, 0.0, geom.interior.length)
    am = np.where(xm < 0, 4.0, 2.0 * geom.interior.rho_phi(xmr))
    bm = np.where(xm < 0, 1.0, geom.interior.rho_theta(xmr))
    V = (n * n) / (a * a) + (m * m) / (b * b)
    return RadialOperator(x, am * bm, rho, V)


def solve_mode_cylinder(geom: ModelGeometry, n: int, m: int, source: SourceSpec,
                        spec: GridSpec = GridSpec(), cyl_pad: float = 0.0,
                        hard_truncation: float | None = None) -> CylinderSolution:
    """Cylinder-limit solve; junction closure is the discrete decay relation.

    hard_truncation = T replaces the transparent junction closure by an
    explicit flat cylinder of length T ended with a zero Dirichlet
    condition (a second discretization of the same limit problem).
    """
    validate_mode(n, m)
    source.validate(geom, margin=0.2)
    alpha = mode_alpha(n, m)
    pad = cyl_pad if hard_truncation is None else max(cyl_pad, hard_truncation)
    x = build_interior_grid(geom, spec, alpha=alpha, cyl_pad=pad)
    op = cylinder_operator(geom, n, m, x)
    f = source.eval_mode(n, m, x)
    left = BC.dirichlet(0.0) if hard_truncation is not None else BC.transparent(alpha)
    right = BC.transparent(alpha) if geom.p == 2 else BC.reflective()
    u = solve_radial(op, f, left, right)
    return CylinderSolution(x, u, n, m, geom)


# -- extraction ----------------------------------------------------------

_INM_CACHE: dict = {}


def _inm_window(geom: ModelGeometry, n: int, m: int, r_pts: np.ndarray) -> np.ndarray:
    """I_nm at window radii (boundary region, so s-independent)."""
    if m == 0:
        return np.exp(log_In0(geom, n, r_pts))
    key = (geom.profile.r_a, geom.profile.R0, geom.profile.margin, n, abs(m))
    inm = _INM_CACHE.get(key)
    if inm is None:
        inm = integrate_Inm(geom, n, abs(m), r_end=geom.R0)
        _INM_CACHE[key] = inm
    return inm.value(r_pts)


def extract_coefficient(sol: RadialSolution, end: int = 0, tol: float = 1e-6,
                        window: tuple | None = None):
    """Boundary coefficient u_nm and the flatness residual of the ratio.

    Fits sol / I_nm to a constant over the window [R0/4, 3R0/4] (distance
    from the relevant edge); the residual is the maximum relative
    deviation of the pointwise ratio from that constant.  A residual
    above tol signals source support leaking out of the interior or an
    under-resolved solve.
    """
    geom = sol.geom
    R0 = geom.R0
    lo, hi = window if window is not None else (R0 / 4.0, 3.0 * R0 / 4.0)
    if end == 0:
        mask = (sol.grid >= lo) & (sol.grid <= hi)
        r_edge = sol.grid[mask]
    elif end == 1 and geom.p == 2:
        xi = geom.r_total - sol.grid
        mask = (xi >= lo) & (xi <= hi)
        r_edge = xi[mask]
    else:
        raise ValueError(f"no edge {end} for p={geom.p}")
    vals = sol.values[mask]
    if np.max(np.abs(vals), initial=0.0) == 0.0:
        return 0.0 + 0.0j, 0.0
    inm = _inm_window(geom, sol.n, sol.m, r_edge)
    ratio = vals / inm
    u = complex(np.mean(ratio))
    if u == 0:
        return u, 0.0
    residual = float(np.max(np.abs(ratio / u - 1.0)))
    if residual > tol:
        raise ExtractionError(
            f"(n,m)=({sol.n},{sol.m}) end {end}: ratio to I_nm deviates by "
            f"{residual:.3e} (> {tol:.1e}) across the window")
    return u, residual


def coefficient(geom: ModelGeometry, n: int, m: int, source: SourceSpec,
                spec: GridSpec = GridSpec(), end: int = 0,
                richardson: bool = True, tol: float = 1e-6):
    """Extracted u_nm, Richardson-extrapolated over a level pair."""
    sol0 = solve_mode_finite(geom, n, m, source, spec)
    u0, res0 = extract_coefficient(sol0, end=end, tol=max(tol, 1e-2))
    if not richardson:
        if res0 > tol:
            raise ExtractionError(f"extraction residual {res0:.3e} > {tol:.1e}")
        return u0, res0
    sol1 = solve_mode_finite(geom, n, m, source, spec.refined())
    u1, res1 = extract_coefficient(sol1, end=end, tol=tol)
    return (4.0 * u1 - u0) / 3.0, res1


def cylinder_coefficient(geom: ModelGeometry, n: int, m: int, source: SourceSpec,
                         spec: GridSpec = GridSpec(), end: int = 0,
                         richardson: bool = True):
    """Junction coefficient v_nm of the cylinder-limit solve."""
    v0 = solve_mode_cylinder(geom, n, m, source, spec).junction_value(end)
    if not richardson:
        return v0
    v1 = solve_mode_cylinder(geom, n, m, source, spec.refined()).junction_value(end)
    return (4.0 * v1 - v0) / 3.0


# -- assembled coefficient families --------------------------------------


@dataclass
class ModeCoefficients:
    """u_nm per end for a family of modes at one neck length."""

    s: tuple
    coeffs: list            # per end: dict (n, m) -> complex
    residuals: dict = field(default_factory=dict)

    def get(self, n: int, m: int, end: int = 0) -> complex:
        try:
            return self.coeffs[end][(n, m)]
        except KeyError as exc:
            raise KeyError(f"mode ({n},{m}) missing at end {end}") from exc


def mode_coefficients(geom: ModelGeometry, source: SourceSpec, modes,
                      spec: GridSpec = GridSpec(), richardson: bool = True,
                      tol: float = 1e-6) -> ModeCoefficients:
    """Solve and extract every requested mode at every end."""
    per_end = [dict() for _ in range(geom.p)]
    residuals = {}
    for (n, m) in modes:
        sols = [solve_mode_finite(geom, n, m, source, spec)]
        if richardson:
            sols.append(solve_mode_finite(geom, n, m, source, spec.refined()))
        for end in range(geom.p):
            us = []
            res = 0.0
            for k, sol in enumerate(sols):
                loose = tol if k == len(sols) - 1 else max(tol, 1e-2)
                u, r = extract_coefficient(sol, end=end, tol=loose)
                us.append(u)
                res = r
            val = us[-1] if len(us) == 1 else (4.0 * us[1] - us[0]) / 3.0
            per_end[end][(n, m)] = val
            residuals[(n, m, end)] = res
    return ModeCoefficients(geom.s, per_end, residuals)


def assemble_AB(coeffs: ModeCoefficients, m_max: int, end: int = 0,
                n_theta: int = 256):
    """Sampled truncated Fourier sums A(theta) (n=1) and B(theta) (n=3).

    Requires every mode n in {1,3}, |m| <= m_max at the given end;
    missing modes are reported by name.
    """
    missing = [(n, m) for n in (1, 3) for m in range(-m_max, m_max + 1)
               if (n, m) not in coeffs.coeffs[end]]
    if missing:
        raise KeyError(f"modes missing from coefficient set: {missing}")
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    A = np.zeros(n_theta, dtype=complex)
    B = np.zeros(n_theta, dtype=complex)
    for m in range(-m_max, m_max + 1):
        A += coeffs.get(1, m, end) * np.exp(1j * m * theta)
        B += coeffs.get(3, m, end) * np.exp(1j * m * theta)
    return theta, A, B
