"""Mode-extraction Poisson maps.

For each odd n > 0 the map G_n extracts the (n, 0) boundary coefficient
of a field from its Laplacian:

    G_n = K_n * (1 / I_n0(r)) e^{-i n phi} chi(r) + H_n,    K_n = 1/(8 n pi^2),

where chi is a radial cutoff equal to 1 on the boundary region and 0 on
the interior, transitioning inside the neck near the interior junction.
1/I_n0 solves the same separated equation as I_n0 (the m = 0 operator
factorizes through u' = (n/2 rho) u), so it is harmonic where chi is
constant, and the bounded correction H_n solves the compactly supported
problem

    8 n pi^2 * Delta H_n = 2 <d(I_n0^{-1} e^{-i n phi}), d chi> -
                           I_n0^{-1} e^{-i n phi} Delta chi.

Pairing against a field f with compactly supported Delta f then returns
the coefficient f_n0 of I_n0(r) e^{i n phi} in its boundary expansion;
with both angular periods 2 pi the phi/theta integrals reduce to a
factor 4 pi^2 on the (n, 0) channel.

The cylinder-limit variant replaces 1/I_n0 by e^{-n x / 4} in the
junction coordinate x (= r - interior_start, so x = 0 at the junction
and the cylinder occupies x < 0) and extracts the junction-normalized
coefficient v_n0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .fd1d import BC, RadialOperator, solve_radial
from .geometry import ModelGeometry
from .grids import GridSpec, build_interior_grid, build_radial_grid
from .modes import SourceSpec, cylinder_operator, finite_operator
from .profile import smoothstep, smoothstep_deriv
from .radial import log_In0, validate_mode


class GreenError(ValueError):
    """Cutoff or test function violates a Poisson-map precondition."""


@dataclass(frozen=True)
class ChiCutoff:
    """Radial down-step: 1 for r <= hi - width, 0 for r >= hi."""

    hi: float
    width: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise GreenError("cutoff must actually transition: width > 0")

    @property
    def lo(self) -> float:
        return self.hi - self.width

    def _t(self, r):
        return (np.asarray(r, dtype=float) - self.lo) / self.width

    def __call__(self, r):
        return 1.0 - smoothstep(self._t(r))

    def deriv(self, r):
        return -smoothstep_deriv(self._t(r)) / self.width

    def second_deriv(self, r):
        return -_step_second_deriv(self._t(r)) / self.width**2


def _step_second_deriv(t):
    """d^2/dt^2 of the polynomial step (exact)."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.where(inside, t, 0.5)
    coeffs = (126.0, -420.0, 540.0, -315.0, 70.0)
    acc = np.zeros_like(tc)
    for k, c in zip(range(9, 4, -1), reversed(coeffs)):
        acc = acc * tc + k * (k - 1) * c
    return np.where(inside, acc * tc**3, 0.0)


def default_chi(geom: ModelGeometry, gap: float = 0.5, width: float = 1.0) -> ChiCutoff:
    """Cutoff transitioning [junction - gap - width, junction - gap]."""
    chi = ChiCutoff(geom.interior_start - gap, width)
    validate_chi(geom, chi)
    return chi


def validate_chi(geom: ModelGeometry, chi: ChiCutoff):
    if chi.hi > geom.interior_start + 1e-12:
        raise GreenError("cutoff must vanish on the interior region")
    if chi.lo < geom.R0 - 1e-12:
        raise GreenError("cutoff transition must lie inside the neck")
    return chi


@dataclass
class GreenMap:
    """Extraction functional for the (n, 0) channel.

    coord is "radius" for the finite-neck map (arguments are radii) and
    "junction" for the cylinder-limit map (arguments are junction-local
    x, cylinder at x < 0).
    """

    geom: ModelGeometry
    n: int
    chi: ChiCutoff
    grid: np.ndarray
    correction_values: np.ndarray
    coord: str = "radius"
    correction_residual: float = 0.0

    @property
    def K(self) -> float:
        return 1.0 / (8.0 * self.n * np.pi**2)

    def correction(self, r):
        return np.interp(r, self.grid, self.correction_values)

    def correction_deriv(self, r):
        d = np.gradient(self.correction_values, self.grid, edge_order=2)
        return np.interp(r, self.grid, d)

    def _base(self, r):
        r = np.asarray(r, dtype=float)
        if self.coord == "radius":
            base = np.exp(-log_In0(self.geom, self.n, np.maximum(r, 1e-300)))
            rho = self.geom.profile.value(np.minimum(r, self.geom.interior_start))
            dbase = -(self.n / (2.0 * rho)) * base
        else:
            base = np.exp(-0.25 * self.n * r)
            dbase = -0.25 * self.n * base
        return base, dbase

    def singular_radial(self, r):
        """K / I_n0 (finite) or K e^{-n x/4} (cylinder), times the cutoff."""
        base, _ = self._base(r)
        return self.K * base * self.chi(r)

    def hat_G(self, r):
        """Radial profile of the e^{-i n phi} channel of G_n."""
        return self.singular_radial(r) + self.correction(r)

    def hat_G_deriv(self, r):
        """d/dr of the channel profile; singular part analytic."""
        base, dbase = self._base(r)
        sing = self.K * (dbase * self.chi(r) + base * self.chi.deriv(r))
        return sing + self.correction_deriv(r)

    def density(self, r):
        if self.coord == "radius":
            return self.geom.volume_density(r)
        g = self.geom
        xr = np.clip(r, 0.0, g.interior.length)
        a = np.where(np.asarray(r) < 0, 4.0, 2.0 * g.interior.rho_phi(xr))
        b = np.where(np.asarray(r) < 0, 1.0, g.interior.rho_theta(xr))
        return a * b

    def pair(self, delta_f_hat, support) -> complex:
        """4 pi^2 * integral of hat_G * (Delta f)_n0 * density over the support."""
        lo, hi = support
        mask = (self.grid >= lo - 1e-12) & (self.grid <= hi + 1e-12)
        if mask.sum() < 8:
            raise GreenError("pairing support under-resolved by the Green grid")
        r = self.grid[mask]
        integrand = self.hat_G(r) * delta_f_hat(r) * self.density(r)
        return 4.0 * np.pi**2 * complex(
            simpson(integrand.real, x=r) + 1j * simpson(integrand.imag, x=r))

    def harmonicity_residual(self, n_sample: int = 400) -> float:
        """Relative failure of harmonicity off the cutoff transition.

        The singular part is harmonic in closed form; its residual is
        evaluated analytically (slope relation u' = -(n/2 rho) u) and the
        correction's residual is the solved system's, measured against
        the local term scale V*|G|.
        """
        g, n = self.geom, self.n
        if self.coord == "radius":
            rr = np.linspace(g.profile.r_a * 0.5, self.chi.lo - 0.1, n_sample)
            rho, drho, _ = g.profile.eval(rr)
            base = np.exp(-log_In0(g, n, rr))
            d1 = -(n / (2.0 * rho)) * base
            d2 = (n * drho / (2.0 * rho**2)) * base - (n / (2.0 * rho)) * d1
            V = (n * n) / (4.0 * rho * rho)
            res_sing = np.abs(-d2 - (drho / rho) * d1 + V * base) / (V * base)
            res = float(np.max(res_sing))
        else:
            res = 0.0  # exact exponential on the flat cylinder
        return max(res, self.correction_residual)


def _correction_rhs(geom: ModelGeometry, n: int, chi: ChiCutoff, r, coord: str):
    """Radial RHS of the H_n problem: K (2 Iinv' chi' + Iinv chi'')."""
    r = np.asarray(r, dtype=float)
    K = 1.0 / (8.0 * n * np.pi**2)
    if coord == "radius":
        base = np.exp(-log_In0(geom, n, np.maximum(r, 1e-300)))
        rho = geom.profile.value(np.minimum(r, geom.interior_start))
        d1 = -(n / (2.0 * rho)) * base
    else:
        base = np.exp(-0.25 * n * r)
        d1 = -0.25 * n * base
    t = chi._t(r)
    chi_p = -smoothstep_deriv(t) / chi.width
    chi_pp = -_step_second_deriv(t) / chi.width**2
    return K * (2.0 * d1 * chi_p + base * chi_pp)


def build_Gn(geom: ModelGeometry, n: int, chi: ChiCutoff | None = None,
             spec: GridSpec = GridSpec(level=2)) -> GreenMap:
    """Finite-neck Poisson map: solve the compactly supported H_n problem."""
    validate_mode(n, 0)
    chi = chi or default_chi(geom)
    validate_chi(geom, chi)
    grid = build_radial_grid(geom, spec, alpha=n / 4.0)
    op = finite_operator(geom, n, 0, grid)
    f = _correction_rhs(geom, n, chi, grid, "radius").astype(complex)
    left = BC.frobenius(n, 0)
    right = BC.frobenius(n, 0) if geom.p == 2 else BC.reflective()
    h = solve_radial(op, f, left, right, r_right_origin=geom.r_total)
    res = _solver_residual(op, h.real, f.real)
    return GreenMap(geom, n, chi, grid, h.real, coord="radius", correction_residual=res)


def build_Gn_cyl(geom: ModelGeometry, n: int, chi: ChiCutoff | None = None,
                 spec: GridSpec = GridSpec(level=2), cyl_pad: float = 8.0) -> GreenMap:
    """Cylinder-limit Poisson map on the junction coordinate."""
    validate_mode(n, 0)
    chi = chi or ChiCutoff(hi=-0.5, width=1.0)
    if chi.hi > 1e-12:
        raise GreenError("cylinder cutoff must vanish at and beyond the junction")
    if chi.lo < -cyl_pad + 1.0:
        raise GreenError("cutoff transition too deep for the cylinder pad")
    x = build_interior_grid(geom, spec, alpha=n / 4.0, cyl_pad=cyl_pad)
    op = cylinder_operator(geom, n, 0, x)
    f = _correction_rhs(geom, n, chi, x, "junction").astype(complex)
    left = BC.transparent(n / 4.0)
    right = BC.transparent(n / 4.0) if geom.p == 2 else BC.reflective()
    h = solve_radial(op, f, left, right)
    res = _solver_residual(op, h.real, f.real)
    return GreenMap(geom, n, chi, x, h.real, coord="junction", correction_residual=res)


def _solver_residual(op: RadialOperator, h: np.ndarray, f: np.ndarray) -> float:
    """Relative defect of the solved correction against its equation."""
    defect = op.apply(h) - f[1:-1]
    scale = op.V[1:-1] * np.abs(h[1:-1]) + np.abs(f[1:-1]) + 1e-300
    return float(np.max(np.abs(defect) / np.maximum(scale, np.max(scale) * 1e-8)))


def Cn_constant(geom: ModelGeometry, n: int) -> float:
    """Profile constant relating finite-neck and cylinder-limit coefficients.

    C_n = exp(-(n/2) * [log r_a + int_{r_a}^{R0} drho / rho]) = 1 / I_n0(R0);
    for the default profile (identity up to r_a = 1) this is the
    quadrature of -(n/2) * int_1^{R0} 1/rho.
    """
    validate_mode(n, 0)
    return float(np.exp(-log_In0(geom, n, geom.R0)))


# -- manufactured test functions -----------------------------------------


@dataclass(frozen=True)
class ManufacturedField:
    """f = amp * I_n0(r) psi(r) e^{i n phi}: boundary coefficient f_n0 = amp.

    psi is a down-step from 1 to 0 whose transition must stay inside the
    region where I_n0 is harmonic (boundary+neck for the finite map, the
    flat cylinder for the junction map), so Delta f is compactly
    supported on the transition.
    """

    geom: ModelGeometry
    n: int
    psi: ChiCutoff
    amp: complex = 1.0
    coord: str = "radius"

    @property
    def support(self):
        return (self.psi.lo - 0.1, self.psi.hi + 0.1)

    def coefficient(self) -> complex:
        return self.amp

    def delta_f_hat(self, r):
        """(Delta f)_{n,0}(r) = -I (psi'' + (rho'/rho) psi') - 2 I' psi'."""
        r = np.asarray(r, dtype=float)
        t = self.psi._t(r)
        psi_p = -smoothstep_deriv(t) / self.psi.width
        psi_pp = -_step_second_deriv(t) / self.psi.width**2
        if self.coord == "radius":
            I = np.exp(log_In0(self.geom, self.n, np.maximum(r, 1e-300)))
            rho = self.geom.profile.value(np.minimum(r, self.geom.interior_start))
            drho = self.geom.profile.deriv(np.minimum(r, self.geom.interior_start))
            Ip = (self.n / (2.0 * rho)) * I
            dlog_rho = drho / rho
        else:
            I = np.exp(0.25 * self.n * r)
            Ip = 0.25 * self.n * I
            dlog_rho = 0.0
        return self.amp * (-I * (psi_pp + dlog_rho * psi_p) - 2.0 * Ip * psi_p)


def manufactured_family(geom: ModelGeometry, n: int, count: int = 5,
                        coord: str = "radius"):
    """>= count distinct manufactured fields with known coefficients."""
    fields = []
    amps = [1.0, -2.0 + 1.0j, 0.5j, 3.0, -1.0 - 1.0j, 2.5j, -0.75]
    if coord == "radius":
        his = np.linspace(geom.R0 + 1.0, geom.interior_start - 1.2, count)
        widths = [min(1.2, hi - geom.R0 - 0.2) for hi in his]
    else:
        his = np.linspace(-4.5, -2.5, count)
        widths = np.linspace(0.8, 1.4, count)
    for k in range(count):
        psi = ChiCutoff(float(his[k]), float(widths[k]))
        fields.append(ManufacturedField(geom, n, psi, amps[k % len(amps)], coord))
    return fields


def poisson_identity_check(G: GreenMap, field) -> complex:
    """Extract the coefficient of a test field through the pairing.

    field provides delta_f_hat (the (n,0)-channel radial profile of
    Delta f) and a support interval; for a field harmonic everywhere the
    integrand vanishes identically and the extracted value is 0.
    """
    return G.pair(field.delta_f_hat, field.support)


def extract_via_green(G: GreenMap, source: SourceSpec) -> complex:
    """Coefficient of the solution of Delta u = f directly from the source.

    Delta u equals the source, so the pairing needs no solve at all;
    independent of the finite-difference extraction route.
    """
    geom = G.geom
    if G.coord == "radius":
        off = geom.interior_start

        def dfh(r):
            return source.eval_mode(G.n, 0, np.asarray(r) - off)

        return G.pair(dfh, (off + 0.1, off + geom.interior.length - 0.1))

    def dfh(x):
        return source.eval_mode(G.n, 0, x)

    return G.pair(dfh, (0.1, geom.interior.length - 0.1))
