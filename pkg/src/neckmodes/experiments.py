"""Named verification experiments with CSV + JSON outputs.

Each experiment runs end to end from a parsed configuration, writes one
CSV of samples (fixed schema, dot decimal, '%.17g' floats, deterministic
row order) and one JSON summary holding, per criterion: the claim being
checked (a mathematical statement), the target, the tolerance, the
measured value and a pass flag.  Reruns of the same configuration are
byte-identical.

Several quantities tied to the m = 0 channel are *exactly* degenerate in
this separable geometry (see variation module): their measured values
sit at the numerical floor at every neck length, in which case the
decay-rate criterion is satisfied vacuously and flagged exact_floor in
the summary rather than fitted from noise.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import (assemble_V, assemble_V_tilde, construct_omega_s,
                    normalize_basis, seeded_source_family, solve_unit_v30)
from .geometry import DEFAULT_CONFIG, ModelGeometry, build_geometry
from .green import (Cn_constant, build_Gn, build_Gn_cyl, extract_via_green,
                    manufactured_family, poisson_identity_check)
from .grids import GridSpec
from .modes import (SourceSpec, coefficient, cylinder_coefficient,
                    random_source, solve_mode_finite)
from .oracle import oracle_discrepancy, oracle_grid
from .radial import mode_alpha, ratio_bound
from .ratefit import fit_rate
from .variation import (EtaBump, VariationTensor, coefficient_perturbed,
                        default_eta, dun0_identity_residual,
                        fd_coefficient_derivative, stretch_tensor,
                        trace_variation)


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


EXPERIMENTS = {}


def experiment(name):
    def register(fn):
        EXPERIMENTS[name] = fn
        return fn
    return register


# -- configuration ----------------------------------------------------------

_GEOM_KEYS = set(DEFAULT_CONFIG)


@dataclass
class ExperimentConfig:
    experiment: str
    out_dir: str = "results"
    geometry: dict = field(default_factory=dict)
    s_grid: tuple = ()
    modes: tuple = ()
    level: int = 1
    richardson: bool = True
    seed: int = 7
    threads: int = 0
    params: dict = field(default_factory=dict)

    def spec(self) -> GridSpec:
        return GridSpec(level=self.level)

    def build(self, **overrides) -> ModelGeometry:
        cfg = dict(self.geometry)
        cfg.update(overrides)
        return build_geometry(cfg)

    def n_threads(self) -> int:
        if self.threads > 0:
            return self.threads
        env = os.environ.get("NECKMODES_THREADS", "")
        return max(1, int(env)) if env.strip() else 1


def _parse_value(text: str):
    t = text.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def parse_config(path: str) -> ExperimentConfig:
    """Plain-text key = value lines; '#' starts a comment."""
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            raw[key] = val
    if "experiment" not in raw:
        raise ConfigError(f"{path}: missing 'experiment' key")
    name = raw.pop("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; known: {', '.join(sorted(EXPERIMENTS))}")
    cfg = ExperimentConfig(experiment=name)
    for key, val in raw.items():
        if key in _GEOM_KEYS:
            cfg.geometry[key] = _parse_value(val)
        elif key == "out_dir":
            cfg.out_dir = val
        elif key == "s_grid":
            cfg.s_grid = tuple(float(v) for v in val.split(","))
        elif key == "modes":
            pairs = []
            for item in val.split(","):
                n, m = item.split(":")
                pairs.append((int(n), int(m)))
            cfg.modes = tuple(pairs)
        elif key == "level":
            cfg.level = int(val)
        elif key == "richardson":
            cfg.richardson = _parse_value(val) is True
        elif key == "seed":
            cfg.seed = int(val)
        elif key == "threads":
            cfg.threads = int(val)
        else:
            cfg.params[key] = _parse_value(val)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig):
    if cfg.s_grid and any(b <= a for a, b in zip(cfg.s_grid, cfg.s_grid[1:])):
        raise ConfigError("s_grid must be strictly increasing")
    for n, m in cfg.modes:
        if n % 2 == 0 or n <= 0:
            raise ConfigError(f"modes must have positive odd n, got ({n},{m})")
    if cfg.level < 0 or cfg.level > 4:
        raise ConfigError("level must be between 0 and 4")
    cfg.build()  # geometry keys validated by construction
    return cfg


# -- result plumbing ---------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


@dataclass
class Criterion:
    name: str
    claim: str
    target: object
    tolerance: object
    measured: object
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "claim": self.claim,
            "target": self.target,
            "tolerance": self.tolerance,
            "measured": self.measured,
            "pass": bool(self.passed),
            "note": self.note,
        }


@dataclass
class ExperimentResult:
    name: str
    header: tuple
    rows: list
    criteria: list
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def write(self, cfg: ExperimentConfig) -> dict:
        os.makedirs(cfg.out_dir, exist_ok=True)
        csv_path = os.path.join(cfg.out_dir, f"{self.name}.csv")
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(self.header) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(x) for x in row) + "\n")
        summary = {
            "experiment": self.name,
            "pass": self.passed,
            "geometry": {**DEFAULT_CONFIG, **cfg.geometry},
            "seed": cfg.seed,
            "level": cfg.level,
            "richardson": cfg.richardson,
            "criteria": [c.as_dict() for c in self.criteria],
            "csv": os.path.basename(csv_path),
            **self.extra,
        }
        json_path = os.path.join(cfg.out_dir, f"{self.name}_summary.json")
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        return {"csv": csv_path, "json": json_path, "pass": self.passed}


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return float(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x)}")


def _pmap(fn, items, n_threads):
    if n_threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_threads) as ex:
        return list(ex.map(fn, items))


def run(cfg: ExperimentConfig) -> dict:
    """Run one experiment; returns paths and the overall pass flag."""
    result = EXPERIMENTS[cfg.experiment](cfg)
    return result.write(cfg)


# -- individual experiments --------------------------------------------------


def _scan_source(cfg: ExperimentConfig, modes) -> SourceSpec:
    geom = cfg.build()
    n_list = sorted({n for n, _ in modes})
    m_list = sorted({m for _, m in modes})
    return random_source("scan", cfg.seed, geom, n_list=n_list, m_list=m_list)


@experiment("decay_scan")
def run_decay_scan(cfg: ExperimentConfig) -> ExperimentResult:
    modes = cfg.modes or ((1, 0), (3, 0), (1, 1))
    s_grid = cfg.s_grid or tuple(np.arange(10.0, 41.0, 5.0))
    src = _scan_source(cfg, modes)
    base = cfg.build()
    spec = cfg.spec()

    def one(task):
        (n, m), s = task
        geom = base.with_neck_length(s)
        u, _ = coefficient(geom, n, m, src, spec, richardson=cfg.richardson)
        return (n, m, s, u)

    tasks = [((n, m), s) for (n, m) in modes for s in s_grid]
    results = _pmap(one, tasks, cfg.n_threads())
    rows, criteria = [], []
    for (n, m) in modes:
        sub = sorted(r for r in results if r[0] == n and r[1] == m)
        ss = np.array([r[2] for r in sub])
        us = np.array([r[3] for r in sub])
        alpha = mode_alpha(n, m)
        # decay-law bound calibrated at the smallest neck length
        c_star = abs(us[0]) * np.exp(alpha * ss[0])
        bounds = c_star * np.exp(-alpha * ss)
        for s, u, bd in zip(ss, us, bounds):
            rows.append((s, n, m, u.real, u.imag, abs(u), bd))
        fit = fit_rate(ss, np.abs(us), target=-alpha, tolerance=0.03)
        criteria.append(Criterion(
            name=f"decay_slope_{n}_{m}",
            claim=f"log|u_{n}{m}(s)| has slope -sqrt({n}^2/16+{m}^2) = {-alpha:.6f}",
            target=-alpha, tolerance=0.03, measured=fit.slope, passed=bool(fit.passed)))
        bound_ok = bool(np.all(np.abs(us) <= bounds * (1.0 + 1e-6)))
        criteria.append(Criterion(
            name=f"decay_bound_{n}_{m}",
            claim="bound C e^{-alpha s}/I(R0) calibrated once is never violated",
            target="|u| <= bound", tolerance=1e-6,
            measured=float(np.max(np.abs(us) / bounds)), passed=bound_ok))
    rows.sort(key=lambda r: (r[1], r[2], r[0]))
    return ExperimentResult("decay_scan",
                            ("s", "n", "m", "re_u", "im_u", "abs_u", "bound"),
                            rows, criteria)


@experiment("ratio_bound")
def run_ratio_bound(cfg: ExperimentConfig) -> ExperimentResult:
    geom = cfg.build()
    n_list = sorted({n for n, _ in cfg.modes}) or (1, 3, 5)
    m_max = int(cfg.params.get("m_max", 4))
    s_grid = cfg.s_grid or (5.0, 10.0, 20.0, 40.0)
    rows = []
    worst = 0.0
    worst_n0 = 0.0
    for n in n_list:
        for m in range(-m_max, m_max + 1):
            for s in s_grid:
                val = ratio_bound(geom, n, abs(m), s)
                rows.append((n, m, s, val))
                worst = max(worst, val)
                if m == 0:
                    worst_n0 = max(worst_n0, abs(val - 1.0))
    criteria = [
        Criterion("ratio_le_2", "I(R0)/I(R0+s) e^{alpha s} = (1+c')/(1+c' e^{-2 alpha s}) <= 2",
                  2.0, 1e-9, worst, bool(worst <= 2.0 + 1e-9)),
        Criterion("ratio_n0_equals_1", "m = 0 profile is a pure growing exponential, ratio = 1",
                  1.0, 1e-8, worst_n0, bool(worst_n0 <= 1e-8)),
    ]
    return ExperimentResult("ratio_bound", ("n", "m", "s", "ratio"), rows, criteria)


_EXACT_NOTE = ("difference sits at the numerical floor for every s: the "
               "separable geometry transports the m = 0 channel without "
               "reflection, so the continuum difference is exactly zero "
               "and any decay bound holds; rate fit not applicable")


@experiment("vcyl_convergence")
def run_vcyl_convergence(cfg: ExperimentConfig) -> ExperimentResult:
    s_grid = cfg.s_grid or tuple(np.arange(8.0, 29.0, 4.0))
    n_list = sorted({n for n, _ in cfg.modes}) or (1, 3)
    base = cfg.build()
    spec = cfg.spec()
    src = random_source("scan", cfg.seed, base, n_list=n_list, m_list=(0,))
    rows, criteria = [], []
    c1 = Cn_constant(base, 1)
    c3 = Cn_constant(base, 3)
    criteria.append(Criterion(
        "Cn_cube", "C_3 = C_1^3 (exponent linear in n)", 0.0, 1e-10,
        abs(c3 / c1**3 - 1.0), bool(abs(c3 / c1**3 - 1.0) < 1e-10)))
    for n in n_list:
        Cn = Cn_constant(base, n)
        vcyl = cylinder_coefficient(base, n, 0, src, spec, richardson=cfg.richardson)
        errs = []
        for s in s_grid:
            geom = base.with_neck_length(float(s))
            u, _ = coefficient(geom, n, 0, src, spec, richardson=cfg.richardson)
            v = u * np.exp(0.25 * n * s)
            err = abs(v - Cn * vcyl)
            errs.append(err)
            rows.append((s, n, v.real, v.imag, (Cn * vcyl).real, (Cn * vcyl).imag, err))
        floor = 1e-6 * abs(Cn * vcyl)
        fit = fit_rate(np.array(s_grid), np.array(errs), target=-0.24,
                       one_sided=True, floor=floor)
        note = _EXACT_NOTE if fit.exact_floor else ""
        criteria.append(Criterion(
            f"vcyl_rate_{n}",
            "e^{ns/4} u_n0(s) -> C_n v_n0 at rate >= 0.24 (claimed 0.25)",
            -0.24, "one-sided", "exact (below floor)" if fit.exact_floor else fit.slope,
            bool(fit.passed), note=note))
        criteria.append(Criterion(
            f"vcyl_agreement_{n}",
            "max_s |v_n0(s) - C_n v_n0| below 1e-6 of the limit",
            0.0, 1e-6, float(np.max(errs) / abs(Cn * vcyl)),
            bool(np.max(errs) <= 1e-6 * abs(Cn * vcyl))))
    return ExperimentResult(
        "vcyl_convergence",
        ("s", "n", "re_v", "im_v", "re_vcyl", "im_vcyl", "abs_err"),
        rows, criteria)


@experiment("green_identity")
def run_green_identity(cfg: ExperimentConfig) -> ExperimentResult:
    geom = cfg.build()
    spec = GridSpec(level=max(cfg.level, 2))
    n_list = sorted({n for n, _ in cfg.modes}) or (1, 3)
    count = int(cfg.params.get("count", 5))
    src = random_source("probe", cfg.seed, geom, n_list=n_list, m_list=(0,))
    rows, criteria = [], []
    for n in n_list:
        G = build_Gn(geom, n, spec=spec)
        worst = 0.0
        for k, fld in enumerate(manufactured_family(geom, n, count=count)):
            got = poisson_identity_check(G, fld)
            rel = abs(got - fld.amp) / abs(fld.amp)
            worst = max(worst, rel)
            rows.append((n, f"manufactured[{k}]", fld.amp.real, fld.amp.imag,
                         got.real, got.imag, rel))
        # solve-based cross-route: pairing against the raw source vs extraction
        u_pair = extract_via_green(G, src)
        u_extr, _ = coefficient(geom, n, 0, src, spec, richardson=cfg.richardson)
        rel = abs(u_pair - u_extr) / abs(u_extr)
        rows.append((n, "solve_cross_route", u_extr.real, u_extr.imag,
                     u_pair.real, u_pair.imag, rel))
        worst = max(worst, rel)
        criteria.append(Criterion(
            f"green_identity_{n}",
            "pairing int G_n Delta f Vol returns the boundary coefficient f_n0",
            0.0, 1e-6, worst, bool(worst < 1e-6)))
        criteria.append(Criterion(
            f"harmonicity_{n}", "G_n is harmonic off the cutoff transition",
            0.0, 1e-8, G.harmonicity_residual(),
            bool(G.harmonicity_residual() < 1e-8)))
        # cylinder-limit pairing agrees with the junction solve
        Gc = build_Gn_cyl(geom, n, spec=spec)
        v_pair = extract_via_green(Gc, src)
        v_solve = cylinder_coefficient(geom, n, 0, src, spec, richardson=cfg.richardson)
        relc = abs(v_pair - v_solve) / abs(v_solve)
        rows.append((n, "cylinder_cross_route", v_solve.real, v_solve.imag,
                     v_pair.real, v_pair.imag, relc))
        criteria.append(Criterion(
            f"green_identity_cyl_{n}",
            "junction pairing returns the cylinder-limit coefficient v_n0",
            0.0, 1e-6, relc, bool(relc < 1e-6)))
    return ExperimentResult(
        "green_identity",
        ("n", "case", "re_expected", "im_expected", "re_got", "im_got", "rel_err"),
        rows, criteria)


@experiment("hn_decay")
def run_hn_decay(cfg: ExperimentConfig) -> ExperimentResult:
    base = cfg.build()
    spec = GridSpec(level=max(cfg.level, 2))
    n_list = sorted({n for n, _ in cfg.modes}) or (1, 3)
    default_grids = {1: tuple(np.arange(8.0, 24.0, 3.0)),
                     3: tuple(np.arange(5.0, 12.6, 1.5))}
    rows, criteria = [], []
    for n in n_list:
        s_grid = cfg.s_grid or default_grids.get(n, tuple(np.arange(6.0, 16.0, 2.0)))
        sups = []
        for s in s_grid:
            geom = base.with_neck_length(float(s))
            G = build_Gn(geom, n, spec=spec)
            window = np.linspace(geom.R0 + 0.5, geom.R0 + 2.5, 101)
            sup = float(np.max(np.abs(G.correction(window))))
            sups.append(sup)
            rows.append((n, s, sup))
        target = (n + 1) / 4.0
        fit = fit_rate(np.array(s_grid), np.array(sups), target=-target * 0.97,
                       one_sided=True)
        criteria.append(Criterion(
            f"hn_rate_{n}",
            f"sup |H_{n}| near the boundary junction decays at rate >= (n+1)/4 = {target}",
            -target, "3% one-sided", fit.slope, bool(fit.passed),
            note="single-channel transport decays faster (rate n/2) than the "
                 "all-mode bound (n+1)/4" if fit.slope < -target * 1.5 else ""))
    return ExperimentResult("hn_decay", ("n", "s", "sup_H"), rows, criteria)


@experiment("stretch_identity")
def run_stretch_identity(cfg: ExperimentConfig) -> ExperimentResult:
    base = cfg.build()
    spec = cfg.spec()
    n_list = sorted({n for n, _ in cfg.modes}) or (1, 3)
    gate_s = tuple(cfg.params.get("gate_s", ()) or (12.0, 20.0))
    sweep_s = cfg.s_grid or tuple(np.arange(8.0, 21.0, 3.0))
    all_s = sorted(set(gate_s) | set(sweep_s))
    src = random_source("scan", cfg.seed, base, n_list=n_list, m_list=(0,))
    reports = {}
    for n in n_list:
        for s in all_s:
            geom = base.with_neck_length(float(s))
            eta = default_eta(geom)
            G = build_Gn(geom, n, spec=GridSpec(level=max(cfg.level, 2)))
            reports[(n, s)] = dun0_identity_residual(geom, n, src, eta, G, spec)
    rows = [(n, s, rep.lhs.real, rep.lhs.imag, rep.rhs.real, rep.rhs.imag,
             rep.residual, rep.residual_raw, rep.dv_ds)
            for (n, s), rep in sorted(reports.items())]
    worst = max(reports[(n, s)].residual for n in n_list for s in gate_s)
    criteria = [Criterion(
        "stretch_identity_residual",
        "d u_n0/ds + (n/4) u_n0 equals the correction pairing "
        "-int H_n (2 eta u'' + eta' u') Vol (residual scaled by (n/4)|u_n0|; "
        "both sides vanish identically here)",
        0.0, 1e-4, worst, bool(worst < 1e-4))]
    # consequence: d/ds of e^{ns/4} u_n0 decays at >= 0.24 (identically zero
    # here).  The centered difference over +-ds cannot resolve |dv/ds| below
    # (coefficient accuracy)/ds; that resolution is the honest floor.
    eps_u = 1e-8
    for n in n_list:
        dvs = [reports[(n, s)].dv_ds for s in sweep_s]
        vscale = max(abs(reports[(n, s)].u_n0) * np.exp(0.25 * n * s)
                     for s in sweep_s)
        ds_eff = min(reports[(n, s)].ds for s in sweep_s)
        fit = fit_rate(np.array(sweep_s), np.array(dvs), target=-0.24,
                       one_sided=True, floor=1.5 * eps_u / ds_eff * vscale)
        criteria.append(Criterion(
            f"dv_rate_{n}", "|d/ds (e^{ns/4} u_n0)| decays at rate >= 0.24",
            -0.24, "one-sided",
            "exact (below floor)" if fit.exact_floor else fit.slope,
            bool(fit.passed), note=_EXACT_NOTE if fit.exact_floor else ""))
    return ExperimentResult(
        "stretch_identity",
        ("n", "s", "re_lhs", "im_lhs", "re_rhs", "im_rhs", "residual",
         "residual_raw", "dv_ds"),
        rows, criteria)


@experiment("trace_variation")
def run_trace_variation(cfg: ExperimentConfig) -> ExperimentResult:
    geom = cfg.build()
    spec = cfg.spec()
    n_list = sorted({n for n, _ in cfg.modes}) or (1, 3)
    src = random_source("scan", cfg.seed, geom, n_list=n_list, m_list=(0,))
    eta = default_eta(geom)
    R0 = geom.R0
    b1 = EtaBump(R0 + 1.5, 1.0)
    b2 = EtaBump(R0 + 2.2, 1.1)

    def tensors(g):
        return {
            "stretch": (stretch_tensor(eta, g), True),
            "phiphi_bump": (VariationTensor(
                T_phiphi=lambda r: 3.0 * b1(r), support=b1.support), True),
            "mixed_rr_pp_tt": (VariationTensor(
                T_rr=lambda r: 1.5 * b2(r),
                T_phiphi=lambda r: -2.0 * b2(r),
                T_thetatheta=lambda r: 1.0 * b2(r),
                support=b2.support), True),
            # pure theta-theta responses are structurally suppressed on the
            # m = 0 channel (the singular-part contribution cancels pointwise),
            # so they sit at the oracle's noise floor: diagnostic only
            "thetatheta_bump": (VariationTensor(
                T_thetatheta=lambda r: -2.0 * b1(r), support=b1.support), False),
        }

    rows, criteria = [], []
    worst = 0.0
    for n in n_list:
        G = build_Gn(geom, n, spec=GridSpec(level=max(cfg.level, 2)))
        sol = solve_mode_finite(geom, n, 0, src, spec.refined())
        for name, (T, gated) in tensors(geom).items():
            pred = trace_variation(G, sol, T)
            fd = fd_coefficient_derivative(geom, n, 0, src, T,
                                           t_step=1e-4, spec=spec)
            rel = abs(pred - fd) / max(abs(fd), 1e-300)
            rows.append((name, n, pred.real, pred.imag, fd.real, fd.imag,
                         rel, gated))
            if gated:
                worst = max(worst, rel)
        # quadratic remainder under step halving for the stretch tensor
        T = tensors(geom)["stretch"][0]
        u0, _ = coefficient(geom, n, 0, src, spec, richardson=cfg.richardson)
        pred = trace_variation(G, sol, T)
        rems = []
        for t in (2e-3, 1e-3):
            ut = coefficient_perturbed(geom, n, 0, src, T, t, spec)
            rems.append(abs(ut - u0 - t * pred))
        ratio = rems[0] / max(rems[1], 1e-300)
        criteria.append(Criterion(
            f"quadratic_remainder_{n}",
            "|u(t) - u(0) - t * prediction| scales as t^2 under halving",
            4.0, "ratio in [3, 5]", ratio, bool(3.0 <= ratio <= 5.0)))
    criteria.insert(0, Criterion(
        "trace_prediction",
        "trace pairing predicts d(coefficient)/dt of separable metric "
        "perturbations to 1e-3 against centered differences",
        0.0, 1e-3, worst, bool(worst < 1e-3)))
    return ExperimentResult(
        "trace_variation",
        ("case", "n", "re_pred", "im_pred", "re_fd", "im_fd", "rel_err", "gated"),
        rows, criteria)


@experiment("ab_rates")
def run_ab_rates(cfg: ExperimentConfig) -> ExperimentResult:
    base = cfg.build()
    spec = cfg.spec()
    s_grid = cfg.s_grid or tuple(np.arange(10.0, 31.0, 4.0))
    m_max = int(cfg.params.get("m_max", 2))
    sigma = random_source("sigma", cfg.seed, base, n_list=(1, 3),
                          m_list=tuple(range(-m_max, m_max + 1)))
    basis = seeded_source_family(base, seed=cfg.seed + 35, m_list=(0,))
    theta = np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False)

    def one(s):
        geom = base.with_neck_length(float(s))
        omega, rep = construct_omega_s(sigma, basis, geom, spec)
        grow = np.exp(0.75 * s)
        A = np.zeros_like(theta, dtype=complex)
        B = np.zeros_like(theta, dtype=complex)
        for m in range(-m_max, m_max + 1):
            u1, _ = coefficient(geom, 1, m, omega, spec, richardson=cfg.richardson)
            u3, _ = coefficient(geom, 3, m, omega, spec, richardson=cfg.richardson)
            A += grow * u1 * np.exp(1j * m * theta)
            B += grow * u3 * np.exp(1j * m * theta)
        B_inf = complex(np.mean(B))
        u1_sigma, _ = coefficient(geom, 1, 0, sigma, spec, richardson=cfg.richardson)
        a2_rel = max(rep.a2_residuals) / abs(u1_sigma)
        return (float(s), float(np.max(np.abs(A))),
                float(np.max(np.abs(B - B_inf))), abs(B_inf), a2_rel)

    results = _pmap(one, list(s_grid), cfg.n_threads())
    rows = [(s, a, b) for (s, a, b, _, _) in results]
    b_infs = [b0 for (_, _, _, b0, _) in results]
    a2s = [a2 for (_, _, _, _, a2) in results]
    target_A = np.sqrt(17.0) / 4.0 - 0.75
    fit_A = fit_rate(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]),
                     target=-0.27, one_sided=True)
    fit_B = fit_rate(np.array([r[0] for r in rows]), np.array([r[2] for r in rows]),
                     target=-0.48, one_sided=True)
    criteria = [
        Criterion("A_rate",
                  "with the dominant coefficient removed and the e^{3s/4} "
                  f"rescaling, sup|A| decays at rate >= 0.27 (tail exponent {target_A:.4f})",
                  -0.27, "one-sided", fit_A.slope, bool(fit_A.passed)),
        Criterion("B_rate",
                  "sup|B - B_mean| decays at rate >= 0.48 (tail exponent 0.5)",
                  -0.48, "one-sided", fit_B.slope, bool(fit_B.passed)),
        Criterion("B_nonzero", "the mean of B stays away from zero",
                  0.0, 1e-6, float(min(b_infs)), bool(min(b_infs) > 1e-6)),
        Criterion("A2_enforced", "dominant coefficient vanishes after the "
                  "finite-s linear correction (relative to the uncorrected one)",
                  0.0, 1e-10, float(max(a2s)), bool(max(a2s) < 1e-10)),
    ]
    return ExperimentResult("ab_rates", ("s", "sup_A", "sup_B_minus_Binf"),
                            rows, criteria,
                            extra={"B_inf": b_infs, "a2_residuals": a2s,
                                   "tail_exponent_A": float(target_A)})


@experiment("v_matrix")
def run_v_matrix(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    rows, criteria = [], []
    p_list = (1, 2) if "p" not in cfg.geometry else (int(cfg.geometry["p"]),)
    for p in p_list:
        geom = cfg.build(p=p, s=cfg.geometry.get("s", 10.0))
        sources = seeded_source_family(geom, seed=cfg.seed + 100 * p, m_list=(0,))
        V = assemble_V(sources, geom, spec)
        rows.append((p, cfg.seed + 100 * p, V.det, V.cond))
        criteria.append(Criterion(
            f"detV_nonzero_p{p}", "seeded generic sources give det V != 0",
            0.0, 1e-8, abs(V.scaled_det()), bool(abs(V.scaled_det()) > 1e-8)))
        nb = normalize_basis(V)
        V2 = assemble_V(nb.sources, geom, spec)
        rt = float(np.max(np.abs(V2.matrix - np.eye(2 * p))))
        criteria.append(Criterion(
            f"roundtrip_p{p}", "normalized basis reproduces the identity matrix",
            0.0, 1e-10, rt, bool(rt < 1e-10)))
        extra = random_source("extra", cfg.seed + 999 + p, geom, n_list=(1, 3),
                              m_list=(0,))
        Vt = assemble_V_tilde(sources, extra, geom, k_end=0, spec=spec)
        w = solve_unit_v30(Vt)
        v10s = [abs(cylinder_coefficient(geom, 1, 0, w, spec, end=e))
                for e in range(p)]
        v30 = cylinder_coefficient(geom, 3, 0, w, spec, end=0)
        criteria.append(Criterion(
            f"unit_v30_p{p}", "augmented solve kills v_10 at all ends, Re v_30 = 1",
            0.0, 1e-8, float(max(max(v10s), abs(v30.real - 1.0))),
            bool(max(v10s) < 1e-8 and abs(v30.real - 1.0) < 1e-8)))
        # determinant stability under a 1% source perturbation
        pert = [s.scaled(1.0 + 0.01 * ((k % 2) * 2 - 1)) for k, s in enumerate(sources)]
        Vp = assemble_V(pert, geom, spec)
        rel_change = abs(Vp.det - V.det) / abs(V.det)
        criteria.append(Criterion(
            f"det_stability_p{p}", "det V moves continuously under 1% source scaling",
            0.0, 0.1, rel_change, bool(rel_change < 0.1)))
    return ExperimentResult("v_matrix", ("p", "seed", "det", "cond"), rows, criteria)


@experiment("assumptions")
def run_assumptions(cfg: ExperimentConfig) -> ExperimentResult:
    base = cfg.build()
    spec = cfg.spec()
    s_grid = cfg.s_grid or tuple(np.arange(10.0, 41.0, 6.0))
    sigma = random_source("sigma", cfg.seed, base, n_list=(1, 3), m_list=(0,))
    basis = seeded_source_family(base, seed=cfg.seed + 35, m_list=(0,))
    rows = []
    a2_rels, v30_abs, sups = [], [], []
    for s in s_grid:
        geom = base.with_neck_length(float(s))
        omega, rep = construct_omega_s(sigma, basis, geom, spec)
        u1_sigma, _ = coefficient(geom, 1, 0, sigma, spec, richardson=cfg.richardson)
        for e in range(geom.p):
            a2_rel = rep.a2_residuals[e] / abs(u1_sigma)
            rows.append((s, e, rep.a2_residuals[e], a2_rel,
                         abs(rep.v30[e]), rep.source_sup))
            a2_rels.append(a2_rel)
            v30_abs.append(abs(rep.v30[e]))
        sups.append(rep.source_sup)
    criteria = [
        Criterion("A2_exact", "u_10 of the corrected family vanishes at every "
                  "end (relative to the uncorrected response)",
                  0.0, 1e-10, float(max(a2_rels)), bool(max(a2_rels) < 1e-10)),
        Criterion("A3_floor", "min over the s-grid of |e^{3s/4} u_30| stays "
                  "above 1e-6", 1e-6, None, float(min(v30_abs)),
                  bool(min(v30_abs) > 1e-6)),
        Criterion("A1_bounded", "corrected source size stays within a factor 2 "
                  "over the s-grid", 2.0, None,
                  float(max(sups) / max(min(sups), 1e-300)),
                  bool(max(sups) / max(min(sups), 1e-300) < 2.0)),
    ]
    return ExperimentResult(
        "assumptions",
        ("s", "end", "a2_abs", "a2_rel", "v30_abs", "source_sup"),
        rows, criteria)


@experiment("oracle_convergence")
def run_oracle_convergence(cfg: ExperimentConfig) -> ExperimentResult:
    geom = cfg.build(s=cfg.geometry.get("s", 6.0))
    m = int(cfg.params.get("m", 1))
    modes = tuple(sorted({n for n, _ in cfg.modes})) or (1, 3)
    src = random_source("scan", cfg.seed, geom, n_list=modes, m_list=(m,))
    refs = {n: solve_mode_finite(geom, n, m, src, GridSpec(level=max(cfg.level, 3)))
            for n in modes}
    rows, ds = [], []
    for level in (0, 1, 2):
        d = oracle_discrepancy(geom, src, modes, m, level, refs)
        nr = len(oracle_grid(geom, level))
        ds.append(d)
        order = float("nan") if level == 0 else float(np.log2(ds[-2] / ds[-1]))
        rows.append((level, nr, 16 * 2**level, d, order))
    orders = [np.log2(ds[i] / ds[i + 1]) for i in range(len(ds) - 1)]
    ok = all(1.6 <= o <= 2.4 for o in orders)
    criteria = [Criterion(
        "oracle_order", "mode solver vs 2D finite differences: discrepancy "
        "shrinks at order 2 +- 0.4 under two grid doublings",
        2.0, 0.4, [float(o) for o in orders], bool(ok))]
    return ExperimentResult("oracle_convergence",
                            ("level", "nr", "nphi", "discrepancy", "order"),
                            rows, criteria)
