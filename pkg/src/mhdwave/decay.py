"""Decay experiments: predicted rates, power-law fits, sweeps, limits.

The theorems being exercised predict, for data that is small in H^m and
integrable at order c (1 <= c < 2),

    ||u||_Lq + ||b||_Lq          ~ t^(1/q - 1/2)            (q >= 2)
    ||L^beta u|| + ||L^beta b||  ~ (1+t)^((1-beta)/2 - 1/c)  (0 <= beta <= m)
    ||L^rho b||                  ~ (1+t)^((1-rho)/2 - 1/c)   (0 <= rho < m+1)

with prefactors growing in gamma like gamma^(1 + 1/c - (1-beta)/2).  On a
periodic box the algebraic decay window closes at t ~ (L/2pi)^2 when the
spectral gap takes over, so fits are restricted to a window well inside
that scale.  Localized data is labeled c = 1 for comparison; the box L^c
norms of the data are reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, DataError, DomainError, WindowError
from .diagnostics import lq_norm, norm_observer
from .grid import GridSpec, spectral_l2, transform_inverse
from .initial import make_initial_data
from .kernels import kernel_pair
from .solver import SolverConfig, Trajectory, run

__all__ = [
    "TheoryRate",
    "PowerLawFit",
    "predicted_exponent",
    "fit_power_law",
    "DecayExperimentConfig",
    "DecayResult",
    "run_decay_experiment",
    "SweepResult",
    "gamma_prefactor_scan",
    "singular_limit_experiment",
    "linear_singular_limit_error",
    "verify_expintegral",
]


@dataclass(frozen=True)
class TheoryRate:
    """Predicted exponent (and gamma power of the prefactor) for one norm."""

    kind: str
    exponent: float
    prefactor_gamma_power: float
    exponent_exact: Fraction | None = None


def _as_fraction(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**9) if float(x).is_integer() else Fraction(str(x))


def predicted_exponent(kind: str, *, q=None, beta=None, rho=None, c=None, m=None) -> TheoryRate:
    """Exact theory rate for ``Lq``, ``Hbeta``, or ``Hrho_b``.

    Rational inputs give exact rational arithmetic (the float fields are
    derived from the Fraction).
    """
    if kind == "Lq":
        if q is None or q < 2:
            raise DomainError(f"Lq rate requires q >= 2, got {q}")
        expo = Fraction(1, 1) / _as_fraction(q) - Fraction(1, 2)
        return TheoryRate("Lq", float(expo), 1.0, expo)
    if kind in ("Hbeta", "Hrho_b"):
        order = beta if kind == "Hbeta" else rho
        if order is None or order < 0:
            raise DomainError(f"{kind} rate requires a nonnegative order")
        if c is None or not 1 <= c < 2:
            raise DomainError(f"{kind} rate requires 1 <= c < 2, got {c}")
        if kind == "Hbeta" and m is not None and order > m:
            raise DomainError(f"beta must satisfy beta <= m, got beta={order}, m={m}")
        if kind == "Hrho_b" and m is not None and order >= m + 1:
            raise DomainError(f"rho must satisfy rho < m+1, got rho={order}, m={m}")
        of = _as_fraction(order)
        cf = _as_fraction(c)
        expo = (1 - of) / 2 - 1 / cf
        pref = 1 + 1 / cf - (1 - of) / 2
        return TheoryRate(kind, float(expo), float(pref), expo)
    raise DomainError(f"unknown rate kind {kind!r}")


@dataclass
class PowerLawFit:
    """Least-squares slope of log(value) against log(t) inside a window."""

    exponent: float
    log_prefactor: float
    window: tuple
    r2: float
    n_samples: int
    split_disagreement: float = 0.0

    @property
    def non_power_law(self) -> bool:
        """Window-split slopes differing by > 0.2 flag a non-power-law series."""
        return self.split_disagreement > 0.2


def _logfit(logt: np.ndarray, logv: np.ndarray):
    slope, intercept = np.polyfit(logt, logv, 1)
    pred = slope * logt + intercept
    ss_res = float(np.sum((logv - pred) ** 2))
    ss_tot = float(np.sum((logv - np.mean(logv)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def fit_power_law(series, window) -> PowerLawFit:
    """Fit ``value ~ exp(log_prefactor) * t**exponent`` over ``window``.

    ``series`` is an iterable of (t, value); the window is (t_lo, t_hi)
    with t_lo < t_hi, and must hold at least 5 samples with positive
    values (nonpositive values raise DataError).
    """
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise WindowError(f"window must satisfy t_lo < t_hi, got {window}")
    pts = [(t, v) for t, v in series if t_lo <= t <= t_hi]
    if len(pts) < 5:
        raise WindowError(f"window {window} holds {len(pts)} samples, need >= 5")
    t = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(v <= 0):
        raise DataError("nonpositive values inside the fit window")
    if np.any(t <= 0):
        raise DataError("nonpositive times inside the fit window")
    logt, logv = np.log(t), np.log(v)
    slope, intercept, r2 = _logfit(logt, logv)
    # split-window diagnostic: exponential series masquerade as power laws
    # with high r2, but their local slope drifts between window halves
    half = len(pts) // 2
    split = 0.0
    if half >= 3 and len(pts) - half >= 3:
        s1, _, _ = _logfit(logt[:half], logv[:half])
        s2, _, _ = _logfit(logt[half:], logv[half:])
        split = abs(s2 - s1)
    return PowerLawFit(slope, intercept, (float(t_lo), float(t_hi)), r2, len(pts), split)


# ---------------------------------------------------------------------------
# experiment orchestration


def default_fit_window(t_end: float, grid: GridSpec):
    """[max(5, t_end/20), min(t_end, 0.1 (L/2pi)^2)]: past the transient,
    before the spectral gap closes the algebraic window."""
    lo = max(5.0, t_end / 20.0)
    hi = min(t_end, 0.1 * (grid.box_length / (2.0 * np.pi)) ** 2)
    return (lo, hi)


@dataclass
class DecayExperimentConfig:
    grid: GridSpec
    gamma: float = 1.0
    dt: float = 0.05
    t_end: float = 100.0
    scheme: str = "exp_integrator"
    family: str = "random_band"
    params: dict = field(default_factory=dict)
    q_list: tuple = (2.0, 4.0)
    s_list_u: tuple = (0.0, 1.0)
    s_list_b: tuple = (0.0, 1.5)
    m: float = 1.0
    c_label: float = 1.0
    window: tuple | None = None
    snapshot_every: int = 10

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            gamma=self.gamma, dt=self.dt, t_end=self.t_end, grid=self.grid,
            scheme=self.scheme, snapshot_every=self.snapshot_every,
        )


@dataclass
class FitComparison:
    norm_id: str
    fit: PowerLawFit | None
    theory: TheoryRate | None
    theory_lq: TheoryRate | None = None
    trivial: bool = False

    @property
    def delta(self) -> float | None:
        if self.fit is None or self.theory is None:
            return None
        return self.fit.exponent - self.theory.exponent


@dataclass
class DecayResult:
    trajectory: Trajectory
    comparisons: list
    window: tuple
    initial_lc_norms: dict
    trivial: bool = False

    def comparison(self, norm_id: str) -> FitComparison:
        for c in self.comparisons:
            if c.norm_id == norm_id:
                return c
        raise KeyError(norm_id)


def _interp_beta_for_lq(q: float) -> float:
    # ||f||_Lq <= C ||L^beta f||_L2 in 2D at beta = 1 - 2/q
    return 1.0 - 2.0 / q


def _theory_pair(norm_id: str, cfg: DecayExperimentConfig):
    kind_field, spec_part = norm_id.split("_", 1)
    c = cfg.c_label
    if spec_part.startswith("L"):
        q = float(spec_part[1:])
        lq = predicted_exponent("Lq", q=q) if q >= 2 else None
        beta = _interp_beta_for_lq(q)
        primary = predicted_exponent("Hbeta", beta=beta, c=c, m=max(cfg.m, beta))
        return primary, lq
    s = float(spec_part[1:])
    if kind_field == "b":
        return predicted_exponent("Hrho_b", rho=s, c=c, m=cfg.m), None
    return predicted_exponent("Hbeta", beta=s, c=c, m=max(cfg.m, s)), None


def run_decay_experiment(cfg: DecayExperimentConfig) -> DecayResult:
    """Integrate, track the configured norms, and fit each against theory.

    Zero data short-circuits: every norm is identically zero, the result
    is flagged trivial and no fits are attempted.  For L^q norms both the
    direct Lq rate and the (interpolated) Sobolev-family rate are
    reported; the latter is the primary comparison for c-labeled data.
    """
    grid = cfg.grid
    u0, b0, a0 = make_initial_data(cfg.family, cfg.params, grid)
    lc = {}
    for cval in (1.0, cfg.c_label, 2.0):
        lc[f"u_L{cval:g}"] = lq_norm(transform_inverse(u0), cval)
        lc[f"b_L{cval:g}"] = lq_norm(transform_inverse(b0), cval)
    observer = norm_observer(cfg.q_list, cfg.s_list_u, cfg.s_list_b, cfg.m, cfg.gamma)
    traj = run(cfg.solver_config(), (u0, b0, a0), observer)

    window = cfg.window if cfg.window is not None else default_fit_window(cfg.t_end, grid)
    if spectral_l2(u0) == 0.0 and spectral_l2(b0) == 0.0:
        ids = [f"{f}_L{q:g}" for q in cfg.q_list for f in ("u", "b")]
        ids += [f"u_H{s:g}" for s in cfg.s_list_u] + [f"b_H{s:g}" for s in cfg.s_list_b]
        comps = [FitComparison(i, None, None, trivial=True) for i in ids]
        return DecayResult(traj, comps, window, lc, trivial=True)

    comps = []
    t = np.asarray(traj.times)
    for norm_id in _norm_ids(cfg):
        vals = traj.series(norm_id)
        primary, lq = _theory_pair(norm_id, cfg)
        fit = fit_power_law(zip(t, vals), window)
        comps.append(FitComparison(norm_id, fit, primary, lq))
    return DecayResult(traj, comps, window, lc)


def _norm_ids(cfg: DecayExperimentConfig):
    ids = []
    for q in cfg.q_list:
        ids += [f"u_L{q:g}", f"b_L{q:g}"]
    ids += [f"u_H{s:g}" for s in cfg.s_list_u]
    ids += [f"b_H{s:g}" for s in cfg.s_list_b]
    return ids


@dataclass
class SweepResult:
    gammas: list
    fits: dict          # gamma -> {norm_id: FitComparison}
    final_norms: dict   # gamma -> {norm_id: last value}

    def exponents(self, norm_id: str) -> np.ndarray:
        return np.array([self.fits[g][norm_id].fit.exponent for g in self.gammas])

    def prefactors(self, norm_id: str) -> np.ndarray:
        return np.array(
            [math.exp(self.fits[g][norm_id].fit.log_prefactor) for g in self.gammas]
        )


def gamma_prefactor_scan(gammas, base: DecayExperimentConfig, executor=None) -> SweepResult:
    """Per-gamma decay fits on a fixed experiment.

    The rate is gamma-independent in the theory (only the prefactor
    carries gamma), so fitted exponents are expected stable across the
    sweep; prefactor monotonicity is reported, never asserted against the
    non-explicit constants.  Members run concurrently when an executor is
    supplied; aggregation is by sorted gamma either way.
    """
    gammas = sorted(float(g) for g in gammas)
    if len(gammas) < 1 or any(g <= 0 for g in gammas):
        raise ConfigurationError("gammas must be positive")

    def member(g):
        return run_decay_experiment(replace(base, gamma=g))

    if executor is not None:
        results = list(executor.map(member, gammas))
    else:
        results = [member(g) for g in gammas]
    fits = {}
    finals = {}
    for g, res in zip(gammas, results):
        fits[g] = {c.norm_id: c for c in res.comparisons}
        finals[g] = {nid: res.trajectory.series(nid)[-1] for nid in fits[g]}
    return SweepResult(gammas, fits, finals)


def linear_singular_limit_error(gamma: float, T: float, u0, b0, a0) -> float:
    """Closed-form per-mode e(gamma) for the linear (forcing-free) flow."""
    g = u0.grid
    K0, K1 = kernel_pair(gamma, g.k2, np.float64(T))
    m00 = K0 + 0.5 * K1
    m01 = gamma * K1
    heat = np.exp(-g.k2 * T)
    db = (m00 - heat) * b0.coeffs + m01 * a0.coeffs
    # u decouples entirely at the linear level: identical heat flow
    eb = g.box_length * math.sqrt(float(np.sum(np.abs(db) ** 2)))
    return eb


def singular_limit_experiment(gammas, T: float, base: DecayExperimentConfig):
    """e(gamma) = ||b_g(T) - b_mhd(T)|| + ||u_g(T) - u_mhd(T)|| against the
    gamma = 0 baseline, same data and grid throughout.

    Returns (gammas_desc, errors) with gammas sorted descending; the
    expected first-order convergence shows up as successive ratios near
    1/2 when gammas are halved.
    """
    gammas = [float(g) for g in gammas]
    if any(g <= 0 for g in gammas):
        raise ConfigurationError("singular-limit gammas must be > 0; gamma = 0 is the baseline")
    gammas = sorted(gammas, reverse=True)
    grid = base.grid
    u0, b0, a0 = make_initial_data(base.family, base.params, grid)

    def final_state(scheme, gamma):
        cfg = SolverConfig(gamma=gamma, dt=base.dt, t_end=T, grid=grid, scheme=scheme,
                           snapshot_every=max(1, int(round(T / base.dt))))
        traj = run(cfg, (u0, b0, a0), observer=None, keep_states=True)
        return traj.states[-1]

    ref = final_state("mhd_baseline", 0.0)
    errors = []
    for g in gammas:
        st = final_state("exp_integrator", g)
        du = st.u_hat.coeffs - ref.u_hat.coeffs
        db = st.b_hat.coeffs - ref.b_hat.coeffs
        e = grid.box_length * (
            math.sqrt(float(np.sum(np.abs(du) ** 2)))
            + math.sqrt(float(np.sum(np.abs(db) ** 2)))
        )
        errors.append(e)
    return gammas, errors


# ---------------------------------------------------------------------------
# exponential-integral inequality verification


def _gauss_legendre_integral(f, a: float, b: float, panels: int, order: int = 12) -> float:
    """Composite Gauss-Legendre quadrature with fixed panel count."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        total += half * float(np.sum(weights * f(mid + half * nodes)))
    return total


def _lhs_integral(ineq: str, R: float, kappa: float, t: float, panels: int) -> float:
    """int_0^t e^{-R(t-tau)} w(tau) dtau with w = (1+tau)^{-1/kappa} for
    (p-1)/(p-2) and w = tau^{-1/kappa} for (p-3) (endpoint singularity
    removed by the substitution tau = v^(kappa/(kappa-1)))."""
    if ineq in ("p-1", "p-2"):
        f = lambda tau: np.exp(-R * (t - tau)) * (1.0 + tau) ** (-1.0 / kappa)
        return _gauss_legendre_integral(f, 0.0, t, panels)
    a = kappa / (kappa - 1.0)

    def g(v):
        tau = v**a
        return np.exp(-R * (t - tau)) * a * v ** (a - 1.0 - a / kappa)

    return _gauss_legendre_integral(g, 0.0, t ** (1.0 / a), panels)


def _rhs_shape(ineq: str, R: float, kappa: float, t: float) -> float:
    if ineq == "p-1":
        if kappa == 1.0:
            return (1.0 + t) ** -1.0 * (1.0 / R + 1.0 / R**2)
        if kappa > 1.0:
            return (1.0 + t) ** (-1.0 / kappa) * (1.0 + 1.0 / R)
        return (1.0 + t) ** (-1.0 / kappa) * (1.0 + R ** (-1.0 / kappa) + 1.0 / R)
    if ineq == "p-2":
        if kappa == 1.0:
            return (1.0 + t) ** -1.0 * (1.0 / R + 1.0 / R**2)
        if kappa > 1.0:
            return (1.0 + t) ** (-1.0 / kappa) / R
        return (1.0 + t) ** (-1.0 / kappa) * (R ** (-1.0 / kappa) + 1.0 / R)
    if ineq == "p-3":
        return t ** (-1.0 / kappa) / R
    raise ConfigurationError(f"unknown inequality {ineq!r}")


@dataclass
class ExpIntegralRow:
    ineq: str
    regime: str
    R: float
    kappa: float
    t: float
    lhs: float
    rhs_shape: float
    ratio: float


@dataclass
class ExpIntegralReport:
    rows: list
    c_emp: dict       # (ineq, regime) -> max ratio
    c_emp_refined: dict
    panels: int

    def stable(self, tol: float = 0.01) -> bool:
        return all(
            abs(self.c_emp_refined[k] - v) <= tol * abs(v) for k, v in self.c_emp.items()
        )

    def to_csv_rows(self, ineq: str):
        yield ["case", "regime", "R", "kappa", "t", "lhs", "rhs_shape", "C_emp"]
        for r in self.rows:
            if r.ineq == ineq:
                yield [r.ineq, r.regime, repr(float(r.R)), repr(float(r.kappa)), repr(float(r.t)),
                       repr(float(r.lhs)), repr(float(r.rhs_shape)), repr(float(r.ratio))]


def _regime(kappa: float) -> str:
    if kappa == 1.0:
        return "kappa=1"
    return "kappa>1" if kappa > 1.0 else "kappa<1"


def verify_expintegral(R_grid=(0.1, 1.0, 10.0), kappa_grid=(0.5, 1.0, 2.0),
                       t_grid=(1.0, 10.0, 100.0), panels: int = 64) -> ExpIntegralReport:
    """Quadrature check of the three exponential-integral inequalities.

    Preconditions per case: R > 0, kappa > 0; (p-2) needs t >= 1; (p-3)
    needs kappa > 1 (singularity integrability).  Grid points violating a
    case's regime are skipped for that case; empirical constants are the
    max LHS/RHS ratios per (inequality, kappa regime), recomputed on 2x
    panels for the stability comparison.
    """
    for R in R_grid:
        if R <= 0:
            raise DomainError("R must be > 0")
    for kappa in kappa_grid:
        if kappa <= 0:
            raise DomainError("kappa must be > 0")
    rows = []
    c_emp = {}
    c_ref = {}
    for ineq in ("p-1", "p-2", "p-3"):
        for kappa in kappa_grid:
            if ineq == "p-3" and kappa <= 1.0:
                continue
            for R in R_grid:
                for t in t_grid:
                    if ineq == "p-2" and t < 1.0:
                        continue
                    lhs = _lhs_integral(ineq, R, kappa, t, panels)
                    lhs2 = _lhs_integral(ineq, R, kappa, t, 2 * panels)
                    rhs = _rhs_shape(ineq, R, kappa, t)
                    rows.append(ExpIntegralRow(ineq, _regime(kappa), R, kappa, t,
                                               lhs, rhs, lhs / rhs))
                    key = (ineq, _regime(kappa))
                    c_emp[key] = max(c_emp.get(key, 0.0), lhs / rhs)
                    c_ref[key] = max(c_ref.get(key, 0.0), lhs2 / rhs)
    return ExpIntegralReport(rows, c_emp, c_ref, panels)
