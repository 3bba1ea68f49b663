"""Logarithmic/Levi condition evaluation.

Evaluates, over a frequency ladder:

* the six primary time-integral conditions (root-separation drift, root
  velocity drift, drift and size of the corrected order-2 and order-1
  symbols along the uniformly separated auxiliary roots),
* their equivalent forms phrased through the plain roots, the critical
  points of the principal cubic, and the interchangeable denominators,
* pointwise bounds with the degeneracy-class split (generic / persistent
  double / persistent triple root),
* the constant-coefficient decomposition and forbidden-zone tests,
* the dedicated second-order operator condition,
* an oscillation-count diagnostic (extrema of symbol traces along root
  branches, which should not grow with frequency for closed-form
  coefficients).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cubic import delta1, delta1_dt, derivative_quadratic, discriminant, discriminant_dt, solve_cubic_real
from .errors import OperatorSpecError
from .operators import Operator2, Operator3, TauPoly
from .quadrature import adaptive_gauss

__all__ = [
    "PRIMARY_KEYS",
    "ConditionCell",
    "ConditionReport",
    "LogFit",
    "CaseReport",
    "condition_integrals",
    "condition_report",
    "equivalent_forms",
    "log_fit",
    "pointwise_levi",
    "constant_coeff_check",
    "second_order_check",
    "oscillation_count",
    "default_ladder",
]

_SS2 = ((0, 1), (1, 2), (2, 0))
_SS3 = ((0, 1, 2), (1, 2, 0), (2, 0, 1))

PRIMARY_KEYS = ("sep_drift", "vel_drift", "m_drift", "n_drift", "m_levi", "n_levi")

#: alternate-form keys: numerator source labels for the interchangeable
#: square-root family, and the denominators they may be paired with
_SQRT_N_SOURCES = ("crit", "auxcrit", "roots", "aux")
_SQRT_N_DENOMS = ("crit_gap_p1", "auxcrit_gap", "rms_gap_p1", "aux_rms_gap",
                  "span_p1", "aux_span")

ALTERNATE_KEYS = (
    "m_levi_roots",   # order-2 Levi over plain roots with +1 regularized gaps
    "dm_span",        # tau-derivative of corrected order-2 symbol over root span
    "dm_crit",        # same over the critical-point gap
    "n_levi_crit",    # order-1 Levi at principal critical points
) + tuple(f"sqrt_n[{s}/{d}]" for s in _SQRT_N_SOURCES for d in _SQRT_N_DENOMS)

#: which primary each alternate is banded against
ALTERNATE_PRIMARY = {k: ("n_levi" if k.startswith(("sqrt_n", "n_levi")) else
                         ("m_levi" if k == "m_levi_roots" else
                          ("dm_span" if k == "dm_crit" else "m_levi")))
                     for k in ALTERNATE_KEYS}


def default_ladder(lo: float = 2.0 ** 6, hi: float = 2.0 ** 14, steps: int = 9) -> list[float]:
    if steps < 2:
        return [float(lo)]
    ratio = (hi / lo) ** (1.0 / (steps - 1))
    return [float(lo) * ratio ** k for k in range(steps)]


# --------------------------------------------------------------------------
# Per-cell integrand


def _integrand_values(op: Operator3, t: float, xi: np.ndarray,
                      with_alternates: bool) -> np.ndarray:
    c = op.principal(t, xi)
    lower = op.lower_polys(t, xi)
    mc = op.checked_m_poly(t, xi, principal=c, lower=lower)
    nc = op.checked_n_poly(t, xi, principal=c, lower=lower)
    aux = op.auxiliary(t, xi, principal=c)
    lam = aux.lam.roots.r
    ld1 = aux.lam.d1
    ld2 = aux.lam.d2
    mu = aux.mu
    mu_d1 = aux.mu_d1

    sep = vel = 0.0
    for j, k in _SS2:
        sep += abs(ld1[j] - ld1[k]) / abs(lam[j] - lam[k])
        vel += abs(ld2[j] - ld2[k]) / (abs(ld1[j] - ld1[k]) + 1.0)

    m_drift = m_levi = 0.0
    for j, k, l in _SS3:
        mv, mdot = mc.along_root(lam[j], ld1[j])
        m_drift += abs(mdot) / (abs(mv) + 1.0)
        m_levi += abs(mv) / (abs(lam[j] - lam[k]) * abs(lam[j] - lam[l]))

    mu_gap = mu[1] - mu[0]
    n_drift = n_levi = 0.0
    for j in (0, 1):
        nv, ndot = nc.along_root(mu[j], mu_d1[j])
        n_drift += abs(ndot) / (abs(nv) + 1.0)
        n_levi += math.sqrt(abs(nv) / mu_gap)

    out = [sep, vel, m_drift, n_drift, m_levi, n_levi]
    if not with_alternates:
        return np.array(out)

    tau = solve_cubic_real(c).r
    s1, s2, _, _ = derivative_quadratic(c)
    span_p1 = tau[2] - tau[0] + 1.0
    crit_gap_p1 = s2 - s1 + 1.0
    rms_p1 = math.sqrt(max(delta1(c), 0.0)) + 1.0
    aux_rms = math.sqrt(max(delta1(aux.reg.cubic), 0.0))
    aux_span = lam[2] - lam[0]

    m_levi_roots = 0.0
    for j, k, l in _SS3:
        m_levi_roots += abs(mc.value_at(tau[j])) / (
            (abs(tau[j] - tau[k]) + 1.0) * (abs(tau[j] - tau[l]) + 1.0))
    dm_span = (abs(mc.at(tau[0]).d_tau) + abs(mc.at(tau[2]).d_tau)) / span_p1
    dm_crit = (abs(mc.at(s1).d_tau) + abs(mc.at(s2).d_tau)) / crit_gap_p1
    n_levi_crit = sum(math.sqrt(abs(nc.value_at(s)) / crit_gap_p1) for s in (s1, s2))
    out += [m_levi_roots, dm_span, dm_crit, n_levi_crit]

    sources = {
        "crit": (abs(nc.value_at(s1)), abs(nc.value_at(s2))),
        "auxcrit": (abs(nc.value_at(mu[0])), abs(nc.value_at(mu[1]))),
        "roots": tuple(abs(nc.value_at(x)) for x in tau),
        "aux": tuple(abs(nc.value_at(x)) for x in lam),
    }
    denoms = {
        "crit_gap_p1": crit_gap_p1,
        "auxcrit_gap": mu_gap,
        "rms_gap_p1": rms_p1,
        "aux_rms_gap": aux_rms,
        "span_p1": span_p1,
        "aux_span": aux_span,
    }
    for s in _SQRT_N_SOURCES:
        for d in _SQRT_N_DENOMS:
            out.append(sum(math.sqrt(v / denoms[d]) for v in sources[s]))
    return np.array(out)


@dataclass(frozen=True)
class ConditionCell:
    """All condition integrals at one frequency."""

    xi_mag: float
    direction: tuple[float, ...]
    values: dict[str, float]
    alternates: dict[str, float]
    panels: int
    rel_change: float


def condition_integrals(op: Operator3, xi: np.ndarray, *, rel_tol: float = 1e-6,
                        with_alternates: bool = True) -> ConditionCell:
    """Integrate every condition integrand over [0, horizon].

    All integrands share one symbol evaluation per quadrature node; the
    auxiliary-root denominators are bounded below uniformly, so the
    integrands are bounded (if steep near degeneracy times).
    """
    mag = float(np.linalg.norm(xi))
    if mag < 2.0:
        raise OperatorSpecError("condition integrals need |xi| >= 2")
    res = adaptive_gauss(lambda t: _integrand_values(op, t, xi, with_alternates),
                         0.0, op.horizon, rel_tol=rel_tol)
    vals = dict(zip(PRIMARY_KEYS, (float(x) for x in res.values[:len(PRIMARY_KEYS)])))
    alts = dict(zip(ALTERNATE_KEYS, (float(x) for x in res.values[len(PRIMARY_KEYS):]))) \
        if with_alternates else {}
    return ConditionCell(mag, tuple(float(x) for x in np.atleast_1d(xi) / mag),
                         vals, alts, res.panels, res.rel_change)


def equivalent_forms(op: Operator3, xi: np.ndarray, *, rel_tol: float = 1e-6) -> dict[str, float]:
    """All interchangeable-form integrals at one frequency, keyed by the
    numerator/denominator substitution they use."""
    return dict(condition_integrals(op, xi, rel_tol=rel_tol).alternates)


# --------------------------------------------------------------------------
# Ladder fits and verdicts


@dataclass(frozen=True)
class LogFit:
    slope: float
    ratios: tuple[float, ...]
    verdict: str  # logarithmic | violated | inconclusive


def log_fit(rows: Sequence[tuple[float, float]]) -> LogFit:
    """Classify integral growth against log(1 + |xi|).

    violated: the last three ratios all exceed the first by a factor >= 2
    and increase monotonically. logarithmic: ratios vary by < 20%, or never
    rise above the first ratio by more than 20% (bounded integrals produce
    decaying ratio ladders). Anything else is inconclusive: finite ladders
    witness trends, not asymptotics.
    """
    if len(rows) < 5:
        raise ValueError("log_fit needs at least 5 ladder points")
    xs = [x for x, _ in rows]
    if max(xs) / min(xs) < 8.0 * (1.0 - 1e-9):
        raise ValueError("log_fit needs the ladder to span at least 3 doublings")
    ratios = tuple(i / math.log1p(x) for x, i in rows)
    slope = max(ratios)
    if slope < 1e-9:
        return LogFit(slope, ratios, "logarithmic")
    last3 = ratios[-3:]
    if all(r >= 2.0 * ratios[0] for r in last3) and last3[0] < last3[1] < last3[2]:
        return LogFit(slope, ratios, "violated")
    if (max(ratios) - min(ratios)) <= 0.2 * max(ratios) or max(ratios) <= 1.2 * ratios[0]:
        return LogFit(slope, ratios, "logarithmic")
    return LogFit(slope, ratios, "inconclusive")


@dataclass
class ConditionReport:
    operator: str
    ladder: list[ConditionCell]
    fits: dict[str, LogFit]
    verdicts: dict[str, str]
    bands: dict[str, dict]

    def verdict_summary(self) -> dict[str, str]:
        return dict(self.verdicts)


def _band(ratio_rows: list[float]) -> dict:
    finite = [r for r in ratio_rows if math.isfinite(r)]
    if not finite:
        return {"lo": math.inf, "hi": math.inf, "stable": False, "ratios": ratio_rows}
    lo, hi = min(finite), max(finite)
    med = sorted(finite)[len(finite) // 2]
    if med == 0.0:
        stable = hi == 0.0
    else:
        stable = len(finite) == len(ratio_rows) and hi <= 1.2 * med and lo >= 0.8 * med
    return {"lo": lo, "hi": hi, "stable": stable, "ratios": ratio_rows}


def condition_report(op: Operator3, ladder: Sequence[float] | None = None,
                     direction: np.ndarray | None = None, *, rel_tol: float = 1e-6,
                     with_alternates: bool = True) -> ConditionReport:
    ladder = list(ladder) if ladder is not None else default_ladder()
    d = direction if direction is not None else np.eye(op.dim)[0]
    cells = [condition_integrals(op, mag * d, rel_tol=rel_tol,
                                 with_alternates=with_alternates) for mag in ladder]
    fits = {key: log_fit([(c.xi_mag, c.values[key]) for c in cells]) for key in PRIMARY_KEYS}
    verdicts = {key: fits[key].verdict for key in PRIMARY_KEYS}
    bands = {}
    if with_alternates:
        for key in ALTERNATE_KEYS:
            primary = ALTERNATE_PRIMARY[key]
            ratios = []
            for c in cells:
                p = c.values.get(primary, c.alternates.get(primary, 0.0))
                a = c.alternates[key]
                if p > 1e-9:
                    ratios.append(a / p)
                else:
                    ratios.append(1.0 if a <= 1e-9 else math.inf)
            bands[key] = {"primary": primary, **_band(ratios)}
    return ConditionReport(op.name, cells, fits, verdicts, bands)


# --------------------------------------------------------------------------
# Pointwise bounds with degeneracy-class split


@dataclass
class CaseReport:
    case: str                      # "I" | "II" | "III"
    ambiguous: bool
    disc_rel_max: float
    delta1_rel_max: float
    checks: dict[str, dict] = field(default_factory=dict)


def _poly_scale(poly: TauPoly, tau: float, deriv: int = 0) -> float:
    """Magnitude of the terms forming the polynomial (or its tau-derivative)
    at tau: the natural scale for deciding whether its value is zero."""
    acc = 1.0
    w = 1.0 + abs(tau)
    for k, c in enumerate(poly.coeffs):
        if deriv == 0:
            acc += abs(c.v) * w ** k
        elif k >= deriv:
            acc += k * abs(c.v) * w ** (k - 1)
    return acc


def _poly_range_scale(poly: TauPoly, root_span: float) -> float:
    """Scale of the polynomial over the whole root range; vanishing tests at
    (near-)multiple roots compare against this, since such roots carry an
    intrinsic sqrt(eps)-level location error amplified by the span."""
    acc = 1.0
    w = 1.0 + abs(root_span)
    for k, c in enumerate(poly.coeffs):
        acc += abs(c.v) * w ** k
    return acc


def _grid_sup(fn, ts, skip_floor: float = 1e-12):
    """Supremum of num/den over grid points and branches. Branches where
    both sides vanish (relative to their scales) are skipped; a vanishing
    denominator against a live numerator is an immediate +inf."""
    sup = 0.0
    for t in ts:
        for num, den, nscale, dscale in fn(float(t)):
            if den <= skip_floor * dscale:
                if num <= skip_floor * nscale:
                    continue
                return math.inf
            sup = max(sup, num / den)
    return sup


def _sup_verdict(base_sups: list[float], fine_sups: list[float]) -> str:
    if any(math.isinf(s) for s in base_sups + fine_sups):
        return "unbounded-trend"
    worst_ratio = max((f / b if b > 1e-12 else (math.inf if f > 1e-9 else 1.0))
                      for b, f in zip(base_sups, fine_sups))
    if worst_ratio > 1.5:
        return "unbounded-trend"
    lo = min(fine_sups)
    hi = max(fine_sups)
    n = len(fine_sups)
    increasing = n >= 3 and fine_sups[-3] < fine_sups[-2] < fine_sups[-1]
    if hi >= 4.0 * max(lo, 1e-9) and increasing and fine_sups[-1] == hi:
        return "unbounded-trend"
    return "bounded"


def pointwise_levi(op: Operator3, ladder: Sequence[float] | None = None,
                   direction: np.ndarray | None = None, *, nt: int = 256,
                   refine: int = 4) -> CaseReport:
    """Classify the degeneracy case on the validation grid and evaluate the
    pointwise bounds that apply to it, as grid suprema at two resolutions
    (a refinement-growing supremum is reported as an unbounded trend)."""
    ladder = list(ladder) if ladder is not None else default_ladder()
    d = direction if direction is not None else np.eye(op.dim)[0]
    ts_base = np.linspace(0.0, op.horizon, nt)
    ts_fine = np.linspace(0.0, op.horizon, nt * refine)

    # -- case classification: grid max of the two discriminants, relative to
    # their natural polynomial scales
    disc_rel = 0.0
    d1_rel = 0.0
    for mag in ladder:
        xi = mag * d
        for t in ts_base:
            c = op.principal(float(t), xi)
            s = c.coeff_scale()
            disc_rel = max(disc_rel, abs(discriminant(c)) / s ** 4)
            d1_rel = max(d1_rel, abs(delta1(c)) / s ** 2)
    dead_lo, dead_hi = 1e-10, 1e-7
    ambiguous = dead_lo <= disc_rel < dead_hi or dead_lo <= d1_rel < dead_hi
    disc_zero = disc_rel < dead_hi
    d1_zero = d1_rel < dead_hi
    case = "I" if not disc_zero else ("II" if not d1_zero else "III")
    report = CaseReport(case, ambiguous, disc_rel, d1_rel)

    def run_check(name, make_fn, per_xi_scale=None):
        base, fine = [], []
        for mag in ladder:
            xi = mag * d
            fn = make_fn(xi)
            base.append(_grid_sup(fn, ts_base))
            fine.append(_grid_sup(fn, ts_fine))
        report.checks[name] = {
            "sup_base": base, "sup_fine": fine,
            "verdict": _sup_verdict(base, fine),
        }

    if case == "I":
        def m_disc_bound(xi):
            def fn(t):
                c = op.principal(t, xi)
                mc = op.checked_m_poly(t, xi, principal=c)
                tau = solve_cubic_real(c).r
                disc = max(discriminant(c), 0.0)
                root_disc = math.sqrt(disc)
                ddt = discriminant_dt(c)
                rhs = root_disc + (abs(ddt) / (2.0 * root_disc) if root_disc > 0 else
                                   (0.0 if ddt == 0.0 else math.inf))
                s = c.coeff_scale()
                return [(abs(tau[k] - tau[l]) * abs(mc.value_at(tau[j])), rhs,
                         (1.0 + abs(tau[k] - tau[l])) * _poly_scale(mc, tau[j]), s ** 2)
                        for j, k, l in _SS3]
            return fn
        run_check("m_disc_bound", m_disc_bound)

        def n_disc_bound(xi):
            def fn(t):
                c = op.principal(t, xi)
                nc = op.checked_n_poly(t, xi, principal=c)
                s1, s2, _, gap_sq = derivative_quadratic(c)
                gap = math.sqrt(max(gap_sq, 0.0))
                dgap_sq = (8.0 / 9.0) * c.a1.v.real * c.a1.d1.real \
                    - (4.0 / 3.0) * c.a2.d1.real
                rhs = gap + ((dgap_sq ** 2) / gap_sq ** 1.5 if gap_sq > 0 else
                             (0.0 if dgap_sq == 0.0 else math.inf))
                return [(abs(nc.value_at(s)), rhs, _poly_scale(nc, s), 1.0 + gap)
                        for s in (s1, s2)]
            return fn
        run_check("n_disc_bound", n_disc_bound)

        if op.dim == 1:
            def m_bound_n1(xi):
                def fn(t):
                    c = op.principal(t, xi)
                    mc = op.checked_m_poly(t, xi, principal=c)
                    tau = solve_cubic_real(c).r
                    out = []
                    for j, k, l in _SS3:
                        num = abs(t) * abs(mc.value_at(tau[j]))
                        den = abs(tau[j] - tau[k]) * abs(tau[j] - tau[l])
                        out.append((num, den, (1.0 + abs(t)) * _poly_scale(mc, tau[j]),
                                    (1.0 + abs(tau[j] - tau[k])) * (1.0 + abs(tau[j] - tau[l]))))
                    return out
                return fn
            run_check("m_bound_n1", m_bound_n1)

            def n_bound_n1(xi):
                def fn(t):
                    c = op.principal(t, xi)
                    nc = op.checked_n_poly(t, xi, principal=c)
                    s1, s2, _, gap_sq = derivative_quadratic(c)
                    gap = math.sqrt(max(gap_sq, 0.0))
                    return [(t * t * abs(nc.value_at(s)), gap,
                             (1.0 + t * t) * _poly_scale(nc, s), 1.0 + gap)
                            for s in (s1, s2)]
                return fn
            run_check("n_bound_n1", n_bound_n1)

    elif case == "II":
        def double_pair(c, roots):
            gaps = (roots[1] - roots[0], roots[2] - roots[1])
            return (0, 1, 2) if gaps[0] <= gaps[1] else (1, 2, 0)

        vanish = []
        for mag in ladder:
            xi = mag * d
            worst = 0.0
            for t in ts_base:
                c = op.principal(float(t), xi)
                mc = op.checked_m_poly(float(t), xi, principal=c)
                tau = solve_cubic_real(c).r
                j, _, _ = double_pair(c, tau)
                worst = max(worst, abs(mc.value_at(tau[j]))
                            / _poly_range_scale(mc, tau[2] - tau[0]))
            vanish.append(worst)
        report.checks["m_vanishes_on_double"] = {
            "max_rel": vanish,
            "verdict": "satisfied" if max(vanish) < 1e-6 else "violated",
        }

        def quotient_bound(xi):
            def fn(t):
                c = op.principal(t, xi)
                mc = op.checked_m_poly(t, xi, principal=c)
                tau = solve_cubic_real(c).r
                j, _, simple = double_pair(c, tau)
                q, _rem = mc.divide_linear(tau[j])
                d1v = max(delta1(c), 0.0)
                root_d1 = math.sqrt(d1v)
                dd1 = delta1_dt(c)
                rhs = root_d1 + (abs(dd1) / (2.0 * root_d1) if root_d1 > 0 else
                                 (0.0 if dd1 == 0.0 else math.inf))
                s = c.coeff_scale()
                return [(abs(q[0] + q[1] * tau[k]), rhs,
                         _poly_scale(mc, tau[k]), s) for k in (j, simple)]
            return fn
        run_check("quotient_disc_bound", quotient_bound)

        # division remainder must vanish when the double-root value does
        rems = []
        for mag in ladder:
            xi = mag * d
            worst = 0.0
            for t in ts_base:
                c = op.principal(float(t), xi)
                mc = op.checked_m_poly(float(t), xi, principal=c)
                tau = solve_cubic_real(c).r
                j = 0 if tau[1] - tau[0] <= tau[2] - tau[1] else 1
                _, rem = mc.divide_linear(tau[j])
                worst = max(worst, abs(rem) / _poly_range_scale(mc, tau[2] - tau[0]))
            rems.append(worst)
        report.checks["division_remainder"] = {"max_rel": rems,
                                               "verdict": "bounded" if max(rems) < 1e-6 else "reported"}

    else:  # case III: a single clustered triple root everywhere
        def charconst(xi):
            sups = [0.0, 0.0, 0.0]
            for t in ts_base:
                c = op.principal(float(t), xi)
                mc = op.checked_m_poly(float(t), xi, principal=c)
                nc = op.checked_n_poly(float(t), xi, principal=c)
                r1 = -c.a1.v.real / 3.0
                s = c.coeff_scale()
                sj = mc.at(r1)
                sups[0] = max(sups[0], abs(sj.value) / s)
                sups[1] = max(sups[1], abs(sj.d_tau) / s)
                sups[2] = max(sups[2], abs(nc.value_at(r1)) / s)
            return sups
        parts = np.array([charconst(mag * d) for mag in ladder])
        names = ("m_at_root", "dm_at_root", "n_at_root")
        for i, nm in enumerate(names):
            vals = [float(x) for x in parts[:, i]]
            report.checks[f"triple_root_compat/{nm}"] = {
                "max_rel": vals,
                "verdict": "satisfied" if max(vals) < 1e-8 else "violated",
            }

    return report


# --------------------------------------------------------------------------
# Constant-coefficient tests


def _roots_full_cubic(c2: complex, c1: complex, c0: complex) -> np.ndarray:
    """Roots of r^3 + c2 r^2 + c1 r + c0; exact-real fast path when the
    cubic is real and (weakly) hyperbolic so bounded cases report an exact
    zero imaginary part."""
    if c2.imag == 0.0 and c1.imag == 0.0 and c0.imag == 0.0:
        from .cubic import cubic_from_floats
        from .errors import HyperbolicityViolation
        try:
            r = solve_cubic_real(cubic_from_floats(c2.real, c1.real, c0.real))
            return np.array(r.r, dtype=complex)
        except HyperbolicityViolation:
            pass
    return np.roots([1.0, c2, c1, c0])


def constant_coeff_check(op: Operator3, ladder: Sequence[float] | None = None,
                         direction: np.ndarray | None = None) -> dict:
    """Decomposition coefficients and forbidden-zone test for operators with
    constant coefficients (rejected otherwise).

    A vanishing root gap against a non-vanishing numerator is recorded as an
    immediately unbounded decomposition, not raised.
    """
    if not op.is_constant():
        raise OperatorSpecError("constant-coefficient check needs constant coefficients")
    ladder = list(ladder) if ladder is not None else default_ladder()
    d = direction if direction is not None else np.eye(op.dim)[0]
    t0 = 0.0

    rows = []
    for mag in ladder:
        xi = mag * d
        c = op.principal(t0, xi)
        m, n, p = op.lower_polys(t0, xi)
        tau = solve_cubic_real(c).r
        s1, s2, _, _ = derivative_quadratic(c)
        scale = c.coeff_scale()
        tiny = 1e-12 * scale

        ell = []
        for j, k, l in _SS3:
            den = (tau[j] - tau[k]) * (tau[j] - tau[l])
            num = m.value_at(tau[j])
            ell.append(math.inf if abs(den) <= tiny and abs(num) > tiny
                       else (0.0 if abs(den) <= tiny else abs(num / den)))
        msplit = []
        for sa, sb in ((s1, s2), (s2, s1)):
            den = sa - sb
            num = n.value_at(sa)
            msplit.append(math.inf if abs(den) <= tiny and abs(num) > tiny
                          else (0.0 if abs(den) <= tiny else abs(num / den)))

        roots = _roots_full_cubic(
            complex(c.a1.v) + m.coeffs[2].v,
            complex(c.a2.v) + m.coeffs[1].v + n.coeffs[1].v,
            complex(c.a3.v) + m.coeffs[0].v + n.coeffs[0].v + p.v,
        )
        rows.append({
            "xi": mag,
            "ell_max": max(ell),
            "m_max": max(msplit),
            "im_sup": float(np.max(np.abs(roots.imag))),
        })

    def trend(vals):
        if any(math.isinf(v) for v in vals):
            return "unbounded"
        lo = max(min(vals), 1e-9)
        if vals[-1] >= 4.0 * lo and vals[-3] < vals[-2] < vals[-1]:
            return "unbounded"
        return "bounded"

    ims = [r["im_sup"] for r in rows]
    grow_pts = [(math.log(r["xi"]), math.log(r["im_sup"])) for r in rows if r["im_sup"] > 1e-9]
    if len(grow_pts) >= 3:
        xs, ys = zip(*grow_pts)
        power = float(np.polyfit(xs, ys, 1)[0])
    else:
        power = 0.0
    return {
        "rows": rows,
        "decomposition_verdict": trend([max(r["ell_max"], r["m_max"]) for r in rows]),
        "im_verdict": "bounded" if max(ims) < 1e-6 or power < 0.05 else "unbounded-trend",
        "im_growth_power": power,
    }


# --------------------------------------------------------------------------
# Second-order operators


def second_order_check(op2: Operator2, xi: np.ndarray, *, rel_tol: float = 1e-6):
    """The two second-order integrals: principal-discriminant drift and the
    weighted lower-order combination over sqrt(disc + 1)."""
    def integrand(t: float) -> np.ndarray:
        a, b, c0, cc, _ = op2.symbol_parts(t, xi)
        disc = a.v.real ** 2 - 4.0 * b.v.real
        disc_dt = 2.0 * a.v.real * a.d1.real - 4.0 * b.d1.real
        ia = abs(disc_dt) / (disc + 1.0)
        num = -0.5 * c0.v.real * a.v.real + cc.v.real - 0.5 * a.d1.real
        ib = abs(num) / math.sqrt(disc + 1.0)
        return np.array([ia, ib])

    res = adaptive_gauss(integrand, 0.0, op2.horizon, rel_tol=rel_tol)
    return float(res.values[0]), float(res.values[1])


def second_order_report(op2: Operator2, ladder: Sequence[float] | None = None,
                        direction: np.ndarray | None = None) -> dict:
    ladder = list(ladder) if ladder is not None else default_ladder()
    d = direction if direction is not None else np.eye(op2.dim)[0]
    rows = [(mag,) + second_order_check(op2, mag * d) for mag in ladder]
    fit_a = log_fit([(r[0], r[1]) for r in rows])
    fit_b = log_fit([(r[0], r[2]) for r in rows])
    return {
        "rows": [{"xi": r[0], "disc_drift": r[1], "lower_weighted": r[2]} for r in rows],
        "fits": {"disc_drift": fit_a, "lower_weighted": fit_b},
        "verdicts": {"disc_drift": fit_a.verdict, "lower_weighted": fit_b.verdict},
    }


# --------------------------------------------------------------------------
# Oscillation counts


def _count_extrema(values: np.ndarray) -> int:
    floor = 1e-9 * (float(np.max(np.abs(values))) + 1.0)
    diffs = np.diff(values)
    signs = [1 if d > 0 else -1 for d in diffs if abs(d) >= floor]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def oscillation_count(op: Operator3, xi: np.ndarray, target: str = "gap",
                      nt: int = 4096) -> dict[str, int]:
    """Strict-local-extrema counts of a scalar trace along each root branch.

    Targets: ``gap`` (auxiliary-root separations), ``m_at_aux`` (corrected
    order-2 symbol modulus along auxiliary roots), ``n_at_auxcrit``
    (corrected order-1 symbol modulus along the auxiliary critical points).
    """
    if target not in ("gap", "m_at_aux", "n_at_auxcrit"):
        raise ValueError(f"unknown oscillation target {target!r}")
    ts = np.linspace(0.0, op.horizon, nt)
    traces: dict[str, list[float]] = {}
    for t in ts:
        c = op.principal(float(t), xi)
        aux = op.auxiliary(float(t), xi, principal=c)
        lam = aux.lam.roots.r
        if target == "gap":
            for j, k in _SS2:
                traces.setdefault(f"gap[{j}{k}]", []).append(abs(lam[j] - lam[k]))
        elif target == "m_at_aux":
            mc = op.checked_m_poly(float(t), xi, principal=c)
            for j in range(3):
                traces.setdefault(f"m_at_aux[{j}]", []).append(abs(mc.value_at(lam[j])))
        else:
            nc = op.checked_n_poly(float(t), xi, principal=c)
            for j in (0, 1):
                traces.setdefault(f"n_at_auxcrit[{j}]", []).append(abs(nc.value_at(aux.mu[j])))
    return {name: _count_extrema(np.array(vals)) for name, vals in traces.items()}
