"""Modulus of time-respecting path families.

The modulus of a family is the minimum p-energy of a density that gives
every family member penalized length at least 1.  The main solver generates
constraints lazily: it alternates between a shortest-path oracle (find the
family member of minimum length under the current density) and a restricted
convex solve over the rows collected so far, stopping once no member is
shorter than ``1 - tol``.

For finite p > 1 the restricted problem is solved through its smooth
concave dual, which also yields the row multipliers that become the optimal
transport plan.  p = 1 and p = infinity are linear programs.  An independent
brute-force route enumerates the whole family and solves the complete
problem in one shot with a projected first-order method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from .penalty import (InfeasibleObjectError, PenaltyConfig, PhiSpec,
                      SINGULAR_EPS, UsageRow, usage_row)
from .paths import SearchContext, TemporalPath, enumerate_trp
from .tempgraph import TemporalGraph


class ModulusError(RuntimeError):
    pass


class RestrictedSolveError(ModulusError):
    """Inner solve failed to meet tolerance; carries the best iterate."""

    def __init__(self, message, rho=None, duals=None, info=None):
        super().__init__(message)
        self.rho = rho
        self.duals = duals
        self.info = info or {}


class IterationBudgetError(ModulusError):
    """Outer loop exceeded its budget; carries certified bounds."""

    def __init__(self, message, lower_bound, upper_bound, iterations):
        super().__init__(f"{message} (bounds: [{lower_bound:.6g}, {upper_bound:.6g}])")
        self.lower_bound = lower_bound
        self.upper_bound = upper_bound
        self.iterations = iterations


class EnumerationOverflowError(ModulusError):
    def __init__(self, count):
        super().__init__(f"family enumeration exceeded {count} paths")
        self.count = count


class DegenerateDualsError(ModulusError):
    pass


class Density(dict):
    """Nonnegative cost-per-unit-usage vector, keyed by edge id."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        for e, v in self.items():
            if v < 0:
                raise ValueError(f"density must be nonnegative, got {v} on edge {e}")


@dataclass(frozen=True)
class FamilySpec:
    """A modulus problem: connecting family, exponent, penalty, weights."""

    source: str
    target: str
    p: float
    penalty: PenaltyConfig
    sigma_override: Optional[Mapping[str, float]] = None

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("source and target must differ")
        if not (self.p >= 1.0):
            raise ValueError(f"p must be in [1, inf], got {self.p}")
        if self.sigma_override is not None:
            for e, v in self.sigma_override.items():
                if v <= 0:
                    raise ValueError(f"sigma must be positive, got {v} on edge {e}")


@dataclass
class ModulusResult:
    value: float
    rho_star: Density
    eta_star: dict[str, float]
    plan: dict[TemporalPath, float]
    active_paths: list[TemporalPath]
    iterations: int
    max_violation: float
    duality_gap: float
    empty_family: bool = False
    row_duals: Optional[np.ndarray] = None
    energy_history: list[float] = field(default_factory=list)
    duality_identity_residual: Optional[float] = None
    spec: Optional[FamilySpec] = None
    sigma: dict[str, float] = field(default_factory=dict)


def conjugate_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def energy(rho: Mapping[str, float], p: float, sigma: Mapping[str, float]) -> float:
    """p-energy of a density: sum sigma * rho^p, or the max for p = infinity."""
    if math.isinf(p):
        return max((s * rho.get(e, 0.0) for e, s in sigma.items()), default=0.0)
    return sum(s * rho.get(e, 0.0) ** p for e, s in sigma.items())


def resolve_sigma(g: TemporalGraph, spec: FamilySpec) -> np.ndarray:
    """Effective edge weights: graph weights with per-edge overrides applied."""
    sig = np.array([e.weight for e in g.edges], dtype=float)
    if spec.sigma_override:
        for e, v in spec.sigma_override.items():
            if e not in g.edge_index:
                raise KeyError(f"sigma override for unknown edge {e!r}")
            sig[g.edge_index[e]] = v
    if np.any(sig <= 0):
        raise ValueError("sigma must be positive on every edge")
    return sig


# ---------------------------------------------------------------------------
# Restricted solves

# Newton polish is skipped when rows^2 * support exceeds this flop budget;
# the L-BFGS-B stage alone then determines the accuracy.
_POLISH_FLOP_LIMIT = 2e8


def _solve_smooth(N: np.ndarray, sigma: np.ndarray, p: float, inner_tol: float,
                  lam0: Optional[np.ndarray] = None):
    """Restricted problem for p in (1, inf) via its smooth concave dual.

    The dual parametrizes rho(lam) = (N^T lam / (p sigma))^(1/(p-1)); its
    gradient is 1 - N rho, so stationarity is primal feasibility plus
    complementary slackness.  The optimal multipliers live at scale
    p * energy, which varies over dozens of orders of magnitude with p, so
    the start is scale-matched and the scale-invariant projected Newton
    loop runs first; L-BFGS-B is the fallback for stubborn cases and for
    systems too large for Newton.
    """
    n_rows, n_sup = N.shape
    expq = 1.0 / (p - 1.0)
    psig = p * sigma

    def rho_of(lam):
        x = N.T @ lam
        np.maximum(x, 0.0, out=x)
        with np.errstate(over="ignore"):
            return (x / psig) ** expq

    def gval(lam, rho=None):
        if rho is None:
            rho = rho_of(lam)
        with np.errstate(over="ignore"):
            en = sigma @ rho ** p
        if not np.isfinite(en):
            return -math.inf
        return lam.sum() - (p - 1.0) * en

    def residuals(lam):
        grad = 1.0 - N @ rho_of(lam)
        viol = grad.max(initial=0.0)
        comp = np.abs(lam * grad).max(initial=0.0) / max(lam.sum(), 1e-300)
        return viol, comp

    def ascent_step(lam, direction, active, g_cur):
        t = 1.0
        for _ in range(60):
            trial = lam.copy()
            trial[active] = np.maximum(trial[active] + t * direction, 0.0)
            if gval(trial) >= g_cur and not np.array_equal(trial, lam):
                return trial
            t *= 0.5
        return None

    def newton(lam, sweeps):
        for _ in range(sweeps):
            x = np.maximum(N.T @ lam, 0.0)
            rho = rho_of(lam)
            grad = 1.0 - N @ rho
            viol = grad.max(initial=0.0)
            comp = np.abs(lam * grad).max(initial=0.0) / max(lam.sum(), 1e-300)
            if viol <= inner_tol * 1e-3 and comp <= inner_tol * 1e-3:
                break
            active = (lam > 0.0) | (grad > 0.0)
            if not active.any():
                break
            # d rho / d x, zero where the usage is zero (flat region).
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                drho = np.where(x > 0.0, expq * (x / psig) ** (expq - 1.0) / psig, 0.0)
            drho[~np.isfinite(drho)] = 0.0
            Na = N[active]
            H = Na @ (drho[None, :] * Na).T
            ridge = 1e-14 * max(np.trace(H) / max(len(H), 1), 1e-300)
            try:
                step = np.linalg.solve(H + ridge * np.eye(len(H)), grad[active])
            except np.linalg.LinAlgError:
                step, *_ = np.linalg.lstsq(H, grad[active], rcond=None)
            step[~np.isfinite(step)] = 0.0
            g_cur = gval(lam, rho)
            trial = ascent_step(lam, step, active, g_cur)
            if trial is None:
                # Newton model degenerate (e.g. flat Hessian at lam = 0);
                # a plain gradient line search still makes progress.
                trial = ascent_step(lam, grad[active], active, g_cur)
            if trial is None:
                break
            lam = trial
        return lam

    # Scale-matched uniform start: lengths scale as s^(1/(p-1)), so this
    # choice makes the shortest restricted row have length about 1.  Done in
    # log space since rho(1) itself can over/underflow at extreme p.
    ones = np.ones(n_rows)
    with np.errstate(divide="ignore"):
        log_rho1 = expq * np.log(np.maximum(N.T @ ones, 0.0) / psig)
        logN = np.where(N > 0, np.log(np.where(N > 0, N, 1.0)), -math.inf)
    terms = logN + log_rho1[None, :]
    row_max = terms.max(axis=1)
    safe = np.isfinite(row_max)
    log_len = np.full(n_rows, -math.inf)
    if safe.any():
        log_len[safe] = row_max[safe] + np.log(
            np.exp(terms[safe] - row_max[safe, None]).sum(axis=1))
    lmin_log = log_len.min()
    if math.isfinite(lmin_log):
        scale = math.exp(min(max(-(p - 1.0) * lmin_log, -690.0), 690.0))
    else:
        scale = 1.0
    starts = []
    if lam0 is not None and len(lam0) == n_rows and np.max(lam0, initial=0.0) > 0:
        starts.append(np.maximum(np.asarray(lam0, dtype=float), 0.0))
    starts.append(ones * scale)

    polish = n_rows * n_rows * n_sup <= _POLISH_FLOP_LIMIT
    lam = starts[0]
    if polish:
        best = None
        for cand in starts:
            trial = newton(cand, 80)
            viol, comp = residuals(trial)
            if best is None or max(viol, comp) < best[0]:
                best = (max(viol, comp), trial)
            if max(viol, comp) <= inner_tol * 1e-3:
                break
        lam = best[1]
        viol, comp = residuals(lam)
    if not polish or viol > inner_tol or comp > inner_tol:
        # L-BFGS-B fallback in scale-normalized variables; both the iterate
        # and the objective are divided by the start scale so the optimizer's
        # absolute ftol/gtol thresholds stay meaningful at extreme p.
        s = max(float(np.max(lam, initial=0.0)), scale, 1e-300)

        def neg(u):
            lam_u = s * u
            rho = rho_of(lam_u)
            g = gval(lam_u, rho)
            if not np.isfinite(g):
                return math.inf, np.zeros_like(u)
            return -g / s, N @ rho - 1.0

        res = minimize(neg, lam / s, jac=True, method="L-BFGS-B",
                       bounds=[(0.0, None)] * n_rows,
                       options=dict(maxiter=20000, maxfun=40000,
                                    ftol=1e-16, gtol=1e-12))
        lam = np.maximum(res.x * s, 0.0)
        if polish:
            lam = newton(lam, 40)

    x = np.maximum(N.T @ lam, 0.0)
    rho = (x / psig) ** expq
    lengths = N @ rho
    viol = (1.0 - lengths).max(initial=0.0)
    comp = np.abs(lam * (1.0 - lengths)).max(initial=0.0) / max(lam.sum(), 1e-300)
    evalue = float(sigma @ rho ** p)
    lmin = lengths.min(initial=np.inf)
    if lmin > 0 and np.isfinite(lmin):
        gap = evalue / lmin ** p - gval(lam)
        gap_rel = abs(gap) / max(evalue, 1e-300)
    else:
        gap_rel = math.inf
    info = dict(energy=evalue, violation=float(viol), complementarity=float(comp),
                gap=float(gap_rel))
    if viol > max(50 * inner_tol, 1e-6):
        raise RestrictedSolveError(
            f"restricted dual ascent stalled (violation {viol:.3g})",
            rho=rho, duals=lam, info=info)
    return rho, lam, info


def _solve_lp1(N: np.ndarray, sigma: np.ndarray):
    """Restricted problem at p = 1: a plain linear program."""
    n_rows, n_sup = N.shape
    res = linprog(c=sigma, A_ub=-N, b_ub=-np.ones(n_rows),
                  bounds=[(0.0, None)] * n_sup, method="highs")
    if not res.success:
        raise RestrictedSolveError(f"p=1 restricted LP failed: {res.message}")
    rho = np.maximum(res.x, 0.0)
    lam = np.maximum(-res.ineqlin.marginals, 0.0)
    evalue = float(sigma @ rho)
    viol = float((1.0 - N @ rho).max(initial=0.0))
    gap_rel = abs(evalue - lam.sum()) / max(1.0, evalue)
    return rho, lam, dict(energy=evalue, violation=viol, complementarity=0.0,
                          gap=gap_rel)


def _solve_lpinf(N: np.ndarray, sigma: np.ndarray):
    """Restricted problem at p = infinity: minimize max sigma*rho (min-max LP)."""
    n_rows, n_sup = N.shape
    # Variables [rho, z]; sigma(e) rho(e) <= z and N rho >= 1.
    c = np.zeros(n_sup + 1)
    c[-1] = 1.0
    A_top = np.hstack([np.diag(sigma), -np.ones((n_sup, 1))])
    A_bot = np.hstack([-N, np.zeros((n_rows, 1))])
    A_ub = np.vstack([A_top, A_bot])
    b_ub = np.concatenate([np.zeros(n_sup), -np.ones(n_rows)])
    res = linprog(c=c, A_ub=A_ub, b_ub=b_ub,
                  bounds=[(0.0, None)] * (n_sup + 1), method="highs")
    if not res.success:
        raise RestrictedSolveError(f"p=inf restricted LP failed: {res.message}")
    rho = np.maximum(res.x[:n_sup], 0.0)
    evalue = float((sigma * rho).max(initial=0.0))
    lam = np.maximum(-res.ineqlin.marginals[n_sup:], 0.0)
    viol = float((1.0 - N @ rho).max(initial=0.0))
    gap_rel = abs(evalue - lam.sum()) / max(1.0, evalue)
    return rho, lam, dict(energy=evalue, violation=viol, complementarity=0.0,
                          gap=gap_rel)


def _solve_restricted(N: np.ndarray, sigma: np.ndarray, p: float, inner_tol: float,
                      lam0: Optional[np.ndarray] = None):
    if math.isinf(p):
        return _solve_lpinf(N, sigma)
    if p == 1.0:
        return _solve_lp1(N, sigma)
    return _solve_smooth(N, sigma, p, inner_tol, lam0)


def restricted_solve(rows: Sequence[UsageRow], p: float, sigma: Mapping[str, float],
                     inner_tol: float = 1e-8):
    """Minimize the p-energy subject to the given usage rows having length >= 1.

    Returns the optimal density (zero off the rows' support) and one dual
    weight per row.  Duplicate rows are harmless.
    """
    if not rows:
        raise ValueError("need at least one usage row")
    support: list[str] = []
    pos: dict[str, int] = {}
    for row in rows:
        if not row.entries or max(row.entries.values()) <= 0:
            raise ValueError("every row needs a positive entry")
        for e in row.entries:
            if e not in pos:
                pos[e] = len(support)
                support.append(e)
    N = np.zeros((len(rows), len(support)))
    for i, row in enumerate(rows):
        for e, v in row.entries.items():
            N[i, pos[e]] = v
    sig = np.array([sigma[e] for e in support], dtype=float)
    if np.any(sig <= 0):
        raise ValueError("sigma must be positive")
    rho, lam, _info = _solve_restricted(N, sig, p, inner_tol)
    return Density({e: float(r) for e, r in zip(support, rho)}), lam


class _Qp2ActiveSet:
    """Incremental restricted solver for p = 2.

    At p = 2 the dual is the box-constrained quadratic
    ``max sum(lam) - lam' G lam / 2`` with the constant Gram matrix
    ``G = N diag(1/(2 sigma)) N^T``, so G can grow by one border row per
    added path and every Newton solve costs O(rows^3), independent of the
    support size.  This keeps the constraint-generation loop fast on
    full-scale graphs, where hundreds of rows are typical.
    """

    def __init__(self):
        self.row_dicts: list[dict[int, float]] = []
        self.inv2sig: list[float] = []  # 1/(2 sigma) per support column
        self.G = np.zeros((0, 0))
        self.lam = np.zeros(0)

    def extend_support(self, inv2sig_new: float):
        self.inv2sig.append(inv2sig_new)

    def add_row(self, rd: dict[int, float]):
        n = len(self.row_dicts)
        border = np.empty(n + 1)
        for i, other in enumerate(self.row_dicts):
            small, large = (rd, other) if len(rd) <= len(other) else (other, rd)
            border[i] = sum(v * large[j] * self.inv2sig[j]
                            for j, v in small.items() if j in large)
        border[n] = sum(v * v * self.inv2sig[j] for j, v in rd.items())
        G = np.empty((n + 1, n + 1))
        G[:n, :n] = self.G
        G[n, :] = border
        G[:, n] = border
        self.G = G
        self.row_dicts.append(rd)
        warm = self.lam[self.lam > 0].mean() if (self.lam > 0).any() else 1.0
        self.lam = np.append(self.lam, warm)

    def prune(self, keep: list[int]):
        self.row_dicts = [self.row_dicts[i] for i in keep]
        self.G = self.G[np.ix_(keep, keep)]
        self.lam = self.lam[keep]

    def solve(self, inner_tol: float):
        G = self.G
        lam = np.maximum(self.lam, 0.0)

        def gval(l):
            return l.sum() - 0.5 * (l @ (G @ l))

        for _ in range(100):
            grad = 1.0 - G @ lam
            viol = grad.max(initial=0.0)
            comp = np.abs(lam * grad).max(initial=0.0) / max(lam.sum(), 1e-300)
            if viol <= inner_tol * 1e-3 and comp <= inner_tol * 1e-3:
                break
            active = (lam > 0.0) | (grad > 0.0)
            if not active.any():
                break
            Ga = G[np.ix_(active, active)]
            ridge = 1e-13 * max(np.trace(Ga) / max(len(Ga), 1), 1e-300)
            try:
                step = np.linalg.solve(Ga + ridge * np.eye(len(Ga)), grad[active])
            except np.linalg.LinAlgError:
                step, *_ = np.linalg.lstsq(Ga, grad[active], rcond=None)
            g_cur = gval(lam)
            t = 1.0
            improved = False
            for _ in range(60):
                trial = lam.copy()
                trial[active] = np.maximum(trial[active] + t * step, 0.0)
                if gval(trial) >= g_cur and not np.array_equal(trial, lam):
                    lam = trial
                    improved = True
                    break
                t *= 0.5
            if not improved:
                break

        self.lam = lam
        grad = 1.0 - G @ lam
        viol = float(grad.max(initial=0.0))
        comp = float(np.abs(lam * grad).max(initial=0.0) / max(lam.sum(), 1e-300))
        return lam, viol, comp, gval(lam)


# ---------------------------------------------------------------------------
# Constraint-generation solver

# A row whose dual weight stays zero this many consecutive outer iterations
# is dropped from the active set (it may re-enter through the oracle).
_PRUNE_STREAK = 5


def modulus(g: TemporalGraph, spec: FamilySpec, tol: float = 1e-6, *,
            inner_tol: Optional[float] = None,
            max_outer: Optional[int] = None,
            prune_zero_duals: bool = True) -> ModulusResult:
    """Modulus of the time-respecting connecting family by constraint generation.

    Starts from the zero density and an empty active set; each iteration asks
    the shortest-path oracle for the family member of minimum length and
    either stops (length >= 1 - tol, so the density is certified admissible)
    or adds that member's usage row and re-solves the restricted problem.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if spec.source not in g.vertex_index or spec.target not in g.vertex_index:
        raise ValueError("source/target not in graph")
    if inner_tol is None:
        inner_tol = tol / 10.0
    if max_outer is None:
        max_outer = max(50, 10 * len(g.edges))

    p = spec.p
    cfg = spec.penalty
    sigma_full = resolve_sigma(g, spec)
    ctx = SearchContext(g, cfg)
    n_edges = len(g.edges)

    rho_full = np.zeros(n_edges)
    support: list[int] = []
    support_pos: dict[int, int] = {}
    row_dicts: list[dict[int, float]] = []
    paths: list[TemporalPath] = []
    path_set: set[TemporalPath] = set()
    lam = np.zeros(0)
    zero_streak: list[int] = []
    history: list[float] = []
    info = dict(energy=0.0, gap=0.0)
    qp2 = _Qp2ActiveSet() if p == 2.0 else None

    iterations = 0
    exit_violation = 0.0
    empty = False
    first_length = None
    converged = False

    while iterations < max_outer:
        iterations += 1
        hit = ctx.query(spec.source, spec.target, rho_full)
        if hit is None:
            empty = True
            exit_violation = 0.0
            converged = True
            break
        gamma, length = hit
        if first_length is None:
            first_length = length
        exit_violation = 1.0 - length
        if length >= 1.0 - tol:
            converged = True
            break
        if gamma in path_set:
            raise RestrictedSolveError(
                "oracle returned an active path that still violates its "
                f"constraint (length {length:.12g}); inner tolerance too loose",
                info=info)

        row = usage_row(gamma, cfg)
        rd: dict[int, float] = {}
        for e, v in row.entries.items():
            idx = g.edge_index[e]
            if idx not in support_pos:
                support_pos[idx] = len(support)
                support.append(idx)
            rd[support_pos[idx]] = v
        row_dicts.append(rd)
        paths.append(gamma)
        path_set.add(gamma)
        zero_streak.append(0)

        sig = sigma_full[support]
        if qp2 is not None:
            while len(qp2.inv2sig) < len(support):
                qp2.extend_support(0.5 / sigma_full[support[len(qp2.inv2sig)]])
            qp2.add_row(rd)
            lam, raw_viol, comp, dual_value = qp2.solve(inner_tol)
            x = np.zeros(len(support))
            for rd_i, l in zip(row_dicts, lam):
                if l != 0.0:
                    for j, v in rd_i.items():
                        x[j] += l * v
            rho_sup = x / (2.0 * sig)
            evalue = float(sig @ rho_sup ** 2)
            lmin = 1.0 - raw_viol
            gap_rel = (abs(evalue / lmin ** 2 - dual_value) / max(1.0, evalue)
                       if lmin > 0 else math.inf)
            info = dict(energy=evalue, violation=max(raw_viol, 0.0),
                        complementarity=comp, gap=gap_rel)
            if info["violation"] > max(50 * inner_tol, 1e-6):
                raise RestrictedSolveError(
                    f"restricted QP stalled (violation {info['violation']:.3g})",
                    rho=rho_sup, duals=lam, info=info)
        else:
            lam = np.append(lam, lam[lam > 0].mean() if (lam > 0).any() else 1.0)
            N = np.zeros((len(row_dicts), len(support)))
            for i, rd_i in enumerate(row_dicts):
                for j, v in rd_i.items():
                    N[i, j] = v
            rho_sup, lam, info = _solve_restricted(N, sig, p, inner_tol, lam)
        rho_full[:] = 0.0
        rho_full[support] = rho_sup
        history.append(info["energy"])

        if prune_zero_duals and len(row_dicts) > 1:
            lam_scale = max(lam.max(initial=0.0), 1.0)
            keep: list[int] = []
            for i in range(len(row_dicts)):
                if lam[i] <= 1e-15 * lam_scale:
                    zero_streak[i] += 1
                else:
                    zero_streak[i] = 0
                if zero_streak[i] < _PRUNE_STREAK:
                    keep.append(i)
            if len(keep) < len(row_dicts):
                row_dicts = [row_dicts[i] for i in keep]
                paths = [paths[i] for i in keep]
                zero_streak = [zero_streak[i] for i in keep]
                lam = lam[keep]
                path_set = set(paths)
                if qp2 is not None:
                    qp2.prune(keep)

    if not converged:
        lower = info["energy"]
        length = 1.0 - exit_violation
        upper = lower / length ** p if (length > 0 and not math.isinf(p)) else math.inf
        if math.isinf(p) and length > 0:
            upper = lower / length
        raise IterationBudgetError("outer iteration budget exceeded",
                                   lower, upper, iterations)

    sigma_map = {e.id: float(sigma_full[i]) for i, e in enumerate(g.edges)}

    if not paths:
        # Either no time-respecting path exists at all, or (add-edge) every
        # path's penalty total already reaches 1 and the family is empty
        # after the feasibility filter.
        if not empty:
            empty = (cfg.mode == "add-edge"
                     and first_length is not None
                     and first_length >= 1.0 - SINGULAR_EPS)
        return ModulusResult(
            value=0.0, rho_star=Density(), eta_star={}, plan={},
            active_paths=[], iterations=iterations,
            max_violation=exit_violation, duality_gap=0.0,
            empty_family=empty, row_duals=None,
            energy_history=history, spec=spec, sigma=sigma_map)

    value = info["energy"]
    rho_star = Density({g.edges[i].id: float(rho_full[i]) for i in support
                        if rho_full[i] > 0.0})
    lam_sum = lam.sum()
    if lam_sum <= 0:
        raise DegenerateDualsError("all dual weights are zero at exit")
    mu = (lam / lam_sum).tolist()
    eta: dict[str, float] = {}
    for rd_i, m in zip(row_dicts, mu):
        if m == 0.0:
            continue
        for j, v in rd_i.items():
            e = g.edges[support[j]].id
            eta[e] = eta.get(e, 0.0) + m * v

    order = sorted(range(len(paths)), key=lambda i: (-mu[i], i))
    plan = {paths[i]: float(mu[i]) for i in order}
    active_paths = [paths[i] for i in order]

    resid = None
    if 1.0 < p < math.inf:
        resid = _duality_identity_residual(rho_star, eta, p, sigma_map)

    return ModulusResult(
        value=float(value), rho_star=rho_star, eta_star=eta, plan=plan,
        active_paths=active_paths, iterations=iterations,
        max_violation=float(exit_violation), duality_gap=float(info["gap"]),
        empty_family=False, row_duals=lam[order], energy_history=history,
        duality_identity_residual=resid, spec=spec, sigma=sigma_map)


def _duality_identity_residual(rho: Mapping[str, float], eta: Mapping[str, float],
                               p: float, sigma: Mapping[str, float]) -> float:
    """Max deviation in the per-edge share identity linking rho* and eta*.

    Shares are formed in log space; the raw terms rho^p and eta^q overflow
    long before the normalized shares stop being well-defined.
    """
    q = conjugate_exponent(p)
    log_a = []
    log_b = []
    for e, s in sigma.items():
        r = rho.get(e, 0.0)
        h = eta.get(e, 0.0)
        log_a.append(math.log(s) + p * math.log(r) if r > 0 else -math.inf)
        log_b.append((-q / p) * math.log(s) + q * math.log(h) if h > 0 else -math.inf)

    def softmax_shares(logs):
        m = max(logs)
        if not math.isfinite(m):
            return None
        w = [math.exp(v - m) for v in logs]
        total = sum(w)
        return [x / total for x in w]

    a = softmax_shares(log_a)
    b = softmax_shares(log_b)
    if a is None or b is None:
        return math.inf
    return max(abs(x - y) for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Brute-force oracle

def brute_force_modulus(g: TemporalGraph, spec: FamilySpec, tol: float = 1e-6, *,
                        max_paths: int = 10000,
                        max_hops: Optional[int] = None) -> ModulusResult:
    """Enumerate the whole family and solve the complete problem directly.

    Independent of the constraint-generation route: all usage rows are built
    up front and, for p in (1, inf), the complete dual is solved with a
    projected accelerated gradient method run to a certified duality gap.
    Refuses families larger than ``max_paths``.
    """
    if spec.source not in g.vertex_index or spec.target not in g.vertex_index:
        raise ValueError("source/target not in graph")
    if max_hops is None:
        max_hops = len(g.edges)
    fam = enumerate_trp(g, spec.source, spec.target, max_hops=max_hops,
                        max_count=max_paths)
    if fam.truncated:
        raise EnumerationOverflowError(max_paths)

    cfg = spec.penalty
    sigma_full = resolve_sigma(g, spec)
    sigma_map = {e.id: float(sigma_full[i]) for i, e in enumerate(g.edges)}
    rows: list[UsageRow] = []
    kept_paths: list[TemporalPath] = []
    dropped = 0
    for gamma in fam.paths:
        try:
            rows.append(usage_row(gamma, cfg))
            kept_paths.append(gamma)
        except InfeasibleObjectError:
            dropped += 1

    if not rows:
        return ModulusResult(
            value=0.0, rho_star=Density(), eta_star={}, plan={},
            active_paths=[], iterations=0, max_violation=0.0,
            duality_gap=0.0, empty_family=True, spec=spec, sigma=sigma_map)
    support: list[int] = []
    support_pos: dict[int, int] = {}
    for row in rows:
        for e in row.entries:
            idx = g.edge_index[e]
            if idx not in support_pos:
                support_pos[idx] = len(support)
                support.append(idx)
    N = np.zeros((len(rows), len(support)))
    for i, row in enumerate(rows):
        for e, v in row.entries.items():
            N[i, support_pos[g.edge_index[e]]] = v
    sig = sigma_full[support]

    p = spec.p
    if math.isinf(p) or p == 1.0:
        rho_sup, lam, info = _solve_restricted(N, sig, p, tol)
        iters = 1
    else:
        rho_sup, lam, info, iters = _fista_dual(N, sig, p, tol)

    value = info["energy"]
    rho_star = Density({g.edges[i].id: float(r) for i, r in zip(support, rho_sup)
                        if r > 0.0})
    lam_sum = lam.sum()
    if lam_sum <= 0:
        raise DegenerateDualsError("all dual weights are zero in brute-force solve")
    mu = (lam / lam_sum).tolist()
    eta: dict[str, float] = {}
    for i, row in enumerate(rows):
        if mu[i] == 0.0:
            continue
        for e, v in row.entries.items():
            eta[e] = eta.get(e, 0.0) + mu[i] * v

    order = sorted(range(len(kept_paths)), key=lambda i: (-mu[i], i))
    plan = {kept_paths[i]: float(mu[i]) for i in order}

    resid = None
    if 1.0 < p < math.inf:
        resid = _duality_identity_residual(rho_star, eta, p, sigma_map)

    return ModulusResult(
        value=float(value), rho_star=rho_star, eta_star=eta, plan=plan,
        active_paths=[kept_paths[i] for i in order], iterations=iters,
        max_violation=float(info["violation"]), duality_gap=float(info["gap"]),
        empty_family=False, row_duals=lam[order],
        duality_identity_residual=resid, spec=spec, sigma=sigma_map)


def _fista_dual(N: np.ndarray, sigma: np.ndarray, p: float, tol: float,
                max_iter: int = 400000):
    """Projected accelerated gradient ascent on the complete dual problem.

    Runs until the scaled-feasible primal certifies a relative duality gap
    below tol (capped at ``max_iter`` iterations).
    """
    n_rows = N.shape[0]
    expq = 1.0 / (p - 1.0)
    pm1 = p - 1.0
    psig = p * sigma
    NT = np.ascontiguousarray(N.T)

    def rho_of(lam):
        x = NT @ lam
        np.maximum(x, 0.0, out=x)
        return (x / psig) ** expq

    def gval(lam, rho):
        return lam.sum() - pm1 * (sigma @ rho ** p)

    # Scale-matched start (see _solve_smooth): brings the shortest row
    # length near 1 so the first iterates are already the right order.
    lam = np.ones(n_rows)
    lmin0 = (N @ rho_of(lam)).min()
    if lmin0 > 0 and np.isfinite(lmin0 ** -pm1):
        lam *= lmin0 ** -pm1
    y = lam.copy()
    tk = 1.0
    L = 1.0
    best = None

    for it in range(1, max_iter + 1):
        rho_y = rho_of(y)
        grad_y = 1.0 - N @ rho_y
        g_y = y.sum() - pm1 * (sigma @ rho_y ** p)
        while True:
            lam_new = np.maximum(y + grad_y / L, 0.0)
            d = lam_new - y
            if gval(lam_new, rho_of(lam_new)) >= \
                    g_y + grad_y @ d - 0.5 * L * (d @ d) - 1e-300:
                break
            L *= 2.0
        step = lam_new - lam
        lam = lam_new
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        if step @ grad_y < 0:
            tk = 1.0
            y = lam.copy()
        else:
            y = lam + ((tk - 1.0) / t_next) * step
            tk = t_next
        L *= 0.97

        if it % 20 == 0 or it == max_iter:
            rho = rho_of(lam)
            lengths = N @ rho
            lmin = lengths.min(initial=np.inf)
            if lmin > 0 and np.isfinite(lmin):
                rho_feas = rho / lmin
                e_feas = float(sigma @ rho_feas ** p)
                gap = e_feas - gval(lam, rho)
                gap_rel = abs(gap) / max(1.0, e_feas)
                if best is None or gap_rel < best[0]:
                    best = (gap_rel, rho_feas, lam.copy(), e_feas)
                if gap_rel <= tol:
                    break
    if best is None:
        raise RestrictedSolveError("brute-force first-order solve produced no "
                                   "feasible iterate")
    gap_rel, rho_feas, lam, e_feas = best
    if gap_rel > max(10 * tol, 1e-6):
        raise RestrictedSolveError(
            f"brute-force first-order solve stalled (gap {gap_rel:.3g})",
            rho=rho_feas, duals=lam)
    info = dict(energy=e_feas, violation=0.0, complementarity=0.0, gap=gap_rel)
    return rho_feas, lam, info, it


# ---------------------------------------------------------------------------
# Dual quantities and derived checks

def dual_recover(result: ModulusResult, p: Optional[float] = None,
                 sigma: Optional[Mapping[str, float]] = None):
    """Optimal transport plan and expected edge usage from the row duals.

    Requires p in (1, inf) and a converged result.  Normalizes the row duals
    into a plan, rebuilds eta as the plan's expected usage, and verifies the
    per-edge share identity between rho* and eta*.  Returns (eta_star, plan).
    """
    spec = result.spec
    if p is None:
        p = spec.p
    if sigma is None:
        sigma = result.sigma
    if not (1.0 < p < math.inf):
        raise ValueError("dual recovery requires p in (1, inf)")
    lam = result.row_duals
    if lam is None or lam.sum() <= 0:
        raise DegenerateDualsError("no usable dual weights on result")

    mu = lam / lam.sum()
    plan = {path: float(m) for path, m in zip(result.active_paths, mu)}
    eta: dict[str, float] = {}
    for path, m in plan.items():
        if m == 0.0:
            continue
        for e, v in usage_row(path, spec.penalty).entries.items():
            eta[e] = eta.get(e, 0.0) + m * v

    resid = _duality_identity_residual(result.rho_star, eta, p, sigma)
    if resid > max(100 * result.duality_gap, 1e-5):
        raise ModulusError(
            f"duality identity violated (residual {resid:.3g}); "
            "result and inputs are inconsistent or unconverged")
    return eta, plan


def expected_overlap(eta_star: Mapping[str, float], p: float,
                     sigma: Mapping[str, float]) -> float:
    """Expected intersection size of two i.i.d. plan draws: sum eta^2.

    Only meaningful for p = 2 with unit sigma and static natural usage; at
    the optimum it equals 1 / modulus.
    """
    if p != 2.0:
        raise ValueError("expected overlap requires p = 2")
    if any(v != 1.0 for v in sigma.values()):
        raise ValueError("expected overlap requires sigma = 1")
    return sum(v * v for v in eta_star.values())


def lambda_sweep(g: TemporalGraph, spec: FamilySpec, lambdas: Sequence[float],
                 tol: float = 1e-6) -> list[tuple[float, float]]:
    """Modulus across time scales: phi_lam(t) = phi(lam * t), sorted by lam."""
    if any(l <= 0 for l in lambdas):
        raise ValueError("lambda values must be positive")
    out = []
    for lam in sorted(lambdas):
        spec_l = replace(spec, penalty=PenaltyConfig(
            spec.penalty.mode, spec.penalty.phi.with_lambda(lam)))
        out.append((lam, modulus(g, spec_l, tol).value))
    return out


def p_sweep(g: TemporalGraph, spec: FamilySpec, ps: Sequence[float],
            tol: float = 1e-6) -> list[tuple[float, float, float]]:
    """Modulus across exponents; also returns (sigma(E)^-1 Mod)^(1/p) per p."""
    if any(math.isinf(p) or p < 1 for p in ps):
        raise ValueError("p sweep requires finite p >= 1")
    sigma_full = resolve_sigma(g, spec)
    sigma_total = float(sigma_full.sum())
    out = []
    for p in ps:
        value = modulus(g, replace(spec, p=p), tol).value
        transform = (value / sigma_total) ** (1.0 / p) if value > 0 else 0.0
        out.append((p, value, transform))
    return out


def sigma_derivative_check(g: TemporalGraph, spec: FamilySpec, e: str,
                           h: float = 1e-4, tol: float = 1e-6):
    """Central finite difference of the modulus in sigma(e) vs rho*(e)^p."""
    if not (1.0 < spec.p < math.inf):
        raise ValueError("derivative check requires p in (1, inf)")
    if h <= 0:
        raise ValueError("h must be positive")
    solve_tol = min(tol, 1e-9)
    sigma_full = resolve_sigma(g, spec)
    base = dict(spec.sigma_override or {})
    s_e = sigma_full[g.edge_index[e]]
    if s_e - h <= 0:
        raise ValueError("step h must keep sigma positive")

    rho_e = modulus(g, spec, solve_tol).rho_star.get(e, 0.0)
    up = replace(spec, sigma_override={**base, e: s_e + h})
    dn = replace(spec, sigma_override={**base, e: s_e - h})
    fd = (modulus(g, up, solve_tol).value - modulus(g, dn, solve_tol).value) / (2 * h)
    return fd, rho_e ** spec.p


def delta_p_metric(g: TemporalGraph, spec_template: FamilySpec, x: str, y: str,
                   tol: float = 1e-6) -> float:
    """The modulus vertex metric Mod^(-q/p) on the static connecting family.

    The family here is every x-y path of the aggregated graph, not just the
    time-respecting ones (temporal constraints would break the triangle
    inequality), so the availability sets are saturated before solving.
    """
    if g.directed:
        raise ValueError("the modulus metric is defined on undirected graphs")
    p = spec_template.p
    if not (1.0 < p < math.inf):
        raise ValueError("the modulus metric requires p in (1, inf)")
    if x == y:
        return 0.0
    # A simple path takes at most |V| - 1 hops, so |V| - 1 shared times make
    # every static path traceable in strictly increasing times.
    n_slots = max(1, len(g.vertices) - 1)
    slots = tuple(float(i) for i in range(1, n_slots + 1))
    from .tempgraph import EdgeRecord
    saturated = TemporalGraph(
        g.vertices,
        [EdgeRecord(e.id, e.tail, e.head, e.weight, slots) for e in g.edges],
        directed=False)
    static = PenaltyConfig("mul-edge", PhiSpec("const", 1.0))
    spec = FamilySpec(x, y, p, static, spec_template.sigma_override)
    res = modulus(saturated, spec, tol)
    if res.empty_family or res.value <= 0.0:
        return math.inf
    q = conjugate_exponent(p)
    return res.value ** (-q / p)
