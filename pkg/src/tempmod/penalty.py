"""Temporal penalty functions and usage rows.

A penalty function ``phi`` discounts late traversals.  It enters the usage
matrix through a weighting ``psi`` in one of four modes: multiplicatively or
additively, applied per edge or to the whole path.  The time-scale ``lam``
rescales the argument, ``phi_lam(t) = phi(lam * t)``; ``lam -> 0`` recovers
the static problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Mapping

if TYPE_CHECKING:
    from .paths import TemporalPath

# Additive penalties are singular as the penalty total approaches 1; paths
# inside this band are treated as infeasible rather than given huge usages.
SINGULAR_EPS = 1e-12

PHI_KINDS = ("const", "affine", "exp", "exp0")
MODES = ("mul-edge", "add-edge", "mul-object", "add-object")
MULTIPLICATIVE_MODES = ("mul-edge", "mul-object")
ADDITIVE_MODES = ("add-edge", "add-object")
PER_OBJECT_MODES = ("mul-object", "add-object")


class InfeasibleObjectError(ValueError):
    """Additive penalty total reached 1: the path is not a family member."""


@dataclass(frozen=True)
class PhiSpec:
    """A parametric penalty function with time-scale ``lam``.

    kind / value:
      const  -> phi(t) = value
      affine -> phi(t) = 1 + value * t
      exp    -> phi(t) = exp(value * (t - t0))
      exp0   -> phi(t) = exp(value * (t - t0)) - 1
    """

    kind: str
    value: float = 1.0
    t0: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in PHI_KINDS:
            raise ValueError(f"unknown phi kind {self.kind!r}")
        if self.kind == "const" and self.value <= 0:
            raise ValueError("const phi requires a positive value")
        if self.kind != "const" and self.value < 0:
            raise ValueError(f"{self.kind} phi requires a nonnegative rate")
        if self.lam <= 0:
            raise ValueError("lam must be positive")

    def __call__(self, t: float) -> float:
        """Evaluate phi(lam * t); t must be nonnegative."""
        s = self.lam * t
        if self.kind == "const":
            return self.value
        if self.kind == "affine":
            return 1.0 + self.value * s
        if self.kind == "exp":
            return math.exp(self.value * (s - self.t0))
        out = math.exp(self.value * (s - self.t0)) - 1.0
        if out < 0.0:
            raise ValueError(f"exp0 phi is negative at t={t} (t0={self.t0}); "
                             "exp0 requires lam*t >= t0")
        return out

    def with_lambda(self, lam: float) -> "PhiSpec":
        return replace(self, lam=lam)

    def spec_string(self) -> str:
        if self.kind == "const":
            return f"const:{self.value:g}"
        if self.kind == "affine":
            return f"affine:{self.value:g}"
        if self.t0 == 0.0:
            return f"{self.kind}:{self.value:g}"
        return f"{self.kind}:{self.value:g}:{self.t0:g}"

    @classmethod
    def parse(cls, text: str, lam: float = 1.0) -> "PhiSpec":
        """Parse ``const:c``, ``affine:a``, ``exp:rate[:t0]`` or ``exp0:rate[:t0]``."""
        parts = text.split(":")
        kind = parts[0]
        if kind not in PHI_KINDS:
            raise ValueError(f"unknown phi kind {kind!r} in {text!r}")
        if kind in ("const", "affine"):
            if len(parts) != 2:
                raise ValueError(f"{kind} phi takes exactly one parameter: {text!r}")
            return cls(kind, float(parts[1]), lam=lam)
        if len(parts) not in (2, 3):
            raise ValueError(f"{kind} phi takes one or two parameters: {text!r}")
        t0 = float(parts[2]) if len(parts) == 3 else 0.0
        return cls(kind, float(parts[1]), t0=t0, lam=lam)


def phi_eval(phi: PhiSpec, t: float) -> float:
    """Value of phi(lam * t); nondecreasing in both t and lam."""
    if t < 0:
        raise ValueError("phi is only defined for nonnegative times")
    return phi(t)


@dataclass(frozen=True)
class PenaltyConfig:
    """A penalization mode paired with a compatible phi.

    Multiplicative modes need phi == 1 at the reference time (0, or t0 for
    the exponential kind); additive modes need phi == 0 there, which only
    the exp0 kind provides.
    """

    mode: str
    phi: PhiSpec

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown penalty mode {self.mode!r}")
        kind = self.phi.kind
        if self.mode in MULTIPLICATIVE_MODES:
            if kind == "exp0":
                raise ValueError("exp0 phi vanishes at its reference time; "
                                 "multiplicative modes need phi == 1 there")
            if kind == "const" and self.phi.value != 1.0:
                raise ValueError("multiplicative modes require const phi value 1")
        else:
            if kind != "exp0":
                raise ValueError(f"{kind} phi is positive at its reference time; "
                                 "additive modes need phi == 0 there (use exp0)")

    @property
    def is_additive(self) -> bool:
        return self.mode in ADDITIVE_MODES

    @property
    def is_per_object(self) -> bool:
        return self.mode in PER_OBJECT_MODES


@dataclass(frozen=True)
class UsageRow:
    """One row of the temporal usage matrix: edge id -> penalized usage."""

    path: "TemporalPath"
    entries: Mapping[str, float]

    def dot(self, rho: Mapping[str, float]) -> float:
        return sum(v * rho.get(e, 0.0) for e, v in self.entries.items())


def _penalty_total(gamma: "TemporalPath", cfg: PenaltyConfig) -> float:
    """Sum (add-edge) or max (add-object) of phi over the path's times."""
    phis = [cfg.phi(t) for _, t, _ in gamma.steps]
    return sum(phis) if cfg.mode == "add-edge" else max(phis)


def psi(gamma: "TemporalPath", e: str, cfg: PenaltyConfig) -> float:
    """Temporal weighting of edge e by path gamma; 1 when e is unused."""
    step_time = gamma.time_of(e)
    if step_time is None:
        return 1.0
    if cfg.mode == "mul-edge":
        return cfg.phi(step_time)
    if cfg.mode == "mul-object":
        return max(cfg.phi(t) for _, t, _ in gamma.steps)
    total = _penalty_total(gamma, cfg)
    slack = 1.0 - total
    if slack < SINGULAR_EPS:
        raise InfeasibleObjectError(
            f"additive penalty total {total} reaches 1 on path {gamma.edge_ids()}")
    return 1.0 / slack


def usage_row(gamma: "TemporalPath", cfg: PenaltyConfig) -> UsageRow:
    """The row N(gamma, .): psi on the path's edges, absent elsewhere."""
    if cfg.mode == "mul-edge":
        entries = {e: cfg.phi(t) for e, t, _ in gamma.steps}
    else:
        if cfg.is_additive:
            total = _penalty_total(gamma, cfg)
            slack = 1.0 - total
            if slack < SINGULAR_EPS:
                raise InfeasibleObjectError(
                    f"additive penalty total {total} reaches 1 on path {gamma.edge_ids()}")
            value = 1.0 / slack
        else:
            value = max(cfg.phi(t) for _, t, _ in gamma.steps)
        entries = {e: value for e, _, _ in gamma.steps}
    return UsageRow(gamma, entries)


def rho_length(gamma: "TemporalPath", rho: Mapping[str, float], cfg: PenaltyConfig) -> float:
    """rho-length of the path: sum over edges of N(gamma, e) * rho(e)."""
    return usage_row(gamma, cfg).dot(rho)


def search_length(gamma: "TemporalPath", rho: Mapping[str, float], cfg: PenaltyConfig) -> float:
    """The length the shortest-path oracle minimizes.

    Identical to ``rho_length`` except in add-edge mode, where the raw
    additive form ``sum rho(e_i) + sum phi(t_i)`` is used; the two forms
    agree on which side of 1 a path falls.
    """
    if cfg.mode == "add-edge":
        return (sum(rho.get(e, 0.0) for e, _, _ in gamma.steps)
                + sum(cfg.phi(t) for _, t, _ in gamma.steps))
    return rho_length(gamma, rho, cfg)
