"""Quantifying the premises behind the CHSH bound: MI, OI, PI, factorability.

With lambda a vector of hidden spins, the four conditions are

    MI   P(lambda | a, b) = P(lambda | a', b')           (measurement indep.)
    OI   P(s1 | s2, a, b, lambda) = P(s1 | a, b, lambda) (outcome indep.)
    PI   P(s2 | a, b, lambda) = P(s2 | b, lambda)        (parameter indep.)
    FACT P(s1, s2 | a, b, lambda)
             = P(s1 | a, lambda) * P(s2 | b, lambda)     (= OI and PI)

Each deviation is the worst absolute difference over every assignment the
condition quantifies over (the L-infinity reading of its "for all"), so a
zero deviation certifies the condition and a positive one comes with a
concrete witness assignment. The worst-case total-variation distance over
the same conditionings is reported as a secondary statistic. All conditional
probabilities are well defined: Gibbs tables are strictly positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .chsh import SETTING_PAIRS, PairwiseReport
from .errors import SpecError
from .gibbs import DistributionTable, joint_table
from .lattice import RoleAssignment
from .parallel import map_ordered


@dataclass(frozen=True)
class DeviationResult:
    """Worst absolute deviation, the assignment achieving it, and the TV statistic."""

    value: float
    witness: dict
    tv: float


@dataclass(frozen=True)
class IndependenceReport:
    lambda_subset: tuple[int, ...]
    mi: DeviationResult
    oi: DeviationResult
    pi: DeviationResult
    factorability: DeviationResult
    pairwise: PairwiseReport | None = None

    @property
    def mi_deviation(self) -> float:
        return self.mi.value

    @property
    def oi_deviation(self) -> float:
        return self.oi.value

    @property
    def pi_deviation(self) -> float:
        return self.pi.value

    @property
    def factorability_deviation(self) -> float:
        return self.factorability.value


def _subset(roles: RoleAssignment, lambda_subset) -> tuple[int, ...]:
    if roles is None:
        raise SpecError("role assignment required for independence diagnostics")
    subset = tuple(sorted(int(s) for s in lambda_subset))
    if not subset:
        raise SpecError("lambda subset must be non-empty")
    extra = set(subset) - set(roles.hidden)
    if extra:
        raise SpecError(f"lambda subset must lie in the hidden set; got {sorted(extra)}")
    if len(set(subset)) != len(subset):
        raise SpecError("duplicate sites in lambda subset")
    return subset


def _lambda_values(flat: int, m: int) -> tuple[int, ...]:
    return tuple(1 if (flat >> (m - 1 - k)) & 1 else -1 for k in range(m))


_PM = {0: -1, 1: 1}


def mi_deviation(dist: DistributionTable, roles: RoleAssignment,
                 lambda_subset) -> DeviationResult:
    """Worst |P(lambda | a, b) - P(lambda | a', b')| over setting pairs."""
    subset = _subset(roles, lambda_subset)
    m = len(subset)
    t = joint_table(dist, [roles.setting_a, roles.setting_b, *subset])
    t = t.reshape(2, 2, -1)
    cond = t / t.sum(axis=2, keepdims=True)  # P(lambda | a, b)
    best = DeviationResult(0.0, {}, 0.0)
    worst_tv = 0.0
    for (a, b), (a2, b2) in combinations(SETTING_PAIRS, 2):
        diff = np.abs(cond[_bit(a), _bit(b)] - cond[_bit(a2), _bit(b2)])
        worst_tv = max(worst_tv, 0.5 * float(diff.sum()))
        k = int(np.argmax(diff))
        if diff[k] > best.value:
            best = DeviationResult(
                value=float(diff[k]),
                witness={"lambda_sites": subset,
                         "lambda_values": _lambda_values(k, m),
                         "settings": (a, b), "settings_prime": (a2, b2)},
                tv=0.0)
    return DeviationResult(best.value, best.witness, worst_tv)


def _bit(v: int) -> int:
    return 1 if v == 1 else 0


def _five_way(dist: DistributionTable, roles: RoleAssignment,
              subset: tuple[int, ...]) -> np.ndarray:
    """P(s1, s2, a, b, lambda) with axes (s1, s2, a, b, lambda-flat)."""
    t = joint_table(dist, [roles.outcome1, roles.outcome2,
                           roles.setting_a, roles.setting_b, *subset])
    return t.reshape(2, 2, 2, 2, -1)


def _argmax_witness(diff: np.ndarray, subset: tuple[int, ...],
                    names: tuple[str, ...]) -> tuple[float, dict]:
    flat = int(np.argmax(diff))
    coords = np.unravel_index(flat, diff.shape)
    witness = {}
    for name, c in zip(names, coords[:-1]):
        witness[name] = _PM[int(c)]
    witness["lambda_sites"] = subset
    witness["lambda_values"] = _lambda_values(int(coords[-1]), len(subset))
    return float(diff[coords]), witness


def oi_deviation(dist: DistributionTable, roles: RoleAssignment,
                 lambda_subset) -> DeviationResult:
    """Worst |P(s1 | s2, a, b, lambda) - P(s1 | a, b, lambda)|, both directions."""
    subset = _subset(roles, lambda_subset)
    t = _five_way(dist, roles, subset)
    p_abl = t.sum(axis=(0, 1))
    p1 = t.sum(axis=1) / p_abl                       # (s1, a, b, L)
    p2 = t.sum(axis=0) / p_abl                       # (s2, a, b, L)
    d1 = np.abs(t / t.sum(axis=0, keepdims=True) - p1[:, None])
    d2 = np.abs(t / t.sum(axis=1, keepdims=True) - p2[None, :])
    names = ("outcome1", "outcome2", "setting_a", "setting_b")
    v1, w1 = _argmax_witness(d1, subset, names)
    v2, w2 = _argmax_witness(d2, subset, names)
    value, witness = (v1, w1 | {"direction": "outcome1|outcome2"}) if v1 >= v2 \
        else (v2, w2 | {"direction": "outcome2|outcome1"})
    tv = max(0.5 * float(d1.sum(axis=0).max()), 0.5 * float(d2.sum(axis=1).max()))
    return DeviationResult(value, witness, tv)


def pi_deviation(dist: DistributionTable, roles: RoleAssignment,
                 lambda_subset) -> DeviationResult:
    """Worst |P(s2 | a, b, lambda) - P(s2 | b, lambda)| and the s1 mirror."""
    subset = _subset(roles, lambda_subset)
    t = _five_way(dist, roles, subset)
    p_abl = t.sum(axis=(0, 1))
    p2_abl = t.sum(axis=0) / p_abl                             # (s2, a, b, L)
    p2_bl = t.sum(axis=(0, 2)) / t.sum(axis=(0, 1, 2))         # (s2, b, L)
    p1_abl = t.sum(axis=1) / p_abl                             # (s1, a, b, L)
    p1_al = t.sum(axis=(1, 3)) / t.sum(axis=(0, 1, 3))         # (s1, a, L)
    d2 = np.abs(p2_abl - p2_bl[:, None, :, :])
    d1 = np.abs(p1_abl - p1_al[:, :, None, :])
    v2, w2 = _argmax_witness(d2, subset, ("outcome2", "setting_a", "setting_b"))
    v1, w1 = _argmax_witness(d1, subset, ("outcome1", "setting_a", "setting_b"))
    value, witness = (v2, w2 | {"direction": "outcome2|settings"}) if v2 >= v1 \
        else (v1, w1 | {"direction": "outcome1|settings"})
    tv = max(0.5 * float(d2.sum(axis=0).max()), 0.5 * float(d1.sum(axis=0).max()))
    return DeviationResult(value, witness, tv)


def factorability_deviation(dist: DistributionTable, roles: RoleAssignment,
                            lambda_subset) -> DeviationResult:
    """Worst |P(s1, s2 | a, b, lambda) - P(s1 | a, lambda) P(s2 | b, lambda)|."""
    subset = _subset(roles, lambda_subset)
    t = _five_way(dist, roles, subset)
    p12 = t / t.sum(axis=(0, 1))                               # (s1, s2, a, b, L)
    p1_al = t.sum(axis=(1, 3)) / t.sum(axis=(0, 1, 3))         # (s1, a, L)
    p2_bl = t.sum(axis=(0, 2)) / t.sum(axis=(0, 1, 2))         # (s2, b, L)
    product = p1_al[:, None, :, None, :] * p2_bl[None, :, None, :, :]
    diff = np.abs(p12 - product)
    names = ("outcome1", "outcome2", "setting_a", "setting_b")
    value, witness = _argmax_witness(diff, subset, names)
    tv = 0.5 * float(diff.sum(axis=(0, 1)).max())
    return DeviationResult(value, witness, tv)


def independence_report(dist: DistributionTable, roles: RoleAssignment,
                        lambda_subset=None,
                        pairwise: PairwiseReport | None = None) -> IndependenceReport:
    """All four deviations on one subset (default: the full hidden set)."""
    if lambda_subset is None:
        lambda_subset = roles.hidden if roles is not None else ()
    subset = _subset(roles, lambda_subset)
    return IndependenceReport(
        lambda_subset=subset,
        mi=mi_deviation(dist, roles, subset),
        oi=oi_deviation(dist, roles, subset),
        pi=pi_deviation(dist, roles, subset),
        factorability=factorability_deviation(dist, roles, subset),
        pairwise=pairwise,
    )


MAX_SWEEP_HIDDEN = 8


def subset_sweep(dist: DistributionTable, roles: RoleAssignment,
                 threads: int | None = None) -> list[IndependenceReport]:
    """Reports for every non-empty hidden subset, ordered by subset bitmask.

    Bit k of the mask selects the k-th hidden site in ascending site order.
    Limited to 8 hidden sites (255 subsets).
    """
    if roles is None:
        raise SpecError("role assignment required for independence diagnostics")
    hidden = tuple(sorted(roles.hidden))
    if len(hidden) > MAX_SWEEP_HIDDEN:
        raise SpecError(
            f"subset sweep supports at most {MAX_SWEEP_HIDDEN} hidden sites, "
            f"got {len(hidden)}")
    masks = range(1, 1 << len(hidden))
    subsets = [tuple(s for k, s in enumerate(hidden) if (mask >> k) & 1)
               for mask in masks]
    return map_ordered(lambda sub: independence_report(dist, roles, sub),
                       subsets, threads)
