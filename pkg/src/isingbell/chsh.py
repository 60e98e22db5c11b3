"""Post-selected correlators, the CHSH combination, and pairwise correlations.

The two setting spins take the role of the analyzer variables: the run is
split into the four subensembles with (sigma_a, sigma_b) = (+-1, +-1), and in
each one the conditional correlator

    M(a, b) = sum_{s1,s2} s1 * s2 * P(sigma_1 = s1, sigma_2 = s2 | a, b)

is computed exactly from the distribution table. The CHSH quantity combines
the four correlators with a single minus sign; the default convention puts it
on the (-1, -1) term, identifying a = b = +1 and a' = b' = -1. A factorable
system obeying measurement independence satisfies |X| <= 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecError
from .gibbs import DistributionTable, joint_table
from .lattice import LatticeSpec, RoleAssignment

SETTING_PAIRS = ((1, 1), (-1, 1), (1, -1), (-1, -1))

#: sign conventions: which setting pair carries the minus sign
CONVENTIONS = ("mm", "mp", "pm", "pp")
MAX_CONVENTION = "max"
_MINUS_TERM = {"mm": (-1, -1), "mp": (-1, 1), "pm": (1, -1), "pp": (1, 1)}


@dataclass(frozen=True)
class ChshReport:
    """The four correlators, the CHSH value, and how it was formed."""

    m_values: dict[tuple[int, int], float]
    x_bi: float
    sign_convention: str
    setting_probs: dict[tuple[int, int], float]

    def csv_row(self) -> tuple:
        return (self.m_values[(1, 1)], self.m_values[(-1, 1)],
                self.m_values[(1, -1)], self.m_values[(-1, -1)],
                self.x_bi, self.sign_convention)


def _four_site_table(dist: DistributionTable, roles: RoleAssignment) -> np.ndarray:
    if roles is None:
        raise SpecError("role assignment required for correlation queries")
    return joint_table(dist, [roles.outcome1, roles.outcome2,
                              roles.setting_a, roles.setting_b])


def _bit(v: int) -> int:
    return 1 if v == 1 else 0


def correlator(dist: DistributionTable, roles: RoleAssignment,
               a: int, b: int) -> float:
    """M(a, b) for one subensemble, post-selected on the setting spins."""
    if a not in (-1, 1) or b not in (-1, 1):
        raise SpecError(f"setting values must be +-1, got ({a}, {b})")
    t = _four_site_table(dist, roles)[:, :, _bit(a), _bit(b)]
    p_ab = t.sum()
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])  # s1*s2 with index 0 <-> -1
    return float((t * signs).sum() / p_ab)


def combine(m_values: dict[tuple[int, int], float], convention: str) -> float:
    """Signed sum of the four correlators under one sign placement."""
    minus = _MINUS_TERM[convention]
    return sum(-m if pair == minus else m for pair, m in m_values.items())


def chsh(dist: DistributionTable, roles: RoleAssignment,
         convention: str = "mm") -> ChshReport:
    """Full CHSH report under the given sign convention.

    convention "max" evaluates all four placements and reports the largest
    combination (the placement used is recorded as "max(<placement>)").
    """
    if convention not in CONVENTIONS and convention != MAX_CONVENTION:
        raise SpecError(f"unknown sign convention {convention!r}")
    t = _four_site_table(dist, roles)
    m_values: dict[tuple[int, int], float] = {}
    setting_probs: dict[tuple[int, int], float] = {}
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    for (a, b) in SETTING_PAIRS:
        sub = t[:, :, _bit(a), _bit(b)]
        p_ab = float(sub.sum())
        setting_probs[(a, b)] = p_ab
        m_values[(a, b)] = float((sub * signs).sum() / p_ab)
    if convention == MAX_CONVENTION:
        per = {c: combine(m_values, c) for c in CONVENTIONS}
        best = max(CONVENTIONS, key=lambda c: per[c])
        return ChshReport(m_values, per[best], f"max({best})", setting_probs)
    return ChshReport(m_values, combine(m_values, convention), convention,
                      setting_probs)


@dataclass(frozen=True)
class PairwiseReport:
    """Worst-case product-form deviation for every site pair.

    matrix[i, j] = max over eps, delta of
    |P(s_i = eps, s_j = delta) - P(s_i = eps) P(s_j = delta)|; the flag is
    True iff every off-diagonal entry exceeds the threshold, i.e. the system
    is fully pairwise correlated.
    """

    matrix: np.ndarray
    fully_correlated: bool
    threshold: float


def pairwise_correlations(dist: DistributionTable, spec: LatticeSpec,
                          threshold: float = 1e-9) -> PairwiseReport:
    n = spec.n_sites
    matrix = np.zeros((n, n))
    singles = [joint_table(dist, [i]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            joint = joint_table(dist, [i, j])
            product = np.outer(singles[i], singles[j])
            dev = float(np.abs(joint - product).max())
            matrix[i, j] = matrix[j, i] = dev
    off = matrix[~np.eye(n, dtype=bool)]
    fully = bool(off.size and (off > threshold).all())
    return PairwiseReport(matrix=matrix, fully_correlated=fully,
                          threshold=threshold)
