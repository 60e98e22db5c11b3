"""Lattice geometry, role assignment, spin configurations, and the Ising energy.

A lattice is a finite open graph of N spins sigma_i = +-1 with pairwise
couplings J_ij on its edges and local fields h_i, at inverse temperature beta.
The energy of a configuration theta is

    H(theta) = - sum_edges J_ij sigma_i sigma_j - sum_i h_i sigma_i

Four sites play special roles in the correlation experiment: two outcome
spins, two setting (analyzer) spins; every remaining site is a hidden spin.
Configurations are indexed by the integer whose bit i is 1 iff sigma_i = +1,
so the full state space is [0, 2^N).
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, SpecError

DEFAULT_ENUMERATION_CAP = 24


@dataclass(frozen=True)
class RoleAssignment:
    """Which site plays which part in the correlation experiment.

    The two outcome spins are read out, the two setting spins act as the
    analyzer variables, and the hidden sites form the hidden-variable vector.
    Validity (partition of all sites, locality) is checked by validate_spec,
    not at construction.
    """

    outcome1: int
    outcome2: int
    setting_a: int
    setting_b: int
    hidden: tuple[int, ...]

    def role_sites(self) -> tuple[int, int, int, int]:
        return (self.outcome1, self.outcome2, self.setting_a, self.setting_b)

    def left_group(self) -> tuple[int, int]:
        return (self.outcome1, self.setting_a)

    def right_group(self) -> tuple[int, int]:
        return (self.outcome2, self.setting_b)


@dataclass(frozen=True)
class LatticeSpec:
    """Immutable description of one spin lattice.

    Attributes:
        n_sites: number of spins N.
        edges: (i, j, J_ij) triples, undirected, first neighbours only by
            convention (anything absent has J = 0).
        fields: per-site local fields h_i, length N.
        beta: inverse temperature (> 0; k_B T absorbed).
        roles: optional role assignment; omitted for pure thermodynamics
            specs (e.g. the 1-3 site closed-form checks).
        labels: optional map from external site labels ("a", "b", "1"..) to
            site indices, used by spec files and reports.
        mirror: optional left<->right site involution used for the symmetry
            checks and for tying parameters in symmetric searches.
    """

    n_sites: int
    edges: tuple[tuple[int, int, float], ...]
    fields: tuple[float, ...]
    beta: float
    roles: RoleAssignment | None = None
    labels: dict[str, int] | None = None
    mirror: dict[int, int] | None = None

    def __post_init__(self):
        if self.n_sites < 1:
            raise SpecError(f"n_sites must be >= 1, got {self.n_sites}")
        if len(self.fields) != self.n_sites:
            raise SpecError(
                f"fields has length {len(self.fields)}, expected {self.n_sites}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise SpecError(f"beta must be a positive finite real, got {self.beta}")
        for e in self.edges:
            if len(e) != 3 or not all(math.isfinite(float(v)) for v in e):
                raise SpecError(f"malformed edge entry: {e!r}")

    def site_of(self, ref: int | str) -> int:
        """Resolve a site reference that may be an index or an external label."""
        if isinstance(ref, str):
            if self.labels and ref in self.labels:
                return self.labels[ref]
            if ref.lstrip("+-").isdigit() and self.labels is None:
                return int(ref)
            raise SpecError(f"unknown site label {ref!r}")
        return int(ref)

    def label_of(self, site: int) -> str:
        if self.labels:
            for lab, s in self.labels.items():
                if s == site:
                    return lab
        return str(site)


@dataclass(frozen=True)
class SpinConfiguration:
    """One assignment of +-1 to every site, with its table index.

    Bit i of the index is 1 exactly when sigma_i = +1, so index and values
    round-trip exactly.
    """

    values: tuple[int, ...]
    index: int

    @classmethod
    def from_index(cls, n_sites: int, index: int) -> "SpinConfiguration":
        if not 0 <= index < (1 << n_sites):
            raise SpecError(f"index {index} out of range for {n_sites} sites")
        values = tuple(1 if (index >> i) & 1 else -1 for i in range(n_sites))
        return cls(values=values, index=index)

    @classmethod
    def from_values(cls, values) -> "SpinConfiguration":
        values = tuple(int(v) for v in values)
        if any(v not in (-1, 1) for v in values):
            raise SpecError("spin values must be +-1")
        index = 0
        for i, v in enumerate(values):
            if v == 1:
                index |= 1 << i
        return cls(values=values, index=index)


@dataclass(frozen=True)
class ValidationReport:
    """Structural diagnosis of a LatticeSpec.

    errors is empty iff the spec is usable by the exact engine. bell_local,
    hidden_separates and mirror_symmetric are None when the corresponding
    structure (roles, mirror map) is absent.
    """

    errors: tuple[str, ...] = ()
    bell_local: bool | None = None
    hidden_separates: bool | None = None
    mirror_symmetric: bool | None = None

    @property
    def ok(self) -> bool:
        return not self.errors


def _adjacency(spec: LatticeSpec) -> list[set[int]]:
    adj = [set() for _ in range(spec.n_sites)]
    for i, j, _ in spec.edges:
        adj[int(i)].add(int(j))
        adj[int(j)].add(int(i))
    return adj


def _reachable(adj: list[set[int]], start: set[int], removed: set[int]) -> set[int]:
    seen = set(s for s in start if s not in removed)
    stack = list(seen)
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in removed and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def validate_spec(spec: LatticeSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> ValidationReport:
    """Check structure: edges, role partition, cap, locality, Markov cut, mirror.

    Returns a report rather than raising, so callers can surface every
    problem at once; require_valid() converts a failing report into SpecError.
    """
    errors: list[str] = []
    n = spec.n_sites
    if n > cap:
        errors.append(f"n_sites {n} exceeds enumeration cap {cap}")

    seen_pairs: set[tuple[int, int]] = set()
    for i, j, strength in spec.edges:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            errors.append(f"edge ({i}, {j}) endpoint out of range [0, {n})")
            continue
        if i == j:
            errors.append(f"edge ({i}, {j}) is a self-loop")
            continue
        pair = (min(i, j), max(i, j))
        if pair in seen_pairs:
            errors.append(f"duplicate undirected edge {pair}")
        seen_pairs.add(pair)

    bell_local: bool | None = None
    hidden_separates: bool | None = None
    roles = spec.roles
    if roles is not None:
        cats = [roles.outcome1, roles.outcome2, roles.setting_a, roles.setting_b,
                *roles.hidden]
        out_of_range = [s for s in cats if not 0 <= s < n]
        if out_of_range:
            errors.append(f"role sites out of range: {sorted(set(out_of_range))}")
        elif len(set(cats)) != len(cats):
            dupes = sorted({s for s in cats if cats.count(s) > 1})
            errors.append(f"role overlap: sites {dupes} appear in more than one role")
        elif len(cats) != n:
            missing = sorted(set(range(n)) - set(cats))
            errors.append(f"roles do not cover every site; missing {missing}")
        else:
            adj = _adjacency(spec)
            left, right = set(roles.left_group()), set(roles.right_group())
            bell_local = not any(adj[u] & right for u in left)
            reach = _reachable(adj, left, set(roles.hidden))
            hidden_separates = not (reach & right)

    mirror_symmetric: bool | None = None
    if spec.mirror is not None and not errors:
        mirror_symmetric = _mirror_symmetric(spec, errors)

    return ValidationReport(
        errors=tuple(errors),
        bell_local=bell_local,
        hidden_separates=hidden_separates,
        mirror_symmetric=mirror_symmetric,
    )


def _mirror_symmetric(spec: LatticeSpec, errors: list[str]) -> bool | None:
    mirror = spec.mirror
    assert mirror is not None
    n = spec.n_sites
    if sorted(mirror) != list(range(n)) or any(mirror[mirror[s]] != s for s in mirror):
        errors.append("mirror_map is not an involution covering every site")
        return None
    if any(abs(spec.fields[s] - spec.fields[mirror[s]]) > 0 for s in range(n)):
        return False
    coupling = {(min(i, j), max(i, j)): k for i, j, k in spec.edges}
    for (i, j), k in coupling.items():
        mi, mj = mirror[i], mirror[j]
        if coupling.get((min(mi, mj), max(mi, mj))) != k:
            return False
    return True


def require_valid(spec: LatticeSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> None:
    report = validate_spec(spec, cap=cap)
    if spec.n_sites > cap:
        raise CapExceededError(
            f"n_sites {spec.n_sites} exceeds enumeration cap {cap}")
    if not report.ok:
        raise SpecError("; ".join(report.errors))


def energy(spec: LatticeSpec, config: SpinConfiguration) -> float:
    """H(theta) = - sum_edges J_ij s_i s_j - sum_i h_i s_i, exactly."""
    s = config.values
    if len(s) != spec.n_sites:
        raise SpecError(
            f"configuration has {len(s)} spins, lattice has {spec.n_sites}")
    total = 0.0
    for i, j, strength in spec.edges:
        total -= strength * s[int(i)] * s[int(j)]
    for i in range(spec.n_sites):
        total -= spec.fields[i] * s[i]
    return total


def all_energies(spec: LatticeSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Energies of every configuration, indexed by configuration index.

    Accumulates edge terms then field terms in declaration order, matching
    energy() bit for bit. Memory stays at a few float64 arrays of length 2^N.
    """
    if spec.n_sites > cap:
        raise CapExceededError(
            f"n_sites {spec.n_sites} exceeds enumeration cap {cap}")
    dim = 1 << spec.n_sites
    idx = np.arange(dim, dtype=np.int64)
    total = np.zeros(dim)
    for i, j, strength in spec.edges:
        si = (2.0 * ((idx >> int(i)) & 1) - 1.0)
        sj = (2.0 * ((idx >> int(j)) & 1) - 1.0)
        total -= strength * si * sj
    for i in range(spec.n_sites):
        si = (2.0 * ((idx >> i) & 1) - 1.0)
        total -= spec.fields[i] * si
    return total


def spin_column(n_sites: int, site: int) -> np.ndarray:
    """Value of sigma_site (+-1.0) for every configuration index."""
    if not 0 <= site < n_sites:
        raise SpecError(f"site {site} out of range [0, {n_sites})")
    idx = np.arange(1 << n_sites, dtype=np.int64)
    return 2.0 * ((idx >> site) & 1) - 1.0


def enumerate_configurations(
    spec: LatticeSpec, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[SpinConfiguration]:
    """Yield all 2^N configurations once, in ascending index order."""
    if spec.n_sites > cap:
        raise CapExceededError(
            f"n_sites {spec.n_sites} exceeds enumeration cap {cap}")
    for index in range(1 << spec.n_sites):
        yield SpinConfiguration.from_index(spec.n_sites, index)


def with_uniform_coupling(spec: LatticeSpec, strength: float) -> LatticeSpec:
    """Same lattice with every edge coupling set to the given value."""
    edges = tuple((i, j, float(strength)) for i, j, _ in spec.edges)
    return LatticeSpec(spec.n_sites, edges, spec.fields, spec.beta,
                       spec.roles, spec.labels, spec.mirror)


def with_fields(spec: LatticeSpec, fields: float | Mapping[int | str, float],
                tie_mirror: bool = False) -> LatticeSpec:
    """Replace local fields, uniformly or per site (indices or labels).

    With tie_mirror=True each assignment is copied to the site's mirror
    image, preserving left-right symmetry.
    """
    if isinstance(fields, Mapping):
        values = list(spec.fields)
        for ref, v in fields.items():
            site = spec.site_of(ref)
            values[site] = float(v)
            if tie_mirror and spec.mirror is not None:
                values[spec.mirror[site]] = float(v)
        new = tuple(values)
    else:
        new = tuple(float(fields) for _ in range(spec.n_sites))
    return LatticeSpec(spec.n_sites, spec.edges, new, spec.beta,
                       spec.roles, spec.labels, spec.mirror)


def with_beta(spec: LatticeSpec, beta: float) -> LatticeSpec:
    return LatticeSpec(spec.n_sites, spec.edges, spec.fields, float(beta),
                       spec.roles, spec.labels, spec.mirror)


def with_extra_edge(spec: LatticeSpec, i: int | str, j: int | str,
                    strength: float) -> LatticeSpec:
    """Add one coupling (used by the broken-locality variants)."""
    si, sj = spec.site_of(i), spec.site_of(j)
    edges = spec.edges + ((si, sj, float(strength)),)
    return LatticeSpec(spec.n_sites, edges, spec.fields, spec.beta,
                       spec.roles, spec.labels, spec.mirror)
