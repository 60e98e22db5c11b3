"""Metropolis Monte Carlo estimation for lattices of any size.

Single-spin-flip Metropolis targeting the Boltzmann distribution: one sweep
attempts one flip per free site, at uniformly random free sites, each
accepted with probability min(1, exp(-beta * dH)); dH comes from the flipped
site's neighbourhood only. Estimators carry batch-means standard errors:
retained samples split into equal batches, estimator formed per batch,
error bar from the spread of batch means.

Two routes to the post-selected correlators M(a, b):

* free run: one unconstrained chain, subensembles formed by ratio-of-counts
  on the recorded setting spins. Faithful to "postselect four subensembles
  from one run", but unusable when a setting pair has vanishing probability
  (on the polarized reference lattice P(a=-1, b=-1) is ~1e-8, so no finite
  run populates it). Starved estimators are omitted, with a note.
* clamped runs (chsh_estimate): four chains, each with the setting spins
  held at fixed values and only the remaining sites updated. Each chain
  samples the conditional distribution given those settings directly, which
  yields the same four correlators as post-selection on the free run.

Randomness comes from numpy's counter-based Philox (4x64-10) bit generator
keyed by the seed. Stream s uses Philox(key=seed).jumped(s): free-run chain
c takes stream c, and the clamped run for setting pair k (in the order
(+,+), (-,+), (+,-), (-,-)) takes stream chains * (k + 1) + c. Identical
(seed, config) therefore reproduces identical output bit for bit; chain
merging is ordered by chain index.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import SpecError
from .lattice import LatticeSpec, RoleAssignment

DEFAULT_SWEEPS = 60000
DEFAULT_BURN_IN = 4000
DEFAULT_BATCHES = 20

SETTING_ORDER = ((1, 1), (-1, 1), (1, -1), (-1, -1))
_PAIR_TAG = {(1, 1): "pp", (-1, 1): "mp", (1, -1): "pm", (-1, -1): "mm"}


@dataclass(frozen=True)
class McConfig:
    seed: int
    sweeps: int = DEFAULT_SWEEPS
    burn_in: int = DEFAULT_BURN_IN
    thinning: int = 1
    batch_count: int = DEFAULT_BATCHES
    chains: int = 1

    def __post_init__(self):
        if self.sweeps <= self.burn_in:
            raise SpecError("sweeps must exceed burn_in")
        if self.thinning < 1 or self.batch_count < 2 or self.chains < 1:
            raise SpecError("thinning >= 1, batch_count >= 2, chains >= 1 required")
        kept = self.sweeps - self.burn_in
        if kept % self.thinning:
            raise SpecError("thinning must divide sweeps - burn_in")
        if (kept // self.thinning) % self.batch_count:
            raise SpecError("batch_count must divide the retained sample count")

    @property
    def retained_per_chain(self) -> int:
        return (self.sweeps - self.burn_in) // self.thinning


@dataclass(frozen=True)
class Estimate:
    name: str
    value: float
    std_error: float
    n_effective: float


@dataclass(frozen=True)
class McResult:
    config: McConfig
    samples: np.ndarray          # retained configuration indices, chains concatenated
    estimates: tuple[Estimate, ...]
    notes: tuple[str, ...] = ()

    def estimate(self, name: str) -> Estimate:
        for e in self.estimates:
            if e.name == name:
                return e
        raise KeyError(name)


def _run_chain(spec: LatticeSpec, mc: McConfig, stream: int,
               clamp: Mapping[int, int] | None = None) -> np.ndarray:
    n = spec.n_sites
    rng = np.random.Generator(np.random.Philox(key=mc.seed).jumped(stream))
    neighbours: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i, j, strength in spec.edges:
        neighbours[int(i)].append((int(j), float(strength)))
        neighbours[int(j)].append((int(i), float(strength)))
    fields = [float(h) for h in spec.fields]
    beta = spec.beta
    clamp = dict(clamp or {})
    free = [s for s in range(n) if s not in clamp]
    if not free:
        raise SpecError("every site is clamped; nothing to sample")

    spins = [1 if b else -1 for b in rng.integers(0, 2, size=n)]
    for site, value in clamp.items():
        spins[int(site)] = int(value)
    index = 0
    for i, s in enumerate(spins):
        if s == 1:
            index |= 1 << i
    out = np.empty(mc.retained_per_chain, dtype=np.int64)
    kept = 0
    n_free = len(free)
    exp = math.exp
    for sweep in range(mc.sweeps):
        picks = rng.integers(0, n_free, size=n_free)
        uniforms = rng.random(size=n_free)
        for k in range(n_free):
            site = free[picks[k]]
            s = spins[site]
            local = fields[site]
            for j, strength in neighbours[site]:
                local += strength * spins[j]
            delta = 2.0 * s * local
            if delta <= 0.0 or uniforms[k] < exp(-beta * delta):
                spins[site] = -s
                index ^= 1 << site
        if sweep >= mc.burn_in and (sweep - mc.burn_in) % mc.thinning == 0:
            out[kept] = index
            kept += 1
    return out


def flip_energy_delta(spec: LatticeSpec, values, site: int) -> float:
    """Energy change of flipping one spin, from its neighbourhood only."""
    local = float(spec.fields[site])
    for i, j, strength in spec.edges:
        if int(i) == site:
            local += strength * values[int(j)]
        elif int(j) == site:
            local += strength * values[int(i)]
    return 2.0 * values[site] * local


def _batch_means(per_sample: np.ndarray, batches: int) -> tuple[float, float, float]:
    """(mean, batch-means SE, n_effective) for a per-sample series."""
    n = per_sample.size
    means = per_sample.reshape(batches, -1).mean(axis=1)
    value = float(per_sample.mean())
    var_batch = float(means.var(ddof=1))
    se = math.sqrt(var_batch / batches)
    var_sample = float(per_sample.var(ddof=1))
    n_eff = var_sample / (var_batch / batches) if var_batch > 0 else float(n)
    return value, se, n_eff


def _spin_series(samples: np.ndarray, site: int) -> np.ndarray:
    return 2.0 * ((samples >> site) & 1) - 1.0


def metropolis_run(spec: LatticeSpec, mc: McConfig,
                   roles: RoleAssignment | None = None,
                   clamp: Mapping[int, int] | None = None) -> McResult:
    """Sample the lattice; estimate marginals and, when feasible, CHSH.

    Per site i the result carries magnetization m{i} and marginal
    P(s{i}=+1). With a role assignment (and no clamp) it also carries the
    free-run post-selected m_pp, m_mp, m_pm, m_mm and x_bi, provided every
    batch contains samples of every setting pair; otherwise those estimators
    are omitted and a note records the starved pair. Use chsh_estimate for
    the conditional-chain route that cannot starve.
    """
    if clamp:
        for site, value in clamp.items():
            if not 0 <= int(site) < spec.n_sites:
                raise SpecError(f"clamped site {site} out of range")
            if value not in (-1, 1):
                raise SpecError(f"clamped value for site {site} must be +-1")
    roles = roles if roles is not None else spec.roles
    chains = [_run_chain(spec, mc, stream=c, clamp=clamp)
              for c in range(mc.chains)]
    samples = np.concatenate(chains)
    batches = mc.batch_count * mc.chains

    estimates: list[Estimate] = []
    notes: list[str] = []
    for site in range(spec.n_sites):
        sigma = _spin_series(samples, site)
        value, se, n_eff = _batch_means(sigma, batches)
        estimates.append(Estimate(f"m{site}", value, se, n_eff))
        estimates.append(Estimate(f"P(s{site}=+1)", (1 + value) / 2, se / 2, n_eff))

    if roles is not None and not clamp:
        product = (_spin_series(samples, roles.outcome1)
                   * _spin_series(samples, roles.outcome2))
        sa = _spin_series(samples, roles.setting_a)
        sb = _spin_series(samples, roles.setting_b)
        m_batches: dict[tuple[int, int], np.ndarray] = {}
        for (a, b) in SETTING_ORDER:
            inside = ((sa == a) & (sb == b)).astype(float)
            num = (product * inside).reshape(batches, -1).sum(axis=1)
            den = inside.reshape(batches, -1).sum(axis=1)
            if np.any(den == 0):
                notes.append(
                    f"setting pair ({a:+d},{b:+d}) missing from some batch; "
                    "free-run post-selected estimators omitted "
                    "(use the clamped-chain route)")
                m_batches = {}
                break
            per_batch = num / den
            m_batches[(a, b)] = per_batch
            value = float(per_batch.mean())
            se = math.sqrt(float(per_batch.var(ddof=1)) / batches)
            estimates.append(Estimate(f"m_{_PAIR_TAG[(a, b)]}", value, se,
                                      float(inside.sum())))
        if m_batches:
            x_batches = (m_batches[(1, 1)] + m_batches[(-1, 1)]
                         + m_batches[(1, -1)] - m_batches[(-1, -1)])
            value = float(x_batches.mean())
            se = math.sqrt(float(x_batches.var(ddof=1)) / batches)
            n_eff = min(float(((sa == a) & (sb == b)).sum())
                        for (a, b) in SETTING_ORDER)
            estimates.append(Estimate("x_bi", value, se, n_eff))

    return McResult(config=mc, samples=samples, estimates=tuple(estimates),
                    notes=tuple(notes))


@dataclass(frozen=True)
class McChshResult:
    """CHSH from four clamped conditional chains (one per setting pair)."""

    config: McConfig
    estimates: tuple[Estimate, ...]

    def estimate(self, name: str) -> Estimate:
        for e in self.estimates:
            if e.name == name:
                return e
        raise KeyError(name)


def chsh_estimate(spec: LatticeSpec, mc: McConfig,
                  roles: RoleAssignment | None = None) -> McChshResult:
    """M(a, b) and x_bi from four runs with the setting spins held fixed.

    Each run samples P(. | sigma_a = a, sigma_b = b) directly, so the
    estimators are the plain batch means of sigma_1 * sigma_2; setting
    pairs of vanishing probability cost nothing extra. Streams are disjoint
    from the free run's.
    """
    roles = roles if roles is not None else spec.roles
    if roles is None:
        raise SpecError("role assignment required for the CHSH estimate")
    estimates: list[Estimate] = []
    batches = mc.batch_count * mc.chains
    m_values: dict[tuple[int, int], tuple[float, float]] = {}
    for k, (a, b) in enumerate(SETTING_ORDER):
        clamp = {roles.setting_a: a, roles.setting_b: b}
        chains = [_run_chain(spec, mc, stream=mc.chains * (k + 1) + c, clamp=clamp)
                  for c in range(mc.chains)]
        samples = np.concatenate(chains)
        product = (_spin_series(samples, roles.outcome1)
                   * _spin_series(samples, roles.outcome2))
        value, se, n_eff = _batch_means(product, batches)
        m_values[(a, b)] = (value, se)
        estimates.append(Estimate(f"m_{_PAIR_TAG[(a, b)]}", value, se, n_eff))
    x = (m_values[(1, 1)][0] + m_values[(-1, 1)][0]
         + m_values[(1, -1)][0] - m_values[(-1, -1)][0])
    x_se = math.sqrt(sum(se * se for _, se in m_values.values()))
    n_eff = float(mc.retained_per_chain * mc.chains)
    estimates.append(Estimate("x_bi", x, x_se, n_eff))
    return McChshResult(config=mc, estimates=tuple(estimates))
