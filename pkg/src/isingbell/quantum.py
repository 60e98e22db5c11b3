"""Transverse-field quantum Ising model and its thermal z-basis distribution.

The Hamiltonian, assembled densely in the computational (z) basis, is

    H = -J sum_edges sz_i sz_j - h J sum_i sx_i

with uniform coupling J and dimensionless transverse strength h. The sz sz
part is the classical energy on the diagonal; each sx term couples pairs of
configurations differing in exactly one spin with amplitude -hJ. Measuring
every spin along z on the thermal state rho = exp(-beta H)/Z produces the
configuration distribution

    P(theta) = <theta| exp(-beta H) |theta> / Tr exp(-beta H)

(all sz commute, so simultaneous measurement is well defined). The resulting
table plugs into the same correlation and independence diagnostics as the
classical engine.

Because H carries no longitudinal field, flipping every spin commutes with
it, so P(theta) = P(-theta) exactly. A direct consequence worth knowing
before scanning for CHSH violations: that symmetry forces M(a,b) = M(-a,-b),
which collapses every sign placement of the CHSH combination to 2*M and
caps |X| at 2 for this model. An optional per-site longitudinal field
(exploration mode, not part of the model above) breaks the symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chsh import chsh
from .diagnostics import independence_report
from .errors import CapExceededError, NumericalError, SpecError
from .gibbs import QUANTUM_SOURCE, DistributionTable
from .lattice import LatticeSpec, all_energies, with_fields, with_uniform_coupling
from .parallel import map_ordered

DEFAULT_QUANTUM_CAP = 12


@dataclass(frozen=True)
class QuantumModel:
    """Lattice edges reused under the quantum Hamiltonian.

    spec contributes the geometry (and roles); its classical fields and beta
    are ignored here. longitudinal is the optional symmetry-breaking
    extension; None means the pure transverse-field model.
    """

    spec: LatticeSpec
    coupling: float
    transverse: float
    beta: float
    longitudinal: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise SpecError(f"beta must be positive, got {self.beta}")
        if self.longitudinal is not None and len(self.longitudinal) != self.spec.n_sites:
            raise SpecError("longitudinal field length must match n_sites")

    @property
    def dimension(self) -> int:
        return 1 << self.spec.n_sites


def build_hamiltonian(model: QuantumModel,
                      cap: int = DEFAULT_QUANTUM_CAP) -> np.ndarray:
    """Dense real-symmetric 2^N x 2^N matrix in the z basis."""
    n = model.spec.n_sites
    if n > cap:
        raise CapExceededError(f"n_sites {n} exceeds quantum cap {cap}")
    zz_spec = with_fields(with_uniform_coupling(model.spec, model.coupling), 0.0)
    if model.longitudinal is not None:
        zz_spec = with_fields(zz_spec, dict(enumerate(model.longitudinal)))
    diag = all_energies(zz_spec, cap=cap)
    dim = 1 << n
    ham = np.zeros((dim, dim))
    rows = np.arange(dim)
    ham[rows, rows] = diag
    amplitude = -model.transverse * model.coupling
    for site in range(n):
        ham[rows, rows ^ (1 << site)] += amplitude
    return ham


def thermal_z_distribution(model: QuantumModel,
                           cap: int = DEFAULT_QUANTUM_CAP) -> DistributionTable:
    """Diagonal of exp(-beta H)/Z in the z basis, via full eigendecomposition."""
    ham = build_hamiltonian(model, cap=cap)
    try:
        energies, vectors = np.linalg.eigh(ham)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    weights = np.exp(-model.beta * (energies - energies[0]))
    diag = (vectors ** 2) @ weights
    total = diag.sum()
    if np.any(diag <= 0.0) or not np.isfinite(total):
        raise NumericalError("thermal diagonal lost strict positivity")
    log_z = float(np.log(weights.sum()) - model.beta * energies[0])
    return DistributionTable(n_sites=model.spec.n_sites, probs=diag / total,
                             log_z=log_z, source=QUANTUM_SOURCE)


def ground_state_z_distribution(model: QuantumModel,
                                cap: int = DEFAULT_QUANTUM_CAP,
                                degeneracy_tol: float = 1e-9) -> DistributionTable:
    """beta -> infinity exploration mode: |ground state|^2 in the z basis.

    Degenerate ground levels are averaged, matching the thermal limit.
    """
    ham = build_hamiltonian(model, cap=cap)
    try:
        energies, vectors = np.linalg.eigh(ham)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    ground = energies <= energies[0] + degeneracy_tol
    diag = (vectors[:, ground] ** 2).mean(axis=1)
    if np.any(diag < 0.0):
        raise NumericalError("ground-state weights lost positivity")
    return DistributionTable(n_sites=model.spec.n_sites, probs=diag / diag.sum(),
                             log_z=float("nan"), source="quantum-ground-diagonal")


@dataclass(frozen=True)
class QuantumScanRow:
    coupling: float
    transverse: float
    beta: float
    x_bi: float
    mi_deviation: float
    oi_deviation: float
    pi_deviation: float
    factorability_deviation: float


def scan_grid(spec: LatticeSpec, couplings, transverses, betas,
              convention: str = "mm", cap: int = DEFAULT_QUANTUM_CAP,
              threads: int | None = None) -> list[QuantumScanRow]:
    """Evaluate CHSH and all deviations over a (J, h, beta) grid.

    Rows come back in grid order (J outermost). Requires roles on the spec.
    """
    points = [(float(j), float(h), float(b))
              for j in couplings for h in transverses for b in betas]

    def evaluate(point) -> QuantumScanRow:
        j, h, b = point
        model = QuantumModel(spec=spec, coupling=j, transverse=h, beta=b)
        dist = thermal_z_distribution(model, cap=cap)
        report = chsh(dist, spec.roles, convention)
        ind = independence_report(dist, spec.roles)
        return QuantumScanRow(j, h, b, report.x_bi, ind.mi_deviation,
                              ind.oi_deviation, ind.pi_deviation,
                              ind.factorability_deviation)

    return map_ordered(evaluate, points, threads)
