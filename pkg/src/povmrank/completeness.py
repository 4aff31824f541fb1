"""Counting linearly independent POVM elements induced by quadrature and
photon-counting measurements on (possibly sparse) Fock supports.

The closed-form predictor m(2d-m) (capped at d^2) is checked against a
numerical rank oracle: probability functionals, expressed over the real
parametrization of Hermitian operators on the support, are stacked into a
design matrix whose singular spectrum certifies the count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fock import SupportSet, hermite_function_table, hermitian_to_real_vector
from .povm import (
    BinLayout,
    build_binned_quadrature_povm,
    default_x_max,
    displaced_number_operator,
)

__all__ = [
    "CONTINUOUS_FUNCTIONAL",
    "BINNED_POVM",
    "MeasurementSpec",
    "RankReport",
    "SweepTable",
    "predicted_rank",
    "default_phases",
    "design_matrix",
    "numerical_rank",
    "rank_for",
    "min_phases_for_completeness",
    "sweep_table",
    "povm_span_rank",
    "displaced_counting_rank",
]

CONTINUOUS_FUNCTIONAL = "continuous-functional"
BINNED_POVM = "binned-povm"

PHASE_DISTINCT_TOL = 1e-9
RANK_RTOL = 1e-12
ILL_CONDITIONED_GAP = 1e3

_GOLDEN_FRAC = (math.sqrt(5.0) - 1.0) / 2.0


def predicted_rank(d: int, m: int) -> int:
    """Closed-form count of independent elements induced by m quadrature
    phases on the full d-level subspace: m(2d-m) for m < d, else d^2."""
    if d < 1 or m < 1:
        raise ValueError("d and m must be positive")
    if m >= d:
        return d * d
    return m * (2 * d - m)


def default_phases(support: SupportSet, m: int) -> list:
    """Default phase settings for m cuts.

    Contiguous supports use the equispaced grid j*pi/m.  For strided
    supports (e.g. every fourth level) rational multiples of pi can alias
    every off-diagonal phase factor back to a real number and lose matrix
    components, so those use golden-ratio placement, which avoids all such
    resonances.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if support.is_contiguous:
        return [j * math.pi / m for j in range(m)]
    return sorted(math.fmod(j * _GOLDEN_FRAC, 1.0) * math.pi for j in range(m))


def _reduced_distinct(phases) -> bool:
    red = sorted(math.fmod(math.fmod(p, math.pi) + math.pi, math.pi) for p in phases)
    if len(red) < 2:
        return True
    gaps = [b - a for a, b in zip(red, red[1:])]
    gaps.append(red[0] + math.pi - red[-1])
    return min(gaps) > PHASE_DISTINCT_TOL


@dataclass(frozen=True)
class MeasurementSpec:
    """A set of quadrature measurement settings on a Fock support.

    In continuous-functional mode each phase contributes
    ``x_nodes_per_phase`` sample points (Gauss-Hermite node positions); in
    binned-povm mode the same field is the number of finite bins per phase
    (overflow bins are always appended).
    """

    support: SupportSet
    phases: tuple
    x_nodes_per_phase: int
    mode: str = CONTINUOUS_FUNCTIONAL

    def __post_init__(self):
        if not isinstance(self.support, SupportSet):
            raise TypeError("support must be a SupportSet")
        phases = tuple(float(p) for p in self.phases)
        if not phases:
            raise ValueError("at least one phase is required")
        if not _reduced_distinct(phases):
            raise ValueError("phases must be pairwise distinct mod pi")
        object.__setattr__(self, "phases", phases)
        if self.mode not in (CONTINUOUS_FUNCTIONAL, BINNED_POVM):
            raise ValueError(f"unknown mode {self.mode!r}")
        floor = 2 * max(self.support.indices) + 1 if self.mode == CONTINUOUS_FUNCTIONAL else 1
        if self.x_nodes_per_phase < floor:
            raise ValueError(
                f"x_nodes_per_phase must be at least {floor} in {self.mode} mode"
            )

    @classmethod
    def default(cls, support: SupportSet, phases, mode: str = CONTINUOUS_FUNCTIONAL):
        """Node count certified by the polynomial degree bound of the
        probability functionals: Gauss-Hermite order 2*max(support)+2."""
        return cls(
            support=support,
            phases=tuple(phases),
            x_nodes_per_phase=2 * max(support.indices) + 2,
            mode=mode,
        )


@dataclass(frozen=True)
class RankReport:
    """Numerical rank with its spectral certificate.

    ``gap`` is sigma_rank / sigma_{rank+1} (+inf when the trailing value is
    absent or exactly zero); anything below 1e3 is flagged ill-conditioned.
    """

    numerical_rank: int
    singular_values: np.ndarray
    gap: float
    tolerance_used: float
    predicted_rank: int | None = None

    @property
    def is_ill_conditioned(self) -> bool:
        return self.gap < ILL_CONDITIONED_GAP

    def to_json_dict(self) -> dict:
        return {
            "rank": self.numerical_rank,
            "predicted": self.predicted_rank,
            "gap": self.gap,
            "tolerance": self.tolerance_used,
            "singular_values": [float(s) for s in self.singular_values],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RankReport":
        return cls(
            numerical_rank=int(data["rank"]),
            singular_values=np.array(data["singular_values"], dtype=float),
            gap=float(data["gap"]),
            tolerance_used=float(data["tolerance"]),
            predicted_rank=None if data["predicted"] is None else int(data["predicted"]),
        )


def design_matrix(spec: MeasurementSpec) -> np.ndarray:
    """Measurement functionals over the s^2 real coordinates of Hermitian
    operators on the support.

    Continuous-functional mode: one row per (phase, node), the density
    functional rho -> p(x_i, theta_j), i.e. the vectorized rank-one
    quadrature projector compressed to the support.  Binned-povm mode: one
    row per POVM element of each phase's binned set, compressed likewise.
    """
    sup = np.array(spec.support.indices)
    rows = []
    if spec.mode == CONTINUOUS_FUNCTIONAL:
        nodes = np.polynomial.hermite.hermgauss(spec.x_nodes_per_phase)[0]
        psi = hermite_function_table(int(sup[-1]), nodes)[sup]
        for theta in spec.phases:
            u = np.exp(1j * sup * theta)
            for i in range(nodes.size):
                amp = psi[:, i] * u
                rows.append(hermitian_to_real_vector(np.outer(amp, amp.conj())))
    else:
        dim = spec.support.dim
        layout = BinLayout(default_x_max(dim), spec.x_nodes_per_phase, include_overflow=True)
        sel = np.ix_(sup, sup)
        for theta in spec.phases:
            povm = build_binned_quadrature_povm(theta, layout, dim)
            for el in povm.elements:
                rows.append(hermitian_to_real_vector(el[sel]))
    return np.vstack(rows)


def numerical_rank(matrix, tolerance: float | None = None) -> RankReport:
    """Singular-value rank with a gap certificate.

    Default threshold: max(rows, cols) * sigma_max * 1e-12.  An explicit
    tolerance overrides it.
    """
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError("matrix must be 2-D and non-empty")
    sv = np.linalg.svd(mat, compute_uv=False)
    sigma_max = float(sv[0])
    tol = float(tolerance) if tolerance is not None else max(mat.shape) * sigma_max * RANK_RTOL
    rank = int(np.sum(sv > tol))
    if rank == 0 or rank >= sv.size or sv[rank] == 0.0:
        gap = math.inf
    else:
        gap = float(sv[rank - 1] / sv[rank])
    return RankReport(
        numerical_rank=rank,
        singular_values=sv,
        gap=gap,
        tolerance_used=tol,
    )


def rank_for(
    support: SupportSet,
    m: int,
    phases=None,
    tolerance: float | None = None,
    mode: str = CONTINUOUS_FUNCTIONAL,
) -> RankReport:
    """Rank of the functional span for m phase settings on the support.

    Phases default to default_phases(support, m); the closed-form
    prediction is attached when the support is contiguous 0..d-1.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if phases is None:
        phases = default_phases(support, m)
    spec = MeasurementSpec.default(support, phases, mode=mode)
    report = numerical_rank(design_matrix(spec), tolerance)
    if support.is_contiguous:
        report = replace(report, predicted_rank=predicted_rank(support.size, m))
    return report


def min_phases_for_completeness(support: SupportSet, m_max: int) -> int | None:
    """Smallest m <= m_max whose default-phase rank reaches s^2, else None."""
    if m_max < 1:
        raise ValueError("m_max must be positive")
    full = support.size**2
    for m in range(1, m_max + 1):
        if rank_for(support, m).numerical_rank == full:
            return m
    return None


@dataclass(frozen=True)
class SweepTable:
    """Grid of rank reports over contiguous dimensions and phase counts."""

    d_values: tuple
    m_values: tuple
    reports: dict

    def report(self, d: int, m: int) -> RankReport:
        return self.reports[(d, m)]

    def is_ic(self, d: int, m: int) -> bool:
        return self.reports[(d, m)].numerical_rank == d * d

    def mismatches(self) -> list:
        """(d, m, numerical, predicted) for every cell off the prediction."""
        out = []
        for d in self.d_values:
            for m in self.m_values:
                rep = self.reports[(d, m)]
                if rep.numerical_rank != rep.predicted_rank:
                    out.append((d, m, rep.numerical_rank, rep.predicted_rank))
        return out

    @property
    def all_match(self) -> bool:
        return not self.mismatches()

    def _csv_row(self, d: int, numeric: bool) -> str:
        cells = []
        for m in self.m_values:
            rep = self.reports[(d, m)]
            value = rep.numerical_rank if numeric else rep.predicted_rank
            cells.append(f"{value}{'*' if value == d * d else ''}")
        return ",".join([str(d)] + cells)

    def to_csv(self) -> str:
        """Numerical table as data rows, the closed-form prediction appended
        as a comment block (asterisk marks informationally complete cells)."""
        header = ",".join(["d"] + [f"m={m}" for m in self.m_values])
        lines = [header]
        lines += [self._csv_row(d, numeric=True) for d in self.d_values]
        lines.append("# predicted")
        lines += ["# " + self._csv_row(d, numeric=False) for d in self.d_values]
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "d_values": list(self.d_values),
            "m_values": list(self.m_values),
            "cells": [
                {
                    "d": d,
                    "m": m,
                    "rank": self.reports[(d, m)].numerical_rank,
                    "predicted": self.reports[(d, m)].predicted_rank,
                    "gap": self.reports[(d, m)].gap,
                    "ic": self.is_ic(d, m),
                }
                for d in self.d_values
                for m in self.m_values
            ],
        }


def sweep_table(d_range, m_range, tolerance: float | None = None) -> SweepTable:
    """Rank reports for every (d, m) cell, equispaced phases, ascending order."""
    d_values = tuple(sorted(set(int(d) for d in d_range)))
    m_values = tuple(sorted(set(int(m) for m in m_range)))
    if not d_values or not m_values:
        raise ValueError("ranges must be non-empty")
    if d_values[0] < 1 or m_values[0] < 1:
        raise ValueError("d and m must be positive")
    reports = {}
    for d in d_values:
        for m in m_values:
            reports[(d, m)] = rank_for(SupportSet.contiguous(d), m, tolerance=tolerance)
    return SweepTable(d_values=d_values, m_values=m_values, reports=reports)


def povm_span_rank(sets, tolerance: float | None = None) -> RankReport:
    """Rank of the real span of all elements of the given POVM sets."""
    sets = list(sets)
    if not sets:
        raise ValueError("at least one POVM set is required")
    dim = sets[0].dim
    if any(ps.dim != dim for ps in sets):
        raise ValueError("all POVM sets must share the same dim")
    rows = [hermitian_to_real_vector(el) for ps in sets for el in ps.elements]
    return numerical_rank(np.vstack(rows), tolerance)


def displaced_counting_rank(
    betas, n_detect: int, dim: int, tolerance: float | None = None
) -> RankReport:
    """Rank of the span of displaced number projectors over all listed
    displacements and detector outcomes n < n_detect."""
    betas = [complex(b) for b in betas]
    if not betas:
        raise ValueError("at least one displacement is required")
    if n_detect < dim:
        raise ValueError("n_detect must be at least dim")
    guard = dim + 4 * math.ceil(max(abs(b) for b in betas) ** 2) + 20
    work_dim = max(guard, n_detect + 1)
    rows = []
    for beta in betas:
        for n in range(n_detect):
            op = displaced_number_operator(beta, n, dim, work_dim)
            rows.append(hermitian_to_real_vector(op))
    return numerical_rank(np.vstack(rows), tolerance)
