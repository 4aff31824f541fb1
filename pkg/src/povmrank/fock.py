"""Fock-basis numerics for a single bosonic mode.

Hermite polynomials, normalized oscillator wavefunctions, quadrature
eigenstate overlaps, homodyne probability densities, coherent-state
amplitudes, and the real vectorization of Hermitian operators used by the
rank analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_RAW_HERMITE",
    "HERMITIAN_TOL",
    "TRACE_TOL",
    "EIGENVALUE_FLOOR",
    "FockVector",
    "DensityMatrix",
    "QuadraturePoint",
    "SupportSet",
    "hermite_poly",
    "hermite_function",
    "hermite_function_table",
    "quadrature_amplitude",
    "homodyne_pdf",
    "homodyne_pdf_grid",
    "coherent_amplitudes",
    "photon_number_probability",
    "hermitian_to_real_vector",
]

# Raw H_n coefficients overflow float64 near n = 45.
MAX_RAW_HERMITE = 40

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
STATE_NORM_TOL = 1e-12


@dataclass(frozen=True)
class FockVector:
    """Amplitudes over the Fock levels 0..dim-1.

    With ``is_state=True`` the vector is validated as a normalized state;
    truncated expansions (e.g. coherent states) keep the default and carry
    their tail mass separately.
    """

    amplitudes: np.ndarray
    is_state: bool = False

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-D sequence")
        object.__setattr__(self, "amplitudes", amp)
        if self.is_state:
            norm2 = float(np.sum(np.abs(amp) ** 2))
            if abs(norm2 - 1.0) > STATE_NORM_TOL:
                raise ValueError(f"state vector has squared norm {norm2}, expected 1")

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix in the Fock basis."""

    entries: np.ndarray

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise ValueError("entries must be a square non-empty matrix")
        asym = float(np.max(np.abs(rho - rho.conj().T)))
        if asym > HERMITIAN_TOL:
            raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {tr}, expected 1")
        eig_min = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if eig_min < EIGENVALUE_FLOOR:
            raise ValueError(f"matrix is not PSD (min eigenvalue {eig_min:.3e})")
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, amplitudes) -> "DensityMatrix":
        """Projector onto a pure state; amplitudes are normalized on input."""
        c = np.asarray(amplitudes, dtype=complex)
        norm = float(np.linalg.norm(c))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        c = c / norm
        return cls(np.outer(c, c.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        if dim < 1:
            raise ValueError("dim must be positive")
        return cls(np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True)
class QuadraturePoint:
    """Outcome label (x, theta) of a rotated-quadrature measurement.

    theta is canonicalized to [0, pi): shifting theta by pi while flipping
    the sign of x leaves every Fock-state overlap unchanged, so the
    reduction is value-preserving.
    """

    x: float
    theta: float

    def __post_init__(self):
        x = float(self.x)
        theta = float(self.theta)
        if not (math.isfinite(x) and math.isfinite(theta)):
            raise ValueError("x and theta must be finite")
        k = math.floor(theta / math.pi)
        if k != 0:
            theta -= k * math.pi
            if k % 2:
                x = -x
        if theta >= math.pi:  # fp guard when theta/pi rounds just below an integer
            theta -= math.pi
            x = -x
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class SupportSet:
    """Strictly increasing Fock indices on which the signal state may live."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("support must be non-empty")
        if idx[0] < 0:
            raise ValueError("Fock indices must be non-negative")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def contiguous(cls, dim: int) -> "SupportSet":
        if dim < 1:
            raise ValueError("dim must be positive")
        return cls(tuple(range(dim)))

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def dim(self) -> int:
        """Smallest truncated subspace containing the support."""
        return self.indices[-1] + 1

    @property
    def is_contiguous(self) -> bool:
        return self.indices == tuple(range(len(self.indices)))


def hermite_poly(n: int, x: float) -> float:
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence.

    Raw polynomial values overflow double precision near n = 45, so n is
    capped at MAX_RAW_HERMITE; use hermite_function beyond that.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > MAX_RAW_HERMITE:
        raise ValueError(
            f"raw Hermite polynomials overflow for n > {MAX_RAW_HERMITE}; "
            "use hermite_function instead"
        )
    x = float(x)
    if n == 0:
        return 1.0
    h_prev, h = 1.0, 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h


# Recurrence mantissas are kept inside [2^-300, 2^300]; the running binary
# exponent absorbs the Gaussian seed, which underflows bare float64 for
# |x| > ~37 even where psi_n itself is O(1).
_MANTISSA_BAND = 2.0**300
_RESCALE = 2.0**600
_RESCALE_SHIFT = 600


def _gaussian_seed(xa: np.ndarray):
    """pi^-1/4 e^{-x^2/2} as (mantissa, binary exponent), underflow-free."""
    t = (-0.5 / math.log(2.0)) * xa * xa
    exponent = np.floor(t)
    mantissa = np.pi ** -0.25 * np.exp2(t - exponent)
    return mantissa, exponent.astype(np.int64)


def _band_rescale(p_prev, p, exponent):
    mag = np.maximum(np.abs(p_prev), np.abs(p))
    big = mag > _MANTISSA_BAND
    if big.any():
        scale = np.where(big, 1.0 / _RESCALE, 1.0)
        p_prev = p_prev * scale
        p = p * scale
        exponent = exponent + np.where(big, _RESCALE_SHIFT, 0)
    small = (mag < 1.0 / _MANTISSA_BAND) & (mag > 0.0)
    if small.any():
        scale = np.where(small, _RESCALE, 1.0)
        p_prev = p_prev * scale
        p = p * scale
        exponent = exponent - np.where(small, _RESCALE_SHIFT, 0)
    return p_prev, p, exponent


def hermite_function(n: int, x):
    """Normalized oscillator wavefunction psi_n(x).

    Evaluated with the Gaussian-damped recurrence
    psi_{n+1} = x sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1}, carrying a
    separate binary exponent so the result stays accurate across the whole
    classically allowed region for n well beyond 1000.  Accepts a scalar or
    an ndarray of positions.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    p_prev, exponent = _gaussian_seed(xa)
    if n == 0:
        out = np.ldexp(p_prev, exponent)
        return float(out[0]) if scalar else out
    p = math.sqrt(2.0) * xa * p_prev
    for k in range(1, n):
        p_prev, p = p, math.sqrt(2.0 / (k + 1)) * xa * p - math.sqrt(k / (k + 1)) * p_prev
        p_prev, p, exponent = _band_rescale(p_prev, p, exponent)
    out = np.ldexp(p, exponent)
    return float(out[0]) if scalar else out


def hermite_function_table(n_max: int, x) -> np.ndarray:
    """All psi_n(x) for n = 0..n_max, shape (n_max+1, len(x))."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    table = np.empty((n_max + 1, xa.size))
    p_prev, exponent = _gaussian_seed(xa)
    table[0] = np.ldexp(p_prev, exponent)
    if n_max == 0:
        return table
    p = math.sqrt(2.0) * xa * p_prev
    table[1] = np.ldexp(p, exponent)
    for k in range(1, n_max):
        p_prev, p = p, math.sqrt(2.0 / (k + 1)) * xa * p - math.sqrt(k / (k + 1)) * p_prev
        p_prev, p, exponent = _band_rescale(p_prev, p, exponent)
        table[k + 1] = np.ldexp(p, exponent)
    return table


def quadrature_amplitude(n: int, point: QuadraturePoint) -> complex:
    """Overlap of Fock state n with the quadrature eigenstate at (x, theta):
    psi_n(x) e^{i n theta}."""
    return complex(hermite_function(n, point.x) * np.exp(1j * n * point.theta))


def _amplitude_vector(dim: int, x: float, theta: float) -> np.ndarray:
    psi = hermite_function_table(dim - 1, x)[:, 0]
    return psi * np.exp(1j * theta * np.arange(dim))


def homodyne_pdf(rho: DensityMatrix, point: QuadraturePoint) -> float:
    """Probability density of quadrature outcome x at phase theta.

    Born pairing of the state with the rank-one quadrature projector, so
    the value equals the trace against the integrated bin operators; with
    the normalized overlaps it integrates to one over x for every phase.
    """
    v = _amplitude_vector(rho.dim, point.x, point.theta)
    return float(np.real(np.vdot(v, rho.entries @ v)))


def homodyne_pdf_grid(rho: DensityMatrix, theta: float, xs) -> np.ndarray:
    """Vectorized homodyne density over a grid of quadrature values."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    dim = rho.dim
    psi = hermite_function_table(dim - 1, xs)
    v = psi * np.exp(1j * theta * np.arange(dim))[:, None]
    return np.real(np.einsum("ki,kl,li->i", v.conj(), rho.entries, v))


def coherent_amplitudes(alpha: complex, n_cut: int):
    """Truncated coherent-state amplitudes c_n = e^{-|a|^2/2} a^n / sqrt(n!).

    Returns (FockVector of the first n_cut amplitudes, tail mass left above
    the cutoff).  The amplitudes are built by the stable recurrence
    c_{n+1} = c_n * alpha / sqrt(n+1), avoiding explicit factorials.
    """
    if n_cut < 1:
        raise ValueError("n_cut must be positive")
    alpha = complex(alpha)
    c = np.zeros(n_cut, dtype=complex)
    c[0] = math.exp(-0.5 * (alpha.real**2 + alpha.imag**2))
    for n in range(n_cut - 1):
        c[n + 1] = c[n] * alpha / math.sqrt(n + 1.0)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2)))
    return FockVector(c), tail


def photon_number_probability(alpha: complex, n: int) -> float:
    """Poissonian count probability e^{-|a|^2} |a|^{2n} / n!.

    Depends on alpha only through |alpha|^2, so coherent states of equal
    amplitude and arbitrary phase give identical statistics.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    alpha = complex(alpha)
    mu = alpha.real**2 + alpha.imag**2
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mu) - mu - math.lgamma(n + 1.0))


def hermitian_to_real_vector(op) -> np.ndarray:
    """Isometric real coordinates of a Hermitian matrix.

    Basis: the s diagonal units, then (E_kl + E_lk)/sqrt(2) and
    i(E_kl - E_lk)/sqrt(2) for k < l.  The Euclidean norm of the output
    equals the Frobenius norm of the input, and dot(v(A), v(B)) = Tr(A B).
    """
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError("operator must be a square matrix")
    asym = float(np.max(np.abs(op - op.conj().T)))
    if asym > 1e-10:
        raise ValueError(f"operator is not Hermitian (max asymmetry {asym:.3e})")
    upper = np.triu_indices(op.shape[0], k=1)
    sq2 = math.sqrt(2.0)
    return np.concatenate(
        [
            np.real(np.diag(op)),
            sq2 * np.real(op[upper]),
            sq2 * np.imag(op[upper]),
        ]
    )
