"""Coherent-probe model for data-pattern tomography.

Signal states are represented as linear combinations of coherent probe
projectors sitting on a square lattice in phase space.  This module holds
the state definitions, Born-rule probabilities for the unbalanced-homodyne
style measurement (projection onto a displaced vacuum), the probe lattice
geometry, the positivity test-ket machinery, and Fock-basis assembly of
the reconstructed density matrix.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

# Fock truncation used for 41x41 density matrices and test kets.  The
# probe amplitudes stay below |alpha| ~ 1.3, where population beyond
# n = 40 is below 1e-50, so the cutoff is invisible at double precision.
DEFAULT_CUTOFF = 41

ComplexAmplitude = complex


# ---------------------------------------------------------------------------
# signal states

@dataclass(frozen=True)
class CoherentSignal:
    """Pure coherent state |alpha>."""

    alpha: ComplexAmplitude


@dataclass(frozen=True)
class SingledPhotonFock:
    """The one-photon Fock state |1>."""


@dataclass(frozen=True)
class EvenCat:
    """Even coherent superposition (|alpha> + |-alpha>), normalized."""

    alpha: ComplexAmplitude


SignalState = CoherentSignal | SingledPhotonFock | EvenCat


@dataclass(frozen=True)
class ProbeLattice:
    """Square grid of coherent probe amplitudes.

    ``amplitudes[i]`` runs row-major starting from the lower-left corner
    of the grid, i.e. the index walks the real axis first.
    """

    amplitudes: np.ndarray
    side_count: int
    spacing: float
    center: ComplexAmplitude = 0.0

    @property
    def n_probes(self):
        return self.amplitudes.size


@dataclass(frozen=True)
class TestKetSet:
    """Kets used for the linear positivity constraints <psi|rho|psi> >= 0.

    ``kets`` has one column per ket in the Fock basis; ``labels`` names
    them.  Duplicate kets are excluded at construction.
    """

    kets: np.ndarray
    labels: tuple

    __test__ = False  # keeps pytest from collecting the class by name

    @property
    def count(self):
        return self.kets.shape[1]


class NonHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    """Fock-basis operator with a Hermiticity guard.

    The matrix is not required to be positive or normalized: estimators
    produced mid-reconstruction may be slightly unphysical, and callers
    inspect eigenvalues and trace separately.
    """

    matrix: np.ndarray
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.cutoff, self.cutoff):
            raise ValueError(f"matrix shape {m.shape} does not match cutoff {self.cutoff}")
        dev = np.abs(m - m.conj().T).max()
        if dev > 1e-12:
            raise NonHermitianError(f"matrix deviates from Hermiticity by {dev:.3e}")

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix).min())

    def trace(self):
        return float(np.trace(self.matrix).real)


# ---------------------------------------------------------------------------
# Born probabilities

def coherent_overlap_prob(alpha, beta):
    """Probability of projecting coherent |alpha> onto coherent |beta>.

    This is the data-pattern kernel exp(-|alpha - beta|^2); both arguments
    broadcast, so probe/setting grids can be crossed in one call.
    """
    return np.exp(-np.abs(np.asarray(alpha) - np.asarray(beta)) ** 2)


def signal_born_probability(signal, beta):
    """Probability of finding the signal in the coherent projector |beta>.

    Closed forms per state family; the even-cat normalization
    2*(1 + exp(-2|alpha|^2)) is analytic, not numerical.
    """
    beta = np.asarray(beta)
    if isinstance(signal, CoherentSignal):
        return np.exp(-np.abs(signal.alpha - beta) ** 2)
    if isinstance(signal, SingledPhotonFock):
        b2 = np.abs(beta) ** 2
        return b2 * np.exp(-b2)
    if isinstance(signal, EvenCat):
        a = signal.alpha
        pref = -(abs(a) ** 2 + np.abs(beta) ** 2) / 2.0
        ov_p = np.exp(pref + np.conj(beta) * a)
        ov_m = np.exp(pref - np.conj(beta) * a)
        return np.abs(ov_p + ov_m) ** 2 / (2.0 * (1.0 + np.exp(-2.0 * abs(a) ** 2)))
    raise TypeError(f"unknown signal state {signal!r}")


def coherent_fock_vector(alpha, cutoff=DEFAULT_CUTOFF):
    """Fock-basis expansion of |alpha>, computed in log space for stability."""
    n = np.arange(cutoff)
    if alpha == 0:
        v = np.zeros(cutoff, dtype=complex)
        v[0] = 1.0
        return v
    logmag = -abs(alpha) ** 2 / 2.0 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def even_cat_fock_vector(alpha, cutoff=DEFAULT_CUTOFF):
    v = coherent_fock_vector(alpha, cutoff) + coherent_fock_vector(-alpha, cutoff)
    return v / np.sqrt(2.0 * (1.0 + np.exp(-2.0 * abs(alpha) ** 2)))


def signal_fock_vector(signal, cutoff=DEFAULT_CUTOFF):
    """Fock-basis ket of a pure signal state."""
    if isinstance(signal, CoherentSignal):
        return coherent_fock_vector(signal.alpha, cutoff)
    if isinstance(signal, SingledPhotonFock):
        v = np.zeros(cutoff, dtype=complex)
        v[1] = 1.0
        return v
    if isinstance(signal, EvenCat):
        return even_cat_fock_vector(signal.alpha, cutoff)
    raise TypeError(f"unknown signal state {signal!r}")


# ---------------------------------------------------------------------------
# lattice geometry

def build_probe_lattice(side_count, spacing, center=0.0):
    """Lay out ``side_count**2`` probe amplitudes on a square grid.

    The grid is centered on ``center`` and indexed row-major from the
    lower-left corner.  ``side_count`` must be odd so that the center is
    itself a probe; even grids are rejected as a configuration error.
    """
    if side_count < 3 or side_count % 2 == 0:
        raise ValueError(f"side_count must be odd and >= 3, got {side_count}")
    if spacing <= 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    h = (side_count - 1) // 2
    amps = np.array(
        [
            center + (i - h) * spacing + 1j * (j - h) * spacing
            for j in range(side_count)
            for i in range(side_count)
        ]
    )
    return ProbeLattice(amplitudes=amps, side_count=side_count, spacing=spacing, center=center)


def probe_gram(lattice):
    """Hilbert-Schmidt Gram matrix of the probe projectors.

    tr(rho_m rho_n) = |<alpha_m|alpha_n>|^2 = exp(-|alpha_m - alpha_n|^2).
    """
    a = lattice.amplitudes
    return np.exp(-np.abs(a[:, None] - a[None, :]) ** 2)


def build_test_kets(lattice, n_max=40, cutoff=DEFAULT_CUTOFF):
    """Fock kets |0>..|n_max> plus one coherent ket per probe.

    A probe sitting exactly at the origin duplicates the vacuum Fock ket
    and is skipped so the set contains no repeated directions.
    """
    if n_max >= cutoff:
        raise ValueError("n_max must stay below the Fock cutoff")
    cols = []
    labels = []
    eye = np.eye(cutoff, dtype=complex)
    for n in range(n_max + 1):
        cols.append(eye[:, n])
        labels.append(f"fock{n}")
    for m, alpha in enumerate(lattice.amplitudes):
        if alpha == 0:
            continue  # identical to fock0
        cols.append(coherent_fock_vector(alpha, cutoff))
        labels.append(f"probe{m}")
    return TestKetSet(kets=np.stack(cols, axis=1), labels=tuple(labels))


def constraint_coefficients(lattice, ket_set):
    """Linear positivity data (V, u) in the free coefficients.

    For each test ket the expectation q_i(m) = <psi_i|rho_m|psi_i> gives
    one inequality sum_m c_m q_i(m) >= 0.  Eliminating the dependent
    coefficient c_M = 1 - sum c_m turns it into v_i . c >= u_i with
    v_{i,m} = q_i(m) - q_i(M) and u_i = -q_i(M).  Identically-zero rows
    carry no information and are dropped.
    """
    probes = np.stack([coherent_fock_vector(a, ket_set.kets.shape[0]) for a in lattice.amplitudes], axis=1)
    q = np.abs(ket_set.kets.conj().T @ probes) ** 2  # kets x probes
    v = q[:, :-1] - q[:, -1:]
    u = -q[:, -1]
    keep = np.linalg.norm(v, axis=1) > 0
    return v[keep], u[keep]


# ---------------------------------------------------------------------------
# estimator assembly

def assemble_estimator(free_coefficients, lattice, cutoff=DEFAULT_CUTOFF):
    """Build the Fock-basis density matrix from the free coefficients.

    The dependent weight c_M = 1 - sum(free) restores unit trace in the
    probe expansion.  If the Fock truncation leaks more than 1e-6 of
    trace the estimator is still returned, with a warning; this only
    happens for lattices far larger than the defaults.
    """
    c = np.asarray(free_coefficients, dtype=float)
    lat = lattice.amplitudes
    if c.size != lat.size - 1:
        raise ValueError(f"expected {lat.size - 1} free coefficients, got {c.size}")
    full = np.concatenate([c, [1.0 - c.sum()]])
    kets = np.stack([coherent_fock_vector(a, cutoff) for a in lat], axis=1)
    rho = (kets * full) @ kets.conj().T
    rho = (rho + rho.conj().T) / 2.0  # scrub rounding asymmetry, not structure
    leak = abs(np.trace(rho).real - 1.0)
    if leak > 1e-6:
        warnings.warn(f"Fock truncation leaks {leak:.2e} of trace at cutoff {cutoff}")
    return DensityMatrix(matrix=rho, cutoff=cutoff)


def fidelity(psi, rho):
    """Overlap <psi|rho|psi> of a pure state with a density operator.

    ``rho`` may be a DensityMatrix or a raw Fock-basis array; raw input
    is held to the same 1e-12 Hermiticity tolerance.  The value is the
    real overlap itself, so a slightly unphysical estimator can score
    marginally above 1.
    """
    if isinstance(rho, DensityMatrix):
        m = rho.matrix
    else:
        m = np.asarray(rho)
        dev = np.abs(m - m.conj().T).max()
        if dev > 1e-12:
            raise NonHermitianError(f"matrix deviates from Hermiticity by {dev:.3e}")
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != m.shape[0]:
        raise ValueError("ket and operator cutoffs disagree")
    return float(np.vdot(psi, m @ psi).real)
