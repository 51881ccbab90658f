"""Simulated measurement records: probe pattern banks and signal clicks.

A pattern bank holds the no-click/click counts obtained by firing every
probe state at every measurement setting.  Counts are generated from
counter-based Philox streams keyed per (seed, cell), so any sub-block of
the bank is reproducible on its own and the order in which cells are
filled never matters.  The same policy covers signal measurements, keyed
per (seed, setting).

Persistence is a small JSON schema plus a CSV export of the frequency
table for plotting.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .quantum_model import coherent_overlap_prob, signal_born_probability

SCHEMA_VERSION = 1


class BankFormatError(ValueError):
    """A stored bank that cannot be interpreted."""


class SchemaVersionError(BankFormatError):
    """Stored schema_version is not the one this code writes."""


class DimensionMismatchError(BankFormatError):
    """Counts array inconsistent with the amplitude lists."""


class CountRangeError(BankFormatError):
    """A click count outside [0, N_p]."""


def _cell_rng(seed, index):
    # one Philox stream per cell; the key, not call order, fixes the draw
    return np.random.Generator(np.random.Philox(key=[int(seed), int(index)]))


@dataclass
class PatternBank:
    """Click counts for every (setting, probe) pair.

    ``counts[k, m]`` is the number of clicks out of ``n_pulses`` copies
    of probe m measured at setting k.
    """

    probe_amplitudes: np.ndarray
    setting_amplitudes: np.ndarray
    counts: np.ndarray
    n_pulses: int
    seed: int

    def __post_init__(self):
        self.probe_amplitudes = np.asarray(self.probe_amplitudes, dtype=complex)
        self.setting_amplitudes = np.asarray(self.setting_amplitudes, dtype=complex)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k, m = self.setting_amplitudes.size, self.probe_amplitudes.size
        if self.counts.shape != (k, m):
            raise DimensionMismatchError(
                f"counts shape {self.counts.shape} does not match {k} settings x {m} probes"
            )
        if self.counts.min(initial=0) < 0 or self.counts.max(initial=0) > self.n_pulses:
            raise CountRangeError(f"counts must lie in [0, {self.n_pulses}]")

    @property
    def n_settings(self):
        return self.setting_amplitudes.size

    @property
    def n_probes(self):
        return self.probe_amplitudes.size

    def frequencies(self):
        """Relative frequencies f_{km} = counts / n_pulses."""
        return self.counts / float(self.n_pulses)


def simulate_probe_bank(lattice, settings=None, n_pulses=1000, seed=0):
    """Generate the full bank of probe-vs-setting click counts.

    ``settings`` defaults to the probe lattice itself (the usual square
    arrangement where every probe amplitude doubles as a displacement
    setting).  Cell (k, m) draws Binomial(n_pulses, exp(-|a_m - b_k|^2))
    from its own stream keyed by (seed, k * n_probes + m).
    """
    probes = lattice.amplitudes
    if settings is None:
        setting_amps = probes.copy()
    elif hasattr(settings, "amplitudes"):
        setting_amps = settings.amplitudes
    else:
        setting_amps = np.asarray(settings, dtype=complex)
    m_count = probes.size
    p = coherent_overlap_prob(probes[None, :], setting_amps[:, None])
    counts = np.empty((setting_amps.size, m_count), dtype=np.int64)
    for k in range(setting_amps.size):
        base = k * m_count
        for m in range(m_count):
            counts[k, m] = _cell_rng(seed, base + m).binomial(n_pulses, p[k, m])
    return PatternBank(
        probe_amplitudes=probes,
        setting_amplitudes=setting_amps,
        counts=counts,
        n_pulses=n_pulses,
        seed=seed,
    )


@dataclass
class SignalMeter:
    """Simulated signal source measured one setting at a time.

    Each setting index has its own Philox stream, and the first draw is
    cached, so a reconstruction may ask for the same setting repeatedly
    (or in any order) and always see one consistent experimental record.
    """

    signal: object
    setting_amplitudes: np.ndarray
    n_pulses: int = 1000
    seed: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.setting_amplitudes = np.asarray(self.setting_amplitudes, dtype=complex)
        self._probs = np.clip(signal_born_probability(self.signal, self.setting_amplitudes), 0.0, 1.0)

    def measure_signal(self, setting_index):
        """Observed click frequency F_k at one setting, from N_s pulses."""
        k = int(setting_index)
        if k < 0 or k >= self.setting_amplitudes.size:
            raise IndexError(f"setting index {k} outside bank of {self.setting_amplitudes.size}")
        if k not in self._cache:
            n = _cell_rng(self.seed, k).binomial(self.n_pulses, self._probs[k])
            self._cache[k] = n / float(self.n_pulses)
        return self._cache[k]

    def true_probability(self, setting_index):
        return float(self._probs[int(setting_index)])


# ---------------------------------------------------------------------------
# persistence

def save_bank(bank, path):
    """Write the bank to JSON with integer counts (lossless round trip)."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "N_p": int(bank.n_pulses),
        "seed": int(bank.seed),
        "probe_amplitudes": [[float(a.real), float(a.imag)] for a in bank.probe_amplitudes],
        "setting_amplitudes": [[float(a.real), float(a.imag)] for a in bank.setting_amplitudes],
        "counts": bank.counts.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_bank(path):
    """Read a bank back, refusing files this code cannot have written.

    Raises SchemaVersionError, DimensionMismatchError or CountRangeError
    depending on what is wrong, all subclasses of BankFormatError.
    """
    with open(path) as fh:
        payload = json.load(fh)
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"schema_version {version!r}, expected {SCHEMA_VERSION}")
    try:
        n_pulses = int(payload["N_p"])
        seed = int(payload["seed"])
        probes = np.array([complex(re, im) for re, im in payload["probe_amplitudes"]])
        settings = np.array([complex(re, im) for re, im in payload["setting_amplitudes"]])
        counts = np.asarray(payload["counts"], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise BankFormatError(f"malformed bank file: {exc}") from exc
    if counts.ndim != 2 or counts.shape != (settings.size, probes.size):
        raise DimensionMismatchError(
            f"counts shape {counts.shape} does not match "
            f"{settings.size} settings x {probes.size} probes"
        )
    return PatternBank(
        probe_amplitudes=probes,
        setting_amplitudes=settings,
        counts=counts,
        n_pulses=n_pulses,
        seed=seed,
    )


def export_patterns_csv(bank, path):
    """Frequency table as CSV: header of probe indices, one row per setting."""
    f = bank.frequencies()
    with open(path, "w") as fh:
        fh.write("setting," + ",".join(str(m) for m in range(bank.n_probes)) + "\n")
        for k in range(bank.n_settings):
            fh.write(str(k) + "," + ",".join(repr(float(x)) for x in f[k]) + "\n")
