"""End-to-end reconstruction runs, baseline, reporting and the CLI.

A run wires the pieces together: build the probe lattice, simulate or
load the pattern bank, start from the nearly flat prior, shear it onto
the physical region, then loop adaptive setting selection, signal
measurement, Bayesian update and re-shearing until the stopping rule
fires or the settings run out.  Everything observable lands in a
SelectionTrace (one record per measured setting) and an EstimatorReport
(final belief and its density matrix), both exportable as JSON/CSV for
plotting.

The prior receives one structural addition before the first shear: the
exact probe patterns span only a low-dimensional visible subspace (the
pattern kernel is nearly degenerate on a fine lattice), and coefficient
directions invisible to every setting would otherwise keep their huge
prior variance forever, drowning the stopping statistic.  Those null
directions are pinned by a stiff quadratic term at initialization; they
are exactly the directions the measurements cannot inform, so pinning
them changes no observable prediction.  Disable with
``null_stiffening=False`` to recover the purely isotropic prior.
"""

import argparse
import csv
import datetime
import json
import os
import sys
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .gaussian_posterior import GaussianPosterior, bayes_update, init_prior, moments
from .measurement_selector import (
    StoppingConfig,
    select_next,
    stopping_check,
)
from .pattern_bank import (
    BankFormatError,
    SignalMeter,
    export_patterns_csv,
    load_bank,
    save_bank,
    simulate_probe_bank,
)
from .quantum_model import (
    CoherentSignal,
    EvenCat,
    SingledPhotonFock,
    assemble_estimator,
    build_probe_lattice,
    build_test_kets,
    coherent_overlap_prob,
    constraint_coefficients,
    fidelity,
    probe_gram,
    signal_born_probability,
    signal_fock_vector,
)
from .state_space_shearing import (
    LinearConstraintSet,
    ShearSolveError,
    ShearingConfig,
    shear_until_physical,
)


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class RunConfig:
    """Everything a reconstruction run depends on, seeds included."""

    side_count: int = 11
    spacing: float = 0.125
    center: complex = 0.0
    signal_kind: str = "coherent"
    signal_alpha: complex = 0.5
    n_bank_pulses: int = 1000
    n_signal_pulses: int = 1000
    bank_seed: int = 1
    signal_seed: int = 1001
    epsilon_reg: float = 1e-6
    shearing: ShearingConfig = field(default_factory=ShearingConfig)
    stopping: StoppingConfig = field(default_factory=StoppingConfig)
    max_settings: int | None = None
    continue_past_stop: bool = False
    strict_paper_sigma: bool = False
    null_stiffening: bool = True
    stiffening_tau: float = 5e3
    stiffening_cutoff: float = 1e-6
    gh_nodes: int = 32
    fock_n_max: int = 40

    def __post_init__(self):
        if self.signal_kind not in ("coherent", "fock1", "even_cat"):
            raise ValueError(f"unknown signal kind {self.signal_kind!r}")
        if self.n_bank_pulses < 1 or self.n_signal_pulses < 1:
            raise ValueError("pulse counts must be positive")
        if self.epsilon_reg <= 0:
            raise ValueError("epsilon_reg must be positive")
        if self.max_settings is not None and self.max_settings < 1:
            raise ValueError("max_settings must be positive when given")
        if self.stiffening_tau <= 0 or not 0 < self.stiffening_cutoff < 1:
            raise ValueError("stiffening parameters out of range")
        if self.gh_nodes < 2:
            raise ValueError("gh_nodes must be at least 2")

    def signal(self):
        if self.signal_kind == "coherent":
            return CoherentSignal(self.signal_alpha)
        if self.signal_kind == "fock1":
            return SingledPhotonFock()
        return EvenCat(self.signal_alpha)

    def to_dict(self):
        return {
            "side_count": self.side_count,
            "spacing": self.spacing,
            "center": [self.center.real, self.center.imag],
            "signal": {
                "kind": self.signal_kind,
                "alpha": [complex(self.signal_alpha).real, complex(self.signal_alpha).imag],
            },
            "n_bank_pulses": self.n_bank_pulses,
            "n_signal_pulses": self.n_signal_pulses,
            "bank_seed": self.bank_seed,
            "signal_seed": self.signal_seed,
            "epsilon_reg": self.epsilon_reg,
            "shearing": {
                "p_threshold": self.shearing.p_threshold,
                "p_step": self.shearing.p_step,
                "epsilon_total": self.shearing.epsilon_total,
                "max_iterations": self.shearing.max_iterations,
                "select_by_abs": self.shearing.select_by_abs,
            },
            "stopping": {
                "eta": self.stopping.eta,
                "consecutive": self.stopping.consecutive,
            },
            "max_settings": self.max_settings,
            "continue_past_stop": self.continue_past_stop,
            "strict_paper_sigma": self.strict_paper_sigma,
            "null_stiffening": self.null_stiffening,
            "stiffening_tau": self.stiffening_tau,
            "stiffening_cutoff": self.stiffening_cutoff,
            "gh_nodes": self.gh_nodes,
            "fock_n_max": self.fock_n_max,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        kwargs = {}
        for key in (
            "side_count", "n_bank_pulses", "n_signal_pulses", "bank_seed",
            "signal_seed", "epsilon_reg", "spacing", "max_settings",
            "continue_past_stop", "strict_paper_sigma", "null_stiffening",
            "stiffening_tau", "stiffening_cutoff", "gh_nodes", "fock_n_max",
        ):
            if key in data:
                kwargs[key] = data[key]
        if "center" in data:
            re, im = data["center"]
            kwargs["center"] = complex(re, im)
        if "signal" in data:
            sig = data["signal"]
            kwargs["signal_kind"] = sig.get("kind", "coherent")
            if "alpha" in sig:
                re, im = sig["alpha"]
                kwargs["signal_alpha"] = complex(re, im)
        if "shearing" in data:
            kwargs["shearing"] = ShearingConfig(**data["shearing"])
        if "stopping" in data:
            kwargs["stopping"] = StoppingConfig(**data["stopping"])
        return cls(**kwargs)


def load_config(path):
    with open(path) as fh:
        return RunConfig.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# trace and report containers

@dataclass
class StepRecord:
    step: int
    setting_index: int
    setting_re: float
    setting_im: float
    predicted_variance: float
    variance: float
    frequency: float
    stopping: bool
    min_eig_before: float
    min_eig_after: float
    hs_distance: float
    step_change: float
    shear_iterations: int
    shear_max_p: float
    shear_hit_cap: bool
    variance_increased: bool


@dataclass
class SelectionTrace:
    records: list
    stop_step: int | None
    exhausted: bool
    initial_variance: float
    initial_shear_iterations: int


@dataclass
class EstimatorReport:
    mean: np.ndarray
    covariance: np.ndarray
    density: object
    fidelity: float
    settings_used: int
    probabilities: list  # (setting_index, estimated, measured) triples
    clip_excess: float
    final_variance: float


# ---------------------------------------------------------------------------
# truth projection and distances

def signal_projection(lattice, signal):
    """Best probe-mixture representation of the true state.

    Returns (c_star, residual): the free coefficients of the
    Gram-projected least-squares representation computed from exact
    probabilities, and the squared Hilbert-Schmidt norm of what the
    probe span cannot express.  Singular Gram directions below 1e-10
    are cut by the pseudo-inverse.
    """
    s = probe_gram(lattice)
    t = signal_born_probability(signal, lattice.amplitudes)
    s_red = s[:-1, :-1] - s[:-1, -1:] - s[-1:, :-1] + s[-1, -1]
    r = (t[:-1] - t[-1]) - (s[:-1, -1] - s[-1, -1])
    c_star = np.linalg.pinv(s_red, rcond=1e-10) @ r
    psi = signal_fock_vector(signal)
    purity = float(np.vdot(psi, psi).real) ** 2
    e_norm2 = purity - 2.0 * t[-1] + s[-1, -1]
    residual = float(e_norm2 - 2.0 * c_star @ r + c_star @ s_red @ c_star)
    return c_star, max(residual, 0.0)


def hs_distance_to_truth(post, lattice, signal):
    """Posterior-averaged squared Hilbert-Schmidt distance to the truth.

    Closed form (m - c*) . S~ . (m - c*) + tr(S~ Sigma) + residual in
    the free coefficients; no sampling involved.
    """
    s = probe_gram(lattice)
    s_red = s[:-1, :-1] - s[:-1, -1:] - s[-1:, :-1] + s[-1, -1]
    c_star, residual = signal_projection(lattice, signal)
    mean, cov = moments(post)
    e = mean - c_star
    return float(e @ s_red @ e + np.trace(s_red @ cov) + residual)


# ---------------------------------------------------------------------------
# pipeline

def _stiffened_prior(prior, lattice, setting_amplitudes, tau, sv_cutoff):
    """Pin the pattern-null coefficient directions of the prior.

    The centered exact patterns G0 (settings x free coefficients) are
    decomposed by SVD; directions whose singular value falls below
    ``sv_cutoff`` times the largest are invisible to every setting, and
    the prior gets a stiff tau * (I - Vr Vr^T) added so they start, and
    stay, pinned near zero instead of wandering at prior scale.
    """
    p_exact = coherent_overlap_prob(lattice.amplitudes[None, :], setting_amplitudes[:, None])
    g0 = p_exact[:, :-1] - p_exact[:, -1:]
    _, sv, vt = np.linalg.svd(g0, full_matrices=True)
    rank = int((sv >= sv_cutoff * sv[0]).sum())
    vr = vt[:rank]
    null_proj = np.eye(prior.dim) - vr.T @ vr
    return GaussianPosterior(A=prior.A + tau * null_proj, b=prior.b), rank


def run_reconstruction(config, bank=None):
    """Run one adaptive reconstruction; returns (trace, report).

    Deterministic given the config: the bank and every signal record
    come from counter-based streams keyed by the two seeds.  A bank
    passed in explicitly must match the configured lattice.
    """
    lattice = build_probe_lattice(config.side_count, config.spacing, config.center)
    if bank is None:
        bank = simulate_probe_bank(lattice, None, config.n_bank_pulses, config.bank_seed)
    else:
        if bank.n_probes != lattice.n_probes or not np.allclose(
            bank.probe_amplitudes, lattice.amplitudes
        ):
            raise ValueError("bank probes do not match the configured lattice")
    signal = config.signal()
    dim = lattice.n_probes - 1
    kets = build_test_kets(lattice, n_max=config.fock_n_max)
    v, u = constraint_coefficients(lattice, kets)
    constraints = LinearConstraintSet(v, u)

    post = init_prior(dim, config.epsilon_reg)
    if config.null_stiffening:
        post, _ = _stiffened_prior(
            post, lattice, bank.setting_amplitudes,
            config.stiffening_tau, config.stiffening_cutoff,
        )
    post, init_report = shear_until_physical(post, constraints, config.shearing)

    meter = SignalMeter(
        signal=signal,
        setting_amplitudes=bank.setting_amplitudes,
        n_pulses=config.n_signal_pulses,
        seed=config.signal_seed,
    )
    freqs = bank.frequencies()
    n_s = config.n_signal_pulses
    budget = bank.n_settings if config.max_settings is None else min(
        config.max_settings, bank.n_settings
    )

    s = probe_gram(lattice)
    s_red = s[:-1, :-1] - s[:-1, -1:] - s[-1:, :-1] + s[-1, -1]
    c_star, residual = signal_projection(lattice, signal)
    psi = signal_fock_vector(signal)

    mean, cov = moments(post)
    var_prev = float(np.trace(cov))
    mean_prev = mean
    initial_variance = var_prev

    history = []
    records = []
    measured = []
    stop_step = None

    for k in range(1, budget + 1):
        best = select_next(
            post, freqs, n_s, measured,
            n_nodes=config.gh_nodes, strict_paper=config.strict_paper_sigma,
        )
        history.append((best.predicted_variance, var_prev))
        if stop_step is None and stopping_check(history, config.stopping):
            stop_step = k - 1
            if records:
                records[-1].stopping = True
            if not config.continue_past_stop:
                break
        f_meas = meter.measure_signal(best.setting_index)
        post = bayes_update(
            post, freqs[best.setting_index], f_meas, n_s,
            strict_paper=config.strict_paper_sigma,
        )
        mean_raw, _ = moments(post)
        eig_before = assemble_estimator(mean_raw, lattice).min_eigenvalue()
        post, shear_report = shear_until_physical(post, constraints, config.shearing)
        mean, cov = moments(post)
        eig_after = assemble_estimator(mean, lattice).min_eigenvalue()
        var_now = float(np.trace(cov))
        e = mean - c_star
        hs_now = float(e @ s_red @ e + np.trace(s_red @ cov) + residual)
        dmean = mean - mean_prev
        amp = bank.setting_amplitudes[best.setting_index]
        records.append(StepRecord(
            step=k,
            setting_index=best.setting_index,
            setting_re=float(amp.real),
            setting_im=float(amp.imag),
            predicted_variance=float(best.predicted_variance),
            variance=var_now,
            frequency=float(f_meas),
            stopping=False,
            min_eig_before=eig_before,
            min_eig_after=eig_after,
            hs_distance=hs_now,
            step_change=float(dmean @ s_red @ dmean),
            shear_iterations=shear_report.iterations,
            shear_max_p=shear_report.max_p,
            shear_hit_cap=shear_report.hit_max_iterations,
            variance_increased=bool(var_now > var_prev),
        ))
        measured.append(best.setting_index)
        var_prev = var_now
        mean_prev = mean

    exhausted = stop_step is None
    trace = SelectionTrace(
        records=records,
        stop_step=stop_step,
        exhausted=exhausted,
        initial_variance=initial_variance,
        initial_shear_iterations=init_report.iterations,
    )

    mean, cov = moments(post)
    density = assemble_estimator(mean, lattice)
    fid = fidelity(psi, density)
    probabilities = []
    clip_excess = 0.0
    for idx in measured:
        row = freqs[idx]
        est = float((row[:-1] - row[-1]) @ mean + row[-1])
        clipped = min(1.0, max(0.0, est))
        clip_excess = max(clip_excess, abs(est - clipped))
        probabilities.append((idx, clipped, float(meter.measure_signal(idx))))
    report = EstimatorReport(
        mean=mean,
        covariance=cov,
        density=density,
        fidelity=fid,
        settings_used=len(measured),
        probabilities=probabilities,
        clip_excess=clip_excess,
        final_variance=float(np.trace(cov)),
    )
    return trace, report


def lsq_baseline(bank, signal_frequencies):
    """Unconstrained least squares over all settings at once.

    Minimizes the squared distance between measured signal frequencies
    and the pattern expansion with c_M eliminated, via normal equations
    with a 1e-10 ridge.  Positivity is not enforced; this is the
    non-adaptive reference point, not an estimator of comparable
    quality.  A rank-deficient pattern matrix is reported through a
    warning and the regularized solution is returned anyway.
    """
    if hasattr(bank, "frequencies"):
        table = bank.frequencies()
    else:
        table = np.asarray(bank, dtype=float)
    y = np.asarray(signal_frequencies, dtype=float)
    if y.size != table.shape[0]:
        raise ValueError("need one signal frequency per setting")
    g = table[:, :-1] - table[:, -1:]
    rhs = y - table[:, -1]
    gram = g.T @ g
    rank = np.linalg.matrix_rank(g)
    if rank < g.shape[1]:
        warnings.warn(f"pattern matrix rank {rank} < {g.shape[1]}; ridge solution returned")
    return np.linalg.solve(gram + 1e-10 * np.eye(g.shape[1]), g.T @ rhs)


# ---------------------------------------------------------------------------
# export

def export_report(trace, report, config, out_dir):
    """Write run.json plus the four plot-ready CSV files into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    run_path = os.path.join(out_dir, "run.json")
    payload = {
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "versions": {
            "dptomo": __version__,
            "numpy": np.__version__,
        },
        "config": config.to_dict(),
        "stop_step": trace.stop_step,
        "exhausted": trace.exhausted,
        "initial_variance": trace.initial_variance,
        "initial_shear_iterations": trace.initial_shear_iterations,
        "trace": [vars(rec).copy() for rec in trace.records],
        "estimator": {
            "mean": report.mean.tolist(),
            "covariance": report.covariance.tolist(),
            "density_re": report.density.matrix.real.tolist(),
            "density_im": report.density.matrix.imag.tolist(),
            "fidelity": report.fidelity,
            "settings_used": report.settings_used,
            "final_variance": report.final_variance,
            "clip_excess": report.clip_excess,
            "probabilities": [
                {"setting_index": i, "estimated": est, "measured": meas}
                for i, est, meas in report.probabilities
            ],
        },
    }
    with open(run_path, "w") as fh:
        json.dump(payload, fh, indent=1)

    trace_cols = [
        "step", "setting_index", "setting_re", "setting_im",
        "predicted_variance", "variance", "frequency", "stopping",
        "min_eig_before", "min_eig_after", "hs_distance", "step_change",
        "shear_iterations", "shear_max_p", "shear_hit_cap", "variance_increased",
    ]
    with open(os.path.join(out_dir, "trace.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trace_cols)
        for rec in trace.records:
            d = vars(rec)
            writer.writerow([repr(float(d[c])) if isinstance(d[c], float) else d[c] for c in trace_cols])
    with open(os.path.join(out_dir, "trajectory.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "setting_index", "setting_re", "setting_im"])
        for rec in trace.records:
            writer.writerow([rec.step, rec.setting_index, repr(float(rec.setting_re)), repr(float(rec.setting_im))])
    with open(os.path.join(out_dir, "frequencies.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting_index", "estimated_probability", "measured_frequency"])
        for i, est, meas in report.probabilities:
            writer.writerow([i, repr(float(est)), repr(float(meas))])
    with open(os.path.join(out_dir, "eigenvalues.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "min_eig_before", "min_eig_after"])
        for rec in trace.records:
            writer.writerow([rec.step, repr(float(rec.min_eig_before)), repr(float(rec.min_eig_after))])
    return run_path


def load_run(path):
    """Reload run.json into (config, trace_records_as_dicts, estimator_dict)."""
    with open(path) as fh:
        payload = json.load(fh)
    config = RunConfig.from_dict(payload["config"])
    return config, payload


# ---------------------------------------------------------------------------
# CLI

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); config errors are exit 1
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="dptomo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override both seeds deterministically")
        p.add_argument("--out", default="out", help="output directory")

    p_bank = sub.add_parser("bank", help="pattern bank operations")
    bank_sub = p_bank.add_subparsers(dest="bank_command", required=True)
    p_gen = bank_sub.add_parser("generate", help="simulate and store a pattern bank")
    add_common(p_gen)

    p_run = sub.add_parser("run", help="adaptive reconstruction")
    add_common(p_run)
    p_run.add_argument("--bank", help="use a stored bank instead of simulating")
    p_run.add_argument("--continue-past-stop", action="store_true")
    p_run.add_argument("--strict-paper-sigma", action="store_true")
    p_run.add_argument("--abs-deviation-shearing", action="store_true")

    p_base = sub.add_parser("baseline", help="least-squares fit from all settings")
    add_common(p_base)
    p_base.add_argument("--bank", help="use a stored bank instead of simulating")

    p_rep = sub.add_parser("report", help="regenerate CSV outputs from run.json")
    p_rep.add_argument("--run", required=True, help="path to run.json")
    p_rep.add_argument("--out", default="out", help="output directory")
    return parser


def _config_from_args(args):
    if args.config:
        config = load_config(args.config)
    else:
        config = RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["bank_seed"] = args.seed
        overrides["signal_seed"] = args.seed + 1000003
    if getattr(args, "continue_past_stop", False):
        overrides["continue_past_stop"] = True
    if getattr(args, "strict_paper_sigma", False):
        overrides["strict_paper_sigma"] = True
    if getattr(args, "abs_deviation_shearing", False):
        overrides["shearing"] = replace(config.shearing, select_by_abs=True)
    return replace(config, **overrides) if overrides else config


def _cmd_bank_generate(args):
    config = _config_from_args(args)
    lattice = build_probe_lattice(config.side_count, config.spacing, config.center)
    bank = simulate_probe_bank(lattice, None, config.n_bank_pulses, config.bank_seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "bank.json")
    save_bank(bank, path)
    export_patterns_csv(bank, os.path.join(args.out, "patterns.csv"))
    print(f"bank: {bank.n_settings} settings x {bank.n_probes} probes -> {path}")
    return 0


def _cmd_run(args):
    config = _config_from_args(args)
    bank = load_bank(args.bank) if args.bank else None
    trace, report = run_reconstruction(config, bank=bank)
    run_path = export_report(trace, report, config, args.out)
    status = "exhausted" if trace.exhausted else f"stopped after {trace.stop_step} settings"
    print(f"{status}; fidelity {report.fidelity:.4f}; "
          f"variance {report.final_variance:.3e} -> {run_path}")
    return 0


def _cmd_baseline(args):
    config = _config_from_args(args)
    lattice = build_probe_lattice(config.side_count, config.spacing, config.center)
    if args.bank:
        bank = load_bank(args.bank)
    else:
        bank = simulate_probe_bank(lattice, None, config.n_bank_pulses, config.bank_seed)
    meter = SignalMeter(
        signal=config.signal(),
        setting_amplitudes=bank.setting_amplitudes,
        n_pulses=config.n_signal_pulses,
        seed=config.signal_seed,
    )
    all_freqs = np.array([meter.measure_signal(k) for k in range(bank.n_settings)])
    coeffs = lsq_baseline(bank, all_freqs)
    density = assemble_estimator(coeffs, lattice)
    fid = fidelity(signal_fock_vector(config.signal()), density)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "baseline.json")
    with open(path, "w") as fh:
        json.dump({
            "config": config.to_dict(),
            "coefficients": coeffs.tolist(),
            "fidelity": fid,
            "min_eigenvalue": density.min_eigenvalue(),
        }, fh, indent=1)
    print(f"baseline fidelity {fid:.4f} from {bank.n_settings} settings -> {path}")
    return 0


def _cmd_report(args):
    config, payload = load_run(args.run)
    records = [StepRecord(**rec) for rec in payload["trace"]]
    trace = SelectionTrace(
        records=records,
        stop_step=payload["stop_step"],
        exhausted=payload["exhausted"],
        initial_variance=payload["initial_variance"],
        initial_shear_iterations=payload["initial_shear_iterations"],
    )
    est = payload["estimator"]
    density = assemble_estimator(
        np.asarray(est["mean"]),
        build_probe_lattice(config.side_count, config.spacing, config.center),
    )
    report = EstimatorReport(
        mean=np.asarray(est["mean"]),
        covariance=np.asarray(est["covariance"]),
        density=density,
        fidelity=est["fidelity"],
        settings_used=est["settings_used"],
        probabilities=[
            (p["setting_index"], p["estimated"], p["measured"])
            for p in est["probabilities"]
        ],
        clip_excess=est["clip_excess"],
        final_variance=est["final_variance"],
    )
    export_report(trace, report, config, args.out)
    status = "exhausted" if trace.exhausted else f"stopped after {trace.stop_step} settings"
    print(f"{len(records)} steps; {status}; fidelity {report.fidelity:.4f}")
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "bank":
            return _cmd_bank_generate(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "baseline":
            return _cmd_baseline(args)
        if args.command == "report":
            return _cmd_report(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, BankFormatError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, ShearSolveError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
