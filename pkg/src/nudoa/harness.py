"""Monte Carlo RMSE-versus-SNR experiments.

Every trial is keyed by ``(seed, realization, trial)``. Within a trial all
methods see the same snapshot matrix, and across SNRs the same unit-variance
draws are reused with different scaling (common random numbers), which keeps
the RMSE curves comparable point to point. Trials can run in a process pool;
results are reduced in trial order so serial and parallel runs agree exactly.
"""
import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .array_model import ArrayGeometry, NoiseProfile, SourceSet, signal_power_for_snr
from .estimator import ALL_METHODS, GridSpec, Method, estimate_doa
from .snapshots import RngSeed, generate_snapshots, sample_covariance

NOISE_STREAM_TAG = 1 << 63

SWEEP_HEADER = ["snr_db", "method", "K", "rmse_deg", "fallback_rate", "mean_trial_ms"]


@dataclass(frozen=True)
class RandomNoiseSpec:
    """Random diagonal noise covariances with a cap on the WNPR."""

    max_wnpr: float
    realizations: int = 10
    floor: float = 1.0

    def __post_init__(self):
        if not self.max_wnpr >= 1:
            raise ValueError("max_wnpr must be >= 1")
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise ValueError("realizations must be a positive integer")
        if not self.floor > 0:
            raise ValueError("floor variance must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: ArrayGeometry
    doas_deg: tuple
    noise: Union[NoiseProfile, RandomNoiseSpec]
    snapshots: int = 500
    methods: tuple = ALL_METHODS
    grid: GridSpec = GridSpec()
    seed: int = 0
    snr_db_list: tuple = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    k_trials: int = 500

    def __post_init__(self):
        object.__setattr__(self, "doas_deg", tuple(float(t) for t in self.doas_deg))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        object.__setattr__(self, "snr_db_list", tuple(float(s) for s in self.snr_db_list))
        SourceSet(self.doas_deg)  # validates angles and distinctness
        if len(self.doas_deg) >= self.geometry.sensor_count:
            raise ValueError("number of sources must be smaller than the number of sensors")
        if isinstance(self.noise, NoiseProfile) and len(self.noise) != self.geometry.sensor_count:
            raise ValueError(
                f"noise profile has {len(self.noise)} entries for "
                f"{self.geometry.sensor_count} sensors"
            )
        if not self.methods:
            raise ValueError("at least one method is required")
        if int(self.snapshots) != self.snapshots or self.snapshots < 1:
            raise ValueError("snapshot count must be a positive integer")
        if int(self.k_trials) != self.k_trials or self.k_trials < 1:
            raise ValueError("k_trials must be a positive integer")
        RngSeed(self.seed)

    @property
    def L(self):
        return len(self.doas_deg)

    def sources_at(self, snr_db, noise=None):
        """Equal-power sources scaled to hit ``snr_db`` for the given noise."""
        noise = self.noise if noise is None else noise
        return SourceSet(self.doas_deg, signal_power_for_snr(snr_db, noise))


@dataclass
class TrialResult:
    trial: int
    method: Method
    snr_db: float
    theta_hat: tuple
    sq_errors: tuple
    fallback: bool
    wall_ms: float
    realization: int = 0
    error: Optional[str] = None


@dataclass
class SweepResult:
    snr_db: float
    method: Method
    rmse_deg: float
    K: int
    fallback_rate: float
    mean_trial_ms: float
    trials: list = field(default_factory=list, repr=False)
    realizations: list = field(default_factory=list, repr=False)


def rmse(trials):
    """Root mean squared error over all trials and sources."""
    sq = [e for t in trials for e in t.sq_errors]
    return math.sqrt(math.fsum(sq) / len(sq))


def trial_stream(realization, trial):
    return (int(realization) << 32) | int(trial)


def draw_noise_profile(spec, M, seed, realization):
    """One noise realization: variances i.i.d. uniform on ``[floor, floor * max_wnpr]``.

    The draw already keeps the ratio of largest to smallest variance at or
    below ``max_wnpr``; the final rescale is defensive against rounding.
    """
    rng = RngSeed(seed, NOISE_STREAM_TAG | int(realization)).generator()
    v = rng.uniform(spec.floor, spec.floor * spec.max_wnpr, size=M)
    ratio = v.max() / v.min()
    if ratio > spec.max_wnpr:
        v = v.min() + (v - v.min()) * (spec.max_wnpr - 1) / (ratio - 1)
    return NoiseProfile(v)


def _assoc_sq_errors(theta_hat, truth):
    return tuple(float((a - b) ** 2) for a, b in zip(np.sort(theta_hat), np.sort(truth)))


def _trial_job(config, noise, snr_list, realization, trial_idx):
    """All SNRs and methods for one trial; returns results grouped by SNR."""
    seed = RngSeed(config.seed, trial_stream(realization, trial_idx))
    out = []
    truth = np.array(config.doas_deg)
    center = float(np.mean(config.grid.angles[[0, -1]]))
    for snr in snr_list:
        X = generate_snapshots(
            config.geometry, config.sources_at(snr, noise), noise, config.snapshots, seed
        )
        Rhat = sample_covariance(X)
        per_snr = []
        for method in config.methods:
            t0 = time.perf_counter()
            err = None
            try:
                est, _ = estimate_doa(Rhat, config.L, config.geometry, config.grid, method)
                theta_hat = est.doas_deg
                fallback = est.fallback or est.padded
            except (ArithmeticError, np.linalg.LinAlgError) as exc:
                # keep the trial: a failed estimate scores as a guess at the grid center
                theta_hat = np.full(config.L, center)
                fallback = True
                err = f"{type(exc).__name__}: {exc}"
            wall = (time.perf_counter() - t0) * 1e3
            per_snr.append(
                TrialResult(
                    trial=int(trial_idx),
                    method=method,
                    snr_db=float(snr),
                    theta_hat=tuple(float(t) for t in theta_hat),
                    sq_errors=_assoc_sq_errors(theta_hat, truth),
                    fallback=bool(fallback),
                    wall_ms=wall,
                    realization=int(realization),
                    error=err,
                )
            )
        out.append(per_snr)
    return out


def _job_star(args):
    return _trial_job(*args)


def run_trial(config, snr_db, trial_idx, noise=None, realization=0):
    """One Monte Carlo trial at one SNR; one :class:`TrialResult` per method."""
    noise = _fixed_noise(config) if noise is None else noise
    return _trial_job(config, noise, [float(snr_db)], realization, trial_idx)[0]


def _fixed_noise(config):
    if not isinstance(config.noise, NoiseProfile):
        raise ValueError("this experiment needs a fixed noise profile; pass noise= explicitly")
    return config.noise


def _run_jobs(jobs, workers):
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [_trial_job(*j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_job_star, jobs, chunksize=chunk))


def _aggregate(snr_list, methods, per_trial):
    results = []
    for i, snr in enumerate(snr_list):
        for j, method in enumerate(methods):
            trials = [tr[i][j] for tr in per_trial]
            results.append(
                SweepResult(
                    snr_db=float(snr),
                    method=method,
                    rmse_deg=rmse(trials),
                    K=len(trials),
                    fallback_rate=sum(t.fallback for t in trials) / len(trials),
                    mean_trial_ms=math.fsum(t.wall_ms for t in trials) / len(trials),
                    trials=trials,
                )
            )
    return results


def sweep_snr(config, snr_list=None, K=None, workers=1, noise=None, realization=0):
    """RMSE per (SNR, method) over ``K`` trials.

    Results come ordered by SNR, then by ``config.methods``.
    """
    snr_list = [float(s) for s in (config.snr_db_list if snr_list is None else snr_list)]
    K = config.k_trials if K is None else int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    noise = _fixed_noise(config) if noise is None else noise
    jobs = [(config, noise, snr_list, realization, k) for k in range(K)]
    return _aggregate(snr_list, config.methods, _run_jobs(jobs, workers))


def random_q_experiment(config, snr_list=None, K=None, workers=1):
    """Average RMSE curves over random noise covariance realizations.

    Each realization draws its own noise profile (see
    :func:`draw_noise_profile`) and runs a full :func:`sweep_snr`. The
    returned results average RMSE, fallback rate, and trial time across
    realizations; the per-realization sweeps are kept in ``realizations``.
    """
    spec = config.noise
    if not isinstance(spec, RandomNoiseSpec):
        raise ValueError("random_q_experiment needs a RandomNoiseSpec noise model")
    snr_list = [float(s) for s in (config.snr_db_list if snr_list is None else snr_list)]
    K = config.k_trials if K is None else int(K)
    M = config.geometry.sensor_count
    profiles = [draw_noise_profile(spec, M, config.seed, r) for r in range(spec.realizations)]
    jobs = [
        (config, profiles[r], snr_list, r, k)
        for r in range(spec.realizations)
        for k in range(K)
    ]
    flat = _run_jobs(jobs, workers)
    per_real = [
        _aggregate(snr_list, config.methods, flat[r * K : (r + 1) * K])
        for r in range(spec.realizations)
    ]
    averaged = []
    for idx, first in enumerate(per_real[0]):
        group = [rs[idx] for rs in per_real]
        averaged.append(
            SweepResult(
                snr_db=first.snr_db,
                method=first.method,
                rmse_deg=math.fsum(g.rmse_deg for g in group) / len(group),
                K=K,
                fallback_rate=math.fsum(g.fallback_rate for g in group) / len(group),
                mean_trial_ms=math.fsum(g.mean_trial_ms for g in group) / len(group),
                realizations=group,
            )
        )
    return averaged, profiles


def _fmt(x):
    return format(x, ".12g")


def write_sweep_csv(results, fh, timing=True):
    """Write sweep results in the ``snr_db,method,K,rmse_deg,...`` schema.

    With ``timing=False`` the ``mean_trial_ms`` column is written as ``nan``
    so the output is reproducible byte for byte.
    """
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in results:
        w.writerow(
            [
                _fmt(r.snr_db),
                str(r.method),
                r.K,
                _fmt(r.rmse_deg),
                _fmt(r.fallback_rate),
                _fmt(r.mean_trial_ms) if timing else "nan",
            ]
        )


def write_trials_csv(trials, fh):
    """Per-trial rows: ``snr_db,trial,method,theta_hat_1..L,sq_err_1..L,fallback``."""
    trials = list(trials)
    L = len(trials[0].theta_hat) if trials else 0
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(
        ["snr_db", "trial", "method"]
        + [f"theta_hat_{i + 1}" for i in range(L)]
        + [f"sq_err_{i + 1}" for i in range(L)]
        + ["fallback"]
    )
    for t in trials:
        w.writerow(
            [_fmt(t.snr_db), t.trial, str(t.method)]
            + [_fmt(x) for x in t.theta_hat]
            + [_fmt(x) for x in t.sq_errors]
            + [int(t.fallback)]
        )


def read_sweep_csv(fh):
    rows = list(csv.DictReader(fh))
    return [
        dict(
            snr_db=float(r["snr_db"]),
            method=Method(r["method"]),
            K=int(r["K"]),
            rmse_deg=float(r["rmse_deg"]),
            fallback_rate=float(r["fallback_rate"]),
            mean_trial_ms=float(r["mean_trial_ms"]),
        )
        for r in rows
    ]


def with_overrides(config, **kw):
    """``dataclasses.replace`` that ignores ``None`` values."""
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
