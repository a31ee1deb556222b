"""Replicated Monte-Carlo engine for validating the analytic results.

Every replicate draws from its own counter-based substream keyed by
(master_seed, replicate_index), so results are bit-identical for a given
master seed regardless of execution order or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from .geometry import count_in_intervals, sample_lattice, sample_ppp
from .interference import DistributionCurve, InversionMethod, aggregate_interference
from .model import GeometryKind, Lane, MediumAccess, Scenario, derive
from .performance import CurveKind, PerformanceCurve

_Z99 = 2.5758293035489004  # two-sided 99% normal quantile


@dataclass(frozen=True)
class McConfig:
    replicates: int = 5000
    window: float = 10_000.0  # m, one-sided
    master_seed: int = 0
    parallelism: Union[int, str] = "auto"

    def __post_init__(self) -> None:
        if self.replicates < 100:
            raise ValueError(f"replicates must be >= 100, got {self.replicates}")
        if self.window <= 0:
            raise ValueError(f"window must be positive, got {self.window}")
        if not (self.parallelism == "auto"
                or (isinstance(self.parallelism, int) and self.parallelism >= 1)):
            raise ValueError(f"parallelism must be 'auto' or >= 1, got {self.parallelism}")

    def workers(self) -> int:
        if self.parallelism == "auto":
            import os
            return min(8, os.cpu_count() or 1)
        return int(self.parallelism)


@dataclass(frozen=True)
class McEstimate:
    value: float
    ci_halfwidth: float  # 99% normal/binomial
    replicates: int
    seed: int

    def __post_init__(self) -> None:
        if self.ci_halfwidth < 0:
            raise ValueError("ci_halfwidth must be >= 0")


@dataclass(frozen=True)
class McInterference:
    samples: np.ndarray
    empirical_cdf: DistributionCurve
    mean: McEstimate
    mean_suppressed: bool  # true in the infinite-mean (Levy) regime


@dataclass(frozen=True)
class McPerformance:
    curve: PerformanceCurve
    ci_halfwidth: np.ndarray
    replicates: int
    seed: int


@dataclass(frozen=True)
class GofRow:
    spacing: float    # delta, m
    duty_cycle: float  # xi = delta * lambda_i
    chi2: float
    dof: int
    p_value: float
    tv_distance: float

    def to_json(self) -> dict:
        return {
            "spacing_m": self.spacing,
            "duty_cycle": self.duty_cycle,
            "chi2": self.chi2,
            "dof": self.dof,
            "p_value": self.p_value,
            "tv_distance": self.tv_distance,
        }


def _substream(master_seed: int, replicate: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array(
        [np.uint64(master_seed), np.uint64(replicate)], dtype=np.uint64)))


def _map_replicates(fn, mc: McConfig) -> np.ndarray:
    """Evaluate fn(replicate_index) for every replicate, in index order.

    Threads only partition the index range; each result lands in its own
    slot, so the output is independent of the worker count.
    """
    out = np.empty(mc.replicates)
    workers = mc.workers()
    if workers == 1:
        for i in range(mc.replicates):
            out[i] = fn(i)
        return out

    def run_chunk(bounds):
        lo, hi = bounds
        for i in range(lo, hi):
            out[i] = fn(i)

    edges = np.linspace(0, mc.replicates, workers + 1, dtype=int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run_chunk, zip(edges[:-1], edges[1:])))
    return out


def _draw_interference(scenario: Scenario, mc: McConfig, replicate: int) -> float:
    rng = _substream(mc.master_seed, replicate)
    total = 0.0
    for i, lane in enumerate(scenario.lanes):
        consts = derive(scenario, i)
        if scenario.geometry_kind == GeometryKind.PPP:
            pattern = sample_ppp(lane, scenario.access, consts.delta_o, mc.window,
                                 rng, lane_index=i)
        else:
            pattern = sample_lattice(lane, scenario.access, consts.delta_o,
                                     mc.window, rng, lane_index=i)
        if scenario.fading.kind == "unit":
            draws = np.ones(len(pattern))
        else:
            draws = scenario.fading.sampler(rng, len(pattern))
        total += aggregate_interference(pattern, consts, draws, lane.offset)
    return total


def _empirical_curve(samples: np.ndarray) -> DistributionCurve:
    n = samples.size
    order = np.sort(samples)
    # right-continuous step CDF; duplicate sample values keep the top step
    grid, last_idx = np.unique(order, return_index=True)
    counts = np.diff(np.append(last_idx, n))
    cdf = np.cumsum(counts) / n
    if grid.size == 1:
        grid = np.array([grid[0], grid[0] + max(abs(grid[0]), 1.0) * 1e-12])
        cdf = np.array([cdf[0], cdf[0]])
    return DistributionCurve(grid=grid, cdf=cdf, method=InversionMethod.EMPIRICAL,
                             tolerance=1.628 / math.sqrt(n))


def _levy_regime(scenario: Scenario) -> bool:
    if abs(scenario.radar.pathloss_exp - 2.0) > 1e-9:
        return False
    return all(lane.offset == 0.0 for lane in scenario.lanes)


def mc_interference(scenario: Scenario, mc: McConfig,
                    sample_path: Optional[str] = None) -> McInterference:
    """One aggregate-interference sample per replicate, with summaries.

    The sample mean is suppressed (NaN with a flag) in the worst-case
    regime where the interference law is heavy-tailed with no mean.
    """
    samples = _map_replicates(lambda i: _draw_interference(scenario, mc, i), mc)
    if sample_path is not None:
        samples.astype("<f8").tofile(sample_path)
    suppressed = _levy_regime(scenario)
    if suppressed:
        mean = McEstimate(value=math.nan, ci_halfwidth=0.0,
                          replicates=mc.replicates, seed=mc.master_seed)
    else:
        m = float(samples.mean())
        hw = _Z99 * float(samples.std(ddof=1)) / math.sqrt(mc.replicates)
        mean = McEstimate(value=m, ci_halfwidth=hw,
                          replicates=mc.replicates, seed=mc.master_seed)
    return McInterference(samples=samples, empirical_cdf=_empirical_curve(samples),
                          mean=mean, mean_suppressed=suppressed)


def mc_ranging_success(scenario: Scenario, range_grid, mc: McConfig,
                       noise: Optional[float] = None) -> McPerformance:
    """Empirical p_s(R): fraction of replicates with SINR >= T.

    The signal power is deterministic in R, so the interference samples
    are drawn once and reused across the whole range grid.
    """
    grid = np.asarray(range_grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("range grid must be positive")
    consts = derive(scenario, 0)
    n = noise if noise is not None else scenario.radar.noise_power
    samples = _map_replicates(lambda i: _draw_interference(scenario, mc, i), mc)
    t = scenario.radar.sinr_threshold
    ps = np.empty(grid.shape)
    hw = np.empty(grid.shape)
    denom = samples + n
    for i, r in enumerate(grid):
        s = (consts.gamma1 * consts.gamma2 * consts.tx_power
             * r ** (-2.0 * consts.pathloss_exp))
        # zero interference-plus-noise means an infinite SINR: a success
        ok = np.where(denom > 0, s >= t * denom, True)
        p = float(np.mean(ok))
        ps[i] = p
        hw[i] = _Z99 * math.sqrt(max(p * (1.0 - p), 1.0 / mc.replicates) / mc.replicates)
    curve = PerformanceCurve(abscissa=grid, values=ps, kind=CurveKind.PS_VS_RANGE)
    return McPerformance(curve=curve, ci_halfwidth=hw,
                         replicates=mc.replicates, seed=mc.master_seed)


def _merged_poisson_bins(counts: np.ndarray, mean: float, min_expected: float = 5.0):
    """Observed/expected count-histogram bins with expected >= min_expected."""
    n = counts.size
    kmax = int(counts.max())
    pmf = stats.poisson.pmf(np.arange(kmax + 1), mean)
    pmf = np.append(pmf, max(1.0 - pmf.sum(), 0.0))  # k > kmax tail
    observed = np.bincount(counts, minlength=kmax + 2).astype(float)
    expected = n * pmf
    obs_m, exp_m = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_m.append(acc_o)
            exp_m.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and obs_m:
        obs_m[-1] += acc_o
        exp_m[-1] += acc_e
    return np.asarray(obs_m), np.asarray(exp_m)


def mc_convergence_bl_to_ppp(lambda_i: float, delta_list: Sequence[float],
                             intervals, mc: McConfig) -> list[GofRow]:
    """Lattice-to-Poisson convergence experiment.

    For each lattice spacing delta (with retention xi = delta*lambda_i),
    interferer counts in the given equal-length intervals are tested
    against the Poisson law of the limiting process: a chi-squared GoF
    on the count histogram plus an empirical total-variation distance.
    """
    if lambda_i <= 0:
        raise ValueError("lambda_i must be positive")
    iv = [(float(lo), float(hi)) for lo, hi in intervals]
    lengths = {round(hi - lo, 9) for lo, hi in iv}
    if len(lengths) != 1:
        raise ValueError("intervals must share a common length")
    length = lengths.pop()
    mean = lambda_i * length
    window = max(hi for _, hi in iv) + 1.0
    rows = []
    for delta in delta_list:
        xi = delta * lambda_i
        if xi > 1.0 + 1e-12:
            raise ValueError(f"delta={delta} gives xi={xi} > 1")
        lane = Lane(offset=0.0, density=1.0 / delta)
        access = MediumAccess(duty_cycle=min(xi, 1.0))
        all_counts = np.empty((mc.replicates, len(iv)), dtype=int)
        for rep in range(mc.replicates):
            rng = _substream(mc.master_seed, rep)
            pattern = sample_lattice(lane, access, 0.0, window, rng)
            all_counts[rep] = count_in_intervals(pattern, iv)
        counts = all_counts.ravel()
        obs, exp = _merged_poisson_bins(counts, mean)
        if obs.size < 2:
            chi2, dof, pval = 0.0, 1, 1.0
        else:
            dof = obs.size - 1
            chi2 = float(np.sum((obs - exp) ** 2 / exp))
            pval = float(stats.chi2.sf(chi2, dof))
        kmax = int(counts.max())
        emp = np.bincount(counts, minlength=kmax + 1) / counts.size
        pois = stats.poisson.pmf(np.arange(kmax + 1), mean)
        tv = 0.5 * (np.abs(emp - pois).sum() + max(1.0 - pois.sum(), 0.0))
        rows.append(GofRow(spacing=float(delta), duty_cycle=float(xi), chi2=chi2,
                           dof=dof, p_value=pval, tv_distance=float(tv)))
    return rows
