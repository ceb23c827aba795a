"""Monte Carlo sampling of solution values and the statistics built on it.

Random feasible partitions are drawn uniformly; for each one we record the
surrogate value (visited aisles, optionally length weighted) next to the
exact Return and S-shape objectives. The rest of the module fits a
bivariate normal to such pairs and answers conditional questions about the
exact objective given a surrogate value.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Instance
from .evaluation import evaluate_many

SURROGATES = ("AP1", "AP2")
CSV_HEADER = ("row", "y_pi", "x_return", "x_sshape")


class DegenerateSampleError(ValueError):
    pass


@dataclass(frozen=True)
class SamplingConfig:
    n: int = 5000
    master_seed: int = 0
    surrogate: str = "AP2"
    sshape_variant: str = "parity"
    workers: int = 1
    chunk: int = 64

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 samples")
        if self.surrogate not in SURROGATES:
            raise ValueError(f"surrogate must be one of {SURROGATES}")


@dataclass(frozen=True)
class SampleSeries:
    y_pi: np.ndarray
    x_return: np.ndarray
    x_sshape: np.ndarray
    seeds: tuple | None = None

    def __post_init__(self):
        n = len(self.y_pi)
        if len(self.x_return) != n or len(self.x_sshape) != n:
            raise ValueError("sample columns differ in length")

    def __len__(self):
        return len(self.y_pi)

    def column(self, name: str) -> np.ndarray:
        return {"y_pi": self.y_pi, "return": self.x_return, "x_return": self.x_return,
                "sshape": self.x_sshape, "x_sshape": self.x_sshape}[name]


def row_permutation(n_orders: int, master_seed: int, row: int) -> np.ndarray:
    return np.random.default_rng((master_seed, row)).permutation(n_orders)


def sample_objectives(instance: Instance, config: SamplingConfig) -> SampleSeries:
    """Draw ``config.n`` uniform partitions and evaluate all objectives on each.

    Row ``i`` uses the generator seeded with ``(master_seed, i)``, so the
    result does not depend on ``workers`` or chunking.
    """
    n_i = instance.n_orders

    def run(lo: int, hi: int):
        perms = np.stack([row_permutation(n_i, config.master_seed, r) for r in range(lo, hi)])
        ev = evaluate_many(instance, perms)
        y = ev.aisle_visits if config.surrogate == "AP1" else ev.weighted_aisle_visits
        return (y.astype(float), ev.combined("return"),
                ev.combined("sshape", config.sshape_variant))

    bounds = [(lo, min(lo + config.chunk, config.n)) for lo in range(0, config.n, config.chunk)]
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            parts = list(pool.map(lambda b: run(*b), bounds))
    else:
        parts = [run(*b) for b in bounds]
    y, xr, xs = (np.concatenate([p[k] for p in parts]) for k in range(3))
    seeds = tuple((config.master_seed, r) for r in range(config.n))
    return SampleSeries(y, xr, xs, seeds)


def write_series_csv(series: SampleSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r, (y, xr, xs) in enumerate(zip(series.y_pi, series.x_return, series.x_sshape)):
            w.writerow((r, repr(float(y)), repr(float(xr)), repr(float(xs))))


def read_series_csv(path) -> SampleSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
    data = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float).reshape(-1, 3)
    return SampleSeries(data[:, 0], data[:, 1], data[:, 2])


# -- normality ------------------------------------------------------------

def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def kolmogorov_sf(lam: float, terms: int = 100) -> float:
    """P(K > lam) for the limiting Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        # the alternating series converges too slowly here; use the dual theta form
        s = sum(math.exp(-((2 * k - 1) ** 2) * math.pi ** 2 / (8 * lam * lam))
                for k in range(1, terms + 1))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2 * math.pi) / lam * s))
    s = sum((-1) ** (k - 1) * math.exp(-2 * k * k * lam * lam) for k in range(1, terms + 1))
    return min(1.0, max(0.0, 2.0 * s))


def ks_normality_test(column: Sequence[float]) -> tuple[float, float]:
    """One-sample K-S statistic against a normal with the sample's mean and sd."""
    x = np.sort(np.asarray(column, dtype=float))
    n = len(x)
    if n < 8:
        raise ValueError("K-S test needs at least 8 observations")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise DegenerateSampleError("degenerate sample: zero variance")
    cdf = np.array([norm_cdf(v) for v in (x - x.mean()) / sd])
    d_plus = np.max(np.arange(1, n + 1) / n - cdf)
    d_minus = np.max(cdf - np.arange(n) / n)
    d = float(max(d_plus, d_minus))
    return d, kolmogorov_sf(math.sqrt(n) * d)


# -- bivariate normal -----------------------------------------------------

@dataclass(frozen=True)
class BivariateFit:
    mu_x: float
    mu_y: float
    sigma_x: float
    sigma_y: float
    rho: float
    n: int = 0


def fit_arrays(x: Sequence[float], y: Sequence[float]) -> BivariateFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need two equal-length columns with at least 2 rows")
    sx, sy = x.std(ddof=1), y.std(ddof=1)
    if not (sx > 0 and sy > 0):
        raise DegenerateSampleError("degenerate sample: zero variance")
    rho = float(np.sum((x - x.mean()) * (y - y.mean())) / ((len(x) - 1) * sx * sy))
    return BivariateFit(float(x.mean()), float(y.mean()), float(sx), float(sy),
                        min(1.0, max(-1.0, rho)), len(x))


def fit_bivariate(series: SampleSeries, pair: str = "sshape") -> BivariateFit:
    """Fit (exact objective, surrogate) for ``pair`` in {"return", "sshape"}."""
    return fit_arrays(series.column(pair), series.y_pi)


def conditional_mean(fit: BivariateFit, y0: float) -> float:
    if not fit.sigma_y > 0:
        raise DegenerateSampleError("sigma_y must be positive")
    return fit.mu_x + fit.rho * fit.sigma_x * (y0 - fit.mu_y) / fit.sigma_y


# Acklam's rational approximation, refined by one Halley step.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def norm_ppf(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if p > 0.5:
        # 1 - p is exact here, and the lower tail keeps full precision
        return -norm_ppf(1.0 - p)
    if p < 0.02425:
        q = math.sqrt(-2 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1)
    else:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1)
    e = norm_cdf(x) - p
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


def conditional_sd(fit: BivariateFit) -> float:
    if abs(fit.rho) >= 1.0:
        raise DegenerateSampleError("|rho| = 1: conditional distribution is degenerate")
    return fit.sigma_x * math.sqrt(1.0 - fit.rho ** 2)


def conditional_upper_bound(fit: BivariateFit, y0: float, alpha: float) -> float:
    """z with P(X < z | Y = y0) = 1 - alpha under the fitted bivariate normal."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return conditional_sd(fit) * norm_ppf(1.0 - alpha) + conditional_mean(fit, y0)


# -- empirical conditional CDF -------------------------------------------

class EmpiricalCdf:
    """Joint empirical CDF of (X, Y) pairs."""

    def __init__(self, x: Sequence[float], y: Sequence[float]):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(x) != len(y) or not len(x):
            raise ValueError("need equal-length non-empty columns")
        order = np.argsort(y, kind="stable")
        self.x = x[order]
        self.y = y[order]
        self.n = len(x)

    @classmethod
    def from_series(cls, series: SampleSeries, pair: str = "sshape") -> "EmpiricalCdf":
        return cls(series.column(pair), series.y_pi)

    def _prefix(self, v: float) -> int:
        return int(np.searchsorted(self.y, v, side="right"))

    def marginal_y(self, v: float) -> float:
        return self._prefix(v) / self.n

    def joint(self, u: float, v: float) -> float:
        return np.count_nonzero(self.x[:self._prefix(v)] <= u) / self.n


def empirical_conditional(ecdf: EmpiricalCdf, z: float, y0: float) -> float:
    """P(X <= z | Y <= y0) as a ratio of indicator counts."""
    k = ecdf._prefix(y0)
    if k == 0:
        raise ValueError("no mass below Y_0")
    return np.count_nonzero(ecdf.x[:k] <= z) / k


# -- surrogate scoring ----------------------------------------------------

@dataclass(frozen=True)
class McrpScore:
    corr: float
    beta: float
    epsilon: float

    @property
    def score(self) -> float:
        return self.corr - self.epsilon * math.log(self.beta)


def mcrp_score(series: SampleSeries, beta: float, epsilon: float = 0.0,
               pair: str = "sshape") -> McrpScore:
    if not beta > 0:
        raise ValueError("beta must be positive")
    if beta > 1:
        raise ValueError("beta must not exceed 1")
    return McrpScore(fit_bivariate(series, pair).rho, beta, epsilon)


def write_fit_report(fit: BivariateFit, score: McrpScore | None, path=None) -> str:
    lines = [f"{k}={getattr(fit, k)!r}" for k in ("mu_x", "mu_y", "sigma_x", "sigma_y", "rho", "n")]
    if score is not None:
        lines += [f"beta={score.beta!r}", f"epsilon={score.epsilon!r}", f"score={score.score!r}"]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
