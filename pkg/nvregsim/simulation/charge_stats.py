"""
Charge statistics
Poisson-mixture fits of charge-initialization photon histograms, the
post-selection threshold trade-off and the DEER-asymmetry charge probe.
"""
from dataclasses import dataclass
import logging
from typing import Dict, List, Optional, Sequence as SequenceType, Tuple, Union

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp
from scipy.stats import poisson

from nvregsim.core.errors import ChargeStatsError
from nvregsim.core.fitting import least_squares_fit
from nvregsim.simulation.readout import ChargeMixture
from nvregsim.simulation.sequences import deer_asymmetry, deer_scan

logger = logging.getLogger(__name__)

COMPONENT_LABELS = ("00", "-0", "--")
CHARGE_INIT_WINDOW_MS = 3.5
CHARGE_READ_WINDOW_MS = 2.9
MIN_IDENTIFIABLE_SHOTS = 10_000
COLLAPSE_TOLERANCE = 0.05


@dataclass(frozen=True)
class PhotonHistogram:
    """Shots per photon number n = 0, 1, ... collected in a gating window."""

    counts: np.ndarray
    window_ms: float = CHARGE_INIT_WINDOW_MS

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size == 0:
            raise ChargeStatsError("photon histogram must be a non-empty 1-D array")
        if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise ChargeStatsError("photon histogram bins must be non-negative integers")
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @classmethod
    def from_photon_numbers(cls, photons: SequenceType[int], window_ms: float = CHARGE_INIT_WINDOW_MS) -> "PhotonHistogram":
        photons = np.asarray(photons, dtype=np.int64)
        if photons.size == 0:
            raise ChargeStatsError("no shots to histogram")
        return cls(np.bincount(photons), window_ms)

    @classmethod
    def from_rows(cls, rows: SequenceType[Tuple[int, int]], window_ms: float = CHARGE_INIT_WINDOW_MS) -> "PhotonHistogram":
        """(n_photons, count) rows, e.g. from a CSV file; missing bins are zero."""
        if not rows:
            raise ChargeStatsError("histogram file has no rows")
        size = max(int(n) for n, _ in rows) + 1
        counts = np.zeros(size, dtype=np.int64)
        for n, c in rows:
            if int(n) < 0:
                raise ChargeStatsError(f"negative photon number {n}")
            counts[int(n)] += int(c)
        return cls(counts, window_ms)

    @property
    def total_shots(self) -> int:
        return int(self.counts.sum())

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.counts.size)

    @property
    def normalized(self) -> np.ndarray:
        return self.counts / self.total_shots

    def percentile(self, q: float) -> int:
        cumulative = np.cumsum(self.counts) / self.total_shots
        return int(np.searchsorted(cumulative, q / 100.0))

    def truncated(self, max_photons: int) -> "PhotonHistogram":
        return PhotonHistogram(self.counts[: max_photons + 1], self.window_ms)


# ============================
# MIXTURE FIT
# ============================

@dataclass(frozen=True)
class MixtureFit:
    lambdas: np.ndarray
    weights: np.ndarray
    lambda_sigmas: np.ndarray
    weight_sigmas: np.ndarray
    method: str
    collapsed: bool
    converged: bool
    neg_log_likelihood: float

    @property
    def labels(self) -> Tuple[str, ...]:
        if self.lambdas.size == len(COMPONENT_LABELS):
            return COMPONENT_LABELS
        return tuple(f"c{i}" for i in range(self.lambdas.size))

    def weight(self, label: str) -> float:
        return float(self.weights[self.labels.index(label)])

    def pmf(self, n: np.ndarray) -> np.ndarray:
        return mixture_pmf(n, self.lambdas, self.weights)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "components": [
                {"label": lbl, "lambda": float(lam), "lambda_sigma": float(sl), "weight": float(w), "weight_sigma": float(sw)}
                for lbl, lam, sl, w, sw in zip(self.labels, self.lambdas, self.lambda_sigmas, self.weights, self.weight_sigmas)
            ],
            "collapsed": self.collapsed,
            "converged": self.converged,
            "neg_log_likelihood": self.neg_log_likelihood,
        }


def mixture_pmf(n: np.ndarray, lambdas: SequenceType[float], weights: SequenceType[float]) -> np.ndarray:
    n = np.asarray(n)
    return sum(w * poisson.pmf(n, lam) for w, lam in zip(weights, lambdas))


def _neg_log_likelihood(counts: np.ndarray, n: np.ndarray, lambdas: np.ndarray, weights: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        log_w = np.log(np.clip(weights, 0.0, None))
    log_terms = log_w[:, None] + poisson.logpmf(n[None, :], np.clip(lambdas, 1e-12, None)[:, None])
    return float(-np.sum(counts * logsumexp(log_terms, axis=0)))


def _unpack(theta: np.ndarray, k: int, fixed_lambdas: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Softmax weights (first logit pinned at 0) and increasing rates from cumulative exponentials."""
    logits = np.concatenate(([0.0], theta[: k - 1]))
    weights = np.exp(logits - logsumexp(logits))
    if fixed_lambdas is not None:
        return fixed_lambdas, weights
    lambdas = np.cumsum(np.exp(theta[k - 1:]))
    return lambdas, weights


def _initial_lambdas(hist: PhotonHistogram, k: int) -> np.ndarray:
    quantiles = np.linspace(10, 90, k)
    guess = np.array([max(hist.percentile(q), 0.5) for q in quantiles], dtype=float)
    for i in range(1, k):
        guess[i] = max(guess[i], guess[i - 1] * 1.3)
    return guess


def _hessian(func, x: np.ndarray, step: float = 1e-4) -> np.ndarray:
    n = x.size
    hess = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            hi = step * max(abs(x[i]), 1.0)
            hj = step * max(abs(x[j]), 1.0)
            def shifted(si, sj):
                y = x.copy()
                y[i] += si
                y[j] += sj
                return func(y)
            value = (shifted(hi, hj) - shifted(hi, -hj) - shifted(-hi, hj) + shifted(-hi, -hj)) / (4 * hi * hj)
            hess[i, j] = hess[j, i] = value
    return hess


def _ml_sigmas(counts, n, lambdas, weights, fixed: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Observed-information errors in the natural parameters (rates, first k-1 weights)."""
    k = lambdas.size

    def nll(x: np.ndarray) -> float:
        lam = lambdas if fixed else x[:k]
        w_free = x[k:] if not fixed else x
        w = np.concatenate((w_free, [1.0 - w_free.sum()]))
        if np.any(w < 0) or np.any(lam <= 0):
            return 1e300
        return _neg_log_likelihood(counts, n, lam, w)

    x0 = weights[:-1] if fixed else np.concatenate((lambdas, weights[:-1]))
    if x0.size == 0:
        return np.zeros(k), np.zeros(k)
    with np.errstate(all="ignore"):
        hess = _hessian(nll, x0.astype(float))
        try:
            cov = np.linalg.inv(hess)
        except np.linalg.LinAlgError:
            cov = np.linalg.pinv(hess)
    diag = np.sqrt(np.abs(np.diag(cov)))
    w_cov = cov if fixed else cov[k:, k:]
    last = np.sqrt(abs(np.sum(w_cov)))
    weight_sigmas = np.concatenate((diag if fixed else diag[k:], [last]))
    lambda_sigmas = np.zeros(k) if fixed else diag[:k]
    return lambda_sigmas, weight_sigmas


def _fit_ml(hist: PhotonHistogram, k: int, fixed: Optional[np.ndarray], init_lambdas: np.ndarray) -> MixtureFit:
    counts, n = hist.counts.astype(float), hist.photon_numbers
    theta0 = np.zeros(k - 1)
    if fixed is None:
        steps = np.diff(np.concatenate(([0.0], init_lambdas)))
        theta0 = np.concatenate((theta0, np.log(steps)))

    def objective(theta: np.ndarray) -> float:
        lambdas, weights = _unpack(theta, k, fixed)
        return _neg_log_likelihood(counts, n, lambdas, weights)

    solution = minimize(objective, theta0, method="L-BFGS-B")
    if not solution.success:
        solution = minimize(objective, solution.x, method="Nelder-Mead", options={"maxiter": 20000, "xatol": 1e-8, "fatol": 1e-8})
    lambdas, weights = _unpack(solution.x, k, fixed)
    lambda_sigmas, weight_sigmas = _ml_sigmas(counts, n, lambdas, weights, fixed is not None)
    return MixtureFit(
        lambdas, weights, lambda_sigmas, weight_sigmas, "ml", False, bool(solution.success), float(solution.fun)
    )


def _fit_ls(hist: PhotonHistogram, k: int, fixed: Optional[np.ndarray], init_lambdas: np.ndarray) -> MixtureFit:
    """Least squares on the normalized histogram with free, unnormalized weights."""
    n, ys = hist.photon_numbers, hist.normalized

    if fixed is None:
        def model(xs, params):
            return mixture_pmf(xs, params[k:], params[:k])
        init = np.concatenate((np.full(k, 1.0 / k), init_lambdas))
        bounds = (np.zeros(2 * k), np.full(2 * k, np.inf))
        names = [f"A{i}" for i in range(k)] + [f"lambda{i}" for i in range(k)]
    else:
        def model(xs, params):
            return mixture_pmf(xs, fixed, params)
        init = np.full(k, 1.0 / k)
        bounds = (np.zeros(k), np.full(k, np.inf))
        names = [f"A{i}" for i in range(k)]

    fit = least_squares_fit(model, n, ys, init, bounds=bounds, names=names)
    raw_w = fit.params[:k]
    total = raw_w.sum()
    if total <= 0:
        raise ChargeStatsError("least-squares mixture fit returned zero total weight")
    lambdas = fixed if fixed is not None else fit.params[k:]
    lambda_sigmas = np.zeros(k) if fixed is not None else fit.sigmas[k:]
    order = np.argsort(lambdas)
    weights = raw_w / total
    weight_sigmas = fit.sigmas[:k] / total
    nll = _neg_log_likelihood(hist.counts.astype(float), n, lambdas, weights)
    return MixtureFit(
        lambdas[order], weights[order], lambda_sigmas[order], weight_sigmas[order], "ls", False, fit.converged, nll
    )


def fit_poisson_mixture(
    hist: PhotonHistogram,
    n_components: int = 3,
    method: str = "ml",
    fixed_lambdas: Optional[SequenceType[float]] = None,
    init_lambdas: Optional[SequenceType[float]] = None,
) -> MixtureFit:
    """p(n) = sum_i A_i Poisson(n; lambda_i), components ordered by increasing rate.

    With three components the labels are (00, -0, --).  ``fixed_lambdas``
    keeps the rates and fits only the weights, as for a post-selected
    histogram analysed with the rates of the unselected one.
    """
    if n_components < 1:
        raise ChargeStatsError(f"need at least one component, got {n_components}")
    if method not in ("ml", "ls"):
        raise ChargeStatsError(f"unknown mixture fit method {method!r}")
    if hist.total_shots == 0:
        raise ChargeStatsError("photon histogram is empty")
    if hist.total_shots < MIN_IDENTIFIABLE_SHOTS:
        logger.warning("only %d shots; mixture weights may be poorly identified", hist.total_shots)

    fixed = None
    if fixed_lambdas is not None:
        fixed = np.sort(np.asarray(fixed_lambdas, dtype=float))
        if fixed.size != n_components or np.any(fixed <= 0):
            raise ChargeStatsError(f"fixed rates {fixed_lambdas} do not match {n_components} positive components")
    init = np.sort(np.asarray(init_lambdas, dtype=float)) if init_lambdas is not None else _initial_lambdas(hist, n_components)

    fit = (_fit_ml if method == "ml" else _fit_ls)(hist, n_components, fixed, init)
    gaps = np.diff(fit.lambdas) / np.maximum(fit.lambdas[1:], 1e-12)
    collapsed = bool(np.any(gaps < COLLAPSE_TOLERANCE)) and fixed is None
    if collapsed:
        logger.warning("Poisson components collapsed: rates %s within %.0f%%", np.round(fit.lambdas, 3), 100 * COLLAPSE_TOLERANCE)
    return MixtureFit(
        fit.lambdas, fit.weights, fit.lambda_sigmas, fit.weight_sigmas, fit.method, collapsed, fit.converged,
        fit.neg_log_likelihood,
    )


# ============================
# SYNTHETIC DATA
# ============================

def _as_rng(rng: Union[None, int, np.random.Generator]) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def synthetic_histogram(
    weights: SequenceType[float],
    lambdas: SequenceType[float],
    shots: int,
    rng: Union[None, int, np.random.Generator] = None,
    window_ms: float = CHARGE_INIT_WINDOW_MS,
) -> PhotonHistogram:
    rng = _as_rng(rng)
    weights = np.asarray(weights, dtype=float)
    components = rng.choice(weights.size, size=shots, p=weights / weights.sum())
    return PhotonHistogram.from_photon_numbers(rng.poisson(np.asarray(lambdas)[components]), window_ms)


@dataclass(frozen=True)
class JointShots:
    """Per-shot photon numbers of the initialization and the readout windows."""

    n_init: np.ndarray
    n_read: np.ndarray

    def __post_init__(self):
        if np.shape(self.n_init) != np.shape(self.n_read):
            raise ChargeStatsError("initialization and readout photon arrays differ in length")

    def read_histogram(self, mask: Optional[np.ndarray] = None) -> PhotonHistogram:
        data = self.n_read if mask is None else self.n_read[mask]
        if data.size == 0:
            raise ChargeStatsError("post-selected set is empty")
        return PhotonHistogram.from_photon_numbers(data, CHARGE_READ_WINDOW_MS)


def synthetic_joint_shots(
    weights: SequenceType[float],
    lambdas_init: SequenceType[float],
    shots: int,
    rng: Union[None, int, np.random.Generator] = None,
    read_scale: float = CHARGE_READ_WINDOW_MS / CHARGE_INIT_WINDOW_MS,
) -> JointShots:
    """Both windows see the same charge configuration; the readout rates scale with window length."""
    rng = _as_rng(rng)
    weights = np.asarray(weights, dtype=float)
    lambdas = np.asarray(lambdas_init, dtype=float)
    components = rng.choice(weights.size, size=shots, p=weights / weights.sum())
    return JointShots(rng.poisson(lambdas[components]), rng.poisson(read_scale * lambdas[components]))


# ============================
# THRESHOLD TRADE-OFF
# ============================

@dataclass(frozen=True)
class ThresholdModel:
    """Analytic post-selection on n_init >= threshold for a known mixture (rates ascending, last is --)."""

    weights: Tuple[float, ...]
    lambdas_init: Tuple[float, ...]
    read_scale: float = CHARGE_READ_WINDOW_MS / CHARGE_INIT_WINDOW_MS

    def _kept(self, threshold: int) -> np.ndarray:
        # P(N >= t) = sf(t - 1)
        return np.asarray(self.weights) * poisson.sf(threshold - 1, np.asarray(self.lambdas_init))

    def fidelity(self, threshold: int) -> float:
        kept = self._kept(threshold)
        if kept.sum() <= 0:
            raise ChargeStatsError(f"no shots survive threshold {threshold}")
        return float(kept[-1] / kept.sum())

    def noise_ratio(self, threshold: int) -> float:
        read = self.read_scale * np.asarray(self.lambdas_init)
        kept_photons = float(np.dot(self._kept(threshold), read))
        if kept_photons <= 0:
            raise ChargeStatsError(f"no photons survive threshold {threshold}")
        return float(np.sqrt(np.dot(self.weights, read) / kept_photons))

    def kept_fraction(self, threshold: int) -> float:
        return float(self._kept(threshold).sum() / np.sum(self.weights))


@dataclass(frozen=True)
class ThresholdPoint:
    threshold: int
    fidelity: float
    noise_ratio: float
    kept_fraction: float

    def to_dict(self) -> dict:
        return {
            "n_thresh": self.threshold,
            "fidelity": self.fidelity,
            "noise_ratio": self.noise_ratio,
            "kept_fraction": self.kept_fraction,
        }


def threshold_tradeoff(
    source: Union[JointShots, ThresholdModel],
    thresholds: SequenceType[int],
    lambdas_read: Optional[SequenceType[float]] = None,
    method: str = "ml",
) -> List[ThresholdPoint]:
    """Post-selected (--) fidelity and relative shot noise per threshold.

    For joint shots the readout histogram of the kept shots is fitted with the
    rates fixed (``lambdas_read`` or those of the unselected readout fit);
    noise is sqrt(photons analysed without selection / photons kept).
    """
    if isinstance(source, ThresholdModel):
        return [
            ThresholdPoint(int(t), source.fidelity(t), source.noise_ratio(t), source.kept_fraction(t))
            for t in thresholds
        ]

    if lambdas_read is None:
        lambdas_read = fit_poisson_mixture(source.read_histogram(), method=method).lambdas
    total_photons = float(source.n_read.sum())
    points = []
    for t in thresholds:
        mask = source.n_init >= t
        if not mask.any():
            raise ChargeStatsError(f"post-selected set is empty at threshold {t}")
        kept_photons = float(source.n_read[mask].sum())
        if kept_photons <= 0:
            raise ChargeStatsError(f"no readout photons survive threshold {t}")
        fit = fit_poisson_mixture(source.read_histogram(mask), len(lambdas_read), method, fixed_lambdas=lambdas_read)
        points.append(
            ThresholdPoint(int(t), float(fit.weights[-1]), float(np.sqrt(total_photons / kept_photons)), float(mask.mean()))
        )
    return points


# ============================
# DEER ASYMMETRY
# ============================

def independent_asymmetry(p_minus: float) -> float:
    """|y0|/A of the Y-projected DEER trace with control in |0> for independent charge statistics."""
    if not 0 < p_minus <= 1:
        raise ChargeStatsError(f"NV- probability must be in (0, 1], got {p_minus}")
    return (1.0 - p_minus) / p_minus


def asymmetry_sweep(
    model,
    p_minus_values: SequenceType[float],
    tau1: float,
    tau2_values: SequenceType[float],
    n_pi: int = 32,
    **scan_options,
) -> Dict[float, float]:
    """DEER asymmetry of simulated Y-projection traces for independent charge statistics."""
    out = {}
    for p in p_minus_values:
        scan = deer_scan(
            model, tau1, tau2_values, n_pi, projection="Y", control_state="0",
            mixture=ChargeMixture.independent(float(p)), **scan_options,
        )
        out[float(p)] = deer_asymmetry(scan.fit)
    return out
