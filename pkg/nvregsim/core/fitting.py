"""
Nonlinear least-squares fitting
Damped Gauss-Newton (Levenberg-Marquardt) on a forward-difference Jacobian,
with normal-equation covariances, plus the decay and sine model families used
by the benchmarking and DEER analyses.
"""
from dataclasses import dataclass, field
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import lombscargle

from nvregsim.core.errors import FitError

logger = logging.getLogger(__name__)

ModelFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

JACOBIAN_STEP = 1e-6
SINGULAR_CONDITION = 1e12


@dataclass(frozen=True)
class FitResult:
    params: np.ndarray
    sigmas: np.ndarray
    residual: float
    converged: bool
    singular: bool = False
    message: str = ""
    names: Tuple[str, ...] = field(default_factory=tuple)
    nfev: int = 0

    def value(self, name: str) -> float:
        return float(self.params[self.names.index(name)])

    def sigma(self, name: str) -> float:
        return float(self.sigmas[self.names.index(name)])

    def to_dict(self) -> dict:
        return {
            "params": {n: float(v) for n, v in zip(self.names, self.params)},
            "sigmas": {n: float(s) for n, s in zip(self.names, self.sigmas)},
            "residual": float(self.residual),
            "converged": bool(self.converged),
            "singular": bool(self.singular),
        }


def forward_difference_jacobian(func: Callable[[np.ndarray], np.ndarray], params: np.ndarray) -> np.ndarray:
    f0 = func(params)
    jac = np.empty((f0.size, params.size))
    for j in range(params.size):
        step = JACOBIAN_STEP * max(abs(params[j]), 1.0)
        shifted = params.copy()
        shifted[j] += step
        jac[:, j] = (func(shifted) - f0) / step
    return jac


def least_squares_fit(
    model: ModelFunction,
    xs: Sequence[float],
    ys: Sequence[float],
    init: Sequence[float],
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    names: Optional[Sequence[str]] = None,
    max_nfev: int = 2000,
) -> FitResult:
    """Fit ``model(xs, params)`` to ``ys``.

    Unbounded problems run MINPACK's Levenberg-Marquardt; bounded ones fall back
    to the trust-region reflective solver.  Non-convergence returns the best
    point found with ``converged=False``; singular normal equations switch the
    covariance to a pseudo-inverse and set ``singular=True``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    init = np.asarray(init, dtype=float)
    if xs.shape[0] != ys.shape[0]:
        raise FitError(f"xs and ys differ in length ({xs.shape[0]} vs {ys.shape[0]})")
    if ys.size < init.size:
        raise FitError(f"{ys.size} points cannot determine {init.size} parameters")
    names = tuple(names) if names is not None else tuple(f"p{i}" for i in range(init.size))

    def residuals(params: np.ndarray) -> np.ndarray:
        return np.asarray(model(xs, params), dtype=float) - ys

    def jacobian(params: np.ndarray) -> np.ndarray:
        return forward_difference_jacobian(residuals, params)

    options = dict(jac=jacobian, xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=max_nfev)
    if bounds is None:
        options["method"] = "lm"
    else:
        lower, upper = (np.asarray(b, dtype=float) for b in bounds)
        init = np.clip(init, lower, upper)
        options.update(method="trf", bounds=(lower, upper))

    try:
        solution = least_squares(residuals, init, **options)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise FitError(f"least-squares solver failed: {exc}") from exc

    params = solution.x
    res = solution.fun
    jac = jacobian(params)
    jtj = jac.T @ jac
    dof = max(ys.size - params.size, 1)
    variance = float(res @ res) / dof

    singular = False
    with np.errstate(all="ignore"):
        condition = np.linalg.cond(jtj)
    if not np.isfinite(condition) or condition > SINGULAR_CONDITION:
        singular = True
        covariance = np.linalg.pinv(jtj) * variance
        logger.debug("singular normal equations (cond=%.3g); using pseudo-inverse", condition)
    else:
        covariance = np.linalg.inv(jtj) * variance

    converged = solution.status > 0
    if not converged:
        logger.warning("fit did not converge: %s", solution.message)
    return FitResult(
        params=params,
        sigmas=np.sqrt(np.abs(np.diag(covariance))),
        residual=float(np.linalg.norm(res)),
        converged=converged,
        singular=singular,
        message=str(solution.message),
        names=names,
        nfev=int(solution.nfev),
    )


# ============================
# DECAY FAMILY: y = y0 + a * p**n
# ============================

def exponential_decay(xs: np.ndarray, a: float, p: float, y0: float) -> np.ndarray:
    return y0 + a * np.power(p, xs)


def _decay_guess(xs: np.ndarray, ys: np.ndarray, y0: float) -> Tuple[float, float]:
    shifted = ys - y0
    mask = shifted > 0
    if mask.sum() >= 2 and np.ptp(xs[mask]) > 0:
        slope, intercept = np.polyfit(xs[mask], np.log(shifted[mask]), 1)
        return float(np.exp(intercept)), float(np.clip(np.exp(slope), 1e-3, 1.5))
    return float(ys[0] - y0), 0.95


def fit_exponential(xs: Sequence[float], ys: Sequence[float], fix_y0: Optional[float] = None) -> FitResult:
    """Fit ``y0 + a p**n``; the returned parameters are always (a, p, y0)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    names = ("a", "p", "y0")

    if fix_y0 is not None:
        a0, p0 = _decay_guess(xs, ys, fix_y0)
        fit = least_squares_fit(
            lambda x, q: exponential_decay(x, q[0], q[1], fix_y0), xs, ys, (a0, p0), names=("a", "p")
        )
        return FitResult(
            params=np.append(fit.params, fix_y0),
            sigmas=np.append(fit.sigmas, 0.0),
            residual=fit.residual,
            converged=fit.converged,
            singular=fit.singular,
            message=fit.message,
            names=names,
            nfev=fit.nfev,
        )

    a0, p0 = _decay_guess(xs, ys, 0.0)
    return least_squares_fit(lambda x, q: exponential_decay(x, *q), xs, ys, (a0, p0, 0.0), names=names)


# ============================
# SINE FAMILY: y = A sin(2 pi f x + phi) + y0
# ============================

def sine_wave(xs: np.ndarray, amplitude: float, frequency: float, phase: float, offset: float) -> np.ndarray:
    return amplitude * np.sin(2.0 * np.pi * frequency * xs + phase) + offset


def estimate_frequency(xs: np.ndarray, ys: np.ndarray) -> float:
    """Dominant frequency from the discrete spectrum of the mean-free data."""
    centered = ys - ys.mean()
    steps = np.diff(xs)
    if steps.size and np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
        n_pad = 16 * max(xs.size, 16)
        spectrum = np.abs(np.fft.rfft(centered, n_pad))
        freqs = np.fft.rfftfreq(n_pad, d=steps[0])
        k = int(np.argmax(spectrum[1:])) + 1
        if 0 < k < spectrum.size - 1:
            left, mid, right = spectrum[k - 1 : k + 2]
            denom = left - 2 * mid + right
            shift = 0.5 * (left - right) / denom if denom != 0 else 0.0
            return float(freqs[k] + shift * (freqs[1] - freqs[0]))
        return float(freqs[k])

    span = xs.max() - xs.min()
    trial = np.linspace(0.25 / span, 0.5 * xs.size / span, 4000)
    power = lombscargle(xs, centered, 2.0 * np.pi * trial)
    return float(trial[int(np.argmax(power))])


def fit_sine(xs: Sequence[float], ys: Sequence[float], frequency_guess: Optional[float] = None) -> FitResult:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    f0 = frequency_guess if frequency_guess is not None else estimate_frequency(xs, ys)

    # linear solve for amplitude/phase/offset at the trial frequency
    basis = np.column_stack([np.sin(2 * np.pi * f0 * xs), np.cos(2 * np.pi * f0 * xs), np.ones_like(xs)])
    (s, c, offset), *_ = np.linalg.lstsq(basis, ys, rcond=None)
    amplitude = float(np.hypot(s, c)) or float(np.std(ys)) or 1.0
    phase = float(np.arctan2(c, s))

    fit = least_squares_fit(
        lambda x, q: sine_wave(x, *q),
        xs,
        ys,
        (amplitude, f0, phase, float(offset)),
        names=("amplitude", "frequency", "phase", "offset"),
    )
    params = fit.params.copy()
    if params[0] < 0:
        params[0] = -params[0]
        params[2] += np.pi
    if params[1] < 0:
        params[1] = -params[1]
        params[2] = np.pi - params[2]
    params[2] = float(np.angle(np.exp(1j * params[2])))
    return FitResult(
        params=params,
        sigmas=fit.sigmas,
        residual=fit.residual,
        converged=fit.converged,
        singular=fit.singular,
        message=fit.message,
        names=fit.names,
        nfev=fit.nfev,
    )


def sine_minimum_near(fit: FitResult, target: float) -> float:
    """Abscissa of the fitted-sine minimum closest to ``target``."""
    frequency = fit.value("frequency")
    phase = fit.value("phase")
    if frequency <= 0:
        raise FitError("fitted sine has no positive frequency")
    # sin(2 pi f x + phi) = -1  <=>  2 pi f x + phi = -pi/2 + 2 pi k
    k = np.round((2 * np.pi * frequency * target + phase + np.pi / 2) / (2 * np.pi))
    return float((-np.pi / 2 - phase + 2 * np.pi * k) / (2 * np.pi * frequency))
