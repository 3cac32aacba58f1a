"""Closed-form success/convergence bounds for the multi-round methods.

Everything here is a pure function of scalar inputs; the measured
quantities (sigma_min of the clean subsystem, norm of the true solution,
smallest corruption magnitude) come from the caller.
"""

import math
from dataclasses import dataclass

from .exceptions import InvalidInputsError

# Snap tolerance for the iteration-count ratio: the printed formula can land
# exactly on an integer, which float division may miss by one ulp.
_CEIL_SNAP = 1e-9


@dataclass(frozen=True)
class BoundInputs:
    m: int
    n: int
    s: int
    delta: float
    eps_star: float
    x_star_norm: float
    sigma_min_star: float

    def validate(self):
        if self.m < 1 or self.n < 1 or self.s < 0 or self.s >= self.m:
            raise InvalidInputsError(f"need 0 <= s < m and m, n >= 1, got m={self.m} n={self.n} s={self.s}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidInputsError(f"delta must lie in (0, 1), got {self.delta}")
        if self.eps_star <= 0.0:
            raise InvalidInputsError(f"eps_star must be positive, got {self.eps_star}")
        if self.x_star_norm < 0.0:
            raise InvalidInputsError("x_star_norm must be nonnegative")
        if self.sigma_min_star <= 0.0:
            raise InvalidInputsError("sigma_min_star must be positive")
        if self.sigma_min_star**2 > self.m - self.s + 1e-9:
            raise InvalidInputsError(
                f"sigma_min_star^2 = {self.sigma_min_star**2:.6g} exceeds m - s = {self.m - self.s}")


@dataclass(frozen=True)
class BoundReport:
    k_star: int
    p_single: float
    p_thm1: float
    p_thm2: float
    w_max: int


def _clamp01(p):
    return min(1.0, max(0.0, p))


def compute_k_star(inputs):
    """Iterations per round guaranteeing the detection-horizon probability.

    Zero whenever the origin already lies inside the horizon (the
    numerator of the printed ratio is nonnegative) or the per-iteration
    contraction rate degenerates to zero.
    """
    inputs.validate()
    if inputs.x_star_norm == 0.0:
        return 0
    num = math.log(inputs.delta * inputs.eps_star**2 / (4.0 * inputs.x_star_norm**2))
    if num >= 0.0:
        return 0
    rate = inputs.sigma_min_star**2 / (inputs.m - inputs.s)
    if rate >= 1.0:
        return 0
    ratio = num / math.log1p(-rate)
    nearest = round(ratio)
    if abs(ratio - nearest) < _CEIL_SNAP:
        return max(0, int(nearest))
    return max(0, math.ceil(ratio))


def single_round_success_lb(inputs, k_star):
    """Lower bound on P(round iterate lands inside the detection horizon)."""
    inputs.validate()
    if k_star < 0:
        raise InvalidInputsError("k_star must be >= 0")
    frac = (inputs.m - inputs.s) / inputs.m
    return _clamp01((1.0 - inputs.delta) * frac**k_star)


def mrkwor_success_lb(p_single, w):
    """P(at least one of w independent rounds succeeds) >= 1 - (1-p)^w."""
    if w < 1:
        raise InvalidInputsError("w must be >= 1")
    p = _clamp01(p_single)
    if p == 1.0:
        return 1.0
    return _clamp01(-math.expm1(w * math.log1p(-p)))


def _log_binom_pmf(w, j, log_p, log_q):
    return (math.lgamma(w + 1) - math.lgamma(j + 1) - math.lgamma(w - j + 1)
            + j * log_p + (w - j) * log_q)


def mrkworus_success_lb(p_single, w, s, d):
    """Binomial tail P(#successes >= ceil(s/d)) out of w rounds.

    Terms are evaluated in the log domain so w in the tens of thousands
    does not overflow. Reduces exactly to the single-success bound when
    d >= s.
    """
    if w < 1 or d < 1 or s < 0:
        raise InvalidInputsError("need w >= 1, d >= 1, s >= 0")
    need = -(-s // d)  # ceil(s / d)
    if need == 0:
        return 1.0
    if need > w:
        return 0.0
    p = _clamp01(p_single)
    if need == 1:
        return mrkwor_success_lb(p, w)
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    log_p = math.log(p)
    log_q = math.log1p(-p)
    head = sum(math.exp(_log_binom_pmf(w, j, log_p, log_q)) for j in range(need))
    return _clamp01(1.0 - head)


def max_rounds(m, n, d):
    """Largest round count that cannot exhaust the m - n row budget."""
    if m <= n or d < 1:
        raise InvalidInputsError(f"need m > n and d >= 1, got m={m} n={n} d={d}")
    return (m - n) // d


def bound_report(inputs, w, d):
    """Evaluate every bound at the given round count and per-round picks."""
    k_star = compute_k_star(inputs)
    p = single_round_success_lb(inputs, k_star)
    return BoundReport(
        k_star=k_star,
        p_single=p,
        p_thm1=mrkwor_success_lb(p, w),
        p_thm2=mrkworus_success_lb(p, w, inputs.s, d),
        w_max=max_rounds(inputs.m, inputs.n, d),
    )


def rk_expected_error_bound(sigma_min, frob_sq, k, init_err_sq):
    """Expected squared-error decay of the randomized iteration on a
    consistent system."""
    _check_rate(sigma_min, frob_sq, k, init_err_sq)
    rate = min(1.0, sigma_min**2 / frob_sq)
    return (1.0 - rate) ** k * init_err_sq


def noisy_rk_bound(sigma_min, frob_sq, k, init_err_sq, e_inf):
    """Decay term plus the noise floor set by the residual's largest entry."""
    _check_rate(sigma_min, frob_sq, k, init_err_sq)
    if e_inf < 0.0:
        raise InvalidInputsError("e_inf must be >= 0")
    return rk_expected_error_bound(sigma_min, frob_sq, k, init_err_sq) + (frob_sq / sigma_min**2) * e_inf**2


def _check_rate(sigma_min, frob_sq, k, init_err_sq):
    if sigma_min <= 0.0 or frob_sq < sigma_min**2 * (1.0 - 1e-12):
        raise InvalidInputsError(f"need 0 < sigma_min^2 <= frob_sq, got {sigma_min**2:.6g} vs {frob_sq:.6g}")
    if k < 0 or init_err_sq < 0.0:
        raise InvalidInputsError("need k >= 0 and init_err_sq >= 0")
