"""Closed-form jump-time/count distributions with cancellation-aware numerics.

Conventions used throughout:

* `lseq` is an LSequence: normalized cumulative hitting weights
  values[0] = 1 < values[1] < ... <= k, plus the window rate.
* Every gamma-function ratio whose arguments may be negative is expanded as
  a finite product of (m - value) factors; the gamma function itself is
  never evaluated.
* Alternating sums use fully compensated summation (math.fsum) on the
  scalar paths and pairwise summation (numpy) on the vector paths.  Their
  conditioning is measured on the probability scale: the sum of term
  magnitudes bounds the absolute rounding error via the machine epsilon,
  and evaluation refuses to proceed (IllConditioned) once that bound can
  exceed ~1e-8.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DomainError, IllConditioned, TruncationFailure
from .processes import LSequence

DEFAULT_N_MAX = 15
DEFAULT_ELL_MAX = 12
DEFAULT_CONDITION_LIMIT = 1e8
_CHUNK = 1 << 16


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for infinite series: absolute tail bound + term budget."""

    tail_bound: float = 1e-10
    max_terms: int = 10**6

    def __post_init__(self) -> None:
        if not 0.0 < self.tail_bound < 1e-6:
            raise DomainError(f"tail_bound must be in (0, 1e-6), got {self.tail_bound!r}")
        if self.max_terms < 10:
            raise DomainError(f"max_terms must be >= 10, got {self.max_terms!r}")


# ---------------------------------------------------------------------------
# hypoexponential jump-time laws (continuous time)


def _stit_coefficients(lseq: LSequence, n: int, n_max: int, condition_limit: float) -> np.ndarray:
    if not 1 <= n <= len(lseq):
        raise DomainError(f"n={n} outside 1..{len(lseq)}")
    if n > n_max:
        raise IllConditioned(f"n={n} above the precision limit n_max={n_max}")
    vals = np.asarray(lseq.values[:n], dtype=float)
    diff = vals[:, None] - vals[None, :]
    np.fill_diagonal(diff, 1.0)
    coef = (np.prod(vals) / vals) / np.prod(diff, axis=1)
    condition = 1.0 + float(np.sum(np.abs(coef)))
    if condition > condition_limit:
        raise IllConditioned(
            f"alternating sum condition {condition:.3g} exceeds {condition_limit:.3g}"
        )
    return coef


def stit_jump_cdf(
    lseq: LSequence,
    n: int,
    t,
    *,
    n_max: int = DEFAULT_N_MAX,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
):
    """P(n-th jump time <= t): alternating Lagrange-weighted exponential sum.

    Accepts a scalar or array `t`; values within 1e-9 of [0, 1] are clamped
    onto the boundary.
    """
    coef = _stit_coefficients(lseq, n, n_max, condition_limit)
    vals = np.asarray(lseq.values[:n], dtype=float)
    sign = -1.0 if n % 2 else 1.0
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("t must be nonnegative")
    if t_arr.ndim == 0:
        terms = [1.0] + list(sign * coef * np.exp(-lseq.rate * vals * float(t_arr)))
        return _clamp_unit(math.fsum(terms))
    weights = np.exp(-lseq.rate * np.multiply.outer(t_arr, vals))
    out = 1.0 + sign * (weights @ coef)
    out[(out > -1e-9) & (out < 0.0)] = 0.0
    out[(out > 1.0) & (out < 1.0 + 1e-9)] = 1.0
    return out


def stit_jump_pdf(
    lseq: LSequence,
    n: int,
    t,
    *,
    n_max: int = DEFAULT_N_MAX,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
):
    """Density of the n-th jump time; nonnegative, integrates to one."""
    coef = _stit_coefficients(lseq, n, n_max, condition_limit)
    vals = np.asarray(lseq.values[:n], dtype=float)
    sign = 1.0 if n % 2 else -1.0
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("t must be nonnegative")
    scaled = lseq.rate * vals * coef
    if t_arr.ndim == 0:
        total = math.fsum(sign * scaled * np.exp(-lseq.rate * vals * float(t_arr)))
        return 0.0 if -1e-9 < total < 0.0 else total
    weights = np.exp(-lseq.rate * np.multiply.outer(t_arr, vals))
    out = sign * (weights @ scaled)
    out[(out > -1e-9) & (out < 0.0)] = 0.0
    return out


def _clamp_unit(x: float) -> float:
    if -1e-9 < x < 0.0:
        return 0.0
    if 1.0 < x < 1.0 + 1e-9:
        return 1.0
    return x


# ---------------------------------------------------------------------------
# discrete waiting-time law


def _check_waiting_args(n: int, k: int, l_k: float) -> None:
    if n < 1:
        raise DomainError(f"decision base n must be >= 1, got {n}")
    if n == 1:
        if k != 1:
            raise DomainError("n=1 admits only k=1 (the bare window)")
        if abs(l_k - 1.0) > 1e-12:
            raise DomainError("the single-cell weight is exactly 1")
        return
    if not 2 <= k <= n:
        raise DomainError(f"k={k} outside 2..n={n}")
    if not 1.0 <= l_k <= k * (1.0 + 1e-12):
        raise DomainError(f"l_k={l_k!r} outside [1, k={k}]")


def discrete_waiting_pmf(n: int, k: int, l_k: float, wait: int) -> float:
    """P(state with k cells after n-1 decisions changes after exactly `wait` steps).

    Evaluated as l_k/(n+wait-1) times the finite product of per-decision
    survival factors (1 - l_k/(n+j)); the equivalent factorial/gamma form is
    never used directly.
    """
    _check_waiting_args(n, k, l_k)
    if wait < 1:
        raise DomainError(f"wait must be >= 1, got {wait}")
    if n == 1:
        return 1.0 if wait == 1 else 0.0
    prob = l_k / (n + wait - 1)
    for j in range(wait - 1):
        prob *= 1.0 - l_k / (n + j)
    return prob


def discrete_waiting_pmf_sequence(n: int, k: int, l_k: float, max_wait: int) -> np.ndarray:
    """Vector of discrete_waiting_pmf(n, k, l_k, w) for w = 1..max_wait."""
    _check_waiting_args(n, k, l_k)
    if max_wait < 1:
        raise DomainError(f"max_wait must be >= 1, got {max_wait}")
    if n == 1:
        out = np.zeros(max_wait)
        out[0] = 1.0
        return out
    w = np.arange(1, max_wait, dtype=float)
    ratios = (n + w - 1.0 - l_k) / (n + w)
    out = np.empty(max_wait)
    out[0] = l_k / n
    if max_wait > 1:
        np.cumprod(ratios, out=ratios)
        out[1:] = out[0] * ratios
    return out


def discrete_waiting_pmf_mass(
    n: int, k: int, l_k: float, max_wait: int, *, stop_mass: float | None = None
) -> float:
    """Total waiting-time probability mass over waits 1..max_wait (chunked).

    With `stop_mass` set, accumulation stops early once the mass reaches it;
    the returned value is then a lower bound on the full truncated sum.
    """
    _check_waiting_args(n, k, l_k)
    if n == 1:
        return 1.0 if max_wait >= 1 else 0.0
    total = 0.0
    head = l_k / n  # pmf at the first wait of the pending chunk
    w0 = 1
    while w0 <= max_wait:
        w1 = min(w0 + _CHUNK, max_wait + 1)
        w = np.arange(w0, w1 - 1, dtype=float)
        ratios = (n + w - 1.0 - l_k) / (n + w)
        np.cumprod(ratios, out=ratios)
        total += head * (1.0 + float(ratios.sum()))
        if stop_mass is not None and total >= stop_mass:
            return total
        head *= float(ratios[-1]) if ratios.size else 1.0
        head *= (n + (w1 - 1) - 1.0 - l_k) / (n + (w1 - 1))
        w0 = w1
    return total


# ---------------------------------------------------------------------------
# discrete jump-time law


def _jump_pmf_setup(
    lseq: LSequence, ell: int, ell_max: int, condition_limit: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Coefficients c_i, seed terms at n=ell, weight values, and the sign*lead factor."""
    if not 2 <= ell <= len(lseq):
        raise DomainError(f"ell={ell} outside 2..{len(lseq)}")
    if ell > ell_max:
        raise IllConditioned(f"ell={ell} above the precision limit ell_max={ell_max}")
    vals = np.asarray(lseq.values[1:ell], dtype=float)  # positions 2..ell
    diff = vals[:, None] - vals[None, :]
    np.fill_diagonal(diff, 1.0)
    coef = 1.0 / np.prod(diff, axis=1)
    lead = float(np.prod(vals)) * (1.0 if ell % 2 == 0 else -1.0)
    # seed: (1/ell) * prod_{m=2}^{ell-1} (1 - value/m), one per weight value
    term = np.full(vals.shape, 1.0 / ell)
    for m in range(2, ell):
        term *= 1.0 - vals / m
    condition = abs(lead) * float(np.sum(np.abs(coef * term)))
    if condition > condition_limit:
        raise IllConditioned(
            f"alternating sum condition {condition:.3g} exceeds {condition_limit:.3g}"
        )
    return coef, term, vals, lead


def _jump_pmf_chunks(
    lseq: LSequence, ell: int, ell_max: int, condition_limit: float
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (n values, pmf values) in chunks for n = ell, ell+1, ...

    Uses the recurrence term(n) = term(n-1) * (n-1-value)/n per weight value;
    far-tail rounding can take individual pmf values a few ulps below zero,
    which is clipped.
    """
    coef, term, vals, lead = _jump_pmf_setup(lseq, ell, ell_max, condition_limit)
    n0 = ell
    while True:
        ns = np.arange(n0, n0 + _CHUNK, dtype=float)
        ratios = (ns[1:, None] - 1.0 - vals[None, :]) / ns[1:, None]
        terms = np.empty((ns.size, vals.size))
        terms[0] = term
        np.cumprod(ratios, axis=0, out=ratios)
        terms[1:] = term * ratios
        pmf = lead * (terms @ coef)
        np.maximum(pmf, 0.0, out=pmf)
        yield ns, pmf
        term = terms[-1] * ((ns[-1] - vals) / (ns[-1] + 1.0))
        n0 += _CHUNK


def discrete_jump_pmf(
    lseq: LSequence,
    ell: int,
    n: int,
    *,
    ell_max: int = DEFAULT_ELL_MAX,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> float:
    """P(ell-th jump happens at decision n | frozen weight sequence), ell >= 2.

    The gamma-ratio factor for each weight value is the finite product
    prod_{m=2}^{n-1}(m - value) folded into 1/n! for stability; the outer
    alternating sum is fully compensated.
    """
    coef, term, vals, lead = _jump_pmf_setup(lseq, ell, ell_max, condition_limit)
    if n < ell:
        raise DomainError(f"n={n} must be >= ell={ell}")
    for m in range(ell, n):
        term = term * (m - vals) / (m + 1.0)
    return _clamp_unit(float(lead * math.fsum(coef * term)))


def discrete_jump_pmf_sequence(
    lseq: LSequence,
    ell: int,
    n_max: int,
    *,
    ell_max: int = DEFAULT_ELL_MAX,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> np.ndarray:
    """Vector of discrete_jump_pmf for n = ell..n_max."""
    if n_max < ell:
        raise DomainError(f"n_max={n_max} must be >= ell={ell}")
    out = np.empty(n_max - ell + 1)
    filled = 0
    for ns, pmf in _jump_pmf_chunks(lseq, ell, ell_max, condition_limit):
        take = min(pmf.size, out.size - filled)
        out[filled : filled + take] = pmf[:take]
        filled += take
        if filled == out.size:
            return out
    raise AssertionError("unreachable")


def discrete_jump_pmf_mass(
    lseq: LSequence,
    ell: int,
    n_max: int,
    *,
    stop_mass: float | None = None,
    ell_max: int = DEFAULT_ELL_MAX,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> float:
    """Total jump-time probability mass over decisions ell..n_max (chunked)."""
    total = 0.0
    seen = 0
    budget = n_max - ell + 1
    for _, pmf in _jump_pmf_chunks(lseq, ell, ell_max, condition_limit):
        take = min(pmf.size, budget - seen)
        total += float(pmf[:take].sum())
        seen += take
        if seen == budget or (stop_mass is not None and total >= stop_mass):
            return total
    raise AssertionError("unreachable")


# Memo of materialized pmf prefixes keyed by (weight values, ell).  The tail
# evaluator is typically called for many horizons of one frozen sequence, and
# the pmf stream is identical across those calls; only the geometric weights
# change.  Results are bit-identical with or without a cache hit.
_PMF_PREFIX_CACHE: OrderedDict[tuple, dict] = OrderedDict()
_PMF_PREFIX_CACHE_LOCK = threading.Lock()
_PMF_PREFIX_CACHE_MAX_FLOATS = 12_000_000


def _jump_pmf_prefix(
    lseq: LSequence, ell: int, n_hi: int, ell_max: int, condition_limit: float
) -> tuple[np.ndarray, np.ndarray]:
    """(pmf, cumulative mass) arrays for n = ell..(at least n_hi), memoized."""
    key = (lseq.values, ell)
    with _PMF_PREFIX_CACHE_LOCK:
        entry = _PMF_PREFIX_CACHE.get(key)
        if entry is None:
            coef, term, vals, lead = _jump_pmf_setup(lseq, ell, ell_max, condition_limit)
            entry = {
                "coef": coef, "term": term, "vals": vals, "lead": lead,
                "next_n": ell, "pmf": [], "mass": [], "total_mass": 0.0,
            }
            _PMF_PREFIX_CACHE[key] = entry
        _PMF_PREFIX_CACHE.move_to_end(key)
        while entry["next_n"] <= n_hi:
            n0 = entry["next_n"]
            vals = entry["vals"]
            ns = np.arange(n0, n0 + _CHUNK, dtype=float)
            ratios = (ns[1:, None] - 1.0 - vals[None, :]) / ns[1:, None]
            terms = np.empty((ns.size, vals.size))
            terms[0] = entry["term"]
            np.cumprod(ratios, axis=0, out=ratios)
            terms[1:] = entry["term"] * ratios
            pmf = entry["lead"] * (terms @ entry["coef"])
            np.maximum(pmf, 0.0, out=pmf)
            entry["pmf"].append(pmf)
            mass = entry["total_mass"] + np.cumsum(pmf)
            entry["mass"].append(mass)
            entry["total_mass"] = float(mass[-1])
            entry["term"] = terms[-1] * ((ns[-1] - vals) / (ns[-1] + 1.0))
            entry["next_n"] = n0 + _CHUNK
        while (
            len(_PMF_PREFIX_CACHE) > 1
            and sum(e["next_n"] - _ell for (_, _ell), e in _PMF_PREFIX_CACHE.items())
            > _PMF_PREFIX_CACHE_MAX_FLOATS
        ):
            _PMF_PREFIX_CACHE.popitem(last=False)
        return (
            np.concatenate(entry["pmf"]),
            np.concatenate(entry["mass"]),
        )


def mecke_jump_tail(
    lseq: LSequence,
    ell: int,
    t: float,
    policy: TruncationPolicy | None = None,
    *,
    ell_max: int = DEFAULT_ELL_MAX,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> float:
    """P(at least ell jumps by time t | frozen weight sequence).

    Evaluates sum_n a^n * discrete_jump_pmf(n) with a = 1 - exp(-rate * t),
    truncated once the remaining mass provably drops below the policy's
    tail bound.  Two valid bounds are combined: the geometric envelope
    a^(N+1)/(1-a) and the sharper a^(N+1) * (1 - partial pmf mass); without
    the second, horizons with rate*t around 10 would need tens of millions
    of terms.
    """
    if t < 0.0:
        raise DomainError(f"t must be nonnegative, got {t!r}")
    if not 1 <= ell <= len(lseq):
        raise DomainError(f"ell={ell} outside 1..{len(lseq)}")
    policy = policy if policy is not None else TruncationPolicy()
    a = -math.expm1(-lseq.rate * t)
    if a <= 0.0:
        return 0.0
    if ell == 1:  # the first jump happens at the first decision, always
        return a
    log_a = math.log(a)
    # geometric envelope: a^(N+1)/(1-a) < tail_bound
    n_geo = math.ceil((math.log(policy.tail_bound) + math.log1p(-a)) / log_a) - 1
    if n_geo < ell:  # the whole series is already below the tail bound
        return 0.0
    total = 0.0
    used = 0
    n0 = ell
    pmf = mass = None
    while True:
        if pmf is None or n0 - ell >= pmf.size:
            hi = min(n0 + _CHUNK - 1, max(n_geo, n0))
            pmf, mass = _jump_pmf_prefix(lseq, ell, hi, ell_max, condition_limit)
        n1 = min(n0 + _CHUNK, n_geo + 1, ell + pmf.size)
        sl = slice(n0 - ell, n1 - ell)
        ns = np.arange(n0, n1, dtype=float)
        total += float(np.exp(log_a * ns) @ pmf[sl])
        used += n1 - n0
        if n1 > n_geo:
            break
        if math.exp(log_a * n1) * max(0.0, 1.0 - float(mass[n1 - 1 - ell])) < policy.tail_bound:
            break
        if used >= policy.max_terms:
            raise TruncationFailure(
                f"needed more than max_terms={policy.max_terms} terms for t={t!r}"
            )
        n0 = n1
    return min(total, 1.0)


# ---------------------------------------------------------------------------
# geometric decision/jump counting laws


def nu_pmf(rate: float, t: float, k) -> float | np.ndarray:
    """P(number of decisions by time t = k): geometric with parameter e^(-rate*t)."""
    if not rate > 0.0:
        raise DomainError(f"rate must be positive, got {rate!r}")
    if t < 0.0:
        raise DomainError(f"t must be nonnegative, got {t!r}")
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise DomainError("k must be nonnegative")
    p = math.exp(-rate * t)
    a = -math.expm1(-rate * t)
    out = p * np.power(a, k_arr, dtype=float)
    return float(out) if out.ndim == 0 else out


def cowan_count_pmf(rate: float, t: float, k) -> float | np.ndarray:
    """P(number of equally-likely jumps by time t = k); same law as nu_pmf."""
    return nu_pmf(rate, t, k)


def cowan_sum_cdf(rate: float, n: int, t) -> float | np.ndarray:
    """CDF of the sum of independent Exp(k * rate) waits, k = 1..n."""
    if not rate > 0.0:
        raise DomainError(f"rate must be positive, got {rate!r}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("t must be nonnegative")
    out = np.power(-np.expm1(-rate * t_arr), n)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# deterministic identity checkers (residuals, not booleans)


def _check_distinct(nodes: np.ndarray) -> None:
    if nodes.size < 1:
        raise DomainError("need at least one node")
    diff = np.abs(nodes[:, None] - nodes[None, :])
    np.fill_diagonal(diff, np.inf)
    if float(diff.min()) == 0.0:
        raise DomainError("nodes must be pairwise distinct")


def _lagrange_weights_at(nodes: np.ndarray, x_eval: float) -> np.ndarray:
    """w_k = prod_{i != k} (x_eval - x_i)/(x_k - x_i)."""
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    num = x_eval - nodes
    weights = np.empty_like(nodes)
    for k in range(nodes.size):
        row = num.copy()
        row[k] = 1.0
        weights[k] = np.prod(row / diff[k])
    return weights


def verify_lagrange_identity(nodes, x_eval: float) -> float:
    """Residual of: the Lagrange interpolant of f = 1 equals 1 everywhere.

    The residual is measured relative to the largest term magnitude (floored
    at one) so that it reflects precision actually lost to cancellation
    rather than the raw size of the interpolation weights.
    """
    arr = np.asarray(nodes, dtype=float)
    _check_distinct(arr)
    weights = _lagrange_weights_at(arr, float(x_eval))
    scale = max(1.0, float(np.max(np.abs(weights))))
    return abs(math.fsum(weights) - 1.0) / scale


def verify_lagrange_gamma_identity(nodes, x_eval: float) -> float:
    """Residual of interpolating f(x) = prod_{m=2}^{len(nodes)} (m - x).

    f has degree len(nodes) - 1, i.e. one less than the node count, so its
    interpolant reproduces it exactly; this is the polynomial form of the
    gamma-ratio extrapolation used by the discrete jump-time law.  The
    residual is scaled as in verify_lagrange_identity.
    """
    arr = np.asarray(nodes, dtype=float)
    _check_distinct(arr)
    x = float(x_eval)

    def f(v: float) -> float:
        out = 1.0
        for m in range(2, arr.size + 1):
            out *= m - v
        return out

    terms = _lagrange_weights_at(arr, x) * np.array([f(v) for v in arr])
    direct = f(x)
    scale = max(1.0, abs(direct), float(np.max(np.abs(terms))))
    return abs(math.fsum(terms) - direct) / scale


def verify_telescoping_identity(l_i: float, l_next: float, ell: int, n: int) -> float:
    """Residual of the gamma-ratio telescoping sum over decisions ell..n-1.

    Both sides are normalized by their common gamma prefactor so that only
    finite products of (m - value) factors are evaluated:
    sum_{k=ell}^{n-1} r(k)/s(k+1) = (1 - r(n)/s(n)) / (l_i - l_next)
    with r(k) = prod_{m=ell}^{k-1} (m - l_i) and s likewise for l_next.
    """
    if ell < 1 or n < ell + 1:
        raise DomainError(f"need n >= ell+1 >= 2, got ell={ell}, n={n}")
    if abs(l_i - l_next) < 1e-12:
        raise DomainError("weight values must be distinct")
    if any(abs(m - l_next) < 1e-12 for m in range(ell, n)):
        raise DomainError("l_next too close to an integer pole")
    r = 1.0
    s_next = ell - l_next  # s(k+1) at k = ell
    lhs_terms = []
    for k in range(ell, n):
        lhs_terms.append(r / s_next)
        r *= k - l_i
        s_next *= k + 1 - l_next
    s_n = s_next / (n - l_next)
    rhs = (1.0 - r / s_n) / (l_i - l_next)
    return abs(math.fsum(lhs_terms) - rhs)


def verify_binomial_gamma_identity(ell: int, k: int, l_value: float) -> float:
    """Residual of the binomial/gamma coefficient collapse used by the
    continuous-time comparison.

    Normalized by the common gamma prefactor:
    sum_{n=k}^{ell-1} q(n)/(n-k)! = q(ell) / ((ell-k-1)! * (k - l_value))
    with q(n) = prod_{m=k}^{n-1} (m - l_value).
    """
    if ell < 2 or not 0 <= k <= ell - 1:
        raise DomainError(f"need ell >= 2 and 0 <= k <= ell-1, got ell={ell}, k={k}")
    if any(abs(m - l_value) < 1e-12 for m in range(k, ell)):
        raise DomainError("l_value too close to an integer pole")
    q = 1.0
    lhs_terms = []
    fact = 1.0
    for n in range(k, ell):
        if n > k:
            fact *= n - k
        lhs_terms.append(q / fact)
        q *= n - l_value
    rhs = q / (math.factorial(ell - k - 1) * (k - l_value))
    return abs(math.fsum(lhs_terms) - rhs)
