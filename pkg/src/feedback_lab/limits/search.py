"""Best-effort local search for the constrained finite-horizon capacity.

For n < T the free parameters are the entries of (A, C); for n = T they are
the lower-triangular factor of K_r. The Kalman-filter generator is always
used, so the power of a candidate is its one-step prediction error. Restarts
run on a thread pool and the best feasible result wins, ties going to the
lower restart index.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from ..channel.spec import ChannelSpec
from ..channel.toeplitz import toeplitz_bundle
from ..coding.encoder import EncoderSpec
from ..coding.generator import one_step_predictor
from ..config.settings import SearchConfig
from ..errors import FeedbackLabError
from ..kalman.riccati import AugmentedSystem, riccati_step
from ..utils.linalg import logdet_pd, numerical_rank, psd_sqrt
from ..utils.logging import ContextualLogger, TimedOperation

logger = logging.getLogger(__name__)

BISECTION_STEPS = 60
FEASIBILITY_RTOL = 1e-9


@dataclass
class RestartOutcome:
    index: int
    rate: float
    power: float
    params: np.ndarray
    iterations: int


@dataclass
class SearchResult:
    """Best-found structure; ``params`` packs (A, C) for n < T and Gamma for n = T."""

    mode: str
    horizon: int
    n: int
    rate: float
    power: float
    K_r: np.ndarray
    rank: int
    params: np.ndarray
    restarts: List[Dict[str, float]] = field(default_factory=list)
    rank_bound: Optional[int] = None

    @property
    def rank_ok(self) -> bool:
        return self.rank_bound is None or self.rank <= self.rank_bound

    def encoder(self) -> Optional[EncoderSpec]:
        """Encoder realizing the result, or None when it is not observable."""
        k = self.n + 1
        try:
            if self.n < self.horizon:
                A = self.params[:k * k].reshape(k, k)
                return EncoderSpec.from_matrices(A, self.params[k * k:])
            gamma_a = psd_sqrt(self.K_r)
            A = np.linalg.solve(gamma_a, np.eye(k, k=1) @ gamma_a)
            return EncoderSpec.from_matrices(A, gamma_a[:, 0])
        except (FeedbackLabError, np.linalg.LinAlgError):
            return None

    def as_dict(self) -> dict:
        enc = self.encoder()
        return {
            "mode": self.mode,
            "T": self.horizon,
            "n": self.n,
            "rate": self.rate,
            "power": self.power,
            "rank_K_r": self.rank,
            "rank_bound": self.rank_bound,
            "rank_ok": self.rank_ok,
            "encoder": enc.as_dict() if enc is not None else None,
            "restarts": self.restarts,
        }


class _Problem:
    """Rate and power of a parameter vector for one (channel, T, n)."""

    def __init__(self, channel: ChannelSpec, T: int, n: int):
        self.channel = channel
        self.T = T
        self.n = n
        self.k = n + 1
        self.full = n == T
        self.Zinv = toeplitz_bundle(channel, T).Zinv_T
        self._tril = np.tril_indices(T + 1)

    @property
    def size(self) -> int:
        if self.full:
            return len(self._tril[0])
        return self.k * self.k + self.k

    def gamma(self, params: np.ndarray) -> np.ndarray:
        G = np.zeros((self.T + 1, self.T + 1))
        G[self._tril] = params
        return G

    def K_r(self, params: np.ndarray) -> np.ndarray:
        if self.full:
            G = self.gamma(params)
            return G @ G.T
        k = self.k
        A, C = params[:k * k].reshape(k, k), params[k * k:]
        rows = np.empty((self.T + 1, k))
        row = C.copy()
        for t in range(self.T + 1):
            rows[t] = row
            row = row @ A
        return rows @ rows.T

    def scaled(self, params: np.ndarray, s: float) -> np.ndarray:
        out = params.copy()
        if self.full:
            out *= s
        else:
            out[self.k * self.k:] *= s
        return out

    def evaluate(self, params: np.ndarray) -> Tuple[float, float]:
        """(rate per use, power per use); (nan, nan) when the numerics break down."""
        with np.errstate(all="ignore"):
            try:
                if self.full:
                    return self._evaluate_covariance(params)
                return self._evaluate_structure(params)
            except (FeedbackLabError, np.linalg.LinAlgError, ValueError):
                return math.nan, math.nan

    def _evaluate_structure(self, params: np.ndarray) -> Tuple[float, float]:
        k = self.k
        aug = AugmentedSystem.build(params[:k * k].reshape(k, k), params[k * k:], self.channel)
        Sigma = aug.initial_covariance()
        log_sum, power = 0.0, 0.0
        for _ in range(self.T + 1):
            power += float(aug.Dbb @ Sigma @ aug.Dbb)
            Sigma, _, Ke = riccati_step(Sigma, aug)
            log_sum += math.log(Ke)
        size = self.T + 1
        return 0.5 * log_sum / size, power / size

    def _evaluate_covariance(self, params: np.ndarray) -> Tuple[float, float]:
        K_r = self.K_r(params)
        size = self.T + 1
        rate = 0.5 * logdet_pd(np.eye(size) + self.Zinv @ K_r @ self.Zinv.T) / size
        _, v = one_step_predictor(K_r, self.Zinv)
        return rate, float(np.mean(np.clip(v, 0.0, None)))

    def start_point(self, target_power: float) -> np.ndarray:
        """Recursive-scheme start: dominant mode a = sqrt(1 + P), unit output weight."""
        a = math.sqrt(1.0 + max(target_power, 0.0))
        gamma_col = a ** np.arange(self.T + 1)
        if self.full:
            G = np.zeros((self.T + 1, self.T + 1))
            G[:, 0] = gamma_col
            return G[self._tril]
        k = self.k
        A = np.diag(np.concatenate(([a], np.linspace(0.1, 0.5, k - 1))))
        return np.concatenate((A.ravel(), np.ones(k)))


def _objective(problem: _Problem, mode: str, target: float,
               penalty: float) -> Callable[[np.ndarray], float]:
    def fn(params: np.ndarray) -> float:
        rate, power = problem.evaluate(params)
        if not (math.isfinite(rate) and math.isfinite(power)):
            return 1e12
        if mode == "power_budget":
            return -rate + penalty * max(0.0, power - target) ** 2
        return power + penalty * max(0.0, target - rate) ** 2
    return fn


def _bisect_scale(problem: _Problem, params: np.ndarray, feasible: Callable[[float, float], bool],
                  increasing: bool) -> np.ndarray:
    """Smallest/largest scale of the message weights that meets ``feasible``."""
    if increasing:
        # rate target: grow until feasible, then shrink towards the boundary
        hi = 1.0
        for _ in range(BISECTION_STEPS):
            if feasible(*problem.evaluate(problem.scaled(params, hi))):
                break
            hi *= 2.0
        else:
            return params
        lo = 0.0
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if feasible(*problem.evaluate(problem.scaled(params, mid))):
                hi = mid
            else:
                lo = mid
        return problem.scaled(params, hi)
    if feasible(*problem.evaluate(params)):
        return params
    lo, hi = 0.0, 1.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if feasible(*problem.evaluate(problem.scaled(params, mid))):
            lo = mid
        else:
            hi = mid
    return problem.scaled(params, lo)


def _run_restart(problem: _Problem, index: int, x0: np.ndarray, mode: str, target: float,
                 config: SearchConfig) -> RestartOutcome:
    ctx = ContextualLogger(logger, {"restart": index})
    result = minimize(_objective(problem, mode, target, config.penalty), x0,
                      method="Nelder-Mead",
                      options={"maxiter": config.max_iter, "xatol": 1e-9, "fatol": 1e-13,
                               "adaptive": True})
    if mode == "power_budget":
        def feasible(rate, power):
            return math.isfinite(power) and power <= target * (1.0 + FEASIBILITY_RTOL)
        params = _bisect_scale(problem, result.x, feasible, increasing=False)
    else:
        def feasible(rate, power):
            return math.isfinite(rate) and rate >= target * (1.0 - FEASIBILITY_RTOL)
        params = _bisect_scale(problem, result.x, feasible, increasing=True)
    rate, power = problem.evaluate(params)
    ctx.debug(f"rate={rate:.8g} power={power:.8g} iterations={result.nit}")
    return RestartOutcome(index=index, rate=rate, power=power, params=params,
                          iterations=int(result.nit))


def _start_points(problem: _Problem, target_power: float, config: SearchConfig) -> List[np.ndarray]:
    base = problem.start_point(target_power)
    points = [base]
    for restart in range(1, config.restarts):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, restart]))
        points.append(base + rng.normal(scale=0.3, size=base.size) * np.maximum(1.0, np.abs(base)))
    return points


def _better(candidate: RestartOutcome, best: RestartOutcome, mode: str, target: float) -> bool:
    if mode == "power_budget":
        return candidate.rate > best.rate
    meets = candidate.rate >= target * (1.0 - FEASIBILITY_RTOL)
    best_meets = best.rate >= target * (1.0 - FEASIBILITY_RTOL)
    if meets != best_meets:
        return meets
    return candidate.power < best.power if meets else candidate.rate > best.rate


def _zero_result(channel: ChannelSpec, T: int, n: int, mode: str) -> SearchResult:
    problem = _Problem(channel, T, n)
    return SearchResult(mode=mode, horizon=T, n=n, rate=0.0, power=0.0,
                        K_r=np.zeros((T + 1, T + 1)), rank=0, params=np.zeros(problem.size),
                        rank_bound=channel.m + 1 if n == T else None)


def capacity_search(channel: ChannelSpec, T: int, n: int,
                    power_budget: Optional[float] = None,
                    search_config: Optional[SearchConfig] = None,
                    rate_target: Optional[float] = None) -> SearchResult:
    """Maximize the rate subject to power <= power_budget (or minimize the power
    needed for rate >= rate_target) over encoders of dimension n + 1.

    Not a certified optimum. For n = T the numerical rank of the best K_r is
    compared against m + 1 and a warning is logged when it exceeds it.
    """
    if (power_budget is None) == (rate_target is None):
        raise ValueError("exactly one of power_budget and rate_target must be given")
    if not 0 <= n <= T:
        raise ValueError(f"need 0 <= n <= T, got n={n}, T={T}")
    config = search_config or SearchConfig()
    mode = "power_budget" if power_budget is not None else "rate_target"
    target = float(power_budget if power_budget is not None else rate_target)
    if target < 0.0:
        raise ValueError(f"{mode} must be non-negative, got {target}")
    if target == 0.0:
        return _zero_result(channel, T, n, mode)

    problem = _Problem(channel, T, n)
    start_power = target if mode == "power_budget" else math.expm1(2.0 * target)
    starts = _start_points(problem, start_power, config)

    outcomes: Dict[int, RestartOutcome] = {}
    with TimedOperation(logger, f"Capacity search T={T} n={n} ({config.restarts} restarts)"):
        with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
            futures = {executor.submit(_run_restart, problem, i, x0, mode, target, config): i
                       for i, x0 in enumerate(starts)}
            for future in as_completed(futures):
                outcome = future.result()
                outcomes[outcome.index] = outcome

    best: Optional[RestartOutcome] = None
    for i in sorted(outcomes):
        o = outcomes[i]
        if not (math.isfinite(o.rate) and math.isfinite(o.power)):
            continue
        if best is None or _better(o, best, mode, target):
            best = o
    if best is None:
        logger.warning("Capacity search found no finite candidate; returning the zero encoder")
        return _zero_result(channel, T, n, mode)

    K_r = problem.K_r(best.params)
    rank = numerical_rank(K_r, config.rank_rtol)
    result = SearchResult(
        mode=mode, horizon=T, n=n, rate=best.rate, power=best.power, K_r=K_r, rank=rank,
        params=best.params,
        restarts=[{"index": o.index, "rate": o.rate, "power": o.power,
                   "iterations": o.iterations} for _, o in sorted(outcomes.items())],
        rank_bound=channel.m + 1 if n == T else None,
    )
    if not result.rank_ok:
        logger.warning(f"Search quality: best K_r has numerical rank {rank} "
                       f"> m+1 = {channel.m + 1} (local search, not certified)")
    logger.info(f"Capacity search best rate={best.rate:.8g} power={best.power:.8g} "
                f"(restart {best.index})")
    return result
