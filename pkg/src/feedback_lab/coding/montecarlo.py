"""Monte Carlo transmission of framed messages.

Trials are simulated in batches in the control form (error coordinates),
which keeps every propagated quantity bounded, and decoded with the
fixed-point smoother. Each trial draws from its own counter-based stream
seeded by (master_seed, T, trial_index); batches run on a thread pool and
are aggregated in batch order, so results do not depend on scheduling.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..channel.spec import ChannelSpec, awgn
from ..kalman.riccati import RiccatiTrajectory, riccati_run
from ..kalman.smoother import smoother_gains
from ..utils.exports import write_csv
from ..utils.logging import ContextualLogger, TimedOperation
from .encoder import EncoderSpec, embed_message, message_direction
from .transmission import decode_messages, encode_messages

logger = logging.getLogger(__name__)

CSV_HEADER = ["T", "M_T", "Pe", "power_hat", "power_se", "errors", "trials", "seed"]


@dataclass
class SchemeConfig:
    """Scheme used by the error-rate sweep: scalar encoder (a, c) over ``channel``.

    ``a`` is derived from the power budget as sqrt(1 + P).
    """

    c: float = 1.0
    channel: ChannelSpec = field(default_factory=awgn)
    zero_noise: bool = False
    chunk_size: int = 1000
    max_workers: int = 4


@dataclass(frozen=True)
class MonteCarloRow:
    T: int
    M_T: int
    Pe: float
    power_hat: float
    power_se: float
    errors: int
    trials: int
    seed: int

    def as_row(self) -> list:
        return [self.T, self.M_T, self.Pe, self.power_hat, self.power_se,
                self.errors, self.trials, self.seed]


def message_count(P: float, eps: float, T: int) -> int:
    """M_T = floor(a^{(T+1)(1-eps)}) with a = sqrt(1 + P), at least 1."""
    a = math.sqrt(1.0 + P)
    return max(1, int(math.floor(a ** ((T + 1) * (1.0 - eps)))))


def trial_generator(master_seed: int, T: int, trial_index: int) -> np.random.Generator:
    seed = np.random.SeedSequence([master_seed, T, trial_index])
    return np.random.Generator(np.random.Philox(seed))


def _chunks(trials: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, trials)) for start in range(0, trials, chunk_size)]


def control_form_batch(traj: RiccatiTrajectory, W: np.ndarray,
                       noise: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Batched control form: returns (u, xhat0_final) for columns of W and noise.

    W is (k, B) and noise (T+1, B); u is (T+1, B) and xhat0_final (k, B).
    """
    aug = traj.aug
    T1, batch = noise.shape
    gains = smoother_gains(traj)
    X = np.vstack((W, np.zeros((aug.m_ch, batch))))
    xhat0 = np.zeros((aug.n_enc, batch))
    u = np.empty((T1, batch))
    for t in range(T1):
        e = aug.Cbb @ X + noise[t]
        u[t] = aug.Dbb @ X
        xhat0 += np.outer(gains[t], e)
        X = aug.closed_loop(traj.L[t]) @ X - np.outer(traj.L[t], noise[t])
    return u, xhat0


def _message_chunk(encoder: EncoderSpec, traj: RiccatiTrajectory, T: int, M_T: int,
                   span: Tuple[int, int], master_seed: int,
                   zero_noise: bool) -> Tuple[int, np.ndarray]:
    start, stop = span
    batch = stop - start
    indices = np.empty(batch, dtype=np.int64)
    W = np.empty((encoder.dim, batch))
    noise = np.zeros((T + 1, batch))
    for j, trial in enumerate(range(start, stop)):
        rng = trial_generator(master_seed, T, trial)
        indices[j] = rng.integers(1, M_T + 1)
        draws = rng.standard_normal(T + 1)
        if not zero_noise:
            noise[:, j] = draws
        W[:, j] = embed_message(encoder, float(encode_messages(indices[j:j + 1], M_T)[0]), rng)
    u, xhat0 = control_form_batch(traj, W, noise)
    decoded = decode_messages(message_direction(encoder) @ xhat0, M_T)
    return int(np.sum(decoded != indices)), np.mean(u ** 2, axis=0)


def _run_pool(tasks: Dict[int, tuple], worker, max_workers: int) -> Dict[int, tuple]:
    results: Dict[int, tuple] = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(worker, *args): idx for idx, args in tasks.items()}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results


def monte_carlo_error_rate(scheme_config: Optional[SchemeConfig], P: float, eps: float,
                           T_list: Sequence[int], trials: int,
                           master_seed: int) -> List[MonteCarloRow]:
    """Error probability and empirical power per horizon.

    For each T: M_T = floor(a^{(T+1)(1-eps)}) equiprobable messages on
    [-1/2, 1/2], decoded from xhat_{0,T}.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    cfg = scheme_config or SchemeConfig()
    encoder = EncoderSpec.scalar(math.sqrt(1.0 + P), cfg.c)
    rows = []
    for T in T_list:
        M_T = message_count(P, eps, T)
        ctx = ContextualLogger(logger, {"T": T, "M_T": M_T})
        with TimedOperation(logger, f"Monte Carlo T={T} ({trials} trials)", "DEBUG"):
            traj = riccati_run(encoder, cfg.channel, T)
            tasks = {i: (encoder, traj, T, M_T, span, master_seed, cfg.zero_noise)
                     for i, span in enumerate(_chunks(trials, cfg.chunk_size))}
            results = _run_pool(tasks, _message_chunk, cfg.max_workers)
        errors = sum(results[i][0] for i in sorted(results))
        power = np.concatenate([results[i][1] for i in sorted(results)])
        row = MonteCarloRow(T=int(T), M_T=M_T, Pe=errors / trials,
                            power_hat=float(np.mean(power)),
                            power_se=float(np.std(power, ddof=1) / math.sqrt(trials))
                            if trials > 1 else 0.0,
                            errors=errors, trials=trials, seed=int(master_seed))
        ctx.info(f"Pe={row.Pe:.4g} power={row.power_hat:.4g}")
        rows.append(row)
    return rows


def _gaussian_chunk(encoder: EncoderSpec, traj: RiccatiTrajectory, T: int,
                    span: Tuple[int, int], master_seed: int) -> np.ndarray:
    start, stop = span
    W = np.empty((encoder.dim, stop - start))
    noise = np.empty((T + 1, stop - start))
    for j, trial in enumerate(range(start, stop)):
        rng = trial_generator(master_seed, T, trial)
        W[:, j] = rng.standard_normal(encoder.dim)
        noise[:, j] = rng.standard_normal(T + 1)
    u, _ = control_form_batch(traj, W, noise)
    return np.mean(u ** 2, axis=0)


def monte_carlo_power(encoder: EncoderSpec, channel: ChannelSpec, T: int, trials: int,
                      master_seed: int, chunk_size: int = 1000,
                      max_workers: int = 4) -> Tuple[float, float]:
    """Mean and standard error of (1/(T+1)) sum u_t^2 with W ~ N(0, I)."""
    traj = riccati_run(encoder, channel, T)
    tasks = {i: (encoder, traj, T, span, master_seed)
             for i, span in enumerate(_chunks(trials, chunk_size))}
    results = _run_pool(tasks, _gaussian_chunk, max_workers)
    power = np.concatenate([results[i] for i in sorted(results)])
    se = float(np.std(power, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(np.mean(power)), se


def montecarlo_to_csv(rows: Sequence[MonteCarloRow], path: Union[str, Path]) -> Path:
    return write_csv(path, CSV_HEADER, (row.as_row() for row in rows))
