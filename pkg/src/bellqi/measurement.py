"""The two-outcome projective measurement and its click probabilities.

The "click" outcome projects onto the span of the noise-displaced Bell states

    |bell + c> = sum_i sqrt(c_i + 1) / sqrt(C + M) |e_i, e_i + c>,   C = sum(c),

one for each background occupation ``c`` collected into the signal.

Exact probabilities trace the projector against the enumerated ensembles from
:mod:`bellqi.channel`. The Monte Carlo estimators use closed-form per-sample
overlaps that only depend on photon totals, so they scale to M ~ 1e6:

* target absent, background ``n`` and idler mode ``i``:
  ``n_i / (N + M - 1)``;
* target present, retained branch with totals ``N_A`` (kept by the
  environment) and ``N_C = N_B - N_A`` (collected):
  ``eta * (N_C + M - N_A (1 - eta) / eta)**2 / (M (N_C + M))``
  (collapsed branches never click).
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .channel import (
    MAX_MODES,
    MAX_TOTAL,
    ChannelParams,
    rho_abs_ensemble,
    rho_pres_ensemble,
)
from .fock import BasisLabel, ModeOccupation, SparseKet

DEFAULT_BATCH = 1 << 16


@dataclass(frozen=True)
class DetectionEstimate:
    value: float
    std_error: float
    n_samples: int
    method: str  # "exact" or "mc"
    tail_bound: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.value <= 1 + 1e-12:
            raise ValueError(f"probability out of range: {self.value}")
        if self.method == "exact" and self.std_error != 0:
            raise ValueError("exact estimates carry no standard error")


class Outcome(str, enum.Enum):
    CLICK = "click"
    NO_CLICK = "no_click"


def projector_state(n_c: Sequence[int]) -> SparseKet:
    """Normalized Bell state displaced by collected background ``n_c``."""
    n_c = ModeOccupation(n_c)
    m = len(n_c)
    if m < 1:
        raise ValueError("n_c must have at least one mode")
    denom = n_c.total() + m
    amps = {}
    for i in range(m):
        signal = list(n_c)
        signal[i] += 1
        amps[BasisLabel(ModeOccupation.unit(m, i), tuple(signal))] = math.sqrt((n_c[i] + 1) / denom)
    return SparseKet(amps)


def projector_overlap(ket: SparseKet) -> float:
    """<ket|P|ket> for the click projector P.

    Components are grouped by the collected occupation they imply
    (signal minus the idler's mode); only groups present in the ket's
    support are visited.
    """
    if ket.has_environment:
        raise ValueError("projector acts on idler and signal registers only")
    m = ket.num_modes
    groups: dict[tuple, complex] = {}
    for label, amp in ket.items():
        idler = label.idler
        if sum(idler) != 1:
            raise ValueError(f"idler must hold exactly one photon, got {tuple(idler)}")
        i = idler.index(1)
        s = label.signal
        if s[i] < 1:
            continue
        n_c = s[:i] + (s[i] - 1,) + s[i + 1:]
        weight = math.sqrt(s[i] / (sum(s) - 1 + m))  # sqrt((c_i + 1) / (C + M))
        groups[n_c] = groups.get(n_c, 0j) + weight * amp
    return math.fsum(abs(v) ** 2 for v in groups.values())


def _exact(ensemble) -> DetectionEstimate:
    value = math.fsum(projector_overlap(b) for b in ensemble.branches)
    return DetectionEstimate(min(value, 1.0), 0.0, 0, "exact", ensemble.tail_bound)


def pfa_exact(
    params: ChannelParams,
    tail_tol: float = 1e-8,
    *,
    cutoff: Optional[int] = None,
    max_modes: int = MAX_MODES,
    max_total: int = MAX_TOTAL,
    symmetric: bool = False,
) -> DetectionEstimate:
    """False-alarm probability Tr[P rho_abs], truncated by total background photons.

    The dropped tail can add at most ``tail_bound / M``. ``symmetric``
    enumerates one background per mode-permutation orbit (same value, much
    faster); see :func:`bellqi.channel.rho_pres_ensemble`.
    """
    ens = rho_abs_ensemble(params, tail_tol, cutoff=cutoff, max_modes=max_modes, max_total=max_total, symmetric=symmetric)
    return _exact(ens)


def pdet_exact(
    params: ChannelParams,
    tail_tol: float = 1e-8,
    *,
    cutoff: Optional[int] = None,
    max_modes: int = MAX_MODES,
    max_total: int = MAX_TOTAL,
    symmetric: bool = False,
) -> DetectionEstimate:
    """Detection probability Tr[P rho_pres]; the dropped tail can add at most ``tail_bound``."""
    ens = rho_pres_ensemble(params, tail_tol, cutoff=cutoff, max_modes=max_modes, max_total=max_total, symmetric=symmetric)
    return _exact(ens)


def false_alarm_statistic(n_mode, n_total, m: int):
    """Click probability for absent target given idler-mode count and total background."""
    n_mode = np.asarray(n_mode, dtype=float)
    denom = np.asarray(n_total, dtype=float) + m - 1
    # denom is 0 only for M = 1 with no background, where n_mode is 0 too
    return np.divide(n_mode, denom, out=np.zeros(np.broadcast(n_mode, denom).shape), where=denom > 0)


def detection_statistic(n_a, n_c, m: int, eta: float):
    """Click probability of a retained present-target branch, normalized by its sampling weight."""
    n_a = np.asarray(n_a, dtype=float)
    n_c = np.asarray(n_c, dtype=float)
    amp = n_c + m - n_a * ((1.0 - eta) / eta)
    return eta * amp * amp / (m * (n_c + m))


def _batched(
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    rng,
    threads: int,
    batch_size: int,
) -> np.ndarray:
    """Run ``sampler`` over fixed-size batches, one spawned substream per batch.

    The batch-to-substream mapping is independent of ``threads``, so results
    are bit-identical for a given seed and sample count.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sizes = [batch_size] * (n_samples // batch_size)
    if n_samples % batch_size:
        sizes.append(n_samples % batch_size)
    gens = np.random.default_rng(rng).spawn(len(sizes))
    work = list(zip(gens, sizes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda gs: sampler(*gs), work))
    else:
        parts = [sampler(g, s) for g, s in work]
    return np.concatenate(parts)


def _estimate(samples: np.ndarray) -> DetectionEstimate:
    n = samples.size
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return DetectionEstimate(mean, se, n, "mc")


def pfa_mc(
    params: ChannelParams,
    n_samples: int,
    rng=None,
    *,
    threads: int = 1,
    batch_size: int = DEFAULT_BATCH,
) -> DetectionEstimate:
    """Monte Carlo false-alarm probability.

    Each sample draws the background count of the idler's mode and the total
    over the remaining ``M - 1`` modes (equivalent to a full i.i.d. draw with
    a uniform idler mode, by exchangeability).
    """
    m, noise = params.M, params.noise

    def sampler(gen, size):
        n_i = noise.sample(size, gen)
        rest = noise.sample_total(m - 1, size, gen)
        return false_alarm_statistic(n_i, n_i + rest, m)

    return _estimate(_batched(sampler, n_samples, rng, threads, batch_size))


def pdet_mc(
    params: ChannelParams,
    n_samples: int,
    rng=None,
    *,
    threads: int = 1,
    batch_size: int = DEFAULT_BATCH,
) -> DetectionEstimate:
    """Monte Carlo detection probability.

    Draws the background total N_B over M modes and the number kept by the
    environment N_A ~ Binomial(N_B, eta); the per-sample overlap depends on
    these totals only.
    """
    m, eta, noise = params.M, params.eta, params.noise

    def sampler(gen, size):
        n_b = noise.sample_total(m, size, gen)
        n_a = gen.binomial(n_b, eta)
        return detection_statistic(n_a, n_b - n_a, m, eta)

    return _estimate(_batched(sampler, n_samples, rng, threads, batch_size))


def single_shot(
    hypothesis: str,
    estimates: tuple[DetectionEstimate, DetectionEstimate],
    rng: np.random.Generator,
) -> Outcome:
    """Sample one measurement outcome.

    ``estimates`` is ``(pdet, pfa)``; ``hypothesis`` is ``"present"`` or ``"absent"``.
    """
    pdet, pfa = estimates
    if hypothesis == "present":
        p = pdet.value
    elif hypothesis == "absent":
        p = pfa.value
    else:
        raise ValueError(f"hypothesis must be 'present' or 'absent', got {hypothesis!r}")
    return Outcome.CLICK if rng.random() < p else Outcome.NO_CLICK
