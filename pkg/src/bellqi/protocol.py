"""Error probabilities, error exponents and quantum-advantage curves.

Conventions:

* ``nb`` is the mean background photon number seen by a coherent-state
  transmitter. The Bell-state protocol's per-mode background is taken as
  ``nb / (1 - eta)``, so its single-shot detection probability becomes
  ``eta / (1 + nb)``.
* Advantages are ratios of error exponents (coefficients of ``-N_S`` in
  ``ln P_e``), reported in dB as ``10 log10(ratio)``.
* The advantage curves are evaluated in the small-``eta`` limit, where every
  exponent is proportional to ``eta`` and the ratios do not depend on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

# small-eta limit used for the fundamental-bound column of the advantage curves
ETA_LIMIT = 1e-10


@dataclass(frozen=True)
class AnalysisParams:
    eta: float
    nb: float
    n_s: float = 1.0
    pi0: float = 0.5
    pi1: float = 0.5
    n_max: int = 1

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not (math.isfinite(self.nb) and self.nb >= 0):
            raise ValueError(f"nb must be finite and >= 0, got {self.nb}")
        if not self.n_s > 0:
            raise ValueError(f"n_s must be positive, got {self.n_s}")
        if not (0 <= self.pi0 <= 1 and 0 <= self.pi1 <= 1) or abs(self.pi0 + self.pi1 - 1) > 1e-12:
            raise ValueError(f"priors must be probabilities summing to 1, got {self.pi0}, {self.pi1}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max}")

    @classmethod
    def with_prior(cls, eta: float, nb: float, pi1: float, **kw) -> "AnalysisParams":
        return cls(eta=eta, nb=nb, pi0=1.0 - pi1, pi1=pi1, **kw)


@dataclass(frozen=True)
class AdvantagePoint:
    nb: float
    block_db: float
    sequential_db: float
    fundamental_db: float


def to_db(ratio: float) -> float:
    return 10.0 * math.log10(ratio)


def effective_eta(eta: float, mean_pm: float) -> float:
    """Single-shot detection probability in the many-mode limit."""
    if mean_pm < 0:
        raise ValueError("mean_pm must be >= 0")
    return eta / (1.0 + (1.0 - eta) * mean_pm)


def per_mode_background(eta: float, nb: float) -> float:
    """Per-mode background mean ``nb / (1 - eta)`` assumed for comparison with coherent probes."""
    if eta >= 1.0:
        raise ValueError("per-mode background is undefined at eta = 1")
    return nb / (1.0 - eta)


def block_exponent(eta: float, nb: float) -> float:
    """Per-photon error exponent of the block Bell-state protocol."""
    return eta / (1.0 + nb)


def coherent_exponent(eta: float, nb: float) -> float:
    # (sqrt(nb+1) - sqrt(nb))**2 written to avoid cancellation at large nb
    return eta / (math.sqrt(nb + 1.0) + math.sqrt(nb)) ** 2


def nair_gu_exponent(eta: float, nb: float) -> float:
    """Magnitude of the per-photon exponent of the transmitter-independent lower bound."""
    x = eta / (nb + 1.0)
    return math.inf if x >= 1.0 else -math.log1p(-x)


def sequential_exponent(eta: float, nb: float, pi1: float) -> float:
    if not 0 <= pi1 < 1:
        raise ValueError("pi1 must lie in [0, 1)")
    return block_exponent(eta, nb) / (1.0 - pi1)


def pe_block_quantum(p: AnalysisParams) -> float:
    """Block-rule error probability, small effective-eta form."""
    return p.pi1 * math.exp(-block_exponent(p.eta, p.nb) * p.n_s)


def pe_block_quantum_power(p: AnalysisParams) -> float:
    """Block-rule miss term without the exponential approximation: pi1 (1 - eta_eff)**N_S."""
    return p.pi1 * (1.0 - block_exponent(p.eta, p.nb)) ** p.n_s


def pe_coherent(p: AnalysisParams) -> float:
    """Error probability of the optimal coherent-state transmitter."""
    return math.sqrt(p.pi0 * p.pi1) * math.exp(-coherent_exponent(p.eta, p.nb) * p.n_s)


def nair_gu_bound(p: AnalysisParams) -> float:
    """Transmitter-independent lower bound on the error probability in a thermal background."""
    x = p.eta / (p.nb + 1.0)
    if x >= 1.0:
        return 0.0
    return p.pi0 * p.pi1 * math.exp(p.n_s * math.log1p(-x))


def pe_sequential(p: AnalysisParams) -> float:
    """Error probability under the stop-at-first-click rule."""
    return math.exp(-sequential_exponent(p.eta, p.nb, p.pi1) * p.n_s)


def advantage_ratio(nb: float) -> float:
    """Block-protocol exponent over coherent-state exponent; rises from 1 to 4."""
    return (math.sqrt(nb + 1.0) + math.sqrt(nb)) ** 2 / (1.0 + nb)


def figure1_data(nb_grid: Iterable[float], pi1: float = 0.5) -> list[AdvantagePoint]:
    """Exponent ratios against the coherent-state baseline, in dB.

    ``block`` uses the closed-form ratio, ``fundamental`` evaluates the
    lower-bound exponent at ``ETA_LIMIT``, and ``sequential`` scales the block
    ratio by ``1 / (1 - pi1)``.
    """
    points = []
    for nb in nb_grid:
        nb = float(nb)
        block = advantage_ratio(nb)
        fundamental = nair_gu_exponent(ETA_LIMIT, nb) / coherent_exponent(ETA_LIMIT, nb)
        points.append(AdvantagePoint(nb, to_db(block), to_db(block / (1.0 - pi1)), to_db(fundamental)))
    return points


@dataclass(frozen=True)
class SequentialResult:
    n_trials: int
    p_e: float
    p_e_se: float
    miss_rate: float
    miss_rate_se: float
    false_alarm_rate: float
    false_alarm_rate_se: float
    n_present: int
    n_absent: int
    mean_shots: float
    mean_shots_se: float
    expected_shots: float  # exact, with the N_max cap under "present"
    nominal_shots: float  # pi0 N_max + pi1 / eta_tilde, ignores the cap
    expected_miss: float
    expected_false_alarm: float


def expected_shots(n_max: int, pi1: float, eta_tilde: float, pfa_single: float = 0.0) -> float:
    """Exact mean number of shots under the stop-at-first-click rule."""
    return (1.0 - pi1) * _truncated_geometric_mean(pfa_single, n_max) + pi1 * _truncated_geometric_mean(
        eta_tilde, n_max
    )


def nominal_shots(n_max: int, pi1: float, eta_tilde: float) -> float:
    """The uncapped bookkeeping pi0 N_max + pi1 / eta_tilde."""
    return (1.0 - pi1) * n_max + (pi1 / eta_tilde if eta_tilde > 0 else math.inf)


def _truncated_geometric_mean(p: float, n_max: int) -> float:
    # E[min(T, n_max)] for T ~ Geometric(p) on {1, 2, ...}
    if p <= 0:
        return float(n_max)
    return (1.0 - (1.0 - p) ** n_max) / p


def sequential_sim(
    p: AnalysisParams,
    eta_tilde: float,
    pfa_single: float,
    n_trials: int,
    rng=None,
) -> SequentialResult:
    """Simulate the stop-at-first-click rule over ``n_trials`` independent targets.

    Each trial draws the hypothesis from the priors; shots click i.i.d. with
    probability ``eta_tilde`` (present) or ``pfa_single`` (absent) until the
    first click or ``p.n_max`` shots. A click means "present".
    """
    if not (0 <= eta_tilde <= 1 and 0 <= pfa_single <= 1):
        raise ValueError("eta_tilde and pfa_single must lie in [0, 1]")
    if n_trials < 2:
        raise ValueError("n_trials must be >= 2")
    rng = np.random.default_rng(rng)
    n_max = int(p.n_max)
    present = rng.random(n_trials) < p.pi1
    click_prob = np.where(present, eta_tilde, pfa_single)
    # first-click time; anything past n_max means no click
    first = np.full(n_trials, n_max + 1, dtype=np.int64)
    live = click_prob > 0
    first[live] = rng.geometric(click_prob[live])
    clicked = first <= n_max
    shots = np.minimum(first, n_max)
    errors = np.where(present, ~clicked, clicked)

    def mean_se(x):
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return math.nan, math.nan
        se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
        return float(np.mean(x)), se

    p_e, p_e_se = mean_se(errors)
    miss, miss_se = mean_se(~clicked[present])
    fa, fa_se = mean_se(clicked[~present])
    shots_mean, shots_se = mean_se(shots)
    return SequentialResult(
        n_trials=n_trials,
        p_e=p_e,
        p_e_se=p_e_se,
        miss_rate=miss,
        miss_rate_se=miss_se,
        false_alarm_rate=fa,
        false_alarm_rate_se=fa_se,
        n_present=int(present.sum()),
        n_absent=int((~present).sum()),
        mean_shots=shots_mean,
        mean_shots_se=shots_se,
        expected_shots=expected_shots(n_max, p.pi1, eta_tilde, pfa_single),
        nominal_shots=nominal_shots(n_max, p.pi1, eta_tilde),
        expected_miss=(1.0 - eta_tilde) ** n_max,
        expected_false_alarm=1.0 - (1.0 - pfa_single) ** n_max,
    )
