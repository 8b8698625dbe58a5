"""Post-interaction idler-signal states for target present / absent.

With the target present, signal mode ``i`` is mixed with background mode
``i`` on a beam splitter of reflectivity ``eta``. Conditioning on the
background occupation before (``n_b``) and after (``n_a``) the interaction
leaves an unnormalized idler-signal ket. :func:`phi_tilde` gives it in closed
form; :func:`phi_tilde_oracle` recomputes it from the Fock-space beam splitter.

Closed form, with overall sign ``(-1)**N_A`` for retained branches and
``(-1)**(N_A + 1)`` for collapsed ones (both match the beam splitter exactly)::

    N_A <= N_B componentwise:
        sqrt(eta P q / M) * sum_i [sqrt(c_i + 1) - a_i / sqrt(c_i + 1) * (1 - eta) / eta]
                                   |e_i, N_B - N_A + e_i>,      c = N_B - N_A
    a_i = b_i + 1 in exactly one mode i, a_j <= b_j elsewhere:
        sqrt(P q' / M) * sqrt((1 - eta) / eta) * sqrt(b_i + 1) |e_i, N_B - N_A + e_i>
    otherwise: 0

where ``P`` is the background probability of ``N_B``, ``q`` the product of
per-mode binomial pmfs Bin(b_j, eta)(a_j), and ``q'`` is the same product with
the extra-photon mode's factor replaced by ``eta ** (b_i + 1)``. A literal
binomial factor for that mode would be zero; the beam-splitter expansion
gives ``sqrt(1 - eta) * eta ** (b_i / 2) * sqrt(b_i + 1)`` for its amplitude,
which is what the ``q'`` reading reproduces.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .fock import (
    PRUNE_THRESHOLD,
    BasisLabel,
    ModeOccupation,
    SparseKet,
    _check_eta,
    attach_environment,
    beamsplitter_pair,
    inner,
    make_bell_state,
    project_environment,
)
from .noise import NoiseModel

MAX_MODES = 6
MAX_TOTAL = 10
ORACLE_MAX_PHOTONS = 12


class EnumerationLimitError(ValueError):
    """Exact enumeration would exceed the configured size guard."""


@dataclass(frozen=True)
class ChannelParams:
    M: int
    eta: float
    noise: NoiseModel = field(default_factory=NoiseModel.vacuum)

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")
        _check_eta(self.eta)


@dataclass(frozen=True)
class ConditionalBranch:
    n_a: ModeOccupation
    n_b: ModeOccupation
    ket: SparseKet
    case: str  # "retained", "collapsed" or "zero"


@dataclass(frozen=True)
class WeightedEnsemble:
    """Density operator as a sum of outer products of unnormalized kets."""

    branches: tuple[SparseKet, ...]
    cutoff: int
    tail_bound: float

    def trace(self) -> float:
        return math.fsum(b.norm2() for b in self.branches)

    def __len__(self) -> int:
        return len(self.branches)


def binomial_q(n_b: int, n_a: int, eta: float) -> float:
    """Binomial pmf with ``n_b`` trials, success probability ``eta``, ``n_a`` successes."""
    if n_b < 0:
        raise ValueError("n_b must be >= 0")
    if not 0 <= n_a <= n_b:
        return 0.0
    return math.comb(n_b, n_a) * eta**n_a * (1.0 - eta) ** (n_b - n_a)


def classify(n_a: Sequence[int], n_b: Sequence[int]) -> tuple[str, int | None]:
    """Return ("retained", None), ("collapsed", i) or ("zero", None)."""
    if len(n_a) != len(n_b):
        raise ValueError("n_a and n_b must have the same number of modes")
    extra = None
    for i, (a, b) in enumerate(zip(n_a, n_b)):
        if a <= b:
            continue
        if a == b + 1 and extra is None:
            extra = i
        else:
            return "zero", None
    return ("retained", None) if extra is None else ("collapsed", extra)


_UNITS: dict[int, tuple] = {}


def _unit(m: int, i: int) -> tuple:
    return _UNITS.setdefault(m, tuple(tuple(int(j == k) for j in range(m)) for k in range(m)))[i]


def phi_tilde(n_a: Sequence[int], n_b: Sequence[int], params: ChannelParams) -> SparseKet:
    """Closed-form conditional idler-signal ket for background ``n_b`` -> ``n_a``."""
    m = params.M
    if len(n_a) != m or len(n_b) != m:
        raise ValueError(f"occupations must have M={m} modes")
    n_b = tuple(n_b)
    return _phi_tilde(tuple(n_a), n_b, params, params.noise.joint_pmf(n_b))


def _phi_tilde(n_a: tuple, n_b: tuple, params: ChannelParams, p_nb: float) -> SparseKet:
    m, eta = params.M, params.eta
    case, extra = classify(n_a, n_b)
    if case == "zero" or p_nb == 0.0:
        return SparseKet(num_modes=m)
    sign = -1.0 if sum(n_a) % 2 else 1.0
    n_c = [b - a for a, b in zip(n_a, n_b)]

    if case == "collapsed":
        i = extra
        q = eta ** (n_b[i] + 1)
        for j in range(m):
            if j != i:
                q *= binomial_q(n_b[j], n_a[j], eta)
        amp = -sign * math.sqrt(p_nb * q / m) * math.sqrt((1.0 - eta) / eta) * math.sqrt(n_b[i] + 1)
        if abs(amp) < PRUNE_THRESHOLD:
            return SparseKet(num_modes=m)
        signal = list(n_c)
        signal[i] += 1
        return SparseKet._trusted({BasisLabel(_unit(m, i), tuple(signal)): amp}, m)

    q = math.prod(binomial_q(b, a, eta) for a, b in zip(n_a, n_b))
    pref = sign * math.sqrt(eta * p_nb * q / m)
    ratio = (1.0 - eta) / eta
    amps = {}
    for i in range(m):
        c1 = n_c[i] + 1
        amp = pref * (math.sqrt(c1) - n_a[i] / math.sqrt(c1) * ratio)
        if abs(amp) >= PRUNE_THRESHOLD:
            signal = list(n_c)
            signal[i] = c1
            amps[BasisLabel(_unit(m, i), tuple(signal))] = amp
    return SparseKet._trusted(amps, m)


def phi_tilde_oracle_all(n_b: Sequence[int], params: ChannelParams) -> dict[tuple, SparseKet]:
    """Beam-splitter derivation of every nonzero conditional ket for background ``n_b``.

    Builds sqrt(P(n_b)) |bell> (x) |n_b>_E, mixes each signal mode with the
    matching environment mode, and splits the result by final environment
    occupation. Keys are the final environment occupations ``n_a``.
    """
    m = params.M
    n_b = tuple(n_b)
    if len(n_b) != m:
        raise ValueError(f"n_b must have M={m} modes")
    if sum(n_b) + 1 > ORACLE_MAX_PHOTONS:
        raise EnumerationLimitError(
            f"oracle limited to N_B + 1 <= {ORACLE_MAX_PHOTONS}, got N_B={sum(n_b)}"
        )
    weight = math.sqrt(params.noise.joint_pmf(n_b))
    ket = attach_environment(make_bell_state(m), n_b, weight)
    for i in range(m):
        ket = beamsplitter_pair(ket, i, i, params.eta)
    return project_environment(ket)


def phi_tilde_oracle(n_a: Sequence[int], n_b: Sequence[int], params: ChannelParams) -> SparseKet:
    """Single conditional ket from :func:`phi_tilde_oracle_all` (zero ket if absent)."""
    if len(n_a) != params.M:
        raise ValueError(f"n_a must have M={params.M} modes")
    return phi_tilde_oracle_all(n_b, params).get(tuple(n_a), SparseKet(num_modes=params.M))


def compare_up_to_phase(a: SparseKet, b: SparseKet) -> float:
    """Largest componentwise |b - e^{i phi} a| after fitting a single global phase."""
    overlap = inner(a, b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    labels = set(a.amplitudes) | set(b.amplitudes)
    return max((abs(b[k] - phase * a[k]) for k in labels), default=0.0)


def occupations_up_to(m: int, k: int) -> Iterator[tuple[int, ...]]:
    """All M-mode occupations with total <= k: by increasing total, then lexicographic."""
    for total in range(k + 1):
        yield from compositions(total, m)


def compositions(total: int, m: int) -> Iterator[tuple[int, ...]]:
    """Occupations of ``m`` modes summing to ``total``, in lexicographic order."""
    if m == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, m - 1):
            yield (first,) + rest


def conditional_branches(n_b: Sequence[int], params: ChannelParams) -> Iterator[ConditionalBranch]:
    """Every nonzero conditional branch for background ``n_b`` (retained, then collapsed)."""
    n_b = tuple(n_b)
    m = params.M
    if len(n_b) != m:
        raise ValueError(f"n_b must have M={m} modes")
    nb_occ = ModeOccupation(n_b)
    p_nb = params.noise.joint_pmf(n_b)
    if p_nb == 0.0:
        return
    for n_a in itertools.product(*(range(b + 1) for b in n_b)):
        ket = _phi_tilde(n_a, n_b, params, p_nb)
        if not ket.is_zero():
            yield ConditionalBranch(ModeOccupation(n_a), nb_occ, ket, "retained")
    for i in range(m):
        ranges = [range(b + 1) for b in n_b]
        ranges[i] = (n_b[i] + 1,)
        for n_a in itertools.product(*ranges):
            ket = _phi_tilde(n_a, n_b, params, p_nb)
            if not ket.is_zero():
                yield ConditionalBranch(ModeOccupation(n_a), nb_occ, ket, "collapsed")


def sorted_occupations_up_to(m: int, k: int) -> Iterator[tuple[tuple[int, ...], int]]:
    """Non-increasing M-mode occupations with total <= k, paired with their orbit size.

    Each yields one representative of the set of occupations related by a
    permutation of modes; the orbit size counts that set.
    """
    for total in range(k + 1):
        for occ in _partitions(total, m, total):
            counts = Counter(occ)
            mult = math.factorial(m)
            for c in counts.values():
                mult //= math.factorial(c)
            yield occ, mult


def _partitions(total: int, m: int, largest: int) -> Iterator[tuple[int, ...]]:
    if m == 1:
        if total <= largest:
            yield (total,)
        return
    for first in range(min(total, largest), -1, -1):
        if first * m < total:
            break
        for rest in _partitions(total - first, m - 1, first):
            yield (first,) + rest


def _resolve_cutoff(params, tail_tol, cutoff, max_modes, max_total) -> tuple[int, float]:
    if params.M > max_modes:
        raise EnumerationLimitError(f"exact enumeration limited to M <= {max_modes}, got M={params.M}")
    if cutoff is None:
        cutoff = params.noise.truncation_cutoff(params.M, tail_tol)
    if cutoff > max_total:
        raise EnumerationLimitError(
            f"total-photon cutoff {cutoff} exceeds the guard max_total={max_total}; "
            "raise tail_tol, pass max_total, or use the Monte Carlo estimators"
        )
    return cutoff, params.noise.total_sf(params.M, cutoff)


def _backgrounds(m: int, cutoff: int, symmetric: bool):
    if symmetric:
        return sorted_occupations_up_to(m, cutoff)
    return ((occ, 1) for occ in occupations_up_to(m, cutoff))


def rho_pres_ensemble(
    params: ChannelParams,
    tail_tol: float = 1e-8,
    *,
    cutoff: int | None = None,
    max_modes: int = MAX_MODES,
    max_total: int = MAX_TOTAL,
    symmetric: bool = False,
) -> WeightedEnsemble:
    """Target-present state as a pure-state ensemble, truncated by total background photons.

    With ``symmetric=True`` only one background occupation per mode-permutation
    orbit is enumerated, its branches scaled by sqrt(orbit size). The result
    has the same trace and the same expectation value for any operator that is
    invariant under simultaneous permutation of idler and signal modes (the
    click projector is), but is not the same operator.
    """
    cutoff, tail = _resolve_cutoff(params, tail_tol, cutoff, max_modes, max_total)
    branches = []
    for n_b, mult in _backgrounds(params.M, cutoff, symmetric):
        scale = math.sqrt(mult)
        for br in conditional_branches(n_b, params):
            branches.append(br.ket if mult == 1 else br.ket.scaled(scale))
    return WeightedEnsemble(tuple(branches), cutoff, tail)


def rho_abs_ensemble(
    params: ChannelParams,
    tail_tol: float = 1e-8,
    *,
    cutoff: int | None = None,
    max_modes: int = MAX_MODES,
    max_total: int = MAX_TOTAL,
    symmetric: bool = False,
) -> WeightedEnsemble:
    """Target-absent state: maximally mixed idler times the background, as orthogonal branches.

    ``symmetric`` has the same meaning as in :func:`rho_pres_ensemble`.
    """
    cutoff, tail = _resolve_cutoff(params, tail_tol, cutoff, max_modes, max_total)
    m = params.M
    branches = []
    for n_b, mult in _backgrounds(m, cutoff, symmetric):
        p = params.noise.joint_pmf(n_b)
        if p == 0.0:
            continue
        amp = math.sqrt(mult * p / m)
        for i in range(m):
            branches.append(SparseKet._trusted({BasisLabel(_unit(m, i), n_b): amp}, m))
    return WeightedEnsemble(tuple(branches), cutoff, tail)
