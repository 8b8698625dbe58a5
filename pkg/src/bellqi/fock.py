"""Sparse multimode Fock-basis states and the two-mode beam splitter.

A basis label holds up to three registers (idler, signal, environment), each a
tuple of per-mode photon counts. Kets are stored as immutable sparse maps from
labels to complex amplitudes.
"""

from __future__ import annotations

import math
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional

import numpy as np

PRUNE_THRESHOLD = 1e-14


class ModeOccupation(tuple):
    """Photon counts per mode for one spatial register."""

    __slots__ = ()

    def __new__(cls, counts: Iterable[int] = ()) -> "ModeOccupation":
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"photon counts must be non-negative, got {counts}")
        return super().__new__(cls, counts)

    @classmethod
    def zeros(cls, m: int) -> "ModeOccupation":
        return cls((0,) * m)

    @classmethod
    def unit(cls, m: int, i: int) -> "ModeOccupation":
        """Single photon in mode ``i`` of ``m``."""
        if not 0 <= i < m:
            raise IndexError(f"mode {i} out of range for M={m}")
        counts = [0] * m
        counts[i] = 1
        return cls(counts)

    @property
    def num_modes(self) -> int:
        return len(self)

    def total(self) -> int:
        return sum(self)

    def __add__(self, other):  # componentwise, not concatenation
        if len(other) != len(self):
            raise ValueError("mode count mismatch")
        return ModeOccupation(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        if len(other) != len(self):
            raise ValueError("mode count mismatch")
        return ModeOccupation(a - b for a, b in zip(self, other))

    def __le__(self, other):
        # componentwise partial order, not lexicographic
        return len(self) == len(other) and all(a <= b for a, b in zip(self, other))

    def __repr__(self) -> str:
        return f"ModeOccupation({tuple(self)})"


class BasisLabel(NamedTuple):
    idler: tuple
    signal: tuple
    environment: Optional[tuple] = None

    @property
    def num_modes(self) -> int:
        return len(self.idler)

    @property
    def has_environment(self) -> bool:
        return self.environment is not None


def _layout(label: BasisLabel) -> tuple[int, bool]:
    m = len(label.idler)
    if len(label.signal) != m or (label.environment is not None and len(label.environment) != m):
        raise ValueError(f"registers of {label} do not share the same number of modes")
    return m, label.environment is not None


class SparseKet:
    """Immutable sparse ket over :class:`BasisLabel` keys.

    Amplitudes with magnitude below ``prune`` are dropped on construction.
    An empty ket needs ``num_modes`` (and ``has_environment``) to be given
    explicitly, since there is no label to infer them from.
    """

    __slots__ = ("_amps", "_num_modes", "_has_env")

    def __init__(
        self,
        amplitudes: Mapping[BasisLabel, complex] | Iterable[tuple[BasisLabel, complex]] = (),
        *,
        num_modes: Optional[int] = None,
        has_environment: Optional[bool] = None,
        prune: float = PRUNE_THRESHOLD,
    ):
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        amps: dict[BasisLabel, complex] = {}
        layout = None
        for label, amp in items:
            if type(label) is not BasisLabel:
                label = BasisLabel(*label)
            lay = _layout(label)
            if layout is None:
                layout = lay
            elif lay != layout:
                raise ValueError("all labels in a ket must share the same register layout")
            amp = complex(amp)
            if abs(amp) >= prune:
                amps[label] = amps.get(label, 0j) + amp
        if layout is None:
            if num_modes is None:
                raise ValueError("num_modes is required for an empty ket")
            layout = (num_modes, bool(has_environment))
        elif num_modes is not None and num_modes != layout[0]:
            raise ValueError(f"labels have {layout[0]} modes, expected {num_modes}")
        self._amps = {k: v for k, v in sorted(amps.items()) if abs(v) >= prune}
        self._num_modes, self._has_env = layout

    @classmethod
    def _trusted(cls, amps: dict, num_modes: int, has_environment: bool = False) -> "SparseKet":
        # caller guarantees consistent labels and amplitudes above the prune threshold
        ket = cls.__new__(cls)
        ket._amps = {k: amps[k] for k in sorted(amps)}
        ket._num_modes = num_modes
        ket._has_env = has_environment
        return ket

    @property
    def amplitudes(self) -> Mapping[BasisLabel, complex]:
        return MappingProxyType(self._amps)

    @property
    def num_modes(self) -> int:
        return self._num_modes

    @property
    def has_environment(self) -> bool:
        return self._has_env

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self) -> Iterator[BasisLabel]:
        return iter(self._amps)

    def items(self):
        return self._amps.items()

    def __getitem__(self, label) -> complex:
        return self._amps.get(BasisLabel(*label), 0j)

    def norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self._amps.values())

    def scaled(self, factor: complex) -> "SparseKet":
        return SparseKet(
            {k: factor * v for k, v in self._amps.items()},
            num_modes=self._num_modes,
            has_environment=self._has_env,
        )

    def __add__(self, other: "SparseKet") -> "SparseKet":
        _check_compatible(self, other)
        out = dict(self._amps)
        for k, v in other.items():
            out[k] = out.get(k, 0j) + v
        return SparseKet(out, num_modes=self._num_modes, has_environment=self._has_env)

    def is_zero(self) -> bool:
        return not self._amps

    def __repr__(self) -> str:
        return f"SparseKet(M={self._num_modes}, nnz={len(self._amps)}, norm2={self.norm2():.6g})"


def _check_compatible(a: SparseKet, b: SparseKet) -> None:
    if a.num_modes != b.num_modes or a.has_environment != b.has_environment:
        raise ValueError(
            f"incompatible kets: M={a.num_modes}/{b.num_modes}, "
            f"environment={a.has_environment}/{b.has_environment}"
        )


def inner(a: SparseKet, b: SparseKet) -> complex:
    """Return <a|b>, conjugate-linear in ``a``."""
    _check_compatible(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    amps_a, amps_b = a.amplitudes, b.amplitudes
    for label in small:
        if label in large.amplitudes:
            total += amps_a[label].conjugate() * amps_b[label]
    return total


def make_bell_state(m: int) -> SparseKet:
    """Uniform-phase M-mode Bell state over idler and signal registers."""
    if m < 1:
        raise ValueError(f"M must be >= 1, got {m}")
    amp = 1.0 / math.sqrt(m)
    labels = (BasisLabel(ModeOccupation.unit(m, i), ModeOccupation.unit(m, i)) for i in range(m))
    return SparseKet({label: amp for label in labels})


def _check_eta(eta: float) -> None:
    if not (0.0 < eta <= 1.0) or not math.isfinite(eta):
        raise ValueError(f"eta must lie in (0, 1], got {eta}")


@lru_cache(maxsize=4096)
def beamsplitter_column(s: int, e: int, eta: float) -> tuple[float, ...]:
    """Amplitudes <s', n-s'|U|s, e> for s' = 0..n, with n = s + e.

    Convention: a_S^+ -> sqrt(eta) a_S^+ + sqrt(1-eta) a_E^+,
    a_E^+ -> sqrt(1-eta) a_S^+ - sqrt(eta) a_E^+.
    """
    t, r = math.sqrt(eta), math.sqrt(1.0 - eta)
    n = s + e
    out = [0.0] * (n + 1)
    norm_in = math.sqrt(math.factorial(s) * math.factorial(e))
    for j in range(s + 1):
        cj = math.comb(s, j) * t**j * r ** (s - j)
        for k in range(e + 1):
            ck = math.comb(e, k) * r**k * (-t) ** (e - k)
            m_out = j + k
            out[m_out] += cj * ck * math.sqrt(math.factorial(m_out) * math.factorial(n - m_out))
    return tuple(v / norm_in for v in out)


def _adjoint_column(s: int, e: int, eta: float) -> tuple[float, ...]:
    # matrix elements are real, so the adjoint is the transpose
    n = s + e
    return tuple(beamsplitter_column(sp, n - sp, eta)[s] for sp in range(n + 1))


def beamsplitter_pair(
    ket: SparseKet,
    signal_mode: int,
    env_mode: int,
    eta: float,
    *,
    adjoint: bool = False,
) -> SparseKet:
    """Apply the beam splitter to signal mode ``signal_mode`` and environment mode ``env_mode``.

    Photon number in the (signal, environment) pair is conserved per label.
    With ``adjoint=True`` the inverse transformation is applied.
    """
    _check_eta(eta)
    if not ket.has_environment:
        raise ValueError("beamsplitter_pair needs a ket with an environment register")
    m = ket.num_modes
    if not (0 <= signal_mode < m and 0 <= env_mode < m):
        raise IndexError(f"mode index out of range for M={m}")
    column = _adjoint_column if adjoint else beamsplitter_column
    out: dict[BasisLabel, complex] = {}
    for label, amp in ket.items():
        s, e = label.signal[signal_mode], label.environment[env_mode]
        n = s + e
        sig, env = list(label.signal), list(label.environment)
        for s_out, u in enumerate(column(s, e, eta)):
            if u == 0.0:
                continue
            sig[signal_mode] = s_out
            env[env_mode] = n - s_out
            new = BasisLabel(label.idler, tuple(sig), tuple(env))
            out[new] = out.get(new, 0j) + u * amp
    return SparseKet(out, num_modes=m, has_environment=True)


def attach_environment(ket: SparseKet, env: Iterable[int], amplitude: complex = 1.0) -> SparseKet:
    """Return ``amplitude * ket (x) |env>``."""
    env = tuple(env)
    if len(env) != ket.num_modes:
        raise ValueError("environment register has the wrong number of modes")
    return SparseKet(
        {BasisLabel(k.idler, k.signal, env): amplitude * v for k, v in ket.items()},
        num_modes=ket.num_modes,
        has_environment=True,
    )


def project_environment(ket: SparseKet) -> dict[tuple, SparseKet]:
    """Split a ket by environment label: returns {env: <env|ket} over idler and signal."""
    groups: dict[tuple, dict[BasisLabel, complex]] = {}
    for label, amp in ket.items():
        groups.setdefault(label.environment, {})[BasisLabel(label.idler, label.signal)] = amp
    return {env: SparseKet(amps, num_modes=ket.num_modes) for env, amps in groups.items()}


def to_dense(ket: SparseKet, labels: Iterable[BasisLabel]) -> np.ndarray:
    """Amplitudes of ``ket`` on an explicit list of labels."""
    return np.array([ket[label] for label in labels], dtype=complex)
