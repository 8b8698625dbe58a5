"""I.i.d. per-mode photon-number distributions for the background field.

Supported kinds: ``vacuum``, ``thermal`` (Bose-Einstein), ``poisson`` and
``finite`` (an explicit pmf table over 0..K). Specs parse from strings such
as ``"thermal:0.5"`` or ``"pmf:0.2,0.5,0.3"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

KINDS = ("vacuum", "thermal", "poisson", "finite")


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    mean_param: float = 0.0
    table: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("thermal", "poisson"):
            if not (math.isfinite(self.mean_param) and self.mean_param >= 0):
                raise ValueError(f"{self.kind} mean must be finite and >= 0, got {self.mean_param}")
        if self.kind == "finite":
            t = np.asarray(self.table, dtype=float)
            if t.size == 0 or np.any(t < 0) or not np.all(np.isfinite(t)):
                raise ValueError("pmf table must be non-empty, finite and non-negative")
            if abs(math.fsum(self.table) - 1.0) > 1e-12:
                raise ValueError(f"pmf table sums to {math.fsum(self.table)!r}, not 1")

    # -- constructors -------------------------------------------------
    @classmethod
    def vacuum(cls) -> "NoiseModel":
        return cls("vacuum")

    @classmethod
    def thermal(cls, mean: float) -> "NoiseModel":
        return cls("thermal", float(mean))

    @classmethod
    def poisson(cls, mean: float) -> "NoiseModel":
        return cls("poisson", float(mean))

    @classmethod
    def finite(cls, table: Sequence[float]) -> "NoiseModel":
        return cls("finite", table=tuple(float(p) for p in table))

    @property
    def spec(self) -> str:
        """String form accepted by :func:`parse_noise`."""
        if self.kind == "vacuum":
            return "vacuum"
        if self.kind == "finite":
            return "pmf:" + ",".join(repr(p) for p in self.table)
        return f"{self.kind}:{self.mean_param!r}"

    @property
    def _degenerate(self) -> bool:
        return self.kind == "vacuum" or (self.kind in ("thermal", "poisson") and self.mean_param == 0)

    # -- distribution -------------------------------------------------
    def pmf(self, n):
        """Probability of ``n`` photons in a single mode (scalar or array)."""
        n_arr = np.asarray(n)
        if self._degenerate:
            out = (n_arr == 0).astype(float)
        elif self.kind == "thermal":
            nb = self.mean_param
            # nb^n / (1+nb)^(n+1), in log space
            out = np.where(n_arr >= 0, np.exp(n_arr * math.log(nb) - (n_arr + 1) * math.log1p(nb)), 0.0)
        elif self.kind == "poisson":
            out = stats.poisson.pmf(n_arr, self.mean_param)
        else:
            t = np.asarray(self.table)
            idx = np.clip(n_arr, 0, t.size - 1)
            out = np.where((n_arr >= 0) & (n_arr < t.size), t[idx], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def joint_pmf(self, occupation: Iterable[int]) -> float:
        """Product of per-mode probabilities."""
        occ = np.asarray(tuple(occupation), dtype=int)
        if occ.size == 0:
            return 1.0
        return float(np.prod(self.pmf(occ)))

    @property
    def mean(self) -> float:
        """Mean photon number per mode."""
        if self.kind in ("thermal", "poisson"):
            return self.mean_param
        if self.kind == "finite":
            return math.fsum(k * p for k, p in enumerate(self.table))
        return 0.0

    @property
    def variance(self) -> float:
        if self.kind == "thermal":
            return self.mean_param * (1 + self.mean_param)
        if self.kind == "poisson":
            return self.mean_param
        if self.kind == "finite":
            mu = self.mean
            return math.fsum((k - mu) ** 2 * p for k, p in enumerate(self.table))
        return 0.0

    def _total_dist(self, m: int):
        if self.kind == "thermal":
            return stats.nbinom(m, 1.0 / (1.0 + self.mean_param))
        return stats.poisson(m * self.mean_param)

    def _finite_total_pmf(self, m: int) -> np.ndarray:
        base = np.trim_zeros(np.asarray(self.table, dtype=float), "b")
        out = np.array([1.0])
        power = base
        while m:
            if m & 1:
                out = np.convolve(out, power)
            m >>= 1
            if m:
                power = np.convolve(power, power)
        return out

    def total_pmf(self, m: int, kmax: int) -> np.ndarray:
        """P(total photons over ``m`` modes = k) for k = 0..kmax."""
        k = np.arange(kmax + 1)
        if self._degenerate:
            return (k == 0).astype(float)
        if self.kind == "finite":
            full = self._finite_total_pmf(m)
            out = np.zeros(kmax + 1)
            n = min(full.size, kmax + 1)
            out[:n] = full[:n]
            return out
        return self._total_dist(m).pmf(k)

    def total_sf(self, m: int, k: int) -> float:
        """P(total photons over ``m`` modes > k)."""
        if self._degenerate:
            return 0.0 if k >= 0 else 1.0
        if self.kind == "finite":
            full = self._finite_total_pmf(m)
            return float(max(math.fsum(full[k + 1:]), 0.0)) if k + 1 < full.size else 0.0
        return float(self._total_dist(m).sf(k))

    def truncation_cutoff(self, m: int, tail_tol: float) -> int:
        """Smallest total-photon cutoff K with P(total over ``m`` modes > K) < ``tail_tol``."""
        if not 0 < tail_tol < 1:
            raise ValueError(f"tail_tol must lie in (0, 1), got {tail_tol}")
        if self._degenerate:
            return 0
        if self.kind == "finite":
            full = self._finite_total_pmf(m)
            # sf[k] = P(total > k)
            sf = np.concatenate([np.cumsum(full[::-1])[::-1][1:], [0.0]])
            return int(np.argmax(sf < tail_tol))
        dist = self._total_dist(m)
        k = max(int(dist.isf(tail_tol)), 0)
        while dist.sf(k) >= tail_tol:
            k += 1
        while k > 0 and dist.sf(k - 1) < tail_tol:
            k -= 1
        return k

    # -- sampling -----------------------------------------------------
    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        """I.i.d. single-mode photon counts."""
        if self._degenerate:
            return np.zeros(size, dtype=np.int64)
        if self.kind == "thermal":
            return rng.geometric(1.0 / (1.0 + self.mean_param), size=size) - 1
        if self.kind == "poisson":
            return rng.poisson(self.mean_param, size=size)
        return rng.choice(len(self.table), size=size, p=np.asarray(self.table))

    def sample_positive(self, size, rng: np.random.Generator) -> np.ndarray:
        """Single-mode counts conditioned on at least one photon."""
        if self._degenerate or self.pmf(0) >= 1.0:
            raise ValueError("distribution has no mass on n >= 1")
        if self.kind == "thermal":
            # memoryless: n | n >= 1 is 1 + the same geometric
            return rng.geometric(1.0 / (1.0 + self.mean_param), size=size)
        if self.kind == "poisson":
            lam = self.mean_param
            p0 = math.exp(-lam)
            u = rng.random(size)
            out = stats.poisson.ppf(p0 + u * (1.0 - p0), lam).astype(np.int64)
            return np.maximum(out, 1)
        t = np.asarray(self.table[1:])
        return 1 + rng.choice(t.size, size=size, p=t / t.sum())

    def sample_total(self, m: int, size, rng: np.random.Generator) -> np.ndarray:
        """Total photon count summed over ``m`` i.i.d. modes."""
        if m < 0:
            raise ValueError("m must be >= 0")
        if self._degenerate or m == 0:
            return np.zeros(size, dtype=np.int64)
        if self.kind == "thermal":
            return rng.negative_binomial(m, 1.0 / (1.0 + self.mean_param), size=size)
        if self.kind == "poisson":
            return rng.poisson(m * self.mean_param, size=size)
        counts = rng.multinomial(m, np.asarray(self.table), size=size)
        return counts @ np.arange(len(self.table))

    def sample_occupation_sparse(self, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
        """One draw of an M-mode occupation, as (mode, count) pairs for nonzero modes only.

        The number of occupied modes is drawn from Binomial(M, 1 - p(0)), the
        occupied mode indices uniformly without replacement, and each count
        from the pmf conditioned on n >= 1.
        """
        if m < 1:
            raise ValueError(f"M must be >= 1, got {m}")
        p_occ = 1.0 - self.pmf(0)
        if p_occ <= 0:
            return []
        k = int(rng.binomial(m, min(p_occ, 1.0)))
        if k == 0:
            return []
        modes = np.sort(rng.choice(m, size=k, replace=False))
        counts = self.sample_positive(k, rng)
        return [(int(i), int(c)) for i, c in zip(modes, counts)]


def parse_noise(spec: str) -> NoiseModel:
    """Parse ``vacuum``, ``thermal:<mean>``, ``poisson:<mean>`` or ``pmf:<p0,p1,...>``."""
    spec = spec.strip()
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    try:
        if name == "vacuum" and not arg:
            return NoiseModel.vacuum()
        if name == "thermal":
            return NoiseModel.thermal(float(arg))
        if name == "poisson":
            return NoiseModel.poisson(float(arg))
        if name == "pmf":
            return NoiseModel.finite([float(x) for x in arg.split(",")])
    except ValueError as exc:
        raise ValueError(f"bad noise spec {spec!r}: {exc}") from None
    raise ValueError(f"bad noise spec {spec!r}; expected vacuum, thermal:<mean>, poisson:<mean> or pmf:<p0,...>")

