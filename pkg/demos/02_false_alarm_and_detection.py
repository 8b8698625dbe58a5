"""Click probabilities with and without a target, exactly and by sampling.

Small M is traced exactly; large M uses the Monte Carlo estimators, which
show the false-alarm rate falling like 1/M while the detection probability
settles at eta / (1 + (1 - eta) <n>).
"""

from bellqi.channel import ChannelParams
from bellqi.measurement import pdet_exact, pdet_mc, pfa_exact, pfa_mc
from bellqi.noise import NoiseModel
from bellqi.protocol import effective_eta

noise = NoiseModel.thermal(0.5)
print("exact traces, thermal(0.5), eta = 0.5")
for m in (2, 3, 4):
    p = ChannelParams(m, 0.5, noise)
    fa = pfa_exact(p, 1e-6, max_total=40, symmetric=True)
    det = pdet_exact(p, 1e-6, max_total=40, symmetric=True)
    print(f"  M={m}: pfa={fa.value:.6f} (2/M={2 / m:.3f})  pdet={det.value:.6f}")

eta, noise = 0.1, NoiseModel.thermal(1.0)
limit = effective_eta(eta, noise.mean)
print(f"\nMonte Carlo, thermal(1), eta = {eta}; large-M detection limit {limit:.6f}")
for k, m in enumerate((100, 1_000, 10_000, 100_000)):
    p = ChannelParams(m, eta, noise)
    fa = pfa_mc(p, 100_000, rng=2 * k)
    det = pdet_mc(p, 100_000, rng=2 * k + 1)
    print(f"  M={m:>6}: pfa={fa.value:.3e}  pdet={det.value:.6f} +- {det.std_error:.1e}")
