"""Stop transmitting at the first click.

Estimates the single-shot click probabilities at large M, then runs the
sequential rule and compares the empirical miss rate and photon usage with
their closed forms.
"""

from bellqi.channel import ChannelParams
from bellqi.measurement import pdet_mc, pfa_mc
from bellqi.noise import NoiseModel
from bellqi.protocol import AnalysisParams, sequential_sim

params = ChannelParams(100_000, 0.1, NoiseModel.thermal(1.0))
det = pdet_mc(params, 100_000, rng=1)
fa = pfa_mc(params, 100_000, rng=2)
print(f"single shot: eta_tilde={det.value:.5f}, pfa={fa.value:.2e}")

analysis = AnalysisParams(params.eta, params.noise.mean * (1 - params.eta), n_max=100)
res = sequential_sim(analysis, det.value, fa.value, 100_000, rng=3)
print(f"miss rate        {res.miss_rate:.5f} +- {res.miss_rate_se:.5f}  (closed form {res.expected_miss:.5f})")
print(f"false alarms     {res.false_alarm_rate:.5f} +- {res.false_alarm_rate_se:.5f}"
      f"  (closed form {res.expected_false_alarm:.5f})")
print(f"error rate       {res.p_e:.5f}")
print(f"photons per run  {res.mean_shots:.3f} +- {res.mean_shots_se:.3f}  (exact {res.expected_shots:.3f},"
      f" uncapped count {res.nominal_shots:.3f})")
