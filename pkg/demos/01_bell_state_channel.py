"""Send one half of an M-mode Bell state into a noisy return channel.

Walks through the conditional kets left behind when the environment keeps a
given background occupation, and checks the closed form against a direct
beam-splitter computation.
"""

from bellqi.channel import ChannelParams, classify, phi_tilde, phi_tilde_oracle_all
from bellqi.fock import make_bell_state
from bellqi.noise import NoiseModel

M, ETA = 2, 0.4
params = ChannelParams(M, ETA, NoiseModel.thermal(0.7))

bell = make_bell_state(M)
print("Bell state:")
for label, amp in bell.items():
    print(f"  idler={tuple(label.idler)} signal={tuple(label.signal)}  {amp.real:+.4f}")

# one background photon sitting in mode 0
n_b = (1, 0)
oracle = phi_tilde_oracle_all(n_b, params)
print(f"\nbackground {n_b}: {len(oracle)} nonzero branches")
total = 0.0
for n_a, ket in sorted(oracle.items()):
    closed = phi_tilde(n_a, n_b, params)
    case, _ = classify(n_a, n_b)
    total += ket.norm2()
    dev = max(abs(closed[k] - ket[k]) for k in set(closed) | set(ket))
    print(f"  env keeps {n_a} ({case:9s}) weight {ket.norm2():.6f}  closed-form deviation {dev:.1e}")
print(f"sum of weights {total:.12f} vs P(n_b) {params.noise.joint_pmf(n_b):.12f}")
