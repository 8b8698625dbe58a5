"""Error-exponent advantage over the best coherent-state transmitter, in dB.

Prints a coarse version of both noise panels; the CLI's ``advantage`` command
writes the full grids as CSV.
"""

import numpy as np

from bellqi.protocol import advantage_ratio, figure1_data, to_db

print(f"advantage at nb = 1: ratio {advantage_ratio(1.0):.4f} = {to_db(advantage_ratio(1.0)):.3f} dB")
print(f"large-nb ceiling: {to_db(4.0):.3f} dB block, {to_db(8.0):.3f} dB sequential at equal priors\n")

print(f"{'nb':>10} {'block':>8} {'sequential':>11} {'bound':>8}")
for pt in figure1_data(np.concatenate([np.linspace(0, 1, 5), np.logspace(1, 4, 4)])):
    print(f"{pt.nb:>10.4g} {pt.block_db:>8.3f} {pt.sequential_db:>11.3f} {pt.fundamental_db:>8.3f}")
