"""The likelihood has no maximum: shrink one component onto a data point.

With mu1 fixed at the first observation, each factor of 10 in sigma1
adds about ln 10 to the log-likelihood, forever.
"""

import math

from gmmcrit import run_em, MixtureParams, unboundedness_trace

sigmas = [10.0 ** -e for e in range(1, 13)]
prev = None
for s, ll in unboundedness_trace([0.0, 2.0], sigmas):
    step = "" if prev is None else f"  (+{ll - prev:.6f}, ln 10 = {math.log(10):.6f})"
    print(f"sigma1={s:.0e}  loglik={ll:.6f}{step}")
    prev = ll

# EM walks into the same trap from a symmetric start and reports it.
trace = run_em(MixtureParams(0.5, 0.0, 2.0, 1.0, 1.0), [0.0, 2.0])
print("\nEM status:", trace.status.value, "-", trace.reason)
print("last iterate:", trace.final)
