"""Alternating bit protocol, from raw forks to the LTL check.

The last step takes a few minutes.
"""
import sys
import time

from tracebound.boundedness import iter_forks
from tracebound.commutation import decide_bounded_modulo, diamond_sufficient_check
from tracebound.fixtures import ABP_FAIRNESS, ABP_PHI, abp, abp_independence, abp_unfolded
from tracebound.omega import model_check_ltl

s = abp()
seen = []
for f in iter_forks(s):
    if f.s not in seen:
        seen.append(f.s)
        print("fork at", s.format_config(f.s), "branches", f.a_branch, "|", " ".join(f.b_branch))
    if len(seen) == 4:
        break

I = abp_independence()
print("diamond:", diamond_sufficient_check(s, I))
print("2 sessions modulo I:", type(decide_bounded_modulo(abp_unfolded(2), I)).__name__)

if "--skip-ltl" in sys.argv:
    sys.exit(0)
phi = f"{ABP_FAIRNESS} -> {ABP_PHI}"
t0 = time.perf_counter()
r = model_check_ltl(abp_unfolded(2), phi, I, closure_asserted=True)
print(f"{phi}: {r} ({time.perf_counter() - t0:.0f}s)")
