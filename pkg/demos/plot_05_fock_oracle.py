"""
Checking against brute force
============================

For a bath of one or two harmonic modes the whole system can be
exponentiated in a truncated Fock space. The analytic formulas must agree.
"""

from zeno_dephase.oracle_checks import run_all

results = run_all()
for r in results:
    print(f"{r.check:<28} J={r.J:<4} N={r.N} beta={r.beta:<4}  error {r.error:.1e}")
print(sum(r.passed for r in results), "of", len(results), "checks passed")
