"""Sampling K_{2M} patterns inside a larger complete graph K_{2nM}.

Run with ``python3 demos/extended_complete.py``.
"""

from gbsmatch import optimizer as op

m, n = 2500, 64
best = op.optimize_cd(m, n)
print(f"K{2 * m} inside K{2 * n * m}: c* = {best.c_star:.4e}, d* = {best.d_star:.2f}, "
      f"Pr* = {best.pr_star:.3e}, squeezing {best.max_squeezing_db:.2f} dB "
      f"(closed form {op.max_squeezing_db(m, n):.2f} dB)")

print("\nsqueezing budget vs best probability, K40 inside K640:")
for db in (2, 5, 10, 15, 20):
    r = op.pr_at_squeezing_budget(20, 16, db)
    print(f"  {db:>2} dB  Pr = {r.pr_star:.3e}  {'(budget active)' if r.on_boundary else ''}")
