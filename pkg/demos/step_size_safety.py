"""What the step-size validation protects against.

The dual step must stay below 1/U for a certified upper bound U on the
squared operator norm. The validator rejects configurations that break the
bound; forcing one through anyway (as the hidden CLI flag for negative
controls does) degrades or destroys the per-iteration distance monotonicity
that the convergence argument rests on.
"""

import numpy as np

import splitep as sp
from splitep.solver import default_config, validate

problem = sp.generate_planted(4, 4, seed=1)
U = sp.operator_norm_sq_upper(problem.A)
print(f"certified bound U on ||A||^2: {U:.4f}  (admissible dual steps: (0, {1/U:.4f}))")

good = default_config(problem)
print(f"default config: mu = {good.mu:.4f} ->", validate(good, problem) or "admissible")

bad = default_config(problem, mu_fraction=2.0)
for violation in validate(bad, problem):
    print(f"mu = {bad.mu:.4f} -> {violation}")

# force it through anyway and watch the distance chain
forced = default_config(problem, mu_fraction=20.0, validate_mu=False, max_iter=1500)
report = sp.weak_solve(problem, forced)
audit = sp.fejer_audit(report.history, problem.planted_solution)
print(f"\nforced mu at 20/U: status {report.status.value}, "
      f"worst distance-chain violation {audit:.3e}")

report = sp.weak_solve(problem)
audit = sp.fejer_audit(report.history, problem.planted_solution)
print(f"admissible mu:     status {report.status.value}, "
      f"worst distance-chain violation {audit:.3e}")
