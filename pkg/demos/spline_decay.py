"""Evolve the spline-data benchmark and watch both components decay.

The second built-in problem starts from natural cubic splines through a
handful of knots, on an interval whose boundaries move like a cube root
of time, fast at first and slowing.  There is no exact solution; the
qualitative check is that both components decay fast once the initial
data has diffused, which this script shows as a max-norm table.

    python3 demos/spline_decay.py
"""

import numpy as np

from mbfem import build_space, example2, run

problem = example2()
space = build_space(4, 4)
delta = 1e-3

checkpoints = np.linspace(0.0, 1.0, 11)
norms: dict[float, tuple[float, float]] = {}


def record(step: int, time: float, vectors) -> None:
    hits = checkpoints[np.abs(checkpoints - time) <= delta / 2.0]
    if hits.size:
        norms[float(hits[0])] = tuple(float(np.abs(v).max()) for v in vectors)


result = run(problem, space, delta, observers=[record])
print(f"{result.n_steps} steps, {space.n_dofs} dofs, {result.runtime:.2f}s\n")

print("  t     max|u1|    max|u2|    gamma(t)")
for t in sorted(norms):
    n1, n2 = norms[t]
    print(f"  {t:3.1f}   {n1:8.6f}   {n2:8.6f}   {problem.motion.gamma(t):.4f}")

half = min(t for t, (n1, n2) in norms.items() if n1 < norms[0.0][0] / 20)
print(f"\nfirst component below 5% of its initial peak by t = {half:.1f}")
