"""Error chain and workload estimates for a few distance choices.

Run: python3 demos/03_resource_table.py
"""

from magicfactory.resources import (
    CCZ_FACTORY,
    DistanceAssignment,
    chain_errors,
    estimate,
    factoring_workload,
)

print(f"{'regime':<14}{'d0/d1/d2':>12}{'eps_T1':>11}{'eps_CCZ':>11}{'states':>11}")
for regime, dist in [("distillation", DistanceAssignment()), ("minimal", DistanceAssignment()),
                     ("minimal", DistanceAssignment(d1=19)), ("minimal", DistanceAssignment(d1=21))]:
    e = chain_errors(regime, dist)
    ds = f"{dist.d0}/{dist.d1}/{dist.d2}"
    print(f"{regime:<14}{ds:>12}{e['eps_T1']:>11.3g}{e['eps_output']:>11.3g}{1 / e['eps_output']:>11.3g}")

print()
for n, dist in [(1024, DistanceAssignment()), (2048, DistanceAssignment(d1=19)), (4096, DistanceAssignment(d1=19))]:
    est = estimate(factoring_workload(n), CCZ_FACTORY, "minimal", dist)
    print(f"n={n} d1={dist.d1}")
    print(est.to_table())
    print()
