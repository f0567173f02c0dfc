"""Walk every measurement branch of each factory and report the worst output fidelity.

Run: python3 demos/01_verify_factories.py
"""

from magicfactory.circuits import (
    build_c2t_simple,
    build_c2t_surgery,
    build_ccz_factory,
    build_phase_catalysis,
    t_cost,
)
from magicfactory.sim import iter_branches, subsystem_fidelity


def worst_branch(circuit):
    n, worst = 0, 1.0
    for _, r in iter_branches(circuit):
        n += 1
        f = subsystem_fidelity(r.state, circuit.output_qubits, circuit.reference) if r.accepted else 0.0
        worst = min(worst, f)
    return n, worst


if __name__ == "__main__":
    circuits = [build_ccz_factory(), build_c2t_simple(), build_c2t_simple(catalyzed=True),
                build_c2t_surgery(), build_phase_catalysis(22.5), build_phase_catalysis(60)]
    print(f"{'circuit':<22}{'branches':>9}{'worst fidelity':>18}")
    for c in circuits:
        n, worst = worst_branch(c)
        print(f"{c.name:<22}{n:>9}{worst:>18.12f}")

    # The sqrt(T) case: one AND (4 T) plus a T on the ancilla, shared by two outputs.
    cost = t_cost(build_phase_catalysis(22.5))
    print(f"\nsqrt(T) catalysis: {cost} T per run, {cost / 2} per output state")
