"""Simulation, error analysis and resource estimation for CCZ and catalysed T factories."""

from .analysis import (
    InjectionReport,
    SuppressionModel,
    analytic_rates,
    derive_suppression,
    enumerate_errors,
    monte_carlo_validate,
)
from .circuits import (
    FactoryCircuit,
    build_c2t_simple,
    build_c2t_surgery,
    build_ccz_factory,
    build_fifteen_to_one,
    build_phase_catalysis,
    circuit_from_json,
    circuit_to_json,
    circuit_to_text,
    reference_state,
    t_cost,
)
from .pipeline import (
    PipelineConfig,
    PipelineStats,
    catalyst_error_stats,
    level1_effective_period,
    simulate,
)
from .resources import (
    DistanceAssignment,
    FactoryModel,
    PhysicalAssumptions,
    ResourceEstimate,
    Workload,
    chain_errors,
    estimate,
    factoring_workload,
    logical_cell_error,
    toffoli_speedup,
)
from .sim import (
    Circuit,
    ClassicalCondition,
    Gate,
    Measure,
    Postselect,
    QuantumState,
    apply_gate,
    fidelity,
    measure_pauli_product,
    postselect,
    run_circuit,
)

__version__ = "0.1.0"
