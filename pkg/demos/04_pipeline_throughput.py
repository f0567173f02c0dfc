"""Feed a CCZ or C2T consumer from a bank of level-1 factories and watch the output period.

Run: python3 demos/04_pipeline_throughput.py
"""

from dataclasses import replace

from magicfactory.pipeline import (
    c2t_default_config,
    c2t_error_probs,
    catalyst_error_closed_form,
    catalyst_error_stats,
    ccz_default_config,
    level1_effective_period,
    simulate,
)

print("level-1 period with 3% discards:", round(level1_effective_period(3.25, 0.03), 4), "d")

for label, cfg in [("CCZ, 5 legacy producers", ccz_default_config()),
                   ("C2T, 4 improved producers", c2t_default_config())]:
    s = simulate(cfg)
    print(f"{label}: period {s.mean_output_period_d:.4f} d, stall {s.consumer_stall_fraction:.2%}")

# Fewer producers starve the consumer.
print("\nCCZ consumer vs number of producers")
for p in range(3, 8):
    s = simulate(replace(ccz_default_config(), num_level1=p))
    print(f"  {p} producers: {s.mean_output_period_d:.3f} d")

# A detected error in the CCZ input forces a catalyst discard and re-bootstrap.
detect, error = c2t_error_probs(1.4e-6)
s = simulate(c2t_default_config(ccz_detect_prob=detect, ccz_error_prob=error, horizon_d=2.6e7, seed=5))
print(f"\ncatalyst discards: {s.catalyst_discard_events}, one per "
      f"{s.distillations_per_catalyst_discard:.3g} distillations")

mc = catalyst_error_stats(50, 1e-3, 20_000, seed=1)
cf = catalyst_error_closed_form(50, 1e-3)
print(f"poisoned catalyst over 50 runs: sampled {mc['p_any_bad']:.4f}, closed form {cf['p_any_bad']:.4f}")
