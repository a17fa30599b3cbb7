"""Cost of one discrete step in each representation as the tree deepens."""

from seqdyn.cli import bench_rows

print(f"{'depth':>5} {'|Q1|':>5} {'plans1':>7} {'plans2':>7} {'normal s':>10} {'sequence s':>11} {'ratio':>8}")
for r in bench_rows(range(1, 9), branching=2, trials=3, seed=0):
    print(f"{r['depth']:5d} {r['sequences_1']:5d} {r['reduced_plans_1']:7d} {r['reduced_plans_2']:7d} "
          f"{r['normal_step_seconds']:10.2e} {r['sequence_step_seconds']:11.2e} {r['ratio']:8.3f}")
# ratio = sequence time / normal time; it falls once the plan count dominates
