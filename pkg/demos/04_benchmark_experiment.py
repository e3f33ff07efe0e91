"""The full benchmark protocol on a synthetic CSV.

Builds a dataset file, assembles the six-model roster used on the housing
data (full GP, OAT-BO/OAT-RS variational, OAT-BO FIC, and two simultaneous
variants), runs two train/test splits, and prints the per-model summary.
The same configuration, pointed at a real CSV, is what `knotgp experiment`
consumes.

Run:  python3 demos/04_benchmark_experiment.py
"""

from pathlib import Path

import numpy as np

from knotgp import KernelParams
from knotgp.adadelta import OptimizerConfig
from knotgp.bench import ExperimentConfig, RosterEntry, run_experiment
from knotgp.selection import OATConfig

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

# ---------------------------------------------------------------------------
# a dataset file, as the CLI would receive it
# ---------------------------------------------------------------------------
rng = np.random.default_rng(1)
n = 300
a = rng.uniform(-2, 2, n)
b = rng.uniform(-2, 2, n)
c = rng.uniform(-2, 2, n)
target = np.sin(a) + 0.6 * np.cos(1.5 * b) + 0.3 * c + 0.25 * rng.standard_normal(n)
csv_path = out / "synthetic_bench.csv"
csv_path.write_text("a,b,c,target\n" + "\n".join(
    f"{p},{q},{r},{s}" for p, q, r, s in zip(a, b, c, target)) + "\n")

# ---------------------------------------------------------------------------
# the roster: SVk inherits the OAT-BO knot count, SVO starts from the OAT-BO
# solution outright
# ---------------------------------------------------------------------------
config = ExperimentConfig(
    dataset_path=str(csv_path),
    predictor_columns=["a", "b", "c"],
    target_column="target",
    split_fraction=0.8,
    n_runs=2,
    rng_seed=0,
    model_roster=[
        RosterEntry("FGP", "none", "FullGP"),
        RosterEntry("OBVk", "OAT-BO", "VFE"),
        RosterEntry("ORVk", "OAT-RS", "VFE"),
        RosterEntry("OBFk", "OAT-BO", "FIC"),
        RosterEntry("SVk", "Simult", "VFE"),
        RosterEntry("SVO", "Simult", "VFE", "from-model:OBVk"),
    ],
    oat=OATConfig(initial_knot_count=4, max_knots=12, improvement_tol=1e-6),
    optimizer=OptimizerConfig(max_steps=200),
    init_params=KernelParams(1.0, 1.0, 0.1),
    output_dir=str(out / "experiment"),
)

results, ok = run_experiment(config)
print(f"fitted {len(results)} (run, model) pairs; all succeeded: {ok}\n")
print((Path(config.output_dir) / "summary.txt").read_text())
print(f"per-row metrics in {config.output_dir}/results.csv, "
      f"objective histories in {config.output_dir}/traces/")
