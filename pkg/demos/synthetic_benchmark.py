#!/usr/bin/env python3
# Three-variable nonlinear benchmark on a 6x6x6 grid.

from neurofuzzy import AnfisModel, TrainConfig, evaluate, fit, predict_batch, synth_benchmark
from neurofuzzy.training import JangAdaptive

grid = synth_benchmark()
print(grid.notes)
print("points:", len(grid), " target range:", round(grid.y.min(), 2), "-", round(grid.y.max(), 2))

# with only 2 sets per input the least-squares step alone is not enough
model = AnfisModel.from_data(grid.X, grid.input_names, 2)
for eta, policy in [(0.0, None), (0.1, None), (0.02, JangAdaptive())]:
    config = TrainConfig(eta0=eta, max_epochs=300, patience=None,
                         **({"eta_policy": policy} if policy else {}))
    best, trace = fit(model, grid, grid, config)
    report = evaluate(grid.y, predict_batch(best, grid.X))
    label = f"eta={eta}" + (" adaptive" if policy else "")
    print(f"{label:20s} train RMSE {report.rmse_std:.4f}  R^2 {report.r_squared:.5f}  "
          f"final eta {trace.records[-1].eta:.4g}")
