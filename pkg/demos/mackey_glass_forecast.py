#!/usr/bin/env python3
# Six-step-ahead forecasting of the Mackey-Glass chaotic series.

import numpy as np

from neurofuzzy import AnfisModel, TrainConfig, embed, fit, mackey_glass, predict_batch, rmse, split_ordered

# integrate the delay equation (tau=17) with RK4, step 0.1, constant history 1.2
series = mackey_glass(tau=17, horizon=2000)
x = series.at_integers()
print("samples:", x.size, " range:", round(x.min(), 3), "-", round(x.max(), 3))

# inputs x(t-12), x(t-6), x(t); target x(t+6)
ds = embed(series)
print("embedded rows:", len(ds), ds.input_names, "->", ds.target_name)

# first 630 rows train, the following 370 check
train, check = split_ordered(ds, 630, 370)

# 3 gaussian sets per input -> 27 first-order rules
model = AnfisModel.from_data(train.X, train.input_names, 3)
print("rules:", model.n_rules, " premise params:", model.n_premise_params,
      " consequent params:", model.n_consequent_params)

best, trace = fit(model, train, check, TrainConfig(eta0=0.1, max_epochs=500))
print(f"stopped: {trace.stopped_reason.value} after {trace.epochs} epochs, best epoch {trace.best_epoch}")
print(f"mean epoch time: {trace.mean_epoch_seconds * 1e3:.1f} ms")

pred = predict_batch(best, check.X)
err = rmse(check.y, pred, "standard")
print(f"check RMSE {err:.5f}  ({100 * err / np.std(check.y):.1f}% of check std)")

# a few forecasts next to the truth
for obs, p in list(zip(check.y, pred))[:5]:
    print(f"  observed {obs:.4f}  predicted {p:.4f}")
