#!/usr/bin/env python3
# Combined-cycle plant output from ambient conditions, through the CLI.
#
# Needs the plant CSV (columns AT,V,AP,RH,PE):
#   python demos/plant_workflow.py path/to/Folds5x2_pp.csv

import json
import sys
import tempfile
from pathlib import Path

from neurofuzzy.cli import main

if len(sys.argv) != 2:
    sys.exit("usage: plant_workflow.py PLANT_CSV")
data = sys.argv[1]
work = Path(tempfile.mkdtemp(prefix="plant-"))
common = ["--data", data, "--inputs", "AT,AP,RH", "--target", "PE", "--limit", "1574"]

# 1259/315 shuffled split, 3 gaussian sets per input, first order
main(["train", *common, "--eta", "0.002", "--epochs", "1000",
      "--out-model", str(work / "model.json"), "--out-trace", str(work / "trace.csv"),
      "--out-report", str(work / "report.json"), "--out-parity", str(work / "parity.csv")])
report = json.loads((work / "report.json").read_text())
print("train RMSE", round(report["train"]["rmse_std"], 3),
      " check RMSE", round(report["check"]["rmse_std"], 3),
      " R^2", round(report["combined"]["r_squared"], 4))

# score the saved model on the whole file
main(["evaluate", "--model", str(work / "model.json"), "--data", data, "--target", "PE",
      "--out-report", str(work / "full.json")])
print("full file:", json.loads((work / "full.json").read_text()))

# every family and order under a 300-epoch budget
main(["compare-mfs", *common, "--out", str(work / "families.csv")])
print((work / "families.csv").read_text())

# fixed rates next to the adaptive policy
main(["lr-sweep", *common, "--etas", "0.001,0.002,0.003,0.004,jang:0.002",
      "--out", str(work / "sweep.csv"), "--out-summary", str(work / "sweep_summary.csv")])
print((work / "sweep_summary.csv").read_text())
print("outputs in", work)
