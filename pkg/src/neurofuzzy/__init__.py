"""Adaptive neuro-fuzzy inference with hybrid least-squares / gradient training."""

from .data import (
    Dataset,
    MgSeries,
    embed,
    load_csv,
    mackey_glass,
    save_csv,
    split,
    split_ordered,
    synth_benchmark,
)
from .membership import Family, FuzzyVariable, MembershipFunction, eval_mf, init_grid, mf_param_gradients
from .metrics import EvalReport, RmseForm, evaluate, parity_export, r_squared, rmse
from .model import (
    AnfisModel,
    ForwardRecord,
    Order,
    design_matrix,
    design_row,
    firing_strengths,
    forward,
    load_model,
    normalize,
    predict_batch,
    save_model,
)
from .training import (
    Fixed,
    JangAdaptive,
    StepDecay,
    StopReason,
    TrainConfig,
    TrainTrace,
    adapt_eta,
    fit,
    gd_step,
    lse_solve,
    premise_gradient,
    train_epoch,
)

__version__ = "0.1.0"
