"""Classification from complementary labels."""
from .binary_losses import BinaryLossKind, check_symmetry, lipschitz_constant, loss_grad, loss_value
from .comp_losses import (
    LossSpec,
    Scheme,
    baseline_loss,
    comp_loss,
    comp_loss_grad,
    loss_constants,
    multiclass_loss,
    multiclass_loss_grad,
)
from .data import (
    CompDataset,
    LabeledDataset,
    load_csv,
    split_ol_cl,
    split_train_val,
    standardize_apply,
    standardize_fit,
    synth_gaussian,
    to_complementary,
)
from .exceptions import DataError, InvalidInputError, UnsupportedError, UnsupportedGradientError
from .models import Batch, LinearModel, MlpModel, objective_gradient
from .optim import AdamState, DataSplit, TrainConfig, adam_step, grid_search, train
from .risk import (
    DiscreteJoint,
    RiskEstimate,
    combined_objective,
    empirical_comp_risk,
    empirical_ordinary_risk,
    exact_comp_identity_gap,
    exact_comp_risk,
    exact_risk,
    validation_score,
)
from .theory import BoundInputs, estimation_error_bound, rademacher_linear, uniform_deviation_bound

__version__ = "0.1.0"
