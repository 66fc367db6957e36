"""Variational quantum classifier training with weight re-mapping.

Raw rotation angles live on the whole real line; fixed squashing maps
(clamp, tanh, arctan, sigmoid, elu) compress them into [-pi, pi] on every
forward pass, which speeds up gradient-based training of the classifier.
"""

from .data import (
    Dataset,
    DatasetIntegrityError,
    FeatureScaling,
    SplitIndices,
    fetch_dataset,
    load_csv,
    save_csv,
    scale_features,
    stratified_split,
)
from .experiments import (
    AggregateRow,
    ExperimentPlan,
    GradcheckReport,
    aggregate,
    gradcheck,
    make_train_config,
    plot_curves,
    run_plan,
)
from .gradients import (
    Gradient,
    batch_loss_gradient,
    loss_gradient_adjoint,
    loss_gradient_shift,
    parameter_shift_expectation_grad,
)
from .model import (
    ClassifierConfig,
    ClassifierParams,
    apply_layer,
    embed_features,
    forward,
    forward_batch,
    load_params,
    param_count,
    save_params,
    softmax,
)
from .remap import RemapKind, remap_all, remap_derivative, remap_from_name, remap_value
from .statevector import (
    CNot,
    GateOp,
    RegisterSizeError,
    Rotation,
    RotationAxis,
    StateVector,
    apply_cnot,
    apply_gate,
    apply_ops,
    apply_rotation,
    expectation_z,
    zero_state,
)
from .training import (
    AdamState,
    MetricsRecord,
    NonFiniteGradientError,
    NonFiniteLossError,
    TrainConfig,
    adam_step,
    cross_entropy,
    evaluate,
    fit,
    init_params,
)

__version__ = "0.1.0"
