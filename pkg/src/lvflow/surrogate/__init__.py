from .network import (
    CResNet,
    Mlp,
    ModelFormatError,
    load_model,
    psi_constraint,
    save_model,
)
from .training import TrainConfig, TrainResult, TrainingError, train
from .data import (
    DataRecord,
    default_input_domain,
    generate_dataset,
    read_dataset,
    records_to_arrays,
    write_dataset,
)

__all__ = [
    "CResNet",
    "Mlp",
    "ModelFormatError",
    "load_model",
    "psi_constraint",
    "save_model",
    "TrainConfig",
    "TrainResult",
    "TrainingError",
    "train",
    "DataRecord",
    "default_input_domain",
    "generate_dataset",
    "read_dataset",
    "records_to_arrays",
    "write_dataset",
]
