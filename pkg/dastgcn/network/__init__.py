"""The spatio-temporal graph network: parameters, layers and forward pass."""

from .checkpoint import (KIND_GRAPH_BUNDLE, KIND_PARAMS, checkpoint_metadata,
                         load_checkpoint, read_container, save_checkpoint,
                         write_container)
from .forward import (block_adjacencies, block_stack, forward_batch,
                      group_by_length, model_forward, predict_proba,
                      realized_adjacencies, stack_signals)
from .layers import (adaptive_adjacency, fixed_correlation_adjacency,
                     gated_tcn_layer, gcn_layer, pointwise_conv,
                     st_block_forward, temporal_lag_correction)
from .params import (AdjacencyFactors, BlockParams, ModelParams, init_params,
                     param_breakdown, param_count, parameter_shapes)

__all__ = [
    "AdjacencyFactors",
    "BlockParams",
    "ModelParams",
    "init_params",
    "param_breakdown",
    "param_count",
    "parameter_shapes",
    "temporal_lag_correction",
    "pointwise_conv",
    "gated_tcn_layer",
    "adaptive_adjacency",
    "fixed_correlation_adjacency",
    "gcn_layer",
    "st_block_forward",
    "block_stack",
    "forward_batch",
    "model_forward",
    "predict_proba",
    "block_adjacencies",
    "realized_adjacencies",
    "stack_signals",
    "group_by_length",
    "save_checkpoint",
    "load_checkpoint",
    "checkpoint_metadata",
    "read_container",
    "write_container",
    "KIND_PARAMS",
    "KIND_GRAPH_BUNDLE",
]
