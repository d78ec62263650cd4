from .tensor import Tensor, Parameter, no_grad, concat, broadcast_to, take_along_axis
from .layers import (
    Linear, TwoLayerEncoder, LayerNorm, MultiHeadAttention, FeedForward,
    EncoderLayer, DecoderLayer, Module, multi_head_attention, positional_encoding,
    xavier_uniform,
)
from .optim import AdamConfig, adam_step, zero_grads
from .gradcheck import GradCheckReport, finite_diff_check
from .checkpoint import (
    CheckpointError, config_hash, load_checkpoint, restore_parameters, save_checkpoint,
)
