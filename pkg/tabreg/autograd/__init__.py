from .tensor import (
    OpCounter,
    ShapeError,
    Tensor,
    abs_sum,
    add,
    as_tensor,
    concat_lastdim,
    embedding_lookup,
    gather_rows,
    matmul,
    max_with_zero,
    mean,
    mul,
    no_grad,
    record_kinks,
    relu,
    scalar_mul,
    slice_lastdim,
    softmax_lastdim,
    sub,
    transpose,
    tsum,
)
from .layers import Encoder, Linear, Module, Parameter, SelfAttentionBlock, multi_head_self_attention
from .optim import Adam, LinearWarmup, StepDecay, adam_step
from .gradcheck import GradCheckReport, finite_diff_check
