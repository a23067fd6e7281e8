from .ldp import LdpModel, ldp_forward, ldp_loss
from .trainer import PretrainConfig, pretrain
from .transfer import TransferError, transfer, transfer_study
