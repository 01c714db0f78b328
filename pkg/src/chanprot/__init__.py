"""Random coding for protection against sparse multipath channels.

A length-n message ``x`` is expanded to a codeword ``Ax`` with a Gaussian
coding matrix, sent through a sparse circular-convolution channel ``h`` and
recovered jointly with the channel from ``y = Ax (*) h``.
"""

from chanprot.am import AMConfig, RecoveryResult, align_scale, recover
from chanprot.block_l1 import BlockOperator, solve_block_l1
from chanprot.channel import Channel, apply_channel, dense, generate_channel
from chanprot.codec import CodingMatrix, encode, generate_coding_matrix
from chanprot.homotopy import CirculantOperator, solve_to_cardinality

__all__ = [
    "AMConfig",
    "BlockOperator",
    "Channel",
    "CirculantOperator",
    "CodingMatrix",
    "RecoveryResult",
    "align_scale",
    "apply_channel",
    "dense",
    "encode",
    "generate_channel",
    "generate_coding_matrix",
    "recover",
    "solve_block_l1",
    "solve_to_cardinality",
]

__version__ = "0.1.0"
