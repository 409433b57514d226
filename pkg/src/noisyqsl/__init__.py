"""Maximal rotation angles (quantum speed limits) of noisy quantum channels."""

from .channels import (AmplitudeDamping, ChannelError, ConstantRate, Custom, Dephasing,
                       KrausChannel, TabulatedRate, TensorPower, Unitary, amplitude_damping,
                       dephasing, identity_channel, load_channel, save_channel, tensor_power,
                       unitary_channel)
from .qsl import (QslResult, alpha_bound, channel_distance, closed_form_amplitude_damping,
                  closed_form_dephasing, distance_to_identity, min_time, unitary_distance)
from .sdp import solve_dual, solve_primal

__version__ = "0.1.0"
