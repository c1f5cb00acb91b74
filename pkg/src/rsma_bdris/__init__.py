"""Monte-Carlo simulator for RSMA and SDMA downlinks under adversarial BD-RIS reconfiguration."""

from .attack import (ReflectionConfig, aligned_fully_connected, aligned_group_connected,
                     aligned_single_connected, random_reflection, validate_reflection)
from .channel import ChannelSet, Scenario, estimate_channels, ris_user_distance, sample_channels
from .metrics import RobustnessReport, rate_degradation, robustness_index
from .sim import ExperimentSpec, SweepRow, run_sweep, run_trial
from .transceiver import PrecoderSet, RateReport, allocate_power, evaluate_rates

__version__ = "0.1.0"
