"""Second-order time-reassigned synchrosqueezing and sibling transforms."""

__version__ = "0.1.0"

from .detect import DetectionConfig, ImpulseEvent, detect_impulses, saliency
from .pipeline import AnalysisConfig, analyze
from .reassign import ReassignFields, compute_operators, reassigned_spectrogram
from .reconstruct import TfrMask, masked_reconstruct, sst_inverse, tsst_inverse
from .signals import ComponentSpec, add_noise, corpus, rqf, synthesize
from .stft import SignalRecord, TfrGrid, stft_forward, stft_inverse, stft_time_marginal
from .synchro import (ChirpModel, EstimatorChoice, estimate_q, group_delay_second_order,
                      tsst, vertical_sst)
from .window import DerivedWindowKind, WindowSpec, gaussian_window, window_zero_frequency_gain

__all__ = [
    "AnalysisConfig", "analyze", "ChirpModel", "ComponentSpec", "DerivedWindowKind",
    "DetectionConfig", "EstimatorChoice", "ImpulseEvent", "ReassignFields", "SignalRecord",
    "TfrGrid", "TfrMask", "WindowSpec", "add_noise", "compute_operators", "corpus",
    "detect_impulses", "estimate_q", "gaussian_window", "group_delay_second_order",
    "masked_reconstruct", "reassigned_spectrogram", "rqf", "saliency", "sst_inverse",
    "stft_forward", "stft_inverse", "stft_time_marginal", "synthesize", "tsst",
    "tsst_inverse", "vertical_sst", "window_zero_frequency_gain",
]
