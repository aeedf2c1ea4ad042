"""Two-step Doppler cooling of a three-level ladder system."""

from .model import (AtomSpec, LaserDrive, Scheme, PRESETS, preset, mhz, to_mhz,
                    build_generator, doppler_shift, effective_wavevector)
from .steady_state import (DegenerateSteadyState, StepTooLarge, PeakNotBracketed,
                           HalfMaxNotBracketed, PeakSummary, steady_state, evolve,
                           scan_delta_w, scan_delta_st, peak_and_fwhm)
from .results import ScanResult, read_csv
from . import analytics, cooling

__version__ = "0.1.0"
