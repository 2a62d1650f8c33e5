"""Dispersion-curve estimation from frequency response functions.

Pipeline: synthesize reference FRFs with a frequency-domain spectral
element model of a rod/Timoshenko beam, fit a rational state-space model
by vector fitting, simulate tone-burst transients through the fitted
model, and extract wavenumber / group-velocity dispersion curves from
the propagating waveforms.
"""

__version__ = "0.1.0"
