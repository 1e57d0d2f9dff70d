"""Plastiscope: backend for exploring brain-plasticity simulation ensembles.

The package turns per-neuron simulation output into per-timestep columnar
frames, stores them losslessly, and serves them to browser clients together
with derived statistics and a multi-device collaboration protocol.
"""

__version__ = "0.1.0"
