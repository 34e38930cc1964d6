"""IRS phase-shift control in spatiotemporally correlated MISO channels.

Subpackages:
  channel  - correlated shadowing / phase-drift channel simulator
  signal   - SNR computation, maximum-ratio beamforming, phase-design oracles
  env      - the windowed-state MDP wrapping the simulator
  nn       - from-scratch MLP, Adam, Fourier features, checkpoints
  agent    - twin-critic DDPG training loop and replay buffer
  harness  - experiment orchestration, metrics, plots, CLI
"""

__version__ = "0.1.0"
