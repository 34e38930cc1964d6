"""Spatiotemporally correlated channel simulator.

The log-magnitude (dB) of every channel coefficient is the sum of three
components: distance pathloss, slow shadowing (zero-mean Gaussian, correlated
in space and time), and fast multipath (i.i.d. zero-mean Gaussian per element
per slot).  Shadowing follows a separable exponential covariance

    C((x, t), (x', t')) = eta2 * exp(-||x - x'|| / c1) * exp(-|t - t'| / c2)

realized as a spatially correlated AR(1) process over the candidate
destination cells.  Channel phases evolve as a wrapped-Gaussian random walk,
maintained per destination cell for the reflect link.

All randomness comes from injected ``numpy.random.Generator`` instances; the
module keeps no global state.  ``dest_values`` / ``h_phases`` accept leading
batch dimensions, so many independent chains can be stepped at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# Distances below this floor are clamped before the pathloss law (avoids the
# log singularity at d = 0).
D_MIN = 0.5


@dataclass
class ChannelParams:
    """Physical parameters of the three-component channel model."""

    pathloss_exp: float = 2.3       # unitless
    multipath_std: float = 0.6      # dB
    shadow_power: float = 6.0       # dB^2 (variance of the shadowing)
    corr_distance: float = 1.2      # meters
    corr_time: float = 5.0          # slots
    phase_drift: float = 0.2        # rad / slot
    noise_var: float = 0.5          # linear power
    tx_power_dbm: float = 65.0      # dBm

    def __post_init__(self):
        if not self.pathloss_exp > 0:
            raise ValueError("pathloss_exp must be > 0")
        if self.multipath_std < 0:
            raise ValueError("multipath_std must be >= 0")
        if self.shadow_power < 0:
            raise ValueError("shadow_power must be >= 0")
        if not self.corr_distance > 0:
            raise ValueError("corr_distance must be > 0")
        if not self.corr_time > 0:
            raise ValueError("corr_time must be > 0")
        if self.phase_drift < 0:
            raise ValueError("phase_drift must be >= 0")
        if not self.noise_var > 0:
            raise ValueError("noise_var must be > 0")

    @property
    def tx_power_linear(self) -> float:
        """Transmit power budget in linear milliwatts."""
        return 10.0 ** (self.tx_power_dbm / 10.0)


def _default_dest_cells() -> np.ndarray:
    # 2 x 2 x 1 block of unit cells, centers 1 m apart.
    return np.array(
        [
            [14.5, 14.5, 0.5],
            [15.5, 14.5, 0.5],
            [14.5, 15.5, 0.5],
            [15.5, 15.5, 0.5],
        ]
    )


@dataclass
class Geometry:
    """Fixed node positions and the destination's candidate cells (meters)."""

    source_pos: np.ndarray = field(default_factory=lambda: np.array([1.0, 10.0, 2.0]))
    irs_pos: np.ndarray = field(default_factory=lambda: np.array([10.0, 2.0, 3.0]))
    dest_cells: np.ndarray = field(default_factory=_default_dest_cells)
    cube_side: float = 20.0
    cell_side: float = 1.0

    def __post_init__(self):
        self.source_pos = np.asarray(self.source_pos, dtype=float)
        self.irs_pos = np.asarray(self.irs_pos, dtype=float)
        self.dest_cells = np.atleast_2d(np.asarray(self.dest_cells, dtype=float))
        if self.dest_cells.shape[0] < 1 or self.dest_cells.shape[1] != 3:
            raise ValueError("dest_cells must be a nonempty (n, 3) array")
        for name, p in (("source_pos", self.source_pos), ("irs_pos", self.irs_pos)):
            if p.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            if np.any(p < 0) or np.any(p > self.cube_side):
                raise ValueError(f"{name} lies outside the cube")
        if np.any(self.dest_cells < 0) or np.any(self.dest_cells > self.cube_side):
            raise ValueError("dest_cells lie outside the cube")

    @property
    def num_cells(self) -> int:
        return self.dest_cells.shape[0]

    def cell_neighbors(self, idx: int) -> list[int]:
        """Edge-adjacent cells (6-neighborhood at cell_side spacing)."""
        diffs = self.dest_cells - self.dest_cells[idx]
        dist = np.linalg.norm(diffs, axis=1)
        axis_moves = np.sum(np.abs(diffs) > 1e-9, axis=1)
        mask = (axis_moves == 1) & (np.abs(dist - self.cell_side) < 1e-9)
        return [int(j) for j in np.flatnonzero(mask)]


@dataclass
class ShadowingState:
    """AR(1) state of the shadowing process (dB)."""

    dest_values: np.ndarray     # (..., num_cells), per candidate cell
    src_irs_value: np.ndarray   # (...,) scalar per chain
    spatial_chol: np.ndarray    # (num_cells, num_cells) lower triangular
    ar_coeff: float             # exp(-1 / c2)


@dataclass
class PhaseState:
    """Channel phases (rad, wrapped into [0, 2pi))."""

    h_phases: np.ndarray   # (..., num_cells, M)
    g_phases: np.ndarray   # (..., M, N)


@dataclass
class ChannelSnapshot:
    """One slot's channel realization."""

    h: np.ndarray   # complex (M,)
    G: np.ndarray   # complex (M, N)
    t: int


def pathloss_db(d, l: float = 2.3):
    """Distance pathloss -10 * l * log10(d) in dB, with d clamped at D_MIN."""
    d = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise ValueError("distance must be finite and > 0")
    out = -10.0 * l * np.log10(np.maximum(d, D_MIN))
    return float(out) if out.ndim == 0 else out


def spatial_covariance(cells: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Exponential-kernel covariance eta2 * exp(-||xi - xj|| / c1) over cells."""
    cells = np.atleast_2d(np.asarray(cells, dtype=float))
    if cells.shape[0] < 1:
        raise ValueError("cells must be nonempty")
    d = np.linalg.norm(cells[:, None, :] - cells[None, :, :], axis=-1)
    return params.shadow_power * np.exp(-d / params.corr_distance)


def _chol_with_jitter(K: np.ndarray, eta2: float) -> np.ndarray:
    if eta2 == 0.0:
        return np.zeros_like(K)
    try:
        return np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * eta2
        return np.linalg.cholesky(K + jitter * np.eye(K.shape[0]))


def init_shadowing(
    geometry: Geometry,
    params: ChannelParams,
    rng: np.random.Generator,
    n_chains: int | None = None,
) -> ShadowingState:
    """Draw a stationary shadowing state: dest_values ~ N(0, K), src ~ N(0, eta2).

    With ``n_chains`` set, draws that many independent chains (leading axis).
    """
    K = spatial_covariance(geometry.dest_cells, params)
    L = _chol_with_jitter(K, params.shadow_power)
    n = geometry.num_cells
    shape = (n,) if n_chains is None else (n_chains, n)
    eps = rng.standard_normal(shape)
    dest = eps @ L.T
    eta = np.sqrt(params.shadow_power)
    src = eta * rng.standard_normal(() if n_chains is None else (n_chains,))
    rho = float(np.exp(-1.0 / params.corr_time))
    return ShadowingState(dest_values=dest, src_irs_value=np.asarray(src),
                          spatial_chol=L, ar_coeff=rho)


def step_shadowing(
    state: ShadowingState, params: ChannelParams, rng: np.random.Generator
) -> ShadowingState:
    """One AR(1) slot update; the stationary marginal N(0, K) is preserved."""
    rho = state.ar_coeff
    scale = np.sqrt(max(0.0, 1.0 - rho * rho))
    eps = rng.standard_normal(state.dest_values.shape)
    dest = rho * state.dest_values + scale * (eps @ state.spatial_chol.T)
    eta = np.sqrt(params.shadow_power)
    eps2 = rng.standard_normal(np.shape(state.src_irs_value))
    src = rho * state.src_irs_value + scale * eta * eps2
    return ShadowingState(dest_values=dest, src_irs_value=src,
                          spatial_chol=state.spatial_chol, ar_coeff=rho)


def init_phases(
    geometry: Geometry, m: int, n: int, rng: np.random.Generator
) -> PhaseState:
    """Uniform initial phases in [0, 2pi) for every link coefficient."""
    h = rng.uniform(0.0, TWO_PI, size=(geometry.num_cells, m))
    g = rng.uniform(0.0, TWO_PI, size=(m, n))
    return PhaseState(h_phases=h, g_phases=g)


def step_phases(
    state: PhaseState, params: ChannelParams, rng: np.random.Generator
) -> PhaseState:
    """Wrapped-Gaussian random walk: phase += kappa * N(0,1), wrapped to [0, 2pi)."""
    k = params.phase_drift
    h = np.mod(state.h_phases + k * rng.standard_normal(state.h_phases.shape), TWO_PI)
    g = np.mod(state.g_phases + k * rng.standard_normal(state.g_phases.shape), TWO_PI)
    return PhaseState(h_phases=h, g_phases=g)


def sample_channels(
    t: int,
    dest_cell_index: int,
    shadowing: ShadowingState,
    phases: PhaseState,
    geometry: Geometry,
    params: ChannelParams,
    rng: np.random.Generator,
) -> ChannelSnapshot:
    """Realize h (reflect link) and G (source-IRS link) for one slot.

    Per-element log-magnitude = pathloss + link shadowing + i.i.d. multipath;
    magnitudes via 10^(dB/20); phases taken from the phase state.
    """
    n_cells = geometry.num_cells
    if not (0 <= dest_cell_index < n_cells):
        raise IndexError(f"dest_cell_index {dest_cell_index} out of range [0, {n_cells})")
    m, n = phases.g_phases.shape

    d_h = np.linalg.norm(geometry.irs_pos - geometry.dest_cells[dest_cell_index])
    d_g = np.linalg.norm(geometry.source_pos - geometry.irs_pos)

    xi_h = params.multipath_std * rng.standard_normal(m)
    h_db = pathloss_db(d_h, params.pathloss_exp) + shadowing.dest_values[dest_cell_index] + xi_h
    h = 10.0 ** (h_db / 20.0) * np.exp(1j * phases.h_phases[dest_cell_index])

    xi_g = params.multipath_std * rng.standard_normal((m, n))
    g_db = pathloss_db(d_g, params.pathloss_exp) + shadowing.src_irs_value + xi_g
    G = 10.0 ** (g_db / 20.0) * np.exp(1j * phases.g_phases)

    return ChannelSnapshot(h=h, G=G, t=t)
