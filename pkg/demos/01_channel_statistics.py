"""Empirical check of the channel model's second-order statistics.

Simulates many parallel runs of the spatially correlated log-normal shadowing
process and verifies, by Monte Carlo, that the stationary variance and the
temporal autocorrelation match the separable exponential kernel
eta^2 * exp(-||x - x'|| / c1) * exp(-|t - t'| / c2).
"""

import numpy as np

from irsrl import channel as ch


def main():
    params = ch.ChannelParams()
    geom = ch.Geometry()
    rng = np.random.default_rng(7)

    n_chains, n_steps, max_lag = 2000, 400, 10
    state = ch.init_shadowing(geom, params, rng, n_chains=n_chains)
    series = np.empty((n_steps, n_chains))
    for t in range(n_steps):
        state = ch.step_shadowing(state, params, rng)
        series[t] = state.dest_values[:, 0]

    print(f"stationary variance: {series.var():.3f}  "
          f"(kernel: {params.shadow_power})")

    print("lag  empirical-ac  kernel-ac")
    for lag in range(1, max_lag + 1):
        ac = np.mean(series[lag:] * series[:-lag]) / params.shadow_power
        print(f"{lag:3d}  {ac:12.4f}  {np.exp(-lag / params.corr_time):9.4f}")

    # spatial covariance between the two destination-grid corner cells
    corners = geom.dest_cells[[0, -1]]
    d = np.linalg.norm(corners[0] - corners[1])
    print(f"\ncorner cells {d:.2f} apart: kernel covariance "
          f"{ch.spatial_covariance(corners, params)[0, 1]:.3f}")


if __name__ == "__main__":
    main()
