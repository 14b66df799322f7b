"""Time-varying channel impulse response from direct, cluster, and
ground-reflection paths, plus the frequency-dependent transfer function.

Each path component carries an amplitude, a phase, an accumulated Doppler
phase integral, a delay, and a mixing weight.  The phase is the initial
phase draw plus the electrical length of the geometry at the current time;
in the transfer function the delay factor exp(-j 2 pi f tau) cancels that
electrical length at the carrier, so H(t, f_c) rotates at exactly the
component's Doppler frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clusters import Cluster, ClusterSet, ClusterTrack
from .core import (
    SPEED_OF_LIGHT,
    RfConfig,
    Trajectory,
    Vec3,
    VoxelGrid,
    Roi,
)
from .errors import ConfigError

LOS = "los"
NLOS = "nlos"
GR = "gr"

CIR_CSV_HEADER = "t,tap_kind,track_id,amplitude,phase,delay_s,doppler_hz,weight"

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StochasticParams:
    """Stochastic path parameters.

    xi and eta shape the delay-power law exp(-xi * tau - eta); sigma_e_db is
    the lognormal shadowing std; virtual_delay_rate_hz is the rate of the
    exponential extra delay inside a cluster; gamma_gr is the ground
    reflection coefficient.  cluster_amplitude_mode selects whether a
    cluster's amplitude grows linearly with its scatterer count
    ("linear_count") or with its square root ("sqrt_count").
    """

    xi: float = 6.6e6
    eta: float = 0.0
    sigma_e_db: float = 3.0
    virtual_delay_rate_hz: float = 1e8
    gamma_gr: float = 0.5
    cluster_amplitude_mode: str = "linear_count"

    def __post_init__(self):
        if self.xi < 0:
            raise ConfigError("xi must be non-negative")
        if self.sigma_e_db < 0:
            raise ConfigError("sigma_e_db must be non-negative")
        if not self.virtual_delay_rate_hz > 0:
            raise ConfigError("virtual_delay_rate_hz must be positive")
        if not 0.0 <= self.gamma_gr <= 1.0:
            raise ConfigError("gamma_gr must lie in [0, 1]")
        if self.cluster_amplitude_mode not in ("linear_count", "sqrt_count"):
            raise ConfigError(f"unknown cluster_amplitude_mode "
                              f"{self.cluster_amplitude_mode!r}")


@dataclass(frozen=True)
class PathComponent:
    kind: str                 # los | nlos | gr
    track_id: int | None
    amplitude: float
    phase: float              # rad, constant part
    delay_s: float
    doppler_hz: float         # instantaneous
    doppler_integral: float   # rad, 2*pi * integral of doppler since reference
    weight: float             # mixing coefficient

    @property
    def complex_gain(self) -> complex:
        """Unweighted complex gain amplitude * exp(j(integral + phase))."""
        return self.amplitude * complex(math.cos(self.doppler_integral + self.phase),
                                        math.sin(self.doppler_integral + self.phase))

    def csv_row(self, t: float) -> str:
        tid = "" if self.track_id is None else str(self.track_id)
        return (f"{t:.9g},{self.kind},{tid},{self.amplitude:.12g},"
                f"{self.phase:.12g},{self.delay_s:.12g},{self.doppler_hz:.12g},"
                f"{self.weight:.12g}")


def window(t: float, t_start: float, t_end: float) -> int:
    """Rectangular validity window: 1 inside [t_start, t_end], else 0."""
    if t_end < t_start:
        raise ValueError("window end precedes start")
    return 1 if t_start <= t <= t_end else 0


def _common_times(traj_tx: Trajectory, traj_rx: Trajectory) -> np.ndarray:
    if traj_tx.times.shape != traj_rx.times.shape or \
            not np.allclose(traj_tx.times, traj_rx.times, rtol=0, atol=1e-12):
        raise ValueError("Tx and Rx trajectories must share the same time base")
    return traj_tx.times


def _cumtrapz(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Cumulative trapezoidal integral, zero at the first sample."""
    if values.ndim == 1:
        increments = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
        return np.concatenate([[0.0], np.cumsum(increments)])
    increments = 0.5 * (values[1:] + values[:-1]) * np.diff(times)[:, None]
    return np.vstack([np.zeros((1, values.shape[1])), np.cumsum(increments, axis=0)])


def tx_rx_distance(traj_tx: Trajectory, traj_rx: Trajectory, t: float) -> Vec3:
    """Tx-to-Rx distance vector: initial separation plus the integrated
    velocity difference, accumulated trapezoidally over the sample grid."""
    times = _common_times(traj_tx, traj_rx)
    if not traj_tx.contains(t):
        raise ValueError(f"time {t} outside trajectory span")
    d0 = traj_rx.position_at(times[0]).as_array() - traj_tx.position_at(times[0]).as_array()
    rel = traj_rx.velocities - traj_tx.velocities
    upto = times[times <= t + 1e-12]
    if upto.size >= 2:
        integral = _cumtrapz(rel[:upto.size], upto)[-1]
    else:
        integral = np.zeros(3)
    if t > upto[-1] + 1e-12:
        # partial step: velocity held from the last full sample
        k = upto.size - 1
        integral = integral + rel[k] * (t - upto[-1])
    return Vec3.from_array(d0 + integral)


def _reference_time(times: np.ndarray, rf: RfConfig) -> float:
    """First sample inside the validity window."""
    t0 = rf.window[0]
    active = times[times >= t0 - 1e-12]
    if active.size == 0:
        raise ValueError("validity window starts after the last snapshot")
    return float(active[0])


def _integrate_doppler(doppler_fn, times: np.ndarray, t_ref: float, t: float) -> float:
    """2*pi times the trapezoidal integral of doppler_fn over [t_ref, t]."""
    if t <= t_ref:
        return 0.0
    grid = times[(times > t_ref) & (times < t - 1e-12)]
    nodes = np.concatenate([[t_ref], grid, [t]])
    values = np.array([doppler_fn(float(x)) for x in nodes])
    return TWO_PI * float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(nodes)))


def los_component(traj_tx: Trajectory, traj_rx: Trajectory, rf: RfConfig,
                  t: float, phi0: float = 0.0) -> PathComponent:
    """Direct path: unit amplitude, Doppler from the radial velocity
    difference, delay from the separation."""
    times = _common_times(traj_tx, traj_rx)
    lam = rf.wavelength_m

    def doppler(tt: float) -> float:
        d = tx_rx_distance(traj_tx, traj_rx, tt)
        norm = d.norm()
        if norm <= 0.0:
            raise ValueError("transceivers coincide; direct path undefined")
        dv = traj_rx.velocity_at(tt) - traj_tx.velocity_at(tt)
        return d.dot(dv) / (lam * norm)

    t_ref = _reference_time(times, rf)
    d_now = tx_rx_distance(traj_tx, traj_rx, t)
    if d_now.norm() <= 0.0:
        raise ValueError("transceivers coincide; direct path undefined")
    return PathComponent(
        kind=LOS, track_id=None, amplitude=1.0,
        phase=phi0 + TWO_PI / lam * d_now.norm(),
        delay_s=d_now.norm() / SPEED_OF_LIGHT,
        doppler_hz=doppler(t),
        doppler_integral=_integrate_doppler(doppler, times, t_ref, t),
        weight=1.0)


def cluster_power(tau: float, params: StochasticParams,
                  rng: np.random.Generator | None = None,
                  z: float | None = None) -> float:
    """Pre-normalization cluster power exp(-xi*tau - eta) * 10^(-Z/10) with
    Z ~ N(0, sigma_e^2).  Callers normalize per snapshot so cluster powers
    sum to one."""
    if tau < 0:
        raise ValueError("delay must be non-negative")
    if z is None:
        if params.sigma_e_db == 0.0:
            z = 0.0
        else:
            if rng is None:
                raise ValueError("cluster_power needs an rng when z is not given")
            z = float(rng.normal(0.0, params.sigma_e_db))
    return math.exp(-params.xi * tau - params.eta) * 10.0 ** (-z / 10.0)


def _cluster_amplitude(count: int, power: float, params: StochasticParams) -> float:
    if params.cluster_amplitude_mode == "linear_count":
        return count * math.sqrt(power)
    return math.sqrt(count * power)


def _cluster_geometry(cluster_center: Vec3, traj_tx: Trajectory,
                      traj_rx: Trajectory, tt: float):
    d_t = cluster_center - traj_tx.position_at(tt)
    d_r = cluster_center - traj_rx.position_at(tt)
    if d_t.norm() <= 0.0 or d_r.norm() <= 0.0:
        raise ValueError("cluster center coincides with a transceiver")
    return d_t, d_r


def nlos_component(cluster: Cluster, traj_tx: Trajectory, traj_rx: Trajectory,
                   rf: RfConfig, params: StochasticParams,
                   rng: np.random.Generator | None, t: float,
                   power: float | None = None, phi0: float | None = None,
                   tau_virtual: float | None = None,
                   birth_time: float | None = None) -> PathComponent:
    """Path through one cluster.

    Frozen per-track draws (phi0, tau_virtual, shadowing) may be passed in;
    otherwise they are drawn from rng.  power is the normalized cluster
    power; when omitted an unnormalized draw is used.
    """
    times = _common_times(traj_tx, traj_rx)
    lam = rf.wavelength_m
    if phi0 is None:
        phi0 = float(rng.uniform(0.0, TWO_PI))
    if tau_virtual is None:
        tau_virtual = float(rng.exponential(1.0 / params.virtual_delay_rate_hz))

    def doppler(tt: float) -> float:
        d_t, d_r = _cluster_geometry(cluster.center, traj_tx, traj_rx, tt)
        v_l = cluster.velocity
        f_t = d_t.dot(traj_tx.velocity_at(tt) - v_l) / (lam * d_t.norm())
        f_r = d_r.dot(traj_rx.velocity_at(tt) - v_l) / (lam * d_r.norm())
        return f_t + f_r

    t_ref = birth_time if birth_time is not None else _reference_time(times, rf)
    d_t, d_r = _cluster_geometry(cluster.center, traj_tx, traj_rx, t)
    geo_len = d_t.norm() + d_r.norm()
    delay = geo_len / SPEED_OF_LIGHT + tau_virtual
    if power is None:
        power = cluster_power(delay, params, rng)
    return PathComponent(
        kind=NLOS, track_id=None, amplitude=_cluster_amplitude(cluster.count, power, params),
        phase=phi0 + TWO_PI / lam * (geo_len + SPEED_OF_LIGHT * tau_virtual),
        delay_s=delay,
        doppler_hz=doppler(t),
        doppler_integral=_integrate_doppler(doppler, times, t_ref, t),
        weight=1.0)


def _mirror(v: Vec3) -> Vec3:
    return Vec3(v.x, v.y, -v.z)


def ground_reflection(traj_tx: Trajectory, traj_rx: Trajectory, rf: RfConfig,
                      gamma: float, t: float, phi0: float = 0.0) -> PathComponent:
    """Specular ground bounce via the image of the Tx in the plane z = 0."""
    times = _common_times(traj_tx, traj_rx)
    lam = rf.wavelength_m
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError("reflection coefficient must lie in [0, 1]")

    def geometry(tt: float) -> tuple[Vec3, Vec3, Vec3]:
        p_t = traj_tx.position_at(tt)
        p_r = traj_rx.position_at(tt)
        if p_t.z <= 0.0 or p_r.z <= 0.0:
            raise ValueError("ground reflection needs positive transceiver heights")
        return p_t, p_r, p_r - _mirror(p_t)

    def doppler(tt: float) -> float:
        _, _, d = geometry(tt)
        dv = traj_rx.velocity_at(tt) - _mirror(traj_tx.velocity_at(tt))
        return d.dot(dv) / (lam * d.norm())

    t_ref = _reference_time(times, rf)
    _, _, d_now = geometry(t)
    return PathComponent(
        kind=GR, track_id=None, amplitude=gamma,
        phase=phi0 + TWO_PI / lam * d_now.norm(),
        delay_s=d_now.norm() / SPEED_OF_LIGHT,
        doppler_hz=doppler(t),
        doppler_integral=_integrate_doppler(doppler, times, t_ref, t),
        weight=1.0)


def _mixing_weights(rf: RfConfig, diffuse_power: float) -> tuple[float, float, float]:
    """(LoS, per-cluster, ground) weights from the power-ratio structure."""
    omega = rf.ricean_omega
    if omega == "auto":
        if diffuse_power <= 0.0:
            return 1.0, 0.0, 0.0
        omega = 1.0 / diffuse_power
    scale = 1.0 / math.sqrt(omega + 1.0)
    return (math.sqrt(omega) * scale,
            math.sqrt(rf.eta_nlos) * scale,
            math.sqrt(rf.eta_gr) * scale)


def compose_cir(cluster_set: ClusterSet, traj_tx: Trajectory, traj_rx: Trajectory,
                rf: RfConfig, params: StochasticParams,
                rng: np.random.Generator, t: float) -> tuple[PathComponent, ...]:
    """All CIR taps at one time: direct path, one per cluster, ground bounce.

    Cluster powers are normalized to sum to one across the snapshot.
    Returns no taps outside the validity window.
    """
    if not window(t, *rf.window):
        return ()
    ordered = sorted(cluster_set.clusters, key=lambda c: c.voxel_index)
    phi0_los = float(rng.uniform(0.0, TWO_PI))
    phi0_gr = float(rng.uniform(0.0, TWO_PI))
    draws = [(float(rng.uniform(0.0, TWO_PI)),
              float(rng.exponential(1.0 / params.virtual_delay_rate_hz)),
              0.0 if params.sigma_e_db == 0.0 else float(rng.normal(0.0, params.sigma_e_db)))
             for _ in ordered]

    los = los_component(traj_tx, traj_rx, rf, t, phi0=phi0_los)
    gr = ground_reflection(traj_tx, traj_rx, rf, params.gamma_gr, t, phi0=phi0_gr)

    raw_powers = []
    for cluster, (_, tau_v, z) in zip(ordered, draws):
        d_t, d_r = _cluster_geometry(cluster.center, traj_tx, traj_rx, t)
        tau = (d_t.norm() + d_r.norm()) / SPEED_OF_LIGHT + tau_v
        raw_powers.append(cluster_power(tau, params, z=z))
    total = sum(raw_powers)
    powers = [p / total for p in raw_powers] if total > 0 else raw_powers

    nlos_taps = [
        nlos_component(cluster, traj_tx, traj_rx, rf, params, None, t,
                       power=power, phi0=phi0, tau_virtual=tau_v)
        for cluster, power, (phi0, tau_v, _) in zip(ordered, powers, draws)]

    diffuse = (rf.eta_nlos * sum(c.amplitude ** 2 for c in nlos_taps)
               + rf.eta_gr * gr.amplitude ** 2)
    w_los, w_nlos, w_gr = _mixing_weights(rf, diffuse)
    taps = [PathComponent(LOS, None, los.amplitude, los.phase, los.delay_s,
                          los.doppler_hz, los.doppler_integral, w_los)]
    for tap, cluster in zip(nlos_taps, ordered):
        taps.append(PathComponent(NLOS, None, tap.amplitude, tap.phase, tap.delay_s,
                                  tap.doppler_hz, tap.doppler_integral, w_nlos))
    taps.append(PathComponent(GR, None, gr.amplitude, gr.phase, gr.delay_s,
                              gr.doppler_hz, gr.doppler_integral, w_gr))
    return tuple(taps)


def transfer_function(taps, f: float, rf: RfConfig) -> complex:
    """Transfer function at frequency f: each tap contributes its weighted
    gain times exp(-j 2 pi f tau); cluster and ground taps are additionally
    scaled by (f / f_c)^chi."""
    if not f > 0:
        raise ValueError("frequency must be positive")
    chi_scale = (f / rf.carrier_freq_hz) ** rf.chi
    total = 0.0 + 0.0j
    for tap in taps:
        term = tap.weight * tap.complex_gain * np.exp(-1j * TWO_PI * f * tap.delay_s)
        if tap.kind != LOS:
            term *= chi_scale
        total += term
    return complex(total)


@dataclass(frozen=True)
class ChannelGeometry:
    """Deterministic channel inputs: trajectories, cluster tracks, RF and
    stochastic parameters.  Realizations differ only in their random draws."""

    traj_tx: Trajectory
    traj_rx: Trajectory
    tracks: tuple[ClusterTrack, ...]
    rf: RfConfig
    params: StochasticParams

    def __post_init__(self):
        _common_times(self.traj_tx, self.traj_rx)
        object.__setattr__(self, "tracks", tuple(self.tracks))

    @property
    def times(self) -> np.ndarray:
        return self.traj_tx.times


@dataclass(frozen=True)
class ChannelRealization:
    times: np.ndarray
    taps: tuple[tuple[PathComponent, ...], ...]
    rf: RfConfig
    seed: object

    def time_index(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(float(self.times[k]) - t) > 1e-9:
            raise ValueError(f"time {t} is not a snapshot time")
        return k

    def transfer(self, t: float, f: float) -> complex:
        return transfer_function(self.taps[self.time_index(t)], f, self.rf)

    def write_cir_csv(self, path) -> None:
        lines = [CIR_CSV_HEADER]
        for t, taps in zip(self.times, self.taps):
            for tap in taps:
                lines.append(tap.csv_row(float(t)))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def realize(geometry: ChannelGeometry, seed) -> ChannelRealization:
    """Materialize one stochastic realization of the channel.

    Draw order is fixed (direct phase, ground phase, then per-track phase,
    virtual delay, and shadowing in track order), so a given seed yields a
    bit-identical realization.  Per-track draws are frozen over the track
    lifetime to keep the channel consistent between adjacent snapshots.
    """
    rng = np.random.default_rng(seed)
    times = geometry.times
    rf = geometry.rf
    params = geometry.params
    lam = rf.wavelength_m

    phi0_los = float(rng.uniform(0.0, TWO_PI))
    phi0_gr = float(rng.uniform(0.0, TWO_PI))
    track_draws = {}
    for trk in sorted(geometry.tracks, key=lambda x: x.track_id):
        track_draws[trk.track_id] = (
            float(rng.uniform(0.0, TWO_PI)),
            float(rng.exponential(1.0 / params.virtual_delay_rate_hz)),
            0.0 if params.sigma_e_db == 0.0 else float(rng.normal(0.0, params.sigma_e_db)),
        )

    active = np.array([bool(window(float(t), *rf.window)) for t in times])
    active_idx = np.flatnonzero(active)
    n = times.size
    taps_per_time: list[tuple[PathComponent, ...]] = [() for _ in range(n)]
    if active_idx.size == 0:
        return ChannelRealization(times, tuple(taps_per_time), rf, seed)

    pos_t = geometry.traj_tx.positions
    pos_r = geometry.traj_rx.positions
    vel_t = geometry.traj_tx.velocities
    vel_r = geometry.traj_rx.velocities

    # direct path over the active span
    d0 = pos_r[0] - pos_t[0]
    d_vec = d0[None, :] + _cumtrapz(vel_r - vel_t, times)
    d_norm = np.linalg.norm(d_vec, axis=1)
    if (d_norm[active] <= 0.0).any():
        raise ValueError("transceivers coincide; direct path undefined")
    rel_v = vel_r - vel_t
    f_los = np.einsum("ij,ij->i", d_vec, rel_v) / (lam * d_norm)
    k_ref = int(active_idx[0])
    los_integral = np.zeros(n)
    los_integral[k_ref:] = TWO_PI * _cumtrapz(f_los[k_ref:], times[k_ref:])
    los_phase = phi0_los + TWO_PI / lam * d_norm
    los_delay = d_norm / SPEED_OF_LIGHT

    # ground bounce via the Tx image
    if (pos_t[active, 2] <= 0.0).any() or (pos_r[active, 2] <= 0.0).any():
        raise ValueError("ground reflection needs positive transceiver heights")
    mirror = np.array([1.0, 1.0, -1.0])
    d_gr = pos_r - pos_t * mirror
    d_gr_norm = np.linalg.norm(d_gr, axis=1)
    rel_v_gr = vel_r - vel_t * mirror
    f_gr = np.einsum("ij,ij->i", d_gr, rel_v_gr) / (lam * d_gr_norm)
    gr_integral = np.zeros(n)
    gr_integral[k_ref:] = TWO_PI * _cumtrapz(f_gr[k_ref:], times[k_ref:])
    gr_phase = phi0_gr + TWO_PI / lam * d_gr_norm
    gr_delay = d_gr_norm / SPEED_OF_LIGHT

    # per-track cluster paths
    per_track: dict[int, dict] = {}
    for trk in geometry.tracks:
        phi0_l, tau_v, z_l = track_draws[trk.track_id]
        idx = []
        centers = []
        vels = []
        counts = []
        for tt, state in zip(trk.times, trk.states):
            k = int(np.argmin(np.abs(times - tt)))
            if abs(float(times[k]) - tt) > 1e-9 or not active[k]:
                continue
            idx.append(k)
            centers.append(state.center.as_array())
            vels.append(state.velocity.as_array())
            counts.append(state.count)
        if not idx:
            continue
        idx = np.array(idx)
        centers = np.array(centers)
        vels = np.array(vels)
        d_t = centers - pos_t[idx]
        d_r = centers - pos_r[idx]
        n_t = np.linalg.norm(d_t, axis=1)
        n_r = np.linalg.norm(d_r, axis=1)
        if (n_t <= 0.0).any() or (n_r <= 0.0).any():
            raise ValueError("cluster center coincides with a transceiver")
        f_t = np.einsum("ij,ij->i", d_t, vel_t[idx] - vels) / (lam * n_t)
        f_r = np.einsum("ij,ij->i", d_r, vel_r[idx] - vels) / (lam * n_r)
        f_sum = f_t + f_r
        integral = TWO_PI * _cumtrapz(f_sum, times[idx])
        geo_len = n_t + n_r
        delays = geo_len / SPEED_OF_LIGHT + tau_v
        powers = np.exp(-params.xi * delays - params.eta) * 10.0 ** (-z_l / 10.0)
        per_track[trk.track_id] = dict(
            idx=idx, doppler=f_sum, integral=integral, delays=delays,
            powers=powers, counts=counts,
            phases=phi0_l + TWO_PI / lam * (geo_len + SPEED_OF_LIGHT * tau_v))

    # per-snapshot power normalization across active clusters
    power_sum = np.zeros(n)
    for data in per_track.values():
        power_sum[data["idx"]] += data["powers"]

    components_at: dict[int, list[PathComponent]] = {int(k): [] for k in active_idx}
    for tid in sorted(per_track):
        data = per_track[tid]
        for j, k in enumerate(data["idx"]):
            k = int(k)
            p_norm = data["powers"][j] / power_sum[k] if power_sum[k] > 0 else data["powers"][j]
            amp = _cluster_amplitude(data["counts"][j], p_norm, params)
            components_at[k].append(PathComponent(
                NLOS, tid, amp, float(data["phases"][j]), float(data["delays"][j]),
                float(data["doppler"][j]), float(data["integral"][j]), 0.0))

    for k in active_idx:
        k = int(k)
        nlos_list = components_at[k]
        diffuse = (rf.eta_nlos * sum(c.amplitude ** 2 for c in nlos_list)
                   + rf.eta_gr * params.gamma_gr ** 2)
        w_los, w_nlos, w_gr = _mixing_weights(rf, diffuse)
        taps = [PathComponent(LOS, None, 1.0, float(los_phase[k]), float(los_delay[k]),
                              float(f_los[k]), float(los_integral[k]), w_los)]
        taps.extend(PathComponent(c.kind, c.track_id, c.amplitude, c.phase,
                                  c.delay_s, c.doppler_hz, c.doppler_integral,
                                  w_nlos) for c in nlos_list)
        taps.append(PathComponent(GR, None, params.gamma_gr, float(gr_phase[k]),
                                  float(gr_delay[k]), float(f_gr[k]),
                                  float(gr_integral[k]), w_gr))
        taps_per_time[k] = tuple(taps)

    return ChannelRealization(times, tuple(taps_per_time), rf, seed)


def export_transfer_grid(path, realization: ChannelRealization,
                         freqs: np.ndarray) -> None:
    """Dump H(t, f) over the snapshot times and given frequencies as a
    two-channel (real, imaginary) VXG grid with axes (t, f)."""
    from . import vxg

    freqs = np.asarray(freqs, dtype=float)
    times = realization.times
    h = np.empty((len(times), len(freqs)), dtype=complex)
    for i, t in enumerate(times):
        taps = realization.taps[i]
        for j, f in enumerate(freqs):
            h[i, j] = transfer_function(taps, float(f), realization.rf)
    roi = Roi(float(times[0]), float(times[-1]) + 1e-12,
              float(freqs[0]), float(freqs[-1]) + 1e-12,
              0.0, 1.0, len(times), len(freqs), 1)
    values = np.stack([h.real[..., None], h.imag[..., None]])
    vxg.write_vxg(path, VoxelGrid(roi, values))
