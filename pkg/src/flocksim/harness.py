"""Scenario loading, the fleet tick loop, metrics, and run export.

A scenario is one YAML file naming a terrain raster, a shared target, a
fleet of vehicles with waypoint paths, and the controller parameters.
``run`` executes the per-tick sequence for every vehicle: advance the
virtual target, check/replan around the obstacle, compute the time index
and consensus speed, compute steering commands, then (after all vehicles
have decided) exchange time indices over the network and integrate the
dynamics.  Messages are delivered with a one-tick delay, so no vehicle
ever acts on a peer's current-tick value.

Everything downstream of a (scenario, master seed) pair is deterministic;
exports are byte-stable and the wall-clock timings that cannot be stable
are quarantined in a separate timing file.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__ as _VERSION
from .coordination import CoordinationGains, consensus_rate, speed_command, time_index
from .dynamics import (
    Commands,
    UavLimits,
    UavState,
    WindModel,
    sample_disturbance,
    step_autopilot,
    step_kinematics,
)
from .geo import DemFormatError, DemGrid, Obstacle, Point3, distance3, load_dem, segment_obstructed
from .guidance import (
    WaypointPath,
    advance_virtual_target,
    convergence_conditions,
    guidance_commands,
    look_ahead_angles,
    reference_angles,
)
from .network import CommConfig, DropoutWindow, ThetaMessage, build_topology, deliver
from .replanner import ReplanError, replan
from .seeding import derive_seed

__all__ = [
    "ScenarioError",
    "RunError",
    "GuidanceParams",
    "ReplanParams",
    "AutopilotParams",
    "WindParams",
    "UavSpec",
    "Scenario",
    "TickRecord",
    "ReplanEvent",
    "PremiseViolation",
    "RunLog",
    "Metrics",
    "load_scenario",
    "run",
    "compute_metrics",
    "export",
    "WALL_CLOCK_FILES",
]

_COINCIDENT_EPS = 1e-9

# Export files that carry wall-clock measurements. Replay verification
# compares every exported file except these.
WALL_CLOCK_FILES = ("timing.json",)

_TRAJECTORY_COLUMNS = (
    "tick",
    "t_s",
    "p_north_m",
    "p_east_m",
    "height_m",
    "chi_rad",
    "gamma_rad",
    "phi_rad",
    "n_lf",
    "v_g_mps",
    "theta_s",
    "cursor",
)

_EVENT_COLUMNS = ("event", "tick", "t_s", "uav_id", "detail")


class ScenarioError(ValueError):
    """A scenario file failed structural or semantic validation."""


class RunError(RuntimeError):
    """A run aborted; the message carries tick and vehicle context."""


@dataclass(frozen=True)
class GuidanceParams:
    k_chi: float = 8.8844
    k_gamma: float = 8.8844
    acceptance_radius: float = 40.0
    delta_lat: float = 0.5
    delta_lon: float = 0.5

    def __post_init__(self) -> None:
        if not (self.k_chi > 0.0 and self.k_gamma > 0.0):
            raise ValueError("guidance gains must be positive")
        if not self.acceptance_radius >= 0.0:
            raise ValueError("acceptance_radius must be >= 0")
        if not (0.0 <= self.delta_lat < math.pi / 2 and 0.0 <= self.delta_lon < math.pi / 2):
            raise ValueError("delta_lat/delta_lon must lie in [0, pi/2)")


@dataclass(frozen=True)
class ReplanParams:
    k_samples: int = 2000
    delta_r: float = 500.0
    delta_h: float = 20.0
    delta_angle: float = math.pi / 3
    clearance: float = 10.0
    terrain_step: float = 25.0
    max_iterations: int = 20

    def __post_init__(self) -> None:
        if self.k_samples < 1:
            raise ValueError("k_samples must be >= 1")
        if not (self.delta_r > 0.0 and self.delta_h > 0.0):
            raise ValueError("delta_r and delta_h must be positive")
        if not 0.0 < self.delta_angle <= math.pi:
            raise ValueError("delta_angle must lie in (0, pi]")
        if not self.clearance >= 0.0:
            raise ValueError("clearance must be >= 0")
        if not self.terrain_step > 0.0:
            raise ValueError("terrain_step must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class AutopilotParams:
    tau_phi: float = 0.5
    tau_n: float = 0.5
    tau_v: float = 2.0
    tau_psi: float = 1.0

    def __post_init__(self) -> None:
        for tau, name in (
            (self.tau_phi, "tau_phi"),
            (self.tau_n, "tau_n"),
            (self.tau_v, "tau_v"),
            (self.tau_psi, "tau_psi"),
        ):
            if not tau > 0.0:
                raise ValueError(f"{name} must be positive, got {tau}")


@dataclass(frozen=True)
class WindParams:
    ambient: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sigma_u: float = 0.0
    sigma_v: float = 0.0
    sigma_w: float = 0.0
    length_u: float = 200.0
    length_v: float = 200.0
    length_w: float = 50.0
    airspeed_nominal: float = 13.5
    d_max: float = 0.1

    def make_model(self, seed: int) -> WindModel:
        return WindModel(
            ambient=self.ambient,
            sigma_u=self.sigma_u,
            sigma_v=self.sigma_v,
            sigma_w=self.sigma_w,
            length_u=self.length_u,
            length_v=self.length_v,
            length_w=self.length_w,
            airspeed_nominal=self.airspeed_nominal,
            d_max=self.d_max,
            seed=seed,
        )


@dataclass(frozen=True)
class UavSpec:
    uav_id: int
    initial: UavState
    limits: UavLimits
    path: WaypointPath


@dataclass
class Scenario:
    """A fully validated simulation configuration."""

    dem_path: str
    dem: DemGrid
    uavs: list[UavSpec]
    target: Point3
    comm: CommConfig
    coordination: CoordinationGains
    guidance: GuidanceParams
    replan: ReplanParams
    autopilot: AutopilotParams
    wind: WindParams
    master_seed: int
    duration: float
    dt: float
    obstacle: Obstacle | None = None
    name: str = ""
    source_path: str | None = None
    source_sha256: str = ""


@dataclass(frozen=True)
class TickRecord:
    tick: int
    t: float
    uav_id: int
    north: float
    east: float
    height: float
    chi: float
    gamma: float
    psi: float
    v_g: float
    phi: float
    n_lf: float
    phi_cmd: float
    n_lf_cmd: float
    v_g_cmd: float
    eta_lat: float
    eta_lon: float
    theta: float
    theta_dot: float
    theta_ref: float
    cursor: int


@dataclass(frozen=True)
class ReplanEvent:
    tick: int
    t: float
    uav_id: int
    waypoints: tuple[Point3, ...]
    rt_sim: float
    overhead: float
    wall_ms: float


@dataclass(frozen=True)
class ReplanFailure:
    tick: int
    t: float
    uav_id: int
    reason: str


@dataclass(frozen=True)
class PremiseViolation:
    tick: int
    t: float
    uav_id: int
    lat_ok: bool
    lon_ok: bool
    sign_ok: bool
    margin: float


@dataclass
class RunLog:
    """Complete per-tick history of one run."""

    n_uavs: int
    dt: float
    n_ticks: int
    records: list[TickRecord] = field(default_factory=list)
    replan_events: list[ReplanEvent] = field(default_factory=list)
    replan_failures: list[ReplanFailure] = field(default_factory=list)
    violations: list[PremiseViolation] = field(default_factory=list)
    scenario_path: str = "<memory>"
    scenario_sha256: str = ""
    master_seed: int = 0
    wall_s: float = 0.0

    def uav_records(self, uav_id: int) -> list[TickRecord]:
        return [r for r in self.records if r.uav_id == uav_id]

    def positions(self, uav_id: int) -> np.ndarray:
        """(n_ticks, 3) array of [north, east, height] for one vehicle."""
        rows = self.uav_records(uav_id)
        return np.array([[r.north, r.east, r.height] for r in rows]).reshape(len(rows), 3)

    def thetas(self) -> np.ndarray:
        """(n_ticks, n_uavs) array of time indices."""
        out = np.zeros((self.n_ticks, self.n_uavs))
        for r in self.records:
            out[r.tick, r.uav_id] = r.theta
        return out


@dataclass
class Metrics:
    """Fleet-level summary of one run (all values >= 0)."""

    ae_mean: float
    rmse_mean: float
    md: float
    md_final: float
    rt_sim: float
    detour_overhead: float
    per_uav_ae: list[float]
    n_replan_events: int
    n_replan_failures: int
    n_premise_violations: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "ae_mean_m": self.ae_mean,
            "rmse_mean_m": self.rmse_mean,
            "md_max_s": self.md,
            "md_final_s": self.md_final,
            "rt_sim_s": self.rt_sim,
            "detour_overhead_s": self.detour_overhead,
            "per_uav_ae_m": self.per_uav_ae,
            "n_replan_events": self.n_replan_events,
            "n_replan_failures": self.n_replan_failures,
            "n_premise_violations": self.n_premise_violations,
        }


# ---------------------------------------------------------------------------
# Scenario loading


def _expect_mapping(node: Any, ctx: str) -> dict:
    if not isinstance(node, dict):
        raise ScenarioError(f"{ctx}: expected a mapping, got {type(node).__name__}")
    return node


def _get(node: dict, key: str, ctx: str) -> Any:
    if key not in node:
        raise ScenarioError(f"{ctx}: missing required field '{key}'")
    return node[key]


def _number(node: dict, key: str, ctx: str, default: float | None = None) -> float:
    if key not in node:
        if default is None:
            raise ScenarioError(f"{ctx}: missing required field '{key}'")
        return default
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{ctx}.{key}: expected a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ScenarioError(f"{ctx}.{key}: must be finite, got {value!r}")
    return float(value)


def _integer(node: dict, key: str, ctx: str, default: int | None = None) -> int:
    if key not in node:
        if default is None:
            raise ScenarioError(f"{ctx}: missing required field '{key}'")
        return default
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{ctx}.{key}: expected an integer, got {value!r}")
    return value


def _point(node: Any, ctx: str) -> Point3:
    node = _expect_mapping(node, ctx)
    return Point3(
        north=_number(node, "north_m", ctx),
        east=_number(node, "east_m", ctx),
        height=_number(node, "height_m", ctx),
    )


def _waypoint(row: Any, ctx: str) -> Point3:
    if (
        not isinstance(row, (list, tuple))
        or len(row) != 3
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in row)
    ):
        raise ScenarioError(f"{ctx}: expected [north_m, east_m, height_m], got {row!r}")
    if any(not math.isfinite(float(v)) for v in row):
        raise ScenarioError(f"{ctx}: waypoint components must be finite, got {row!r}")
    return Point3(float(row[0]), float(row[1]), float(row[2]))


def _limits(node: dict, ctx: str) -> UavLimits:
    try:
        return UavLimits(
            v_g_min=_number(node, "v_g_min_mps", ctx, 9.0),
            v_g_max=_number(node, "v_g_max_mps", ctx, 18.0),
            phi_min=_number(node, "phi_min_rad", ctx, -0.6),
            phi_max=_number(node, "phi_max_rad", ctx, 0.6),
            n_lf_min=_number(node, "n_lf_min", ctx, 0.0),
            n_lf_max=_number(node, "n_lf_max", ctx, 2.1),
            eta_lat_min=_number(node, "eta_lat_min_rad", ctx, -1.5),
            eta_lat_max=_number(node, "eta_lat_max_rad", ctx, 1.5),
            eta_lon_min=_number(node, "eta_lon_min_rad", ctx, -1.5),
            eta_lon_max=_number(node, "eta_lon_max_rad", ctx, 1.5),
        )
    except ValueError as exc:
        raise ScenarioError(f"{ctx}: {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    """Parse and fully validate a scenario file.

    Every structural problem (missing field, wrong type) and semantic
    problem (limit ordering, waypoint outside the terrain footprint, final
    waypoint not at the target) raises :class:`ScenarioError` naming the
    offending field.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    try:
        root = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not valid YAML: {exc}") from exc
    root = _expect_mapping(root, str(path))

    dem_rel = _get(root, "dem_file", "scenario")
    if not isinstance(dem_rel, str):
        raise ScenarioError(f"scenario.dem_file: expected a path string, got {dem_rel!r}")
    dem_path = (path.parent / dem_rel).resolve()
    try:
        dem = load_dem(dem_path)
    except DemFormatError as exc:
        raise ScenarioError(f"scenario.dem_file: {exc}") from exc

    duration = _number(root, "duration_s", "scenario")
    dt = _number(root, "dt_s", "scenario")
    if not dt > 0.0:
        raise ScenarioError(f"scenario.dt_s: must be positive, got {dt}")
    if not duration >= 0.0:
        raise ScenarioError(f"scenario.duration_s: must be >= 0, got {duration}")
    master_seed = _integer(root, "master_seed", "scenario")

    target = _point(_get(root, "target", "scenario"), "scenario.target")
    if not dem.contains(target.north, target.east):
        raise ScenarioError("scenario.target: outside the terrain footprint")

    g_node = _expect_mapping(root.get("guidance", {}), "scenario.guidance")
    try:
        guidance = GuidanceParams(
            k_chi=_number(g_node, "k_chi", "scenario.guidance", 8.8844),
            k_gamma=_number(g_node, "k_gamma", "scenario.guidance", 8.8844),
            acceptance_radius=_number(g_node, "acceptance_radius_m", "scenario.guidance", 40.0),
            delta_lat=_number(g_node, "delta_lat_rad", "scenario.guidance", 0.5),
            delta_lon=_number(g_node, "delta_lon_rad", "scenario.guidance", 0.5),
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.guidance: {exc}") from exc

    c_node = _expect_mapping(root.get("coordination", {}), "scenario.coordination")
    try:
        coordination = CoordinationGains(
            k_theta=_number(c_node, "k_theta", "scenario.coordination", 1.0),
            gamma_d=_number(c_node, "gamma_d", "scenario.coordination", 1.0),
            k_vg=_number(c_node, "k_vg", "scenario.coordination", 0.001),
            dt=dt,
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.coordination: {exc}") from exc

    m_node = _expect_mapping(root.get("comm", {}), "scenario.comm")
    windows = []
    rows = m_node.get("dropout_schedule", [])
    if not isinstance(rows, list):
        raise ScenarioError("scenario.comm.dropout_schedule: expected a list")
    for k, row in enumerate(rows):
        ctx = f"scenario.comm.dropout_schedule[{k}]"
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise ScenarioError(f"{ctx}: expected [start_s, end_s, uav_a, uav_b], got {row!r}")
        try:
            windows.append(
                DropoutWindow(
                    start_s=float(row[0]), end_s=float(row[1]), uav_a=int(row[2]), uav_b=int(row[3])
                )
            )
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"{ctx}: {exc}") from exc
    try:
        comm = CommConfig(
            r_com=_number(m_node, "r_com_m", "scenario.comm", 30_000.0),
            c_max=_integer(m_node, "c_max", "scenario.comm", 2),
            gamma_signal=_number(m_node, "gamma_signal", "scenario.comm", 1.0),
            dropout_schedule=tuple(windows),
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.comm: {exc}") from exc

    r_node = _expect_mapping(root.get("replan", {}), "scenario.replan")
    try:
        replan_params = ReplanParams(
            k_samples=_integer(r_node, "k_samples", "scenario.replan", 2000),
            delta_r=_number(r_node, "delta_r_m", "scenario.replan", 500.0),
            delta_h=_number(r_node, "delta_h_m", "scenario.replan", 20.0),
            delta_angle=_number(r_node, "delta_angle_rad", "scenario.replan", math.pi / 3),
            clearance=_number(r_node, "clearance_m", "scenario.replan", 10.0),
            terrain_step=_number(r_node, "terrain_step_m", "scenario.replan", 25.0),
            max_iterations=_integer(r_node, "max_iterations", "scenario.replan", 20),
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.replan: {exc}") from exc

    a_node = _expect_mapping(root.get("autopilot", {}), "scenario.autopilot")
    try:
        autopilot = AutopilotParams(
            tau_phi=_number(a_node, "tau_phi_s", "scenario.autopilot", 0.5),
            tau_n=_number(a_node, "tau_n_s", "scenario.autopilot", 0.5),
            tau_v=_number(a_node, "tau_v_s", "scenario.autopilot", 2.0),
            tau_psi=_number(a_node, "tau_psi_s", "scenario.autopilot", 1.0),
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.autopilot: {exc}") from exc

    w_node = _expect_mapping(root.get("wind", {}), "scenario.wind")
    ambient_row = w_node.get("ambient_mps", [0.0, 0.0, 0.0])
    if (
        not isinstance(ambient_row, (list, tuple))
        or len(ambient_row) != 3
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in ambient_row)
    ):
        raise ScenarioError(
            f"scenario.wind.ambient_mps: expected [north, east, up] m/s, got {ambient_row!r}"
        )
    wind = WindParams(
        ambient=tuple(float(v) for v in ambient_row),
        sigma_u=_number(w_node, "sigma_u_mps", "scenario.wind", 0.0),
        sigma_v=_number(w_node, "sigma_v_mps", "scenario.wind", 0.0),
        sigma_w=_number(w_node, "sigma_w_mps", "scenario.wind", 0.0),
        length_u=_number(w_node, "length_u_m", "scenario.wind", 200.0),
        length_v=_number(w_node, "length_v_m", "scenario.wind", 200.0),
        length_w=_number(w_node, "length_w_m", "scenario.wind", 50.0),
        airspeed_nominal=_number(w_node, "airspeed_nominal_mps", "scenario.wind", 13.5),
        d_max=_number(w_node, "d_max_radps", "scenario.wind", 0.1),
    )
    try:
        wind.make_model(seed=0)
    except ValueError as exc:
        raise ScenarioError(f"scenario.wind: {exc}") from exc

    obstacle = None
    if root.get("obstacle") is not None:
        o_node = _expect_mapping(root["obstacle"], "scenario.obstacle")
        try:
            obstacle = Obstacle(
                center_north=_number(o_node, "center_north_m", "scenario.obstacle"),
                center_east=_number(o_node, "center_east_m", "scenario.obstacle"),
                lateral_radius=_number(o_node, "lateral_radius_m", "scenario.obstacle"),
                base_height=_number(o_node, "base_height_m", "scenario.obstacle"),
                top_height=_number(o_node, "top_height_m", "scenario.obstacle"),
                activation_time=_number(o_node, "activation_time_s", "scenario.obstacle", 0.0),
            )
        except ValueError as exc:
            raise ScenarioError(f"scenario.obstacle: {exc}") from exc

    default_limits_node = _expect_mapping(root.get("limits", {}), "scenario.limits")

    uav_rows = _get(root, "uavs", "scenario")
    if not isinstance(uav_rows, list) or not uav_rows:
        raise ScenarioError("scenario.uavs: expected a non-empty list")
    uavs: list[UavSpec] = []
    for k, row in enumerate(uav_rows):
        ctx = f"scenario.uavs[{k}]"
        row = _expect_mapping(row, ctx)
        uav_id = _integer(row, "id", ctx)
        if uav_id != k:
            raise ScenarioError(f"{ctx}.id: ids must be contiguous from 0, expected {k} got {uav_id}")

        merged = dict(default_limits_node)
        merged.update(_expect_mapping(row.get("limits", {}), f"{ctx}.limits"))
        limits = _limits(merged, f"{ctx}.limits")

        init_node = _expect_mapping(_get(row, "initial", ctx), f"{ctx}.initial")
        initial = UavState(
            position=Point3(
                north=_number(init_node, "north_m", f"{ctx}.initial"),
                east=_number(init_node, "east_m", f"{ctx}.initial"),
                height=_number(init_node, "height_m", f"{ctx}.initial"),
            ),
            chi=_number(init_node, "chi_rad", f"{ctx}.initial"),
            gamma=_number(init_node, "gamma_rad", f"{ctx}.initial", 0.0),
            psi=_number(init_node, "psi_rad", f"{ctx}.initial"),
            v_g=_number(init_node, "v_g_mps", f"{ctx}.initial"),
            phi=_number(init_node, "phi_rad", f"{ctx}.initial", 0.0),
            n_lf=_number(init_node, "n_lf", f"{ctx}.initial", 1.0),
        )
        for value, lo, hi, name in (
            (initial.v_g, limits.v_g_min, limits.v_g_max, "v_g_mps"),
            (initial.phi, limits.phi_min, limits.phi_max, "phi_rad"),
            (initial.n_lf, limits.n_lf_min, limits.n_lf_max, "n_lf"),
        ):
            if not lo <= value <= hi:
                raise ScenarioError(
                    f"{ctx}.initial.{name}: {value} outside limits [{lo}, {hi}]"
                )
        if not -math.pi / 2 < initial.gamma < math.pi / 2:
            raise ScenarioError(f"{ctx}.initial.gamma_rad: must lie in (-pi/2, pi/2)")
        if not dem.contains(initial.position.north, initial.position.east):
            raise ScenarioError(f"{ctx}.initial: position outside the terrain footprint")

        wp_rows = _get(row, "waypoints", ctx)
        if not isinstance(wp_rows, list):
            raise ScenarioError(f"{ctx}.waypoints: expected a list of [n, e, h] rows")
        waypoints = [_waypoint(wp, f"{ctx}.waypoints[{j}]") for j, wp in enumerate(wp_rows)]
        try:
            path_obj = WaypointPath(
                waypoints=tuple(waypoints),
                cursor=0,
                acceptance_radius=guidance.acceptance_radius,
            )
        except ValueError as exc:
            raise ScenarioError(f"{ctx}.waypoints: {exc}") from exc
        for j, wp in enumerate(waypoints):
            if not dem.contains(wp.north, wp.east):
                raise ScenarioError(f"{ctx}.waypoints[{j}]: outside the terrain footprint")
        if waypoints[-1] != target:
            raise ScenarioError(
                f"{ctx}.waypoints: final waypoint {waypoints[-1]} must equal the shared target {target}"
            )
        uavs.append(UavSpec(uav_id=uav_id, initial=initial, limits=limits, path=path_obj))

    name = root.get("name", "")
    if not isinstance(name, str):
        raise ScenarioError(f"scenario.name: expected a string, got {name!r}")

    return Scenario(
        dem_path=str(dem_path),
        dem=dem,
        uavs=uavs,
        target=target,
        comm=comm,
        coordination=coordination,
        guidance=guidance,
        replan=replan_params,
        autopilot=autopilot,
        wind=wind,
        master_seed=master_seed,
        duration=duration,
        dt=dt,
        obstacle=obstacle,
        name=name,
        source_path=str(path),
        source_sha256=hashlib.sha256(text.encode("utf-8")).hexdigest(),
    )


# ---------------------------------------------------------------------------
# The tick loop


def run(scenario: Scenario) -> tuple[RunLog, Metrics]:
    """Execute the scenario and return its full log plus fleet metrics.

    Per tick, phase 1 runs every vehicle's control sequence on tick-t
    inputs (virtual-target advance, obstruction check and replan splice,
    time index, consensus from last tick's inbox, steering commands);
    phase 2 builds this tick's topology and routes the time-index
    messages into next tick's inboxes; phase 3 integrates the dynamics.
    """
    t_start = time.perf_counter()
    n = len(scenario.uavs)
    dt = scenario.dt
    n_ticks = int(round(scenario.duration / dt))
    gains = scenario.coordination
    gp = scenario.guidance
    rp = scenario.replan
    ap = scenario.autopilot

    states = [spec.initial for spec in scenario.uavs]
    paths = [spec.path for spec in scenario.uavs]
    winds = [
        scenario.wind.make_model(seed=derive_seed(scenario.master_seed, spec.uav_id, "wind"))
        for spec in scenario.uavs
    ]
    inboxes: dict[int, list[tuple[float, float]]] = {i: [] for i in range(n)}
    replan_counts = [0] * n

    log = RunLog(
        n_uavs=n,
        dt=dt,
        n_ticks=n_ticks,
        scenario_path=scenario.source_path or "<memory>",
        scenario_sha256=scenario.source_sha256,
        master_seed=scenario.master_seed,
    )

    for tick in range(n_ticks):
        t = tick * dt
        commands: list[Commands] = []
        thetas: list[float] = []

        for i in range(n):
            state = states[i]
            limits = scenario.uavs[i].limits
            path = advance_virtual_target(paths[i], state)

            if scenario.obstacle is not None and segment_obstructed(
                state.position, path.active, scenario.obstacle, t
            ):
                wall0 = time.perf_counter()
                event_seed = derive_seed(scenario.master_seed, i, "replan", replan_counts[i])
                replan_counts[i] += 1
                try:
                    detour = replan(
                        state,
                        path.active,
                        scenario.obstacle,
                        scenario.dem,
                        k_samples=rp.k_samples,
                        delta_r=rp.delta_r,
                        delta_h=rp.delta_h,
                        delta_angle=rp.delta_angle,
                        rng_seed=event_seed,
                        now=t,
                        clearance=rp.clearance,
                        terrain_step=rp.terrain_step,
                        max_iterations=rp.max_iterations,
                    )
                except ReplanError as exc:
                    # No acceptable detour from this pose. Keep flying the
                    # current path and retry on later ticks; the failure is
                    # surfaced in the event log rather than killing the run.
                    log.replan_failures.append(
                        ReplanFailure(tick=tick, t=t, uav_id=i, reason=str(exc))
                    )
                    detour = None
                wall_ms = (time.perf_counter() - wall0) * 1e3
                if detour:
                    legs = [state.position, *detour, path.active]
                    detour_len = sum(
                        distance3(legs[k], legs[k + 1]) for k in range(len(legs) - 1)
                    )
                    direct = distance3(state.position, path.active)
                    overhead = (detour_len - direct) / state.v_g
                    path = path.splice(detour)
                    # Detection and splice complete inside the same tick, so
                    # the simulated response time is zero by construction.
                    log.replan_events.append(
                        ReplanEvent(
                            tick=tick,
                            t=t,
                            uav_id=i,
                            waypoints=tuple(detour),
                            rt_sim=0.0,
                            overhead=overhead,
                            wall_ms=wall_ms,
                        )
                    )
            paths[i] = path

            theta = time_index(state, path, scenario.target)
            theta_dot = consensus_rate(theta, inboxes[i], gains)
            theta_ref = theta + theta_dot * gains.dt
            v_cmd = speed_command(theta, theta_dot, state.v_g, gains, limits)

            if distance3(state.position, path.active) < _COINCIDENT_EPS:
                chi_c, gamma_c = state.chi, state.gamma
            else:
                chi_c, gamma_c = reference_angles(state, path.active)
            angles = look_ahead_angles(state, chi_c, gamma_c)
            phi_c, n_lf_c = guidance_commands(state, angles, gp.k_chi, gp.k_gamma, limits)
            report = convergence_conditions(
                angles, state, path.active, gp.delta_lat, gp.delta_lon, 0.0
            )
            if not report.all_ok:
                log.violations.append(
                    PremiseViolation(
                        tick=tick,
                        t=t,
                        uav_id=i,
                        lat_ok=report.lat_ok,
                        lon_ok=report.lon_ok,
                        sign_ok=report.sign_ok,
                        margin=report.margin,
                    )
                )

            commands.append(Commands(phi=phi_c, n_lf=n_lf_c, v_g=v_cmd))
            thetas.append(theta)
            log.records.append(
                TickRecord(
                    tick=tick,
                    t=t,
                    uav_id=i,
                    north=state.position.north,
                    east=state.position.east,
                    height=state.position.height,
                    chi=state.chi,
                    gamma=state.gamma,
                    psi=state.psi,
                    v_g=state.v_g,
                    phi=state.phi,
                    n_lf=state.n_lf,
                    phi_cmd=phi_c,
                    n_lf_cmd=n_lf_c,
                    v_g_cmd=v_cmd,
                    eta_lat=angles.eta_lat,
                    eta_lon=angles.eta_lon,
                    theta=theta,
                    theta_dot=theta_dot,
                    theta_ref=theta_ref,
                    cursor=path.cursor,
                )
            )

        graph = build_topology([s.position for s in states], scenario.comm, tick, dt)
        messages = [ThetaMessage(sender=i, theta=thetas[i], sent_tick=tick) for i in range(n)]
        inboxes = deliver(messages, graph)

        for i in range(n):
            state = step_autopilot(
                states[i], commands[i], scenario.uavs[i].limits, dt, ap.tau_phi, ap.tau_n, ap.tau_v
            )
            gust = sample_disturbance(winds[i], dt)
            state = step_kinematics(state, gust, dt, ap.tau_psi)
            if not all(
                math.isfinite(v)
                for v in (
                    state.position.north,
                    state.position.east,
                    state.position.height,
                    state.chi,
                    state.gamma,
                    state.psi,
                    state.v_g,
                )
            ):
                raise RunError(f"tick {tick}, uav {i}: state became non-finite: {state}")
            states[i] = state

    log.wall_s = time.perf_counter() - t_start
    return log, compute_metrics(log, scenario)


# ---------------------------------------------------------------------------
# Metrics


def compute_metrics(log: RunLog, scenario: Scenario) -> Metrics:
    """Closest-approach error statistics and time-index agreement.

    For each vehicle and each waypoint of its original path, the error is
    taken at the tick of closest 3D approach over the whole run.  The AE
    is the mean error norm over waypoints, averaged over vehicles; the
    RMSE spreads the norms about the norm of the mean error vector with
    an n-1 denominator.  MD is the worst pairwise time-index gap, both
    over the whole run and at the final tick.
    """
    n = len(scenario.uavs)
    if log.n_ticks == 0 or not log.records:
        return Metrics(
            ae_mean=0.0,
            rmse_mean=0.0,
            md=0.0,
            md_final=0.0,
            rt_sim=0.0,
            detour_overhead=0.0,
            per_uav_ae=[0.0] * n,
            n_replan_events=0,
            n_replan_failures=0,
            n_premise_violations=0,
        )

    per_uav_ae: list[float] = []
    per_uav_rmse: list[float] = []
    for spec in scenario.uavs:
        traj = log.positions(spec.uav_id)
        errors = []
        for wp in spec.path.waypoints:
            d = np.linalg.norm(traj - wp.as_array(), axis=1)
            k = int(np.argmin(d))
            errors.append(wp.as_array() - traj[k])
        err = np.array(errors)
        norms = np.linalg.norm(err, axis=1)
        per_uav_ae.append(float(np.mean(norms)))
        mean_norm = float(np.linalg.norm(np.mean(err, axis=0)))
        per_uav_rmse.append(float(np.sqrt(np.sum((norms - mean_norm) ** 2) / (len(norms) - 1))))

    thetas = log.thetas()
    spread = thetas.max(axis=1) - thetas.min(axis=1)
    md = float(spread.max())
    md_final = float(spread[-1])

    rt_sim = log.replan_events[0].rt_sim if log.replan_events else 0.0
    overhead = float(sum(e.overhead for e in log.replan_events))

    return Metrics(
        ae_mean=float(np.mean(per_uav_ae)),
        rmse_mean=float(np.mean(per_uav_rmse)),
        md=md,
        md_final=md_final,
        rt_sim=rt_sim,
        detour_overhead=overhead,
        per_uav_ae=per_uav_ae,
        n_replan_events=len(log.replan_events),
        n_replan_failures=len(log.replan_failures),
        n_premise_violations=len(log.violations),
    )


# ---------------------------------------------------------------------------
# Export


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, columns: tuple[str, ...], rows: list[list[Any]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def export(log: RunLog, metrics: Metrics, out_dir: str | Path) -> list[Path]:
    """Write the run to ``out_dir``; returns the files written.

    Per-vehicle trajectory CSVs, an event CSV (replans and premise
    violations), metrics JSON, and a manifest tying the run to its
    scenario hash and seed.  All of those are byte-stable for a fixed
    (scenario, seed).  Wall-clock timings go to timing.json, which replay
    verification ignores.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RunError(f"cannot create output directory {out}: {exc}") from exc

    written: list[Path] = []
    for uav_id in range(log.n_uavs):
        rows = [
            [
                r.tick,
                r.t,
                r.north,
                r.east,
                r.height,
                r.chi,
                r.gamma,
                r.phi,
                r.n_lf,
                r.v_g,
                r.theta,
                r.cursor,
            ]
            for r in log.uav_records(uav_id)
        ]
        fp = out / f"uav_{uav_id:02d}.csv"
        _write_csv(fp, _TRAJECTORY_COLUMNS, rows)
        written.append(fp)

    events: list[tuple[int, int, list[Any]]] = []
    for e in log.replan_events:
        detail = {
            "waypoints": [[p.north, p.east, p.height] for p in e.waypoints],
            "rt_sim_s": e.rt_sim,
            "overhead_s": e.overhead,
        }
        events.append((e.tick, e.uav_id, ["replan", e.tick, e.t, e.uav_id, json.dumps(detail, sort_keys=True)]))
    for f in log.replan_failures:
        detail_f = {"reason": f.reason}
        events.append(
            (f.tick, f.uav_id, ["replan_failed", f.tick, f.t, f.uav_id, json.dumps(detail_f, sort_keys=True)])
        )
    for v in log.violations:
        detail = {
            "lat_ok": v.lat_ok,
            "lon_ok": v.lon_ok,
            "sign_ok": v.sign_ok,
            "margin": v.margin,
        }
        events.append(
            (v.tick, v.uav_id, ["premise_violation", v.tick, v.t, v.uav_id, json.dumps(detail, sort_keys=True)])
        )
    events.sort(key=lambda item: (item[0], item[1], item[2][0]))
    fp = out / "events.csv"
    _write_csv(fp, _EVENT_COLUMNS, [row for _, _, row in events])
    written.append(fp)

    fp = out / "metrics.json"
    fp.write_text(json.dumps(metrics.as_dict(), indent=2, sort_keys=True) + "\n")
    written.append(fp)

    manifest = {
        "scenario_path": log.scenario_path,
        "scenario_sha256": log.scenario_sha256,
        "master_seed": log.master_seed,
        "n_uavs": log.n_uavs,
        "n_ticks": log.n_ticks,
        "dt_s": log.dt,
        "software_version": _VERSION,
    }
    fp = out / "manifest.json"
    fp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(fp)

    timing = {
        "run_wall_s": log.wall_s,
        "replan_wall_ms": [e.wall_ms for e in log.replan_events],
    }
    fp = out / "timing.json"
    fp.write_text(json.dumps(timing, indent=2, sort_keys=True) + "\n")
    written.append(fp)

    return written
