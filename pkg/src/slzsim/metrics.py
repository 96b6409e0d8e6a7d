"""Safety metrics over mission logs and offline annotation replays.

warning counts people strictly inside the target landing disk; danger counts
people within the 1 m safety radius of its center. Ground-truth landing
zones are rebuilt from true head positions by rasterizing a 0.16 m^2
personal-space square per person and extracting the 10 biggest circles.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .density import OccupancyGrid, OracleNoiseConfig, occupancy_from_density, \
    render_oracle_density
from .errors import BehindCamera, EmptyGroundTruth
from .geometry import CameraModel, HeadPlane, PlaneGrid, grid_footprint, \
    project_plane_point, sample_occupancy_to_plane
from .slz import SlzConfig, extract_slz
from .tracking import TrackManager, TrackerConfig, circle_iou

DANGER_RADIUS = 1.0            # safety minimum radius around the target center
PERSONAL_SPACE_SIDE = 0.4      # 0.4 m x 0.4 m = 0.16 m^2 per person
GROUND_TRUTH_COUNT = 10


def risk_counts(target, heads) -> tuple[int, int]:
    """(warning, danger) person counts for one target circle.

    warning: heads strictly inside the target disk; danger: heads within
    1 m of the target center.
    """
    cx, cy, r = float(target[0]), float(target[1]), float(target[2])
    if r <= 0:
        raise ValueError("target radius must be positive")
    heads = np.asarray(heads, dtype=float).reshape(-1, 2)
    if heads.size == 0:
        return 0, 0
    d2 = (heads[:, 0] - cx) ** 2 + (heads[:, 1] - cy) ** 2
    warning = int((d2 < r * r).sum())
    danger = int((d2 <= DANGER_RADIUS ** 2).sum())
    return warning, danger


def ground_truth_slz(heads, grid_template: PlaneGrid,
                     cfg: SlzConfig | None = None) -> list[tuple[float, float, float]]:
    """Ground-truth landing circles from true head positions.

    Rasterizes one personal-space square per head onto a copy of the grid
    template, then extracts up to 10 circles by distance transform. Returns
    (cx, cy, radius) tuples ordered by non-increasing radius.
    """
    cfg = cfg or SlzConfig(n_p=GROUND_TRUTH_COUNT, r0=1.0)
    grid = grid_template.copy()
    half = PERSONAL_SPACE_SIDE / 2
    cell = grid.cell_size
    heads = np.asarray(heads, dtype=float).reshape(-1, 2)
    for hx, hy in heads:
        j0 = int(np.ceil((hx - half - grid.origin_x) / cell - 1e-9))
        j1 = int(np.floor((hx + half - grid.origin_x) / cell + 1e-9))
        i0 = int(np.ceil((hy - half - grid.origin_y) / cell - 1e-9))
        i1 = int(np.floor((hy + half - grid.origin_y) / cell + 1e-9))
        if j1 < 0 or i1 < 0 or j0 >= grid.cols or i0 >= grid.rows:
            continue
        grid.values[max(i0, 0):min(i1, grid.rows - 1) + 1,
                    max(j0, 0):min(j1, grid.cols - 1) + 1] = 0
    return [(p.cx, p.cy, p.radius) for p in extract_slz(grid, cfg)]


def best_iou(target, gt) -> float:
    """Best circle IoU of the target against any ground-truth zone."""
    if not gt:
        raise EmptyGroundTruth("no ground-truth landing zones")
    return max(circle_iou(target, g) for g in gt)


@dataclass
class MetricsReport:
    warning_avg: float = 0.0
    warning_std: float = 0.0
    danger_avg: float = 0.0
    danger_std: float = 0.0
    slz_area_avg: float = 0.0
    best_iou_avg: float = 0.0
    nearest_person_avg: float = 0.0
    success_rate: float | None = None
    exec_time_avg: float = 0.0
    exec_time_max: float = 0.0
    exec_time_min: float = 0.0
    n_missions: int = 0
    n_frames: int = 0


def _mission_means(frames, attr):
    vals = [getattr(f, attr) for f in frames if getattr(f, attr) is not None]
    return vals


def aggregate(logs) -> MetricsReport:
    """Pool per-frame metrics: per-mission means averaged across missions.

    Standard deviations are over all frames pooled. nearest_person is
    averaged over descent frames only (altitude below the start altitude).
    """
    if not logs:
        raise ValueError("aggregate requires at least one mission log")
    rep = MetricsReport(n_missions=len(logs))
    per_mission = {k: [] for k in
                   ("warning", "danger", "slz_area", "best_iou", "nearest")}
    pooled_warning, pooled_danger, exec_times = [], [], []
    outcomes = []
    for log in logs:
        outcomes.append(log.outcome)
        rep.n_frames += len(log.frames)
        for key, attr in (("warning", "warning"), ("danger", "danger"),
                          ("slz_area", "slz_area"), ("best_iou", "best_iou")):
            vals = _mission_means(log.frames, attr)
            if vals:
                per_mission[key].append(float(np.mean(vals)))
        pooled_warning += _mission_means(log.frames, "warning")
        pooled_danger += _mission_means(log.frames, "danger")
        exec_times += _mission_means(log.frames, "exec_time")
        descent = [f.nearest_person for f in log.frames
                   if f.nearest_person is not None
                   and f.drone[2] < log.start_altitude]
        if descent:
            per_mission["nearest"].append(float(np.mean(descent)))

    def _avg(key):
        return float(np.mean(per_mission[key])) if per_mission[key] else 0.0

    rep.warning_avg = _avg("warning")
    rep.danger_avg = _avg("danger")
    rep.slz_area_avg = _avg("slz_area")
    rep.best_iou_avg = _avg("best_iou")
    rep.nearest_person_avg = _avg("nearest")
    rep.warning_std = float(np.std(pooled_warning)) if pooled_warning else 0.0
    rep.danger_std = float(np.std(pooled_danger)) if pooled_danger else 0.0
    if any(o in ("LandedSafe", "Collision", "Timeout", "Aborted")
           for o in outcomes):
        rep.success_rate = outcomes.count("LandedSafe") / len(outcomes)
    if exec_times:
        rep.exec_time_avg = float(np.mean(exec_times))
        rep.exec_time_max = float(max(exec_times))
        rep.exec_time_min = float(min(exec_times))
    return rep


@dataclass
class ReplayFrame:
    frame_id: int
    n_heads: int
    n_proposals: int
    target: list | None
    warning: int | None
    danger: int | None
    slz_area: float | None
    best_iou: float | None
    exec_time: float


def replay_annotations(frames, poses, cam: CameraModel, plane: HeadPlane,
                       slz_cfg: SlzConfig | None = None,
                       tracker_cfg: TrackerConfig | None = None,
                       noise_cfg: OracleNoiseConfig | None = None,
                       criterion: str = "biggest",
                       cell_size: float = 0.10,
                       margin: float = 1.0) -> tuple[list[ReplayFrame], MetricsReport]:
    """Run the perception pipeline over annotated head positions.

    frames: iterable of (frame_id, heads array (n, 2) in world meters).
    poses: mapping frame_id -> world-to-camera RigidTransform.
    No drone motion is simulated; per-frame metrics use the selected
    criterion's target track.
    """
    from .world import select_target  # local import avoids a module cycle

    slz_cfg = slz_cfg or SlzConfig()
    tracker_cfg = tracker_cfg or TrackerConfig()
    noise_cfg = noise_cfg or OracleNoiseConfig()
    manager = TrackManager(tracker_cfg)
    all_free = OccupancyGrid(np.full((cam.height, cam.width), 255, np.uint8))
    rows: list[ReplayFrame] = []

    for frame_id, heads in frames:
        if frame_id not in poses:
            raise KeyError(f"no camera pose for frame {frame_id}")
        w2c = poses[frame_id]
        heads = np.asarray(heads, dtype=float).reshape(-1, 2)
        t0 = time.perf_counter()
        pixels = []
        for hx, hy in heads:
            try:
                u, v, _ = project_plane_point((hx, hy, plane.h_h), w2c, cam)
            except BehindCamera:
                continue
            pixels.append((u, v))
        frame_noise = replace(noise_cfg,
                              seed=noise_cfg.seed * 1_000_003 + frame_id)
        dmap = render_oracle_density(pixels, frame_noise, cam.width, cam.height)
        occ = occupancy_from_density(dmap)
        grid = grid_footprint(cam, w2c, plane, cell_size, margin)
        sampled = sample_occupancy_to_plane(occ, grid, w2c, cam, plane)
        proposals = extract_slz(sampled, slz_cfg, frame_id)
        manager.step(proposals, frame_id)
        exec_time = time.perf_counter() - t0

        target = select_target(manager.tracks, criterion)
        warning = danger = None
        area = best = None
        circle = None
        if target is not None:
            circle = [float(target.mean[0]), float(target.mean[1]),
                      max(float(target.mean[2]), 1e-6)]
            warning, danger = risk_counts(circle, heads)
            area = float(np.pi * circle[2] ** 2)
            view = sample_occupancy_to_plane(all_free, grid, w2c, cam, plane)
            gt = ground_truth_slz(heads, view,
                                  SlzConfig(n_p=GROUND_TRUTH_COUNT,
                                            r0=slz_cfg.r0))
            if gt:
                best = best_iou(circle, gt)
        rows.append(ReplayFrame(frame_id, len(heads), len(proposals), circle,
                                warning, danger, area, best, exec_time))

    report = MetricsReport(n_missions=0, n_frames=len(rows))
    def _vals(attr):
        return [getattr(r, attr) for r in rows if getattr(r, attr) is not None]
    for attr, name in (("warning", "warning_avg"), ("danger", "danger_avg"),
                       ("slz_area", "slz_area_avg"), ("best_iou", "best_iou_avg")):
        vals = _vals(attr)
        if vals:
            setattr(report, name, float(np.mean(vals)))
    if _vals("warning"):
        report.warning_std = float(np.std(_vals("warning")))
        report.danger_std = float(np.std(_vals("danger")))
    times = [r.exec_time for r in rows]
    if times:
        report.exec_time_avg = float(np.mean(times))
        report.exec_time_max = float(max(times))
        report.exec_time_min = float(min(times))
    return rows, report
