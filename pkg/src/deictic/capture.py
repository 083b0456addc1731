"""Gaze and pointing input reduced to frame pixel coordinates.

Inputs arrive either already in pixel space (the default for fixtures and
the playground) or as 3D points that get pushed through an ideal pinhole
camera. Gaze rides a sphere fixed 2 m along the gaze direction; pointing is
a ray from the hand with an explicit hit point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BehindCamera
from .scene import FrameMeta

# Gaze marker distance along the gaze direction, in meters.
GAZE_SPHERE_DEPTH_M = 2.0

_UNIT_TOL = 1e-6


@dataclass(frozen=True)
class CameraModel:
    """Ideal pinhole camera with a rigid world-to-camera pose.

    ``rotation`` and ``translation`` map world points into the camera frame:
    ``x_cam = R @ x_world + t``. No lens distortion is modeled; fixtures carry
    explicit intrinsics so golden values stay portable.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: tuple[tuple[float, float, float], ...] = (
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0),
    )
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal length must be positive")

    @classmethod
    def ideal(cls, focal_px: float, frame: FrameMeta) -> "CameraModel":
        """Camera at the world origin looking down +Z, principal point centered."""
        return cls(fx=focal_px, fy=focal_px, cx=frame.width / 2.0, cy=frame.height / 2.0)

    def world_to_camera(self, point: Sequence[float]) -> np.ndarray:
        return np.asarray(self.rotation, dtype=float) @ np.asarray(point, dtype=float) + np.asarray(
            self.translation, dtype=float
        )

    def camera_to_world(self, point: Sequence[float]) -> np.ndarray:
        rot = np.asarray(self.rotation, dtype=float)
        return rot.T @ (np.asarray(point, dtype=float) - np.asarray(self.translation, dtype=float))


def _clamp_px(u: float, v: float, frame: FrameMeta) -> tuple[float, float]:
    return (min(max(u, 0.0), frame.width - 1.0), min(max(v, 0.0), frame.height - 1.0))


def project(point3d: Sequence[float], cam: CameraModel, frame: FrameMeta) -> tuple[float, float]:
    """Project a world-frame 3D point (meters) to clamped pixel coordinates.

    Raises:
        BehindCamera: if the point has non-positive depth in camera frame.
    """
    x, y, z = cam.world_to_camera(point3d)
    if z <= 0:
        raise BehindCamera(f"point depth {z:.6g} m is not in front of the camera")
    u = cam.fx * x / z + cam.cx
    v = cam.fy * y / z + cam.cy
    return _clamp_px(u, v, frame)


def backproject(pixel: tuple[float, float], depth: float, cam: CameraModel) -> tuple[float, float, float]:
    """Lift a pixel back to the world-frame point at the given camera depth."""
    if depth <= 0:
        raise BehindCamera(f"depth must be positive, got {depth}")
    x = (pixel[0] - cam.cx) * depth / cam.fx
    y = (pixel[1] - cam.cy) * depth / cam.fy
    world = cam.camera_to_world((x, y, depth))
    return (float(world[0]), float(world[1]), float(world[2]))


@dataclass(frozen=True)
class GazeSample:
    """Gaze at query time: a pixel coordinate or a 3D world point.

    Build 3D samples with :meth:`from_ray` so the point sits at the fixed
    2 m marker depth along the gaze direction.
    """

    pixel: Optional[tuple[float, float]] = None
    world_point: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        if (self.pixel is None) == (self.world_point is None):
            raise ValueError("exactly one of pixel or world_point must be set")

    @classmethod
    def at_pixel(cls, u: float, v: float) -> "GazeSample":
        return cls(pixel=(u, v))

    @classmethod
    def from_ray(
        cls,
        origin: Sequence[float],
        direction: Sequence[float],
        depth_m: float = GAZE_SPHERE_DEPTH_M,
    ) -> "GazeSample":
        d = np.asarray(direction, dtype=float)
        norm = float(np.linalg.norm(d))
        if norm == 0:
            raise ValueError("gaze direction must be non-zero")
        point = np.asarray(origin, dtype=float) + d / norm * depth_m
        return cls(world_point=(float(point[0]), float(point[1]), float(point[2])))


@dataclass(frozen=True)
class PointingSample:
    """Pointing gesture: a pixel coordinate, or a hand ray with its hit point."""

    pixel: Optional[tuple[float, float]] = None
    origin: Optional[tuple[float, float, float]] = None
    direction: Optional[tuple[float, float, float]] = None
    hit_point: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        ray_fields = (self.origin, self.direction, self.hit_point)
        if self.pixel is not None:
            if any(f is not None for f in ray_fields):
                raise ValueError("pixel mode excludes ray fields")
            return
        if any(f is None for f in ray_fields):
            raise ValueError("ray mode needs origin, direction, and hit_point")
        d = np.asarray(self.direction, dtype=float)
        if abs(float(np.linalg.norm(d)) - 1.0) > _UNIT_TOL:
            raise ValueError("direction must be a unit vector")
        offset = np.asarray(self.hit_point, dtype=float) - np.asarray(self.origin, dtype=float)
        t = float(offset @ d)
        if t < 0 or float(np.linalg.norm(offset - t * d)) > 1e-5:
            raise ValueError("hit_point must lie on the ray")


@dataclass(frozen=True)
class InputSnapshot:
    """Gaze and optional pointing coordinates captured once per query."""

    gaze_px: tuple[float, float]
    point_px: Optional[tuple[float, float]] = None
    captured_at: float = 0.0

    def to_dict(self) -> dict:
        return {
            "gaze_px": list(self.gaze_px),
            "point_px": list(self.point_px) if self.point_px is not None else None,
        }


def snapshot(
    gaze: GazeSample,
    pointing: Optional[PointingSample],
    cam: CameraModel,
    frame: FrameMeta,
    *,
    captured_at: Optional[float] = None,
) -> InputSnapshot:
    """Reduce both input channels to clamped pixel coordinates.

    Pixel-mode inputs pass through (the desk-scale default); 3D inputs are
    projected. BehindCamera propagates from projection.
    """
    if gaze.pixel is not None:
        gaze_px = _clamp_px(*gaze.pixel, frame=frame)
    else:
        gaze_px = project(gaze.world_point, cam, frame)

    point_px = None
    if pointing is not None:
        if pointing.pixel is not None:
            point_px = _clamp_px(*pointing.pixel, frame=frame)
        else:
            point_px = project(pointing.hit_point, cam, frame)

    if captured_at is None:
        captured_at = time.time()
    return InputSnapshot(gaze_px=gaze_px, point_px=point_px, captured_at=captured_at)
