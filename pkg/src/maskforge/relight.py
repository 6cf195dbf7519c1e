"""Lighting augmentation: Phong re-shading of composed scenes from depth.

The composed RGB is treated as albedo and the composed depth as a 2.5D
surface; normals come from unprojected depth and each pixel is re-shaded
under a randomized spotlight plus ambient term. Annotations are untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .augment import ComposedScene
from .errors import DimensionMismatch, MissingDepth

_REFERENCE = (1920, 1080.0)  # (width, focal length in px) the default is stated at


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole model: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    @classmethod
    def default_for(cls, width: int, height: int) -> "CameraIntrinsics":
        f = _REFERENCE[1] * width / _REFERENCE[0]
        return cls(fx=f, fy=f, cx=width / 2.0, cy=height / 2.0)

    def to_json(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy}

    @classmethod
    def from_json(cls, data: dict) -> "CameraIntrinsics":
        return cls(float(data["fx"]), float(data["fy"]), float(data["cx"]), float(data["cy"]))


@dataclass(frozen=True)
class PhongMaterial:
    ka: float
    kd: float
    ks: float
    shininess: float

    def __post_init__(self) -> None:
        for name in ("ka", "kd", "ks"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
        if not (math.isfinite(self.shininess) and self.shininess >= 1):
            raise ValueError(f"shininess must be >= 1, got {self.shininess}")


@dataclass(frozen=True)
class SpotLight:
    position: tuple[float, float, float]  # meters, camera frame (+z forward)
    direction: tuple[float, float, float]  # unit vector
    inner_angle: float  # degrees
    outer_angle: float
    intensity: float

    def __post_init__(self) -> None:
        norm = math.sqrt(sum(d * d for d in self.direction))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"direction must be unit length, |d| = {norm}")
        if not 0 < self.inner_angle <= self.outer_angle <= 90:
            raise ValueError(
                f"need 0 < inner <= outer <= 90, got {self.inner_angle}, {self.outer_angle}"
            )
        if self.intensity < 0:
            raise ValueError("intensity must be non-negative")


@dataclass(frozen=True)
class LightingSpec:
    spot: SpotLight
    ambient_intensity: float
    material: PhongMaterial
    seed: int | None = None

    def to_json(self) -> dict:
        return {
            "spot": {
                "position": list(self.spot.position),
                "direction": list(self.spot.direction),
                "inner_angle": self.spot.inner_angle,
                "outer_angle": self.spot.outer_angle,
                "intensity": self.spot.intensity,
            },
            "ambient_intensity": self.ambient_intensity,
            "material": {
                "ka": self.material.ka,
                "kd": self.material.kd,
                "ks": self.material.ks,
                "shininess": self.material.shininess,
            },
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LightingSpec":
        s = data["spot"]
        m = data["material"]
        return cls(
            spot=SpotLight(
                position=tuple(float(v) for v in s["position"]),
                direction=tuple(float(v) for v in s["direction"]),
                inner_angle=float(s["inner_angle"]),
                outer_angle=float(s["outer_angle"]),
                intensity=float(s["intensity"]),
            ),
            ambient_intensity=float(data["ambient_intensity"]),
            material=PhongMaterial(
                ka=float(m["ka"]), kd=float(m["kd"]), ks=float(m["ks"]),
                shininess=float(m["shininess"]),
            ),
            seed=data.get("seed"),
        )


@dataclass
class LightingRanges:
    """Uniform sampling ranges for :func:`sample_lighting`.

    The spotlight position box and the target box it aims at live in the
    camera frame (meters, +z into the scene); the target sits on the
    background plane at ``target_z``.
    """

    position_x: tuple[float, float] = (-0.5, 0.5)
    position_y: tuple[float, float] = (-0.5, 0.5)
    position_z: tuple[float, float] = (0.1, 0.6)
    target_x: tuple[float, float] = (-0.3, 0.3)
    target_y: tuple[float, float] = (-0.3, 0.3)
    target_z: float = 1.0
    ambient: tuple[float, float] = (0.2, 0.8)
    intensity: tuple[float, float] = (0.4, 1.2)
    ka: tuple[float, float] = (0.6, 1.0)
    kd: tuple[float, float] = (0.4, 0.9)
    ks: tuple[float, float] = (0.0, 0.3)
    shininess: tuple[float, float] = (5.0, 50.0)
    inner_angle: tuple[float, float] = (10.0, 30.0)
    outer_margin: tuple[float, float] = (5.0, 25.0)

    def __post_init__(self) -> None:
        for name in (
            "position_x", "position_y", "position_z", "target_x", "target_y",
            "ambient", "intensity", "ka", "kd", "ks", "shininess",
            "inner_angle", "outer_margin",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"range {name} is not ordered: ({lo}, {hi})")


# ---------------------------------------------------------------------------
# geometry


def depth_to_points(depth_mm: np.ndarray, k: CameraIntrinsics) -> np.ndarray:
    """Unproject a millimeter depth image to (H, W, 3) camera-frame points in
    meters; pixels with no depth return become NaN."""
    d = np.asarray(depth_mm, dtype=np.float64)
    h, w = d.shape
    z = d / 1000.0
    u = np.arange(w, dtype=np.float64)[None, :]
    v = np.arange(h, dtype=np.float64)[:, None]
    x = (u - k.cx) * z / k.fx
    y = (v - k.cy) * z / k.fy
    points = np.stack([np.broadcast_to(x, z.shape), np.broadcast_to(y, z.shape), z], axis=2)
    points[d <= 0] = np.nan
    return points


def _difference(points: np.ndarray, valid: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel derivative along ``axis``: central in the interior, one-sided
    at the two image borders. The derivative is defined only where every
    operand of the scheme is valid, so a pixel next to an invalid return gets
    no derivative (and hence no normal)."""
    prev_p = np.roll(points, 1, axis=axis)
    next_p = np.roll(points, -1, axis=axis)
    prev_v = np.roll(valid, 1, axis=axis)
    next_v = np.roll(valid, -1, axis=axis)

    interior = np.zeros(valid.shape, dtype=bool)
    first = np.zeros(valid.shape, dtype=bool)
    last = np.zeros(valid.shape, dtype=bool)
    if axis == 0:
        interior[1:-1, :] = True
        first[0, :] = True
        last[-1, :] = True
    else:
        interior[:, 1:-1] = True
        first[:, 0] = True
        last[:, -1] = True

    deriv = np.full_like(points, np.nan)
    central = interior & prev_v & next_v
    deriv[central] = (next_p[central] - prev_p[central]) / 2.0
    forward = first & valid & next_v
    deriv[forward] = next_p[forward] - points[forward]
    backward = last & valid & prev_v
    deriv[backward] = points[backward] - prev_p[backward]
    return deriv, central | forward | backward


def normals_from_depth(points: np.ndarray) -> np.ndarray:
    """Unit normals from unprojected points, oriented toward the camera
    (n_z < 0); NaN where a needed neighbor is invalid."""
    valid = np.isfinite(points).all(axis=2)
    du, du_ok = _difference(points, valid, axis=1)
    dv, dv_ok = _difference(points, valid, axis=0)

    n = np.cross(du, dv)
    norm = np.linalg.norm(n, axis=2)
    ok = valid & du_ok & dv_ok & np.isfinite(norm) & (norm > 0)
    normals = np.full_like(points, np.nan)
    normals[ok] = n[ok] / norm[ok, None]
    flip = ok & (normals[:, :, 2] > 0)
    normals[flip] *= -1.0
    return normals


# ---------------------------------------------------------------------------
# shading


def phong_shade(
    albedo: np.ndarray,
    normals: np.ndarray,
    points: np.ndarray,
    spec: LightingSpec,
    *,
    view_dir: tuple[float, float, float] | None = None,
    distance_falloff: bool = False,
) -> np.ndarray:
    """Shade an albedo image under a spotlight plus ambient Phong model.

    Per valid pixel with albedo rho in 0..1:
    ``out = clamp01(ka*ambient*rho + cone * I * (kd*max(N.L,0)*rho
    + ks*max(R.V,0)^shininess))``, where the cone factor falls off linearly in
    the cosine between the inner and outer angles. Pixels without a valid
    normal receive the ambient term only. ``view_dir`` overrides the per-pixel
    view vector (e.g. for an orthographic assumption); ``distance_falloff``
    adds 1/d^2 attenuation of the spotlight.
    """
    albedo = np.asarray(albedo)
    if albedo.shape[:2] != normals.shape[:2] or albedo.shape[:2] != points.shape[:2]:
        raise DimensionMismatch(
            f"albedo {albedo.shape}, normals {normals.shape}, points {points.shape}"
        )
    rho = albedo.astype(np.float64) / 255.0
    if rho.ndim == 2:
        rho = rho[..., None]

    mat = spec.material
    ambient_term = mat.ka * spec.ambient_intensity * rho
    out = ambient_term.copy()

    valid = np.isfinite(normals).all(axis=2) & np.isfinite(points).all(axis=2)
    if valid.any():
        n = normals[valid]
        pts = points[valid]
        light_pos = np.asarray(spec.spot.position, dtype=np.float64)
        to_light = light_pos[None, :] - pts
        dist = np.linalg.norm(to_light, axis=1)
        dist = np.maximum(dist, 1e-12)
        L = to_light / dist[:, None]

        spot_dir = np.asarray(spec.spot.direction, dtype=np.float64)
        cos_spot = (-L) @ spot_dir
        cos_inner = math.cos(math.radians(spec.spot.inner_angle))
        cos_outer = math.cos(math.radians(spec.spot.outer_angle))
        if cos_inner - cos_outer > 1e-12:
            cone = np.clip((cos_spot - cos_outer) / (cos_inner - cos_outer), 0.0, 1.0)
        else:
            cone = (cos_spot >= cos_inner).astype(np.float64)

        intensity = spec.spot.intensity
        falloff = 1.0 / (dist**2) if distance_falloff else 1.0

        ndotl = np.maximum((n * L).sum(axis=1), 0.0)
        diffuse = mat.kd * ndotl

        if view_dir is not None:
            V = np.broadcast_to(np.asarray(view_dir, dtype=np.float64), pts.shape)
        else:
            V = -pts / np.maximum(np.linalg.norm(pts, axis=1), 1e-12)[:, None]
        d_in = -L
        R = d_in - 2.0 * (d_in * n).sum(axis=1)[:, None] * n
        rdotv = np.maximum((R * V).sum(axis=1), 0.0)
        specular = mat.ks * np.power(rdotv, mat.shininess)

        spot_term = (cone * intensity * falloff)[:, None] * (
            diffuse[:, None] * rho[valid] + specular[:, None]
        )
        out[valid] = ambient_term[valid] + spot_term

    shaded = np.floor(np.clip(out, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    return shaded[:, :, 0] if albedo.ndim == 2 else shaded


def sample_lighting(seed: int, ranges: LightingRanges | None = None) -> LightingSpec:
    """Uniformly sample a lighting specification; deterministic in ``seed``."""
    r = ranges or LightingRanges()
    rng = np.random.default_rng(seed)

    def draw(bounds: tuple[float, float]) -> float:
        lo, hi = bounds
        return float(lo) if lo == hi else float(rng.uniform(lo, hi))

    pos = (draw(r.position_x), draw(r.position_y), draw(r.position_z))
    target = np.array([draw(r.target_x), draw(r.target_y), r.target_z])
    direction = target - np.asarray(pos)
    norm = float(np.linalg.norm(direction))
    if norm < 1e-9:
        direction = np.array([0.0, 0.0, 1.0])
    else:
        direction = direction / norm
    inner = draw(r.inner_angle)
    outer = min(90.0, inner + draw(r.outer_margin))
    return LightingSpec(
        spot=SpotLight(
            position=pos,
            direction=tuple(float(v) for v in direction),
            inner_angle=inner,
            outer_angle=outer,
            intensity=draw(r.intensity),
        ),
        ambient_intensity=draw(r.ambient),
        material=PhongMaterial(
            ka=draw(r.ka), kd=draw(r.kd), ks=draw(r.ks), shininess=draw(r.shininess)
        ),
        seed=int(seed),
    )


def relight_scene(
    scene: ComposedScene, k: CameraIntrinsics, spec: LightingSpec
) -> ComposedScene:
    """Re-shade a composed scene; annotations and placements are preserved."""
    if scene.depth is None:
        raise MissingDepth("relighting needs the composed depth channel")
    points = depth_to_points(scene.depth, k)
    normals = normals_from_depth(points)
    shaded = phong_shade(scene.image, normals, points, spec)
    return replace(scene, image=shaded, lighting=spec.to_json())
