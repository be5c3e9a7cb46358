"""Run configuration: one TOML file, strictly validated, CLI-overridable.

Unknown keys are rejected so a typo cannot silently fall back to a
default. The resolved configuration is echoed into ``run.json`` by the
CLI for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .deadreck import NoiseConfig
from .fusion import FusionConfig, PipelineConfig
from .orientation import MdrConfig
from .sensors import Position2D, ValidationError, Vec3
from .stride import StrideConfig

_SECTIONS = {
    "stride": {"window_n", "t_peak", "t_time", "k"},
    "orientation": {"beta", "t_m", "t_i", "window_nm", "g_e", "deviation_mode", "m_ref", "i_ref"},
    "drift": {"sigma_a", "sigma_gy", "sigma_m", "sigma_l_rel"},
    "fusion": {"q", "r", "p0", "smooth_a"},
    "pipeline": {
        "gamma",
        "bin_radius",
        "ges",
        "mdr",
        "first_pass",
        "literal_sum",
        "smooth_feedback",
        "start",
    },
}


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved pipeline configuration plus its echoable source."""

    pipeline: PipelineConfig
    source: dict[str, Any]


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ValidationError(f"unknown config keys in [{where}]: {sorted(unknown)}")


def _build_pipeline(data: dict[str, Any]) -> PipelineConfig:
    _check_keys(data, set(_SECTIONS), "top level")
    for section, keys in _SECTIONS.items():
        _check_keys(data.get(section, {}), keys, section)

    s = data.get("stride", {})
    stride_cfg = StrideConfig(
        window_n=int(s.get("window_n", 15)),
        t_peak=float(s.get("t_peak", 10.8)),
        t_time=float(s.get("t_time", 0.3)),
        k=float(s.get("k", 0.5)),
    )

    o = data.get("orientation", {})
    mdr_kw: dict[str, Any] = dict(
        beta=float(o.get("beta", 0.1)),
        t_m=float(o.get("t_m", 70.0)),
        t_i=float(o.get("t_i", 1.4)),
        window_nm=int(o.get("window_nm", 25)),
        deviation_mode=bool(o.get("deviation_mode", False)),
    )
    if "g_e" in o:
        mdr_kw["g_e"] = Vec3(*[float(v) for v in o["g_e"]])
    if "m_ref" in o:
        mdr_kw["m_ref"] = float(o["m_ref"])
    if "i_ref" in o:
        mdr_kw["i_ref"] = float(o["i_ref"])
    mdr_cfg = MdrConfig(**mdr_kw)

    d = data.get("drift", {})
    noise_cfg = NoiseConfig(
        sigma_a=float(d.get("sigma_a", 0.03)),
        sigma_gy=float(d.get("sigma_gy", 0.02)),
        sigma_m=float(d.get("sigma_m", 0.03)),
        sigma_l_rel=float(d.get("sigma_l_rel", 0.15)),
    )

    f = data.get("fusion", {})
    fusion_cfg = FusionConfig(
        q=f.get("q"),
        r=f.get("r"),
        p0=f.get("p0", [[1.0, 0.0], [0.0, 1.0]]),
        smooth_a=float(f.get("smooth_a", 0.7)),
    )

    p = data.get("pipeline", {})
    start = p.get("start", (0.0, 0.0))
    return PipelineConfig(
        stride=stride_cfg,
        mdr=mdr_cfg,
        drift_noise=noise_cfg,
        fusion=fusion_cfg,
        gamma=float(p["gamma"]) if "gamma" in p else None,
        bin_radius=float(p["bin_radius"]) if "bin_radius" in p else None,
        ges_enabled=bool(p.get("ges", True)),
        mdr_enabled=bool(p.get("mdr", True)),
        first_pass=bool(p.get("first_pass", False)),
        literal_sum=bool(p.get("literal_sum", False)),
        smooth_feedback=bool(p.get("smooth_feedback", True)),
        start=Position2D(float(start[0]), float(start[1])),
    )


def load_run_config(path: Optional[str | Path] = None, **overrides: Any) -> RunConfig:
    """Load (or default) the run configuration, applying CLI overrides.

    Recognized overrides: ``ges``, ``mdr``, ``first_pass``, ``literal_sum``
    (booleans, applied to the [pipeline] section).
    """
    data: dict[str, Any] = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"{path}: invalid TOML: {exc}") from exc
    pipeline_table = dict(data.get("pipeline", {}))
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _SECTIONS["pipeline"]:
            raise ValidationError(f"unknown override {key!r}")
        pipeline_table[key] = value
    if pipeline_table:
        data = {**data, "pipeline": pipeline_table}
    pipeline = _build_pipeline(data)
    return RunConfig(pipeline=pipeline, source=data)


def resolved_dict(cfg: PipelineConfig) -> dict[str, Any]:
    """The fully resolved configuration as a JSON-serializable dict."""
    return {
        "stride": {
            "window_n": cfg.stride.window_n,
            "t_peak": cfg.stride.t_peak,
            "t_time": cfg.stride.t_time,
            "k": cfg.stride.k,
        },
        "orientation": {
            "beta": cfg.mdr.beta,
            "t_m": cfg.mdr.t_m,
            "t_i": cfg.mdr.t_i,
            "window_nm": cfg.mdr.window_nm,
            "g_e": list(cfg.mdr.g_e),
            "deviation_mode": cfg.mdr.deviation_mode,
            "m_ref": cfg.mdr.m_ref,
            "i_ref": cfg.mdr.i_ref,
        },
        "drift": {
            "sigma_a": cfg.drift_noise.sigma_a,
            "sigma_gy": cfg.drift_noise.sigma_gy,
            "sigma_m": cfg.drift_noise.sigma_m,
            "sigma_l_rel": cfg.drift_noise.sigma_l_rel,
        },
        "fusion": {
            "q": None if cfg.fusion.q is None else cfg.fusion.q.tolist(),
            "r": None if cfg.fusion.r is None else cfg.fusion.r.tolist(),
            "p0": cfg.fusion.p0.tolist(),
            "smooth_a": cfg.fusion.smooth_a,
        },
        "pipeline": {
            "gamma": cfg.gamma,
            "bin_radius": cfg.bin_radius,
            "ges": cfg.ges_enabled,
            "mdr": cfg.mdr_enabled,
            "first_pass": cfg.first_pass,
            "literal_sum": cfg.literal_sum,
            "smooth_feedback": cfg.smooth_feedback,
            "start": list(cfg.start),
        },
    }
