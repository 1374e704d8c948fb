"""Problem configuration: a JSON document with every rational stored as a string."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .certify import Multicone, PolyhedralCone
from .errors import DimensionMismatch
from .linalg import RationalMatrix, format_rational, parse_rational

REDUCTION_MODES = ("necklace", "full")


class ConfigError(ValueError):
    """Malformed or incomplete configuration."""


@dataclass(frozen=True)
class MulticoneSpec:
    """A candidate multicone for the k-th exterior powers."""

    k: int
    multicone: Multicone


@dataclass(frozen=True)
class ProblemConfig:
    dimension: int
    matrices: tuple[RationalMatrix, ...]
    k: int | None = None
    n_min: int = 1
    n_max: int = 12
    precision_bits: int | None = None
    tolerance: str = "1e-40"
    reduction_mode: str = "necklace"
    sign_pattern: tuple[int, ...] | None = None
    mesh_size: int = 8192
    multicones: tuple[MulticoneSpec, ...] = ()
    gram: RationalMatrix | None = None
    positivity_depth: int = 4
    description: str = ""

    def with_overrides(self, **changes: Any) -> "ProblemConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes) if changes else self

    def multicone_for(self, k: int) -> Multicone | None:
        for spec in self.multicones:
            if spec.k == k:
                return spec.multicone
        return None


def _matrix(rows, d: int, what: str) -> RationalMatrix:
    if not isinstance(rows, list) or len(rows) != d or any(not isinstance(r, list) or len(r) != d for r in rows):
        raise DimensionMismatch(f"{what} must be a {d}x{d} array")
    return RationalMatrix.from_rows([[parse_rational(x) for x in r] for r in rows])


def _vector(values) -> tuple:
    return tuple(parse_rational(v) for v in values)


def _parse_multicone(raw: dict) -> MulticoneSpec:
    cones = tuple(PolyhedralCone.from_lists(c["generators"], c["facet_normals"]) for c in raw["cones"])
    separators = {
        (int(s["pair"][0]), int(s["pair"][1])): _vector(s["vector"]) for s in raw.get("separators", [])
    }
    return MulticoneSpec(int(raw["k"]), Multicone(cones, _vector(raw["transverse"]), separators))


def config_from_dict(raw: dict) -> ProblemConfig:
    try:
        d = int(raw["dimension"])
        mats = raw.get("matrices")
        if mats is None:
            raise ConfigError(
                "this configuration has no matrices; fill in the 'matrices' field before running"
            )
        if not mats:
            raise ConfigError("'matrices' is empty")
        matrices = tuple(_matrix(m, d, f"matrix {i + 1}") for i, m in enumerate(mats))
        mode = raw.get("reduction_mode", "necklace")
        if mode not in REDUCTION_MODES:
            raise ConfigError(f"reduction_mode must be one of {REDUCTION_MODES}")
        pattern = raw.get("sign_pattern")
        if pattern is not None:
            pattern = tuple(int(e) for e in pattern)
            if len(pattern) != len(matrices) or any(e not in (1, -1) for e in pattern):
                raise ConfigError("sign_pattern needs one +1/-1 per matrix")
        gram = raw.get("gram")
        cfg = ProblemConfig(
            dimension=d,
            matrices=matrices,
            k=None if raw.get("k") is None else int(raw["k"]),
            n_min=int(raw.get("n_min", 1)),
            n_max=int(raw.get("n_max", 12)),
            precision_bits=None if raw.get("precision_bits") is None else int(raw["precision_bits"]),
            tolerance=str(raw.get("tolerance", "1e-40")),
            reduction_mode=mode,
            sign_pattern=pattern,
            mesh_size=int(raw.get("mesh_size", 8192)),
            multicones=tuple(_parse_multicone(m) for m in raw.get("multicones", [])),
            gram=None if gram is None else _matrix(gram, d, "gram"),
            positivity_depth=int(raw.get("positivity_depth", 4)),
            description=str(raw.get("description", "")),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed configuration: {exc!r}") from None
    if cfg.n_min < 1 or cfg.n_max < cfg.n_min:
        raise ConfigError("need 1 <= n_min <= n_max")
    if cfg.mesh_size < 1:
        raise ConfigError("mesh_size must be positive")
    return cfg


def _vec_strings(v) -> list[str]:
    return [format_rational(x) for x in v]


def config_to_dict(cfg: ProblemConfig) -> dict:
    return {
        "description": cfg.description,
        "dimension": cfg.dimension,
        "matrices": [m.to_strings() for m in cfg.matrices],
        "k": cfg.k,
        "n_min": cfg.n_min,
        "n_max": cfg.n_max,
        "precision_bits": cfg.precision_bits,
        "tolerance": cfg.tolerance,
        "reduction_mode": cfg.reduction_mode,
        "sign_pattern": None if cfg.sign_pattern is None else list(cfg.sign_pattern),
        "mesh_size": cfg.mesh_size,
        "multicones": [
            {
                "k": spec.k,
                "cones": [
                    {
                        "generators": [_vec_strings(g) for g in c.generators],
                        "facet_normals": [_vec_strings(f) for f in c.facet_normals],
                    }
                    for c in spec.multicone.cones
                ],
                "transverse": _vec_strings(spec.multicone.transverse),
                "separators": [
                    {"pair": list(pair), "vector": _vec_strings(v)}
                    for pair, v in sorted(spec.multicone.separators.items())
                ],
            }
            for spec in cfg.multicones
        ],
        "gram": None if cfg.gram is None else cfg.gram.to_strings(),
        "positivity_depth": cfg.positivity_depth,
    }


def parse_config(text: str) -> ProblemConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    return config_from_dict(raw)


def render_config(cfg: ProblemConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def load_config(path: str | Path) -> ProblemConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
