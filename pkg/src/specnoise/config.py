"""Experiment configuration: YAML schema, validation and digests.

Configs are strict: unknown keys anywhere in the tree are errors, every
random choice is tied to an explicit seed, and the digest of the canonical
JSON form is stamped into every output row so any row can be reproduced in
isolation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError
from .structure import SubclassStructure

_TOP_KEYS = {"structure", "graph", "embedding", "noise", "probe", "suites", "output_dir"}
_STRUCTURE_KEYS = {"classes", "subclasses", "block_size", "sizes", "class_of"}
_GRAPH_KEYS = {"deltas", "xis", "base_weight", "seed"}
_EMBEDDING_KEYS = {"p", "rotation_seed"}
_NOISE_KEYS = {"model", "sigmas", "alphas", "flip_spec", "seeds"}
_FLIP_SPEC_KEYS = {"alphas", "flip_dist"}
_PROBE_KEYS = {"betas"}

KNOWN_SUITES = ("lemmas", "error-bounds", "eigenvalue-shift")


@dataclass(frozen=True)
class ExperimentConfig:
    structure: SubclassStructure
    deltas: tuple[float, ...]
    xis: tuple[float, ...]
    base_weight: float
    graph_seed: int
    p: int
    rotation_seed: Optional[int]
    noise_model: str                  # "gaussian" | "flip"
    noise_levels: tuple[float, ...]   # sigmas or alphas
    noise_seeds: tuple[int, ...]
    betas: tuple[float, ...]
    # full per-sub-class flip specification; replaces the symmetric sweep
    flip_alphas: Optional[tuple[float, ...]] = None
    flip_dist: Optional[tuple[tuple[float, ...], ...]] = None
    suites: tuple[str, ...] = field(default_factory=tuple)
    output_dir: Optional[str] = None

    def has_explicit_flip_spec(self) -> bool:
        return self.flip_alphas is not None

    def canonical_dict(self) -> dict:
        noise: dict = {
            "model": self.noise_model,
            "levels": list(self.noise_levels),
            "seeds": list(self.noise_seeds),
        }
        if self.flip_alphas is not None:
            noise["flip_spec"] = {
                "alphas": list(self.flip_alphas),
                "flip_dist": [list(row) for row in self.flip_dist],
            }
        return {
            "structure": {
                "sizes": list(self.structure.sizes),
                "class_of": list(self.structure.class_of),
            },
            "graph": {
                "deltas": list(self.deltas),
                "xis": list(self.xis),
                "base_weight": self.base_weight,
                "seed": self.graph_seed,
            },
            "embedding": {"p": self.p, "rotation_seed": self.rotation_seed},
            "noise": noise,
            "probe": {"betas": list(self.betas)},
            "suites": list(self.suites),
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _require_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _float_list(value, where: str) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{where} must be a nonempty list")
    return tuple(float(v) for v in value)


def _int_list(value, where: str) -> tuple[int, ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{where} must be a nonempty list")
    return tuple(int(v) for v in value)


def _build_structure(section: dict) -> SubclassStructure:
    _require_keys(section, _STRUCTURE_KEYS, "structure")
    try:
        if "sizes" in section:
            if "class_of" not in section:
                raise ConfigError("structure.sizes requires structure.class_of")
            return SubclassStructure(
                sizes=tuple(int(s) for s in section["sizes"]),
                class_of=tuple(int(c) for c in section["class_of"]),
            )
        return SubclassStructure.balanced(
            int(section["classes"]),
            int(section["subclasses"]),
            int(section["block_size"]),
        )
    except KeyError as exc:
        raise ConfigError(f"structure is missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid structure: {exc}") from exc


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    _require_keys(raw, _TOP_KEYS, "config root")
    for key in ("structure", "graph", "embedding", "noise", "probe"):
        if key not in raw:
            raise ConfigError(f"config is missing the {key!r} section")

    structure = _build_structure(raw["structure"])

    graph = raw["graph"]
    _require_keys(graph, _GRAPH_KEYS, "graph")
    if "seed" not in graph:
        raise ConfigError("graph.seed must be explicit")

    embedding = raw["embedding"]
    _require_keys(embedding, _EMBEDDING_KEYS, "embedding")

    noise = raw["noise"]
    _require_keys(noise, _NOISE_KEYS, "noise")
    model = noise.get("model")
    if model not in ("gaussian", "flip"):
        raise ConfigError(f"noise.model must be 'gaussian' or 'flip', got {model!r}")
    if "seeds" not in noise:
        raise ConfigError("noise.seeds must be explicit")

    flip_alphas = flip_dist = None
    if model == "gaussian":
        for key in ("alphas", "flip_spec"):
            if key in noise:
                raise ConfigError(f"noise.{key} is incompatible with model=gaussian")
        if "sigmas" not in noise:
            raise ConfigError("noise.sigmas is required for model=gaussian")
        levels = _float_list(noise["sigmas"], "noise.sigmas")
    else:
        if "sigmas" in noise:
            raise ConfigError("noise.sigmas is incompatible with model=flip")
        if ("alphas" in noise) == ("flip_spec" in noise):
            raise ConfigError(
                "model=flip needs exactly one of noise.alphas (symmetric sweep) "
                "or noise.flip_spec (explicit per-sub-class spec)"
            )
        if "alphas" in noise:
            levels = _float_list(noise["alphas"], "noise.alphas")
        else:
            fs = noise["flip_spec"]
            _require_keys(fs, _FLIP_SPEC_KEYS, "noise.flip_spec")
            flip_alphas = _float_list(fs.get("alphas"), "noise.flip_spec.alphas")
            if "flip_dist" not in fs:
                raise ConfigError("noise.flip_spec.flip_dist is required")
            flip_dist = tuple(
                _float_list(row, "noise.flip_spec.flip_dist row")
                for row in fs["flip_dist"]
            )
            if len(flip_alphas) != structure.num_subclasses or any(
                len(row) != structure.num_classes for row in flip_dist
            ) or len(flip_dist) != structure.num_subclasses:
                raise ConfigError(
                    "noise.flip_spec dimensions must match the structure"
                )
            # the grid level records the overall targeted corrupted fraction
            total = sum(a * s for a, s in zip(flip_alphas, structure.sizes))
            levels = (total / structure.total,)

    probe = raw["probe"]
    _require_keys(probe, _PROBE_KEYS, "probe")
    if "betas" not in probe:
        raise ConfigError("probe.betas is required")

    suites = tuple(raw.get("suites", ()))
    unknown_suites = set(suites) - set(KNOWN_SUITES)
    if unknown_suites:
        raise ConfigError(
            f"unknown suite(s) {sorted(unknown_suites)}; known: {list(KNOWN_SUITES)}"
        )

    p = int(embedding.get("p", structure.num_subclasses))
    if not (structure.num_subclasses <= p <= structure.total):
        raise ConfigError(
            f"embedding.p={p} must lie in "
            f"[{structure.num_subclasses}, {structure.total}]"
        )
    rotation_seed = embedding.get("rotation_seed")
    if rotation_seed is not None:
        rotation_seed = int(rotation_seed)

    return ExperimentConfig(
        structure=structure,
        deltas=_float_list(graph.get("deltas", [0.0]), "graph.deltas"),
        xis=_float_list(graph.get("xis", [0.0]), "graph.xis"),
        base_weight=float(graph.get("base_weight", 1.0)),
        graph_seed=int(graph["seed"]),
        p=p,
        rotation_seed=rotation_seed,
        noise_model=model,
        noise_levels=levels,
        noise_seeds=_int_list(noise["seeds"], "noise.seeds"),
        betas=_float_list(probe["betas"], "probe.betas"),
        flip_alphas=flip_alphas,
        flip_dist=flip_dist,
        suites=suites,
        output_dir=raw.get("output_dir"),
    )


def load_config(path) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from exc
    return config_from_dict(raw)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Schema-form dict that reloads to an identical config."""
    noise: dict = {"model": config.noise_model, "seeds": list(config.noise_seeds)}
    if config.noise_model == "gaussian":
        noise["sigmas"] = list(config.noise_levels)
    elif config.has_explicit_flip_spec():
        noise["flip_spec"] = {
            "alphas": list(config.flip_alphas),
            "flip_dist": [list(row) for row in config.flip_dist],
        }
    else:
        noise["alphas"] = list(config.noise_levels)
    out = {
        "structure": {
            "sizes": list(config.structure.sizes),
            "class_of": list(config.structure.class_of),
        },
        "graph": {
            "deltas": list(config.deltas),
            "xis": list(config.xis),
            "base_weight": config.base_weight,
            "seed": config.graph_seed,
        },
        "embedding": {"p": config.p, "rotation_seed": config.rotation_seed},
        "noise": noise,
        "probe": {"betas": list(config.betas)},
        "suites": list(config.suites),
    }
    if config.output_dir is not None:
        out["output_dir"] = config.output_dir
    return out


def dump_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(config), sort_keys=True))
