"""Study configuration: one YAML file drives the whole pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .datasets import DEFAULT_RANDOM_SIZES, ForgeConfig
from .kg import PairType
from .probe.train import TrainingConfig


class ConfigError(ValueError):
    pass


@dataclass
class SpaceEntry:
    name: str
    path: str | None = None
    kinds: tuple = ("word",)
    is_random: bool = False
    dim: int = 300  # only used for the synthesized random space


@dataclass
class StudyConfig:
    kg_path: str
    spaces: list
    out_dir: str
    master_seed: int = 0
    random_sizes: tuple = DEFAULT_RANDOM_SIZES
    min_total: int = 100
    groups: dict = field(default_factory=dict)        # relation -> group label
    pair_types: dict = field(default_factory=dict)    # relation -> [PairType]
    unary_relations: tuple = ()
    random_pair_type: PairType = PairType.WORD_WORD
    split_ratios: tuple = (0.90, 0.05, 0.05)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    kg_name: str = "kg"

    def __post_init__(self):
        sizes = tuple(self.random_sizes)
        if not sizes or list(sizes) != sorted(set(sizes)):
            raise ConfigError("random_sizes must be non-empty and strictly increasing")
        self.random_sizes = sizes
        randoms = [s for s in self.spaces if s.is_random]
        if len(randoms) > 1:
            raise ConfigError("at most one random-embedding space per study")
        if not randoms:
            # every study carries exactly one random baseline space
            self.spaces.append(SpaceEntry(
                name="rand", kinds=("concept", "instance", "word"), is_random=True,
            ))
        names = [s.name for s in self.spaces]
        if len(set(names)) != len(names):
            raise ConfigError("space names must be unique")

    @property
    def random_space(self) -> SpaceEntry:
        return next(s for s in self.spaces if s.is_random)

    @property
    def real_spaces(self) -> list:
        return [s for s in self.spaces if not s.is_random]

    def forge_config(self) -> ForgeConfig:
        return ForgeConfig(
            master_seed=self.master_seed,
            random_sizes=self.random_sizes,
            min_total=self.min_total,
            pair_types=self.pair_types,
            unary_relations=tuple(self.unary_relations),
            random_pair_type=self.random_pair_type,
            split_ratios=self.split_ratios,
        )


def load_config(path) -> StudyConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    try:
        spaces = [
            SpaceEntry(
                name=s["name"],
                path=s.get("path"),
                kinds=tuple(s.get("kinds", ("word",))),
                is_random=bool(s.get("is_random", False)),
                dim=int(s.get("dim", 300)),
            )
            for s in raw.get("spaces", [])
        ]
        for s in spaces:
            if not s.is_random and s.path is None:
                raise ConfigError(f"space {s.name!r} needs a path")
        pair_types = {
            rel: [PairType(p) for p in pts]
            for rel, pts in (raw.get("pair_types") or {}).items()
        }
        training = TrainingConfig(**(raw.get("training") or {}))
        cfg = StudyConfig(
            kg_path=raw["kg"],
            spaces=spaces,
            out_dir=raw.get("out", "study_out"),
            master_seed=int(raw.get("master_seed", 0)),
            random_sizes=tuple(raw.get("random_sizes", DEFAULT_RANDOM_SIZES)),
            min_total=int(raw.get("min_total", 100)),
            groups=raw.get("groups") or {},
            pair_types=pair_types,
            unary_relations=tuple(raw.get("unary_relations") or ()),
            random_pair_type=PairType(raw.get("random_pair_type", "word_word")),
            split_ratios=tuple(raw.get("split_ratios", (0.90, 0.05, 0.05))),
            training=training,
            kg_name=raw.get("kg_name", "kg"),
        )
    except KeyError as e:
        raise ConfigError(f"{path}: missing required key {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e
    # resolve relative paths against the config file location
    base = path.parent
    cfg.kg_path = str((base / cfg.kg_path))
    cfg.out_dir = str((base / cfg.out_dir))
    for s in cfg.spaces:
        if s.path is not None:
            s.path = str(base / s.path)
    return cfg
