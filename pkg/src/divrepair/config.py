"""Run configuration: search parameters plus experiment plumbing.

Stored as an INI-style key/value file with a single ``[divrepair]`` section.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .search.repair import SearchConfig
from .testgen import DEFAULT_BUDGET

SECTION = "divrepair"


@dataclass(frozen=True)
class RunConfig:
    pop_size: int = 40
    max_generations: int = 10
    tournament_k: int = 2
    w_pos: float = 1.0
    w_neg: float = 10.0
    diversity_weight: float = 0.5
    mutation_rate: float = 1.0
    seed: int = 0
    fuel: int = 100_000
    min_support: int = 3
    technique: str = "divgp"
    bug: str = ""
    out: str = ""
    testgen_budget: int = DEFAULT_BUDGET

    def search_config(self, seed: int | None = None) -> SearchConfig:
        names = {f.name for f in fields(SearchConfig)}
        kwargs = {k: v for k, v in asdict(self).items() if k in names}
        if seed is not None:
            kwargs["seed"] = seed
        return SearchConfig(**kwargs)

    def dumps(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser[SECTION] = {k: repr(v) if isinstance(v, float) else str(v) for k, v in asdict(self).items()}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.read_string(text)
        if not parser.has_section(SECTION):
            raise ValueError(f"config has no [{SECTION}] section")
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in parser[SECTION].items():
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            typ = types[key]
            try:
                kwargs[key] = int(raw) if typ == "int" else float(raw) if typ == "float" else raw
            except ValueError:
                raise ValueError(f"bad value for {key!r}: {raw!r}") from None
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.loads(Path(path).read_text())
