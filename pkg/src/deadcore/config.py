"""Experiment configuration: flat [section] blocks of key = value lines.

Arrays are comma lists; point lists use semicolons between points
("0, 0; 0.5, 0").  Parsing is lossless up to whitespace: parse(render(cfg))
reproduces the same section/key/value mapping.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError

__all__ = ["ExperimentConfig"]


@dataclass
class ExperimentConfig:
    sections: dict = field(default_factory=dict)

    @staticmethod
    def parse(text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str  # preserve key case
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        sections = {
            name: {k: v.strip() for k, v in cp[name].items()} for name in cp.sections()
        }
        return ExperimentConfig(sections)

    @staticmethod
    def load(path) -> "ExperimentConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        return ExperimentConfig.parse(p.read_text())

    def render(self) -> str:
        out = io.StringIO()
        for name, block in self.sections.items():
            out.write(f"[{name}]\n")
            for k, v in block.items():
                out.write(f"{k} = {v}\n")
            out.write("\n")
        return out.getvalue()

    # -- typed accessors -----------------------------------------------------

    def has(self, section: str, key: Optional[str] = None) -> bool:
        if section not in self.sections:
            return False
        return key is None or key in self.sections[section]

    def get(self, section: str, key: str, default=None) -> str:
        try:
            return self.sections[section][key]
        except KeyError:
            if default is not None:
                return default
            raise ConfigError(f"missing config entry [{section}] {key}")

    def get_float(self, section: str, key: str, default=None) -> float:
        raw = self.get(section, key, None if default is None else str(default))
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from exc

    def get_int(self, section: str, key: str, default=None) -> int:
        raw = self.get(section, key, None if default is None else str(default))
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer") from exc

    def get_bool(self, section: str, key: str, default=None) -> bool:
        raw = self.get(section, key, None if default is None else str(default)).lower()
        if raw in ("true", "yes", "1", "on"):
            return True
        if raw in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a boolean")

    def get_floats(self, section: str, key: str, default=None) -> list:
        raw = self.get(section, key, default)
        if raw is None or raw.strip() == "":
            return []
        try:
            return [float(tok) for tok in raw.split(",") if tok.strip() != ""]
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number list") from exc

    def get_points(self, section: str, key: str, default=None) -> np.ndarray:
        raw = self.get(section, key, default)
        pts = []
        for chunk in raw.split(";"):
            if chunk.strip() == "":
                continue
            pts.append([float(tok) for tok in chunk.split(",")])
        return np.asarray(pts, dtype=float)
