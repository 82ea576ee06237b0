"""INI run configuration with a fixed schema and line-numbered errors.

Natural-unit blocks ([grid], [slits], [packet], [evolution], [fringe],
[field], [loops], [winding], [interference], [sweep]) take bare numbers.
Physical quantities ([coupling]) carry a unit suffix in the key name.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("simulate", "currents", "winding", "predict", "visibility-sweep", "estimate-coupling", "verify")


class ConfigError(ValueError):
    """Invalid configuration; carries a line-level message."""


def _floats(text: str) -> list[float]:
    return [float(t) for t in re.split(r"[,\s]+", text.strip()) if t]


def _rows(text: str) -> list[list[float]]:
    return [_floats(r) for r in text.split(";") if r.strip()]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    v = float(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


# section -> key -> (parser, default); default None means required, ... means optional
SCHEMA: dict[str, dict[str, tuple]] = {
    "grid": {"nx": (_int, None), "ny": (_int, None), "lx": (float, None), "ly": (float, None)},
    "slits": {"barrier_x": (float, None), "thickness": (float, None), "width": (float, None),
              "separation": (float, None), "height": (float, ...), "height_factor": (float, ...),
              "mode": (str, "double"), "center_y": (float, 0.0)},
    "packet": {"x0": (float, None), "y0": (float, 0.0), "width": (float, None),
               "kx": (float, None), "ky": (float, 0.0)},
    "evolution": {"dt": (float, ...), "n_steps": (_int, ...), "mass": (float, 1.0),
                  "absorber_width": (_int, 0), "absorber_strength": (float, 0.0),
                  "screen_x": (float, None), "snapshot_every": (_int, 0)},
    "fringe": {"fit_halfwidth": (float, ...), "vis_halfwidth": (float, ...)},
    "field": {"source": (str, None), "path": (str, ...), "vortices": (_rows, ...), "envelope": (float, ...),
              "mx": (_int, 0), "my": (_int, 0), "x0": (float, 0.0), "y0": (float, 0.0),
              "width": (float, ...), "kx": (float, 0.0), "ky": (float, 0.0), "band": (_int, 4),
              "amplitude": (float, 1.0), "mass": (float, 1.0), "scheme": (str, "spectral")},
    "loops": {"circles": (_rows, ...), "rectangles": (_rows, ...)},
    "winding": {"eps0": (float, ...), "scheme": (str, "spectral")},
    "interference": {"wavelength": (float, None), "separation": (float, None),
                     "screen_distance": (float, None), "q_prime": (float, 1.0),
                     "half_angle": (_bool, True), "y_min": (float, ...), "y_max": (float, ...),
                     "n_samples": (_int, 501)},
    "sweep": {"qq_primes": (_floats, None), "k_min": (_int, 0), "k_max": (_int, None),
              "weights": (_floats, ...)},
    "coupling": {"E0_eV": (float, -13.6), "V_T_volt": (float, 20.0), "voltage_V": (float, 50e3)},
}

REQUIRED_BLOCKS = {
    "simulate": ("grid", "slits", "packet", "evolution"),
    "currents": ("grid", "field"),
    "winding": ("grid", "field", "loops"),
    "predict": ("interference",),
    "visibility-sweep": ("sweep",),
    "estimate-coupling": (),
    "verify": (),
}
OPTIONAL_BLOCKS = {
    "simulate": ("fringe",),
    "currents": (),
    "winding": ("winding",),
    "predict": (),
    "visibility-sweep": (),
    "estimate-coupling": ("coupling",),
    "verify": (),
}


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    """(section, key) -> line number; (section, None) for headers."""
    where: dict[tuple[str, str | None], int] = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            where[(section, None)] = n
        elif section is not None:
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            where[(section, key)] = n
    return where


@dataclass
class RunConfig:
    kind: str
    blocks: dict[str, dict] = field(default_factory=dict)
    source: str = "<defaults>"

    def block(self, name: str) -> dict:
        return self.blocks[name]

    def has(self, name: str) -> bool:
        return name in self.blocks

    def to_dict(self) -> dict:
        return {"kind": self.kind, "source": self.source, "blocks": self.blocks}


def parse_config(text: str, kind: str, source: str = "<string>") -> RunConfig:
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    where = _line_index(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    def loc(section, key=None):
        n = where.get((section, key))
        return f"{source}:{n}" if n else source

    allowed = REQUIRED_BLOCKS[kind] + OPTIONAL_BLOCKS[kind]
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"{loc(sec)}: unknown section [{sec}]")
    for sec in REQUIRED_BLOCKS[kind]:
        if not cp.has_section(sec):
            raise ConfigError(f"{source}: missing required block [{sec}] for '{kind}'")

    blocks: dict[str, dict] = {}
    for sec in cp.sections():
        if sec not in allowed:
            continue
        schema = SCHEMA[sec]
        out = {}
        for key, raw in cp.items(sec):
            if key not in schema:
                raise ConfigError(f"{loc(sec, key)}: unknown key '{key}' in [{sec}]")
            parser = schema[key][0]
            try:
                out[key] = parser(raw)
            except ValueError as exc:
                raise ConfigError(f"{loc(sec, key)}: bad value for '{key}': {exc}") from exc
        for key, (_, default) in schema.items():
            if key in out:
                continue
            if default is None:
                raise ConfigError(f"{loc(sec)}: missing required key '{key}' in [{sec}]")
            if default is not ...:
                out[key] = default
        blocks[sec] = out
    if "slits" in blocks and ("height" in blocks["slits"]) == ("height_factor" in blocks["slits"]):
        raise ConfigError(f"{loc('slits')}: give exactly one of 'height' or 'height_factor' in [slits]")
    return RunConfig(kind=kind, blocks=blocks, source=source)


def load_config(path, kind: str) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, kind, source=str(p))
