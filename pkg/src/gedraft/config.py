"""Run configuration: key=value sections in a config file, flag overrides.

Format (INI-style sections, parsed with configparser)::

    [model]
    hidden = 64
    layers = 3
    readout = gca
    fusion = diffatt
    temperature = learnable
    seed = 0

    [train]
    epochs = 18
    batch_size = 128
    lr = 0.001
    validations = 20
    seed = 0

Unknown sections or keys are rejected; flags given on the command line
override file values. Every run emits its fully resolved configuration in
its report file.
"""

from __future__ import annotations

import configparser

MODEL_KEYS = {
    "hidden": int,
    "layers": int,
    "readout": str,
    "fusion": str,
    "temperature": str,
    "ntn_slices": int,
    "efn_reduction": int,
    "seed": int,
}
TRAIN_KEYS = {
    "epochs": int,
    "batch_size": int,
    "lr": float,
    "validations": int,
    "val_window": float,
    "seed": int,
}
SCHEMA = {"model": MODEL_KEYS, "train": TRAIN_KEYS}


class ConfigError(ValueError):
    pass


def parse_temperature(raw):
    if raw == "learnable":
        return raw
    try:
        t = float(raw)
    except ValueError:
        raise ConfigError(f"temperature must be 'learnable' or a number, got {raw!r}")
    if not t > 0:
        raise ConfigError(f"temperature must be positive, got {t}")
    return t


def load_config(path) -> dict:
    """Returns {"model": {...}, "train": {...}} with typed values."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    out: dict[str, dict] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        keys = SCHEMA[section]
        out[section] = {}
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            if section == "model" and key == "temperature":
                out[section][key] = parse_temperature(raw)
                continue
            try:
                out[section][key] = keys[key](raw)
            except ValueError:
                raise ConfigError(
                    f"bad value for {key!r} in [{section}]: {raw!r}"
                )
    return out
