from __future__ import annotations

import json
import os.path
import warnings
from contextlib import AbstractContextManager
from importlib import resources
from pathlib import Path
from typing import Any, Dict

import numpy as np

# noinspection SpellCheckingInspection
__PKG_NAME = "pyselfonn"
__RES_PATH = "resources"
__CONFIG_PATH = "configs"
__MACHINE_PATH = "machines"


def get_resource_directory(
    get_dir_string: bool = False,
) -> AbstractContextManager[Path] | str:
    if not get_dir_string:
        return resources.path(__PKG_NAME, __RES_PATH)
    with resources.path(__PKG_NAME, __RES_PATH) as path:
        return str(path)


def get_resource_file(path: str) -> str | None:
    with get_resource_directory(False) as res_dir:
        file = os.path.join(res_dir, path)
        if not os.path.isfile(file):
            return None
        return os.path.normpath(file)


def read_resource_text_file(
    path: str, encoding: str = "utf-8", errors: str = "strict"
) -> str | None:
    with get_resource_directory(False) as res_dir:
        file = os.path.join(res_dir, path)
        if not os.path.isfile(file):
            return None
        with open(file, "r", encoding=encoding, errors=errors) as f:
            return f.read()


def read_resource_json(path: str) -> Dict[str, Any] | None:
    text = read_resource_text_file(path)
    if text is None:
        warnings.warn(f"Resource file not found: {path}")
        return None
    data = json.loads(text)
    if not isinstance(data, dict):
        warnings.warn(f"Resource file is not a JSON object: {path}")
        return None
    return data


def get_config_file(name: str) -> str | None:
    return get_resource_file(os.path.join(__CONFIG_PATH, f"{name}.json"))


def load_builtin_config(name: str) -> Dict[str, Any] | None:
    return read_resource_json(os.path.join(__CONFIG_PATH, f"{name}.json"))


def load_builtin_machine(name: str) -> Dict[str, Any] | None:
    return read_resource_json(os.path.join(__MACHINE_PATH, f"{name}.json"))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent, reproducible stream for ``seed`` and a tuple of stream ids."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))
