"""Text file formats for channels, configurations, and results.

Everything is JSON with sorted keys: floats round-trip bit-exactly
through Python's shortest-repr serialization, and identical inputs
produce byte-identical files. Channel matrices are stored row-major with
an explicit mode count and quadrature ordering tag.
"""

import json
from pathlib import Path

import numpy as np

from . import channels as channel_lib
from .characterization import CharacterizationResult, ProtocolOptions
from .core import GaussianChannel
from .errors import InvalidDimensionError

FORMAT_VERSION = 1


class ConfigError(ValueError):
    """A configuration or input file is malformed; carries the field name."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _matrix(rows, field: str, dim: int) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.shape != (dim, dim):
        raise ConfigError(field, f"expected a {dim}x{dim} matrix, got shape {arr.shape}")
    return arr


def channel_to_dict(channel: GaussianChannel) -> dict:
    return {
        "kind": "channel",
        "version": FORMAT_VERSION,
        "modes": channel.modes,
        "ordering": "xxpp",
        "amp": channel.amp.tolist(),
        "noise": channel.noise.tolist(),
        "disp": channel.disp.tolist(),
    }


def channel_from_dict(data: dict, field: str = "channel") -> GaussianChannel:
    try:
        modes = int(data["modes"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{field}.modes", "missing or not an integer") from exc
    if data.get("ordering", "xxpp") != "xxpp":
        raise ConfigError(f"{field}.ordering", f"unsupported ordering {data.get('ordering')!r}")
    dim = 2 * modes
    for key in ("amp", "noise", "disp"):
        if key not in data:
            raise ConfigError(f"{field}.{key}", "missing")
    amp = _matrix(data["amp"], f"{field}.amp", dim)
    noise = _matrix(data["noise"], f"{field}.noise", dim)
    disp = np.asarray(data["disp"], dtype=float)
    if disp.shape != (dim,):
        raise ConfigError(f"{field}.disp", f"expected length {dim}, got shape {disp.shape}")
    try:
        return GaussianChannel(amp, noise, disp)
    except (InvalidDimensionError, ValueError) as exc:
        raise ConfigError(field, str(exc)) from exc


def result_to_dict(result: CharacterizationResult, protocol: dict | None = None) -> dict:
    data = {
        "kind": "result",
        "version": FORMAT_VERSION,
        "modes": result.modes,
        "ordering": "xxpp",
        "amp": result.amp_hat.tolist(),
        "noise": result.noise_hat.tolist(),
        "disp": result.disp_hat.tolist(),
        "diagnostics": {
            "loglik": result.loglik,
            "margin": result.margin,
            "iterations": result.iterations,
            "converged": bool(result.converged),
        },
    }
    if protocol is not None:
        data["diagnostics"]["protocol"] = protocol
    return data


def result_from_dict(data: dict, field: str = "result") -> tuple[GaussianChannel, dict]:
    channel = channel_from_dict(data, field)
    diagnostics = data.get("diagnostics", {})
    if not isinstance(diagnostics, dict):
        raise ConfigError(f"{field}.diagnostics", "must be an object")
    return channel, diagnostics


def write_json(path, data: dict) -> None:
    text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text)


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(str(path), "file not found")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(str(path), "top level must be a JSON object")
    return data


def _build_rotation(params: dict, modes: int, field: str) -> np.ndarray:
    if "matrix" in params:
        return _matrix(params["matrix"], f"{field}.matrix", 2 * modes)
    if params.get("kind") == "pairwise":
        for key in ("theta", "mode_a", "mode_b"):
            if key not in params:
                raise ConfigError(f"{field}.{key}", "missing for pairwise rotation")
        return channel_lib.pairwise_rotation(
            float(params["theta"]), int(params["mode_a"]), int(params["mode_b"]), modes
        )
    raise ConfigError(field, "rotation needs 'matrix' or kind 'pairwise'")


def _require(params: dict, key: str, field: str):
    if key not in params:
        raise ConfigError(f"{field}.{key}", "missing required parameter")
    return params[key]


def build_channel_from_spec(spec: dict, field: str = "channel") -> GaussianChannel:
    """Construct a ground-truth channel from a config 'channel' block.

    Supported forms: {"file": path}, {"explicit": {...}} with raw
    matrices, or {"constructor": name, "params": {...}} with a
    constructor from the channel library.
    """
    if not isinstance(spec, dict):
        raise ConfigError(field, "must be an object")
    if "file" in spec:
        return channel_from_dict(read_json(spec["file"]), field=f"{field}.file")
    if "explicit" in spec:
        return channel_from_dict(spec["explicit"], field=f"{field}.explicit")
    name = spec.get("constructor")
    if not name:
        raise ConfigError(f"{field}.constructor", "missing (or provide 'file'/'explicit')")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{field}.params", "must be an object")
    try:
        if name == "identity":
            from .core import identity_channel

            return identity_channel(int(_require(params, "modes", f"{field}.params")))
        if name == "two_mode_squeezer":
            return channel_lib.two_mode_squeezer(
                float(_require(params, "squeeze", f"{field}.params")),
                int(_require(params, "mode_a", f"{field}.params")),
                int(_require(params, "mode_b", f"{field}.params")),
                int(_require(params, "modes", f"{field}.params")),
            )
        if name == "dfg_array":
            spec_obj = channel_lib.DfgSpec(
                int(_require(params, "modes", f"{field}.params")),
                _require(params, "squeeze", f"{field}.params"),
            )
            return channel_lib.dfg_array(spec_obj)
        if name == "loss":
            rotation = None
            if "rotation" in params and params["rotation"] is not None:
                eta = np.atleast_1d(params["transmissivities"])
                rotation = _build_rotation(
                    params["rotation"], eta.size, f"{field}.params.rotation"
                )
            spec_obj = channel_lib.LossSpec(
                tuple(np.atleast_1d(_require(params, "transmissivities", f"{field}.params"))),
                rotation,
            )
            return channel_lib.loss_channel(spec_obj)
        if name == "cluster":
            spec_obj = channel_lib.GraphSpec(
                np.asarray(_require(params, "adjacency", f"{field}.params"), dtype=float),
                float(_require(params, "squeeze", f"{field}.params")),
            )
            return channel_lib.cluster_channel(spec_obj)
        if name == "quantum_noise":
            return channel_lib.quantum_noise_channel(
                float(_require(params, "eta", f"{field}.params")),
                float(_require(params, "noise_squeeze", f"{field}.params")),
                int(_require(params, "modes", f"{field}.params")),
            )
        if name == "classical_noise":
            noise = np.asarray(_require(params, "noise", f"{field}.params"), dtype=float)
            return channel_lib.classical_noise_channel(noise)
    except ConfigError:
        raise
    except (InvalidDimensionError, ValueError) as exc:
        raise ConfigError(f"{field}.params", str(exc)) from exc
    raise ConfigError(f"{field}.constructor", f"unknown constructor {name!r}")


def protocol_from_config(config: dict) -> ProtocolOptions:
    block = config.get("protocol", {})
    if not isinstance(block, dict):
        raise ConfigError("protocol", "must be an object")
    try:
        return ProtocolOptions(
            q_amplitude=float(block.get("q_amplitude", 10.0)),
            shots_mean_stage=int(block.get("shots_mean_stage", 100_000)),
            shots_vacuum_stage=int(block.get("shots_vacuum_stage", 100_000)),
            seed=int(block.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("protocol", str(exc)) from exc
