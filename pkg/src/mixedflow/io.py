"""Reading and writing game files, mean field files and run outputs.

Both input formats are JSON documents.

Game file (``*.game``)::

    {"players": 2, "actions": [2, 2],
     "costs": [[3, 0, 1, 4], [-3, 0, -1, -4]],
     "zero_sum_expected": true}

``costs[j]`` is player j's cost tensor flattened row-major, first player's
action slowest. ``zero_sum_expected`` is optional and cross-checked.

Mean field file (``*.mfg``)::

    {"states": 3, "phi": [0, 1, 2], "kernel": [0, 0, 0, 0, 0, 0, 0, 0, 0],
     "psi": {"name": "power", "p": 2}}

``kernel`` is row-major ``m x m`` and optional; ``psi`` may also be a bare
name (``"identity"``, ``"log1p"``, ``"none"``).
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .game import TensorGame
from .meanfield import Congestion, MeanFieldCost


class FormatError(InvalidInputError):
    """Input file could not be parsed or has inconsistent fields."""


def _read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return doc


def _field(doc: dict, name: str, path, kind=None):
    if name not in doc:
        raise FormatError(f"{path}: missing field `{name}`")
    value = doc[name]
    if kind is not None and not isinstance(value, kind):
        raise FormatError(f"{path}: field `{name}` has the wrong type")
    return value


def _real_array(value, name, path) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: field `{name}` must hold numbers") from exc
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{path}: field `{name}` has non-finite entries")
    return arr


def load_game(path) -> TensorGame:
    doc = _read_json(path)
    players = _field(doc, "players", path, int)
    actions = _field(doc, "actions", path, list)
    costs = _field(doc, "costs", path, list)
    if players < 1:
        raise FormatError(f"{path}: field `players` must be positive")
    if len(actions) != players or not all(isinstance(m, int) and m >= 1 for m in actions):
        raise FormatError(f"{path}: field `actions` must list {players} positive integers")
    if len(costs) != players:
        raise FormatError(f"{path}: field `costs` has {len(costs)} arrays for {players} players")
    size = int(np.prod(actions))
    flat = []
    for j, c in enumerate(costs):
        arr = _real_array(c, f"costs[{j}]", path)
        if arr.ndim != 1 or arr.size != size:
            raise FormatError(
                f"{path}: field `costs[{j}]` has {arr.size} entries, expected {size} for actions {actions}"
            )
        flat.append(arr)
    game = TensorGame.from_flat(actions, flat)
    expected = doc.get("zero_sum_expected")
    if expected is not None:
        if not isinstance(expected, bool):
            raise FormatError(f"{path}: field `zero_sum_expected` must be a boolean")
        if expected != game.zero_sum:
            raise FormatError(
                f"{path}: `zero_sum_expected` is {str(expected).lower()} but the costs "
                f"{'do' if game.zero_sum else 'do not'} sum to zero"
            )
    return game


def game_document(game: TensorGame, zero_sum_expected: bool | None = None) -> dict:
    doc = {
        "players": game.num_players,
        "actions": [int(m) for m in game.action_counts],
        "costs": [c.reshape(-1).tolist() for c in game.costs],
    }
    if zero_sum_expected is not None:
        doc["zero_sum_expected"] = bool(zero_sum_expected)
    return doc


def save_game(game: TensorGame, path, zero_sum_expected: bool | None = None) -> None:
    Path(path).write_text(json.dumps(game_document(game, zero_sum_expected), indent=2) + "\n")


def load_meanfield(path) -> MeanFieldCost:
    doc = _read_json(path)
    m = _field(doc, "states", path, int)
    if m < 1:
        raise FormatError(f"{path}: field `states` must be positive")
    phi = _real_array(doc.get("phi", [0.0] * m), "phi", path)
    if phi.shape != (m,):
        raise FormatError(f"{path}: field `phi` must have {m} entries")
    kernel = _real_array(doc.get("kernel", [0.0] * (m * m)), "kernel", path).reshape(-1)
    if kernel.size != m * m:
        raise FormatError(f"{path}: field `kernel` must have {m * m} entries, got {kernel.size}")
    psi = doc.get("psi", "none")
    if isinstance(psi, str):
        psi = {"name": psi}
    if not isinstance(psi, dict) or "name" not in psi:
        raise FormatError(f"{path}: field `psi` must be a name or an object with `name`")
    try:
        congestion = Congestion(psi["name"], float(psi.get("p", 1.0)))
        return MeanFieldCost(
            phi, kernel.reshape(m, m), congestion,
            bool(doc.get("monotone_by_construction", False)),
        )
    except InvalidInputError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def meanfield_document(cost: MeanFieldCost) -> dict:
    psi = {"name": cost.congestion.name}
    if cost.congestion.name == "power":
        psi["p"] = cost.congestion.p
    return {
        "states": cost.m,
        "phi": cost.phi.tolist(),
        "kernel": cost.kernel.reshape(-1).tolist(),
        "psi": psi,
        "monotone_by_construction": cost.monotone_by_construction,
    }


def save_meanfield(cost: MeanFieldCost, path) -> None:
    Path(path).write_text(json.dumps(meanfield_document(cost), indent=2) + "\n")


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) if isinstance(v, float)
                              else str(v) for v in row) + "\n")


def write_trajectory(path, result) -> None:
    offsets = np.concatenate([[0], np.cumsum(result.action_counts)])

    def rows():
        for k, t in enumerate(result.times):
            for j in range(len(result.action_counts)):
                for c in range(offsets[j], offsets[j + 1]):
                    yield (float(t), j + 1, int(c - offsets[j] + 1),
                           float(result.states[k, c]), float(result.cesaro[k, c]))

    write_csv(path, ("t", "player", "coord", "state", "cesaro"), rows())


def write_gaps(path, result) -> None:
    write_csv(path, ("t", "gap"), ((float(t), float(g)) for t, g in zip(result.times, result.gaps)))
