"""JSON problem and report files.

Complex numbers are written as ``[re, im]`` pairs.  Python's ``json`` writes
floats with ``repr``, so parsing a written file returns bit-identical arrays.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import EnsembleError, EnsemblePair, MeasurementTable, Povm
from .simulate import MeasurementModel, PostProcessor

PROBLEM_VERSION = "postdisc/1"
REPORT_VERSION = "postdisc-report/1"


class ParseError(ValueError):
    """Malformed input; the message names the offending field."""


def encode_complex(arr):
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def encode_real(arr):
    return np.asarray(arr, dtype=float).tolist()


def decode_complex(obj, where, ndim):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: expected nested lists of [re, im] pairs") from None
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise ParseError(
            f"{where}: expected a {ndim}-D array of [re, im] pairs, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{where}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def decode_real(obj, where, ndim):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: expected a {ndim}-D array of numbers") from None
    if arr.ndim != ndim:
        raise ParseError(f"{where}: expected a {ndim}-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{where}: non-finite entry")
    return arr


def loads(text, source="<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return loads(text, str(path))


@dataclass
class Problem:
    pair: EnsemblePair
    povm: Povm | None = None
    table_shape: tuple | None = None
    post: PostProcessor | None = None
    priors: dict | None = None

    @property
    def dim(self):
        return self.pair.dim

    def model(self):
        """Measurement model from the povm/post sections, or None."""
        if self.povm is None:
            return None
        if self.post is None:
            if self.table_shape is None:
                return None
            return MeasurementModel(self.povm, PostProcessor.coordinates(*self.table_shape))
        return MeasurementModel(self.povm, self.post)


def _require(doc, key, where):
    if key not in doc:
        raise ParseError(f"{where}: missing field '{key}'")
    return doc[key]


def parse_problem(doc, where="problem"):
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected a JSON object")
    version = _require(doc, "version", where)
    if version != PROBLEM_VERSION:
        raise ParseError(f"{where}.version: expected '{PROBLEM_VERSION}', got {version!r}")
    dim = _require(doc, "dim", where)
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"{where}.dim: expected a positive integer")
    states = {}
    for key in ("ensembleA", "ensembleB"):
        arr = decode_complex(_require(doc, key, where), f"{where}.{key}", 2)
        if arr.shape[1] != dim:
            raise ParseError(f"{where}.{key}: vectors have length {arr.shape[1]}, dim is {dim}")
        states[key] = arr
    try:
        pair = EnsemblePair.from_states(states["ensembleA"], states["ensembleB"])
    except EnsembleError as exc:
        raise ParseError(f"{where}: {exc}") from None
    n, m = pair.shape

    povm = table_shape = None
    if doc.get("povm") is not None:
        sec = doc["povm"]
        if not isinstance(sec, dict):
            raise ParseError(f"{where}.povm: expected an object with 'operators'")
        ops = decode_complex(_require(sec, "operators", f"{where}.povm"), f"{where}.povm.operators", 3)
        if ops.shape[1:] != (dim, dim):
            raise ParseError(f"{where}.povm.operators: operators must be {dim}x{dim}")
        povm = Povm(ops)
        if sec.get("table_shape") is not None:
            table_shape = tuple(sec["table_shape"])
            if len(table_shape) != 2 or table_shape[0] * table_shape[1] != len(povm):
                raise ParseError(f"{where}.povm.table_shape: does not match operator count")

    post = None
    if doc.get("post") is not None:
        sec = doc["post"]
        mode = _require(sec, "mode", f"{where}.post")
        try:
            if mode == "deterministic":
                post = PostProcessor.deterministic(
                    _require(sec, "fA", f"{where}.post"), _require(sec, "fB", f"{where}.post"), n, m
                )
            elif mode == "probabilistic":
                post = PostProcessor.probabilistic(
                    decode_real(_require(sec, "pA", f"{where}.post"), f"{where}.post.pA", 2),
                    decode_real(_require(sec, "pB", f"{where}.post"), f"{where}.post.pB", 2),
                )
            else:
                raise ParseError(f"{where}.post.mode: expected 'deterministic' or 'probabilistic'")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"{where}.post: {exc}") from None

    priors = None
    if doc.get("priors") is not None:
        sec = doc["priors"]
        priors = {
            "A": decode_real(_require(sec, "A", f"{where}.priors"), f"{where}.priors.A", 1),
            "B": decode_real(_require(sec, "B", f"{where}.priors"), f"{where}.priors.B", 1),
        }
    return Problem(pair, povm, table_shape, post, priors)


def dump_problem(problem):
    doc = {
        "version": PROBLEM_VERSION,
        "dim": problem.dim,
        "ensembleA": encode_complex(problem.pair.a.states),
        "ensembleB": encode_complex(problem.pair.b.states),
    }
    if problem.povm is not None:
        doc["povm"] = {"operators": encode_complex(problem.povm.operators)}
        if problem.table_shape is not None:
            doc["povm"]["table_shape"] = list(problem.table_shape)
    if problem.post is not None:
        if problem.post.mode == "deterministic":
            doc["post"] = {
                "mode": "deterministic",
                "fA": problem.post.f_a.tolist(),
                "fB": problem.post.f_b.tolist(),
            }
        else:
            doc["post"] = {
                "mode": "probabilistic",
                "pA": encode_real(problem.post.guess_a),
                "pB": encode_real(problem.post.guess_b),
            }
    if problem.priors is not None:
        doc["priors"] = {k: encode_real(v) for k, v in problem.priors.items()}
    return doc


def encode_table(table, stage):
    return {
        "stage": stage,
        "shape": list(table.shape),
        "operators": encode_complex(table.operators),
    }


def decode_table(doc, where="table"):
    shape = _require(doc, "shape", where)
    ops = decode_complex(_require(doc, "operators", where), f"{where}.operators", 4)
    if list(ops.shape[:2]) != list(shape):
        raise ParseError(f"{where}.shape: does not match operators")
    return MeasurementTable(ops)


def schema(name):
    """Load a shipped JSON schema (``problem`` or ``report``)."""
    text = resources.files("postdisc.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name):
    import jsonschema

    jsonschema.validate(doc, schema(name))
