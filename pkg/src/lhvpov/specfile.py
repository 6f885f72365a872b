"""Reading measurement specs and Kraus channel files.

A measurement spec is a YAML document::

    d: 2
    alpha: 0.4166666667        # optional, defaults to the simulated weight
    alice:
      povm:
        - [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]
        - [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]
      channel:                 # optional list of Kraus operators
        - [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    bob:
      povm: ...

Every matrix is a list of rows and every entry an ``[re, im]`` pair. A
channel file holds either ``kraus: [...]`` or a bare list of matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .channels import KrausChannel
from .errors import InvalidChannel, InvalidPovm, ParseError
from .linalg import Povm, validate_povm
from .werner import paper_alpha


@dataclass(frozen=True)
class MeasurementSpec:
    d: int
    alpha: float
    povm_a: Povm
    povm_b: Povm
    channel_a: KrausChannel | None = None
    channel_b: KrausChannel | None = None


def _index_lines(node, path: str, out: dict[str, int]) -> None:
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            child = f"{path}.{key.value}" if path else str(key.value)
            _index_lines(value, child, out)
    elif isinstance(node, yaml.SequenceNode):
        for k, value in enumerate(node.value):
            _index_lines(value, f"{path}[{k}]", out)


class _Reader:
    def __init__(self, text: str, source: str):
        self.source = source
        try:
            root = yaml.compose(text, Loader=yaml.SafeLoader)
            self.data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ParseError(f"{source}: malformed YAML: {getattr(exc, 'problem', exc)}",
                             line=None if mark is None else mark.line + 1) from exc
        self.lines: dict[str, int] = {}
        if root is not None:
            _index_lines(root, "", self.lines)

    def error(self, message: str, field: str) -> ParseError:
        return ParseError(f"{self.source}: {message}", line=self.lines.get(field), field=field)

    def matrix(self, value, field: str, dim: int | None) -> np.ndarray:
        if not isinstance(value, list) or not value:
            raise self.error("matrix must be a non-empty list of rows", field)
        n = len(value)
        if dim is not None and n != dim:
            raise self.error(f"matrix has {n} rows, expected {dim}", field)
        out = np.empty((n, n), dtype=np.complex128)
        for r, row in enumerate(value):
            rf = f"{field}[{r}]"
            if not isinstance(row, list) or len(row) != n:
                raise self.error(f"row must hold {n} [re, im] entries", rf)
            for c, entry in enumerate(row):
                ef = f"{rf}[{c}]"
                if (not isinstance(entry, list) or len(entry) != 2
                        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
                    raise self.error("entry must be an [re, im] pair of numbers", ef)
                out[r, c] = complex(entry[0], entry[1])
        return out

    def matrices(self, value, field: str, dim: int | None) -> list[np.ndarray]:
        if not isinstance(value, list) or not value:
            raise self.error("expected a non-empty list of matrices", field)
        return [self.matrix(m, f"{field}[{k}]", dim) for k, m in enumerate(value)]

    def povm(self, value, field: str, dim: int) -> Povm:
        ops = self.matrices(value, field, dim)
        try:
            return validate_povm(ops)
        except InvalidPovm as exc:
            raise self.error(str(exc), field) from exc

    def channel(self, value, field: str, dim: int | None) -> KrausChannel:
        ops = self.matrices(value, field, dim)
        try:
            return KrausChannel.from_ops(ops)
        except InvalidChannel as exc:
            raise self.error(str(exc), field) from exc


def parse_spec(text: str, source: str = "<spec>") -> MeasurementSpec:
    rd = _Reader(text, source)
    data = rd.data
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be a mapping", line=1)
    d = data.get("d")
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise rd.error("'d' must be an integer >= 2", "d")
    if "alpha" in data:
        alpha = data["alpha"]
        if not isinstance(alpha, (int, float)) or isinstance(alpha, bool) or not 0.0 <= alpha <= 1.0:
            raise rd.error("'alpha' must be a number in [0, 1]", "alpha")
        alpha = float(alpha)
    else:
        alpha = paper_alpha(d)
    parties = {}
    for party in ("alice", "bob"):
        block = data.get(party)
        if not isinstance(block, dict):
            raise rd.error(f"missing '{party}' section", party)
        if "povm" not in block:
            raise rd.error("missing 'povm' list", party)
        unknown = set(block) - {"povm", "channel"}
        if unknown:
            raise rd.error(f"unknown keys {sorted(unknown)}", party)
        povm = rd.povm(block["povm"], f"{party}.povm", d)
        channel = rd.channel(block["channel"], f"{party}.channel", d) if block.get("channel") is not None else None
        parties[party] = (povm, channel)
    unknown = set(data) - {"d", "alpha", "alice", "bob"}
    if unknown:
        raise rd.error(f"unknown keys {sorted(unknown)}", sorted(unknown)[0])
    return MeasurementSpec(d, alpha, parties["alice"][0], parties["bob"][0], parties["alice"][1], parties["bob"][1])


def load_spec(path) -> MeasurementSpec:
    path = Path(path)
    return parse_spec(path.read_text(), str(path))


def parse_channel(text: str, source: str = "<channel>", dim: int | None = None) -> KrausChannel:
    rd = _Reader(text, source)
    data = rd.data
    if isinstance(data, dict):
        if "kraus" not in data:
            raise ParseError(f"{source}: expected a 'kraus' list", line=1)
        return rd.channel(data["kraus"], "kraus", dim)
    return rd.channel(data, "", dim)


def load_channel(path, dim: int | None = None) -> KrausChannel:
    path = Path(path)
    return parse_channel(path.read_text(), str(path), dim)


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def dump_spec(d: int, povm_a, povm_b, alpha: float | None = None, channel_a=None, channel_b=None) -> str:
    """Serialize raw POVM elements (and optional Kraus lists) back to spec YAML."""
    doc: dict = {"d": d}
    if alpha is not None:
        doc["alpha"] = float(alpha)
    for party, elems, ch in (("alice", povm_a, channel_a), ("bob", povm_b, channel_b)):
        block: dict = {"povm": [encode_matrix(e) for e in elems]}
        if ch is not None:
            block["channel"] = [encode_matrix(k) for k in ch]
        doc[party] = block
    return yaml.safe_dump(doc, default_flow_style=None, sort_keys=False)

