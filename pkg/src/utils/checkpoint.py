"""Checkpoint text format.

UTF-8, line oriented::

    # prnf checkpoint
    [meta]
    format_version = 1
    d = 1
    ...
    [norm]
    cond_mean = 1
    0.49...
    [theta_h]
    W1 = 256 x 2
    <256 lines of 2 comma separated values>
    b1 = 256
    <1 line>
    ...
    [theta_g]
    ...
    [checksum]
    adler32 = 0a1b2c3d

Floats are written with 17 significant digits so they round-trip exactly.
The checksum is the zlib Adler-32 of every byte before the ``[checksum]``
line, in lowercase hex.
"""
import os
import zlib
from collections import OrderedDict

import numpy as np

from modules.flow import PrNfModel
from modules.mlp import MlpParams
from utils.errors import ChecksumError, CorruptFileError, MissingFileError, PrnfError
from utils.value_norm import NormalizationStats

FORMAT_VERSION = 1
MAGIC = "# prnf checkpoint"
NORM_FIELDS = ("cond_mean", "cond_std", "target_mean", "target_std")


def _fmt(v):
    return "%.17g" % v


def _array_lines(name, a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        return ["{} = {}".format(name, a.shape[0]), ",".join(_fmt(v) for v in a)]
    lines = ["{} = {} x {}".format(name, a.shape[0], a.shape[1])]
    lines.extend(",".join(_fmt(v) for v in row) for row in a)
    return lines


def render_checkpoint(model):
    lines = [MAGIC, "[meta]",
             "format_version = {}".format(FORMAT_VERSION),
             "d = {}".format(model.d),
             "s = {}".format(model.s),
             "direction = {}".format(model.direction),
             "lambda = {}".format(_fmt(model.lam)),
             "hidden_dim = {}".format(model.hidden_dim)]
    for k, v in model.info.items():
        lines.append("info.{} = {}".format(k, v))
    lines.append("[norm]")
    for name in NORM_FIELDS:
        lines.extend(_array_lines(name, getattr(model.norm, name)))
    for prefix, params in (("theta_h", model.theta_h), ("theta_g", model.theta_g)):
        lines.append("[{}]".format(prefix))
        for name in MlpParams.names:
            lines.extend(_array_lines(name, getattr(params, name)))
    body = "\n".join(lines) + "\n"
    return body + "[checksum]\nadler32 = {:08x}\n".format(zlib.adler32(body.encode("utf-8")))


def save_checkpoint(model, path, verify=True):
    """Write ``model`` to ``path``; with ``verify`` the file is re-read and checked."""
    text = render_checkpoint(model)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    if verify:
        load_checkpoint(path)
    return path


def _split_checksum(path, text):
    marker = "[checksum]\n"
    pos = text.rfind(marker)
    if pos < 0:
        raise CorruptFileError(path, "missing [checksum] section")
    body, tail = text[:pos], text[pos + len(marker):]
    key, sep, stored = tail.strip().partition("=")
    if not sep or key.strip() != "adler32":
        raise CorruptFileError(path, "malformed checksum line")
    stored = stored.strip()
    found = "{:08x}".format(zlib.adler32(body.encode("utf-8")))
    if stored != found:
        raise ChecksumError(path, stored, found)
    return body


def _parse_sections(path, body):
    lines = body.split("\n")
    if not lines or lines[0] != MAGIC:
        raise CorruptFileError(path, "missing '{}' header".format(MAGIC))
    sections = OrderedDict()
    current, current_name = None, None
    i = 1
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current_name = line[1:-1]
            current = sections.setdefault(current_name, OrderedDict())
            continue
        if current is None:
            raise CorruptFileError(path, "content before the first section")
        key, sep, value = line.partition(" = ")
        if not sep:
            raise CorruptFileError(path, "malformed line {!r}".format(line))
        current[key] = value
        if current_name != "meta":
            # array payload follows its shape line
            dims = [int(t) for t in value.split(" x ")]
            rows = dims[0] if len(dims) == 2 else 1
            payload = lines[i:i + rows]
            i += rows
            try:
                values = [[float(t) for t in row.split(",")] for row in payload]
                a = np.array(values, dtype=np.float64)
            except ValueError as e:
                raise CorruptFileError(path, "bad numbers in {}: {}".format(key, e))
            if len(dims) == 1:
                a = a.reshape(-1)
            if list(a.shape) != dims:
                raise CorruptFileError(path, "{} declared {} but holds {}".format(key, dims, a.shape))
            current[key] = a
    return sections


def load_checkpoint(path):
    if not os.path.isfile(path):
        raise MissingFileError(path, "checkpoint")
    with open(path, "r", encoding="utf-8", newline="\n") as f:
        text = f.read()
    body = _split_checksum(path, text)
    try:
        sections = _parse_sections(path, body)
        meta = sections["meta"]
        if int(meta["format_version"]) != FORMAT_VERSION:
            raise CorruptFileError(path, "unsupported format version {}".format(meta["format_version"]))
        norm = NormalizationStats(*(sections["norm"][k] for k in NORM_FIELDS))
        theta_h = MlpParams(*(sections["theta_h"][k] for k in MlpParams.names))
        theta_g = MlpParams(*(sections["theta_g"][k] for k in MlpParams.names))
        info = OrderedDict((k[len("info."):], v) for k, v in meta.items() if k.startswith("info."))
        model = PrNfModel(int(meta["d"]), int(meta["s"]), theta_h, theta_g, float(meta["lambda"]), norm,
                          meta["direction"], info)
        if model.hidden_dim != int(meta["hidden_dim"]):
            raise CorruptFileError(path, "hidden_dim does not match the stored weights")
    except CorruptFileError:
        raise
    except (KeyError, ValueError, PrnfError) as e:
        raise CorruptFileError(path, "invalid checkpoint content: {}".format(e))
    return model
