"""On-disk formats: counts documents (JSON) and link configs (TOML).

Counts document, schema_version 1.  Exactly one of ``counts`` (raw
integer tallies) and ``table`` (renormalized probabilities) is present,
discriminated by the ``normalized`` flag; ``loss_db`` is optional
provenance.

    {
      "schema_version": 1,
      "loss_db": 14.0,
      "normalized": false,
      "counts": {
        "sent_alpha0":     {"early_only": ..., "late_only": ..., "both": ..., "none": ...},
        "sent_0alpha":     {"early_only": ..., "late_only": ..., "both": ..., "none": ...},
        "sent_alphaalpha": {"m1_only": ...,    "m2_only": ...,   "both": ..., "none": ...}
      }
    }

or ``"normalized": true`` with ``"table"`` holding the six G entries by
field name.  Unknown keys are rejected so typos fail loudly.

Link config, TOML with three optional sections; omitted keys keep the
library defaults:

    [source]            # mu, f, n_rounds
    [channel]           # loss_db, and either visibility or v0 / l_c
    [receiver]          # t_b, eta_det, p_dark

A bundled measured dataset (14 dB channel loss, normalized) ships with
the package for out-of-the-box evaluation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .simulate import (
    ChannelConfig,
    ConfigError,
    LinkConfig,
    ReceiverConfig,
    SourceConfig,
)
from .stats import (
    DataLineCounts,
    MonitorCounts,
    RawCounts,
    RenormalizedTable,
    renormalize,
)

SCHEMA_VERSION = 1

BUNDLED_14DB = "cow_14db.json"

_DATA_GROUP_FIELDS = ("early_only", "late_only", "both", "none")
_MONITOR_GROUP_FIELDS = ("m1_only", "m2_only", "both", "none")
_TABLE_FIELDS = (
    "g_alpha0_early",
    "g_alpha0_late",
    "g_0alpha_early",
    "g_0alpha_late",
    "g_aa_m1",
    "g_aa_m2",
)


class DocumentError(ValueError):
    """A counts document violates the schema."""


@dataclass(frozen=True)
class CountsDocument:
    """In-memory counts document: raw tallies or a renormalized table.

    Exactly one of ``counts`` and ``table`` is set; ``normalized``
    mirrors which.  ``loss_db`` is optional provenance and plays no role
    in evaluation.
    """

    counts: RawCounts | None = None
    table: RenormalizedTable | None = None
    loss_db: float | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if (self.counts is None) == (self.table is None):
            raise DocumentError("exactly one of counts and table must be present")
        if self.counts is not None and not isinstance(self.counts, RawCounts):
            raise DocumentError("counts must be a RawCounts record")
        if self.table is not None and not isinstance(self.table, RenormalizedTable):
            raise DocumentError("table must be a RenormalizedTable record")
        if self.loss_db is not None:
            loss = float(self.loss_db)
            if not (math.isfinite(loss) and loss >= 0.0):
                raise DocumentError(
                    f"loss_db must be finite and non-negative, got {self.loss_db!r}"
                )
            object.__setattr__(self, "loss_db", loss)
        if self.schema_version != SCHEMA_VERSION:
            raise DocumentError(
                f"unsupported schema_version {self.schema_version!r}; "
                f"this build reads version {SCHEMA_VERSION}"
            )

    @property
    def normalized(self) -> bool:
        return self.table is not None

    @classmethod
    def from_raw(cls, counts: RawCounts, loss_db: float | None = None) -> "CountsDocument":
        return cls(counts=counts, loss_db=loss_db)

    @classmethod
    def from_table(
        cls, table: RenormalizedTable, loss_db: float | None = None
    ) -> "CountsDocument":
        return cls(table=table, loss_db=loss_db)

    def to_table(self) -> RenormalizedTable:
        """The renormalized table, renormalizing raw counts on demand."""
        if self.table is not None:
            return self.table
        return renormalize(self.counts)


def _require_keys(mapping: dict, allowed: tuple, required: tuple, where: str) -> None:
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise DocumentError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    missing = sorted(set(required) - set(mapping))
    if missing:
        raise DocumentError(f"missing key(s) in {where}: {', '.join(missing)}")


def _parse_group(obj, field_names: tuple, where: str) -> dict:
    if not isinstance(obj, dict):
        raise DocumentError(f"{where} must be an object")
    _require_keys(obj, field_names, field_names, where)
    out = {}
    for name in field_names:
        value = obj[name]
        if isinstance(value, bool) or not isinstance(value, int):
            raise DocumentError(f"{where}.{name} must be an integer, got {value!r}")
        if value < 0:
            raise DocumentError(f"{where}.{name} must be non-negative, got {value}")
        out[name] = value
    return out


def document_from_obj(obj) -> CountsDocument:
    """Build a CountsDocument from a decoded JSON object, validating hard."""
    if not isinstance(obj, dict):
        raise DocumentError("document root must be an object")
    _require_keys(
        obj,
        allowed=("schema_version", "loss_db", "normalized", "counts", "table"),
        required=("schema_version", "normalized"),
        where="document root",
    )
    version = obj["schema_version"]
    if version != SCHEMA_VERSION:
        raise DocumentError(
            f"unsupported schema_version {version!r}; this build reads version {SCHEMA_VERSION}"
        )
    normalized = obj["normalized"]
    if not isinstance(normalized, bool):
        raise DocumentError(f"normalized must be a boolean, got {normalized!r}")

    loss_db = obj.get("loss_db")
    if loss_db is not None and (
        isinstance(loss_db, bool) or not isinstance(loss_db, (int, float))
    ):
        raise DocumentError(f"loss_db must be a number, got {loss_db!r}")

    try:
        if normalized:
            if "table" not in obj or "counts" in obj:
                raise DocumentError(
                    "a normalized document carries a table and no counts"
                )
            table_obj = obj["table"]
            if not isinstance(table_obj, dict):
                raise DocumentError("table must be an object")
            _require_keys(table_obj, _TABLE_FIELDS, _TABLE_FIELDS, "table")
            for name in _TABLE_FIELDS:
                if isinstance(table_obj[name], bool) or not isinstance(
                    table_obj[name], (int, float)
                ):
                    raise DocumentError(f"table.{name} must be a number")
            table = RenormalizedTable(**{k: float(table_obj[k]) for k in _TABLE_FIELDS})
            return CountsDocument(table=table, loss_db=loss_db)

        if "counts" not in obj or "table" in obj:
            raise DocumentError("a raw document carries counts and no table")
        counts_obj = obj["counts"]
        if not isinstance(counts_obj, dict):
            raise DocumentError("counts must be an object")
        _require_keys(
            counts_obj,
            ("sent_alpha0", "sent_0alpha", "sent_alphaalpha"),
            ("sent_alpha0", "sent_0alpha", "sent_alphaalpha"),
            "counts",
        )
        counts = RawCounts(
            sent_alpha0=DataLineCounts(
                **_parse_group(counts_obj["sent_alpha0"], _DATA_GROUP_FIELDS, "counts.sent_alpha0")
            ),
            sent_0alpha=DataLineCounts(
                **_parse_group(counts_obj["sent_0alpha"], _DATA_GROUP_FIELDS, "counts.sent_0alpha")
            ),
            sent_alphaalpha=MonitorCounts(
                **_parse_group(
                    counts_obj["sent_alphaalpha"], _MONITOR_GROUP_FIELDS, "counts.sent_alphaalpha"
                )
            ),
        )
        return CountsDocument(counts=counts, loss_db=loss_db)
    except DocumentError:
        raise
    except ValueError as exc:  # out-of-range entries surfaced by the records
        raise DocumentError(str(exc)) from exc


def document_to_obj(doc: CountsDocument) -> dict:
    """Serialize a CountsDocument to a JSON-ready dict, stable key order."""
    out: dict = {"schema_version": doc.schema_version}
    if doc.loss_db is not None:
        out["loss_db"] = doc.loss_db
    out["normalized"] = doc.normalized
    if doc.normalized:
        out["table"] = {name: getattr(doc.table, name) for name in _TABLE_FIELDS}
    else:
        out["counts"] = {
            "sent_alpha0": {
                name: getattr(doc.counts.sent_alpha0, name) for name in _DATA_GROUP_FIELDS
            },
            "sent_0alpha": {
                name: getattr(doc.counts.sent_0alpha, name) for name in _DATA_GROUP_FIELDS
            },
            "sent_alphaalpha": {
                name: getattr(doc.counts.sent_alphaalpha, name)
                for name in _MONITOR_GROUP_FIELDS
            },
        }
    return out


def load_counts_document(path) -> CountsDocument:
    """Read and validate a counts document from a JSON file.

    Raises
    ------
    OSError
        If the file cannot be read.
    DocumentError
        If the content is not valid JSON or violates the schema.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not valid JSON: {exc}") from exc
    return document_from_obj(obj)


def save_counts_document(doc: CountsDocument, path) -> None:
    """Write a counts document as JSON.

    Serialization is canonical (fixed key order, indent 2, trailing
    newline), so equal documents produce byte-identical files.
    """
    text = json.dumps(document_to_obj(doc), indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def bundled_dataset_path() -> Path:
    """Filesystem path of the packaged 14 dB dataset."""
    return Path(str(resources.files(__package__).joinpath("data", BUNDLED_14DB)))


def load_bundled_dataset() -> CountsDocument:
    """The packaged 14 dB normalized table, validated like any other file."""
    text = resources.files(__package__).joinpath("data", BUNDLED_14DB).read_text("utf-8")
    return document_from_obj(json.loads(text))


_SOURCE_KEYS = ("mu", "f", "n_rounds")
_CHANNEL_KEYS = ("loss_db", "visibility", "v0", "l_c")
_RECEIVER_KEYS = ("t_b", "eta_det", "p_dark")


def _config_number(section: dict, section_name: str, key: str):
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section_name}.{key}", f"must be a number, got {value!r}")
    return value


def link_config_from_obj(obj: dict) -> LinkConfig:
    """Build a LinkConfig from a decoded TOML mapping."""
    if not isinstance(obj, dict):
        raise ConfigError("config", "root must be a table")
    unknown = sorted(set(obj) - {"source", "channel", "receiver"})
    if unknown:
        raise ConfigError("config", f"unknown section(s): {', '.join(unknown)}")
    for name in ("source", "channel", "receiver"):
        if name in obj and not isinstance(obj[name], dict):
            raise ConfigError(name, "must be a table")

    source_obj = obj.get("source", {})
    unknown = sorted(set(source_obj) - set(_SOURCE_KEYS))
    if unknown:
        raise ConfigError("source", f"unknown key(s): {', '.join(unknown)}")
    source_kwargs = {}
    if "mu" in source_obj:
        source_kwargs["mu"] = _config_number(source_obj, "source", "mu")
    if "f" in source_obj:
        source_kwargs["f"] = _config_number(source_obj, "source", "f")
    if "n_rounds" in source_obj:
        n = _config_number(source_obj, "source", "n_rounds")
        # TOML writes like 1e6 decode as floats; accept them when integral
        if isinstance(n, float):
            if not n.is_integer():
                raise ConfigError("source.n_rounds", f"must be an integer, got {n!r}")
            n = int(n)
        source_kwargs["n_rounds"] = n

    channel_obj = obj.get("channel", {})
    unknown = sorted(set(channel_obj) - set(_CHANNEL_KEYS))
    if unknown:
        raise ConfigError("channel", f"unknown key(s): {', '.join(unknown)}")
    if "visibility" in channel_obj and ("v0" in channel_obj or "l_c" in channel_obj):
        raise ConfigError(
            "channel.visibility",
            "a fixed visibility and the v0/l_c decay model are mutually exclusive",
        )
    channel_kwargs = {}
    for key in _CHANNEL_KEYS:
        if key in channel_obj:
            channel_kwargs[key] = _config_number(channel_obj, "channel", key)

    receiver_obj = obj.get("receiver", {})
    unknown = sorted(set(receiver_obj) - set(_RECEIVER_KEYS))
    if unknown:
        raise ConfigError("receiver", f"unknown key(s): {', '.join(unknown)}")
    receiver_kwargs = {
        key: _config_number(receiver_obj, "receiver", key)
        for key in _RECEIVER_KEYS
        if key in receiver_obj
    }

    return LinkConfig(
        source=SourceConfig(**source_kwargs),
        channel=ChannelConfig(**channel_kwargs),
        receiver=ReceiverConfig(**receiver_kwargs),
    )


def load_link_config(path) -> LinkConfig:
    """Read and validate a link configuration from a TOML file.

    Raises
    ------
    OSError
        If the file cannot be read.
    ConfigError
        If the TOML is malformed, a key is unknown, or a value is out of
        range; the message names the offending field.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"not valid TOML: {exc}") from exc
    return link_config_from_obj(obj)
