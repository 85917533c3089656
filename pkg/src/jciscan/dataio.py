"""Dataset parsing and serialization: numeric CSV and packed genotypes.

CSV
---
RFC-4180-style text with a mandatory header row.  One column may be the
response; remaining columns are numeric predictors in header order.
Writes use 17 significant digits so parse(write(x)) reproduces float64
values exactly.  Non-numeric cells are rejected (no imputation for text
input).

Packed genotype format
----------------------
A self-describing little-endian binary layout for n x p genotype code
matrices (codes 1=AA, 2=AB/BA, 3=BB):

    magic   4 bytes  "JCG1"
    version u16      1
    flags   u16      bit 0: file may contain missing codes
    n       u64      samples
    p       u64      predictor columns
    meta    per column: chromosome u8, id length u16, id bytes (UTF-8)
    payload column-major, 4 codes per byte, 2 bits each, low bits first:
            00 -> code 1, 01 -> code 2, 10 -> code 3, 11 -> missing;
            each column padded with zero bits to a byte boundary

Missing codes are never stored in a decoded matrix: the parser either
rejects them (default) or imputes the column's modal code.  Writing is
deterministic; identical matrices produce byte-identical files.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    FormatError,
    InvalidValue,
    MissingGenotype,
    MissingResponse,
    NotPackedFile,
    ParseError,
    TruncatedFile,
)

MAGIC = b"JCG1"
FORMAT_VERSION = 1
FLAG_MISSING_ALLOWED = 0x0001

_HEADER = struct.Struct("<4sHHQQ")
_COLUMN_META = struct.Struct("<BH")

#: 2-bit encodings: code value -> bit pair (code - 1); 0b11 marks missing.
MISSING_BITS = 0b11

CSV_FLOAT_DIGITS = 17


@dataclass(frozen=True, eq=False)
class GenotypeMatrix:
    """n x p genotype codes plus per-column SNP id and chromosome label.

    ``codes`` is uint8 with every entry in {1, 2, 3}; chromosome uses the
    1-23 numbering (23 = X), 0 when unknown.
    """

    codes: np.ndarray
    snp_ids: tuple[str, ...]
    chromosomes: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.codes.ndim != 2:
            raise InvalidValue(f"codes must be 2-D, got shape {self.codes.shape}")
        n, p = self.codes.shape
        if n < 1 or p < 1:
            raise InvalidValue(f"matrix must be non-empty, got {n} x {p}")
        if len(self.snp_ids) != p or len(self.chromosomes) != p:
            raise InvalidValue("metadata length must equal the column count")
        if not np.all((self.codes >= 1) & (self.codes <= 3)):
            raise InvalidValue("genotype codes must lie in {1, 2, 3}")

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def p(self) -> int:
        return self.codes.shape[1]

    def column_label(self, j: int) -> str:
        """Display id of column j: "ch<chrom>:<id>", or the bare id when
        the chromosome is unknown."""
        chrom = self.chromosomes[j]
        return f"ch{chrom}:{self.snp_ids[j]}" if chrom else self.snp_ids[j]


def parse_column_label(label: str) -> tuple[int, str]:
    """Split "ch<k>:<id>" into (k, id); anything else maps to (0, label)."""
    if label.startswith("ch"):
        head, sep, rest = label.partition(":")
        if sep and rest and head[2:].isdigit():
            return int(head[2:]), rest
    return 0, label


def payload_bytes(n: int, p: int) -> int:
    """Packed payload size: p columns of ceil(n/4) bytes."""
    return p * ((n + 3) // 4)


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def _open_text(stream):
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        return open(stream, "r", encoding="utf-8", newline=""), True
    return stream, False


def parse_csv(stream, response_column: str | None):
    """Parse a headered numeric CSV.

    Returns ``(matrix, response, predictor_names)`` where ``matrix`` is an
    n x p float64 array in header order and ``response`` is None when
    ``response_column`` is None.

    Raises:
        FormatError: no header, empty data section, or ragged rows.
        MissingResponse: ``response_column`` not in the header.
        ParseError: a non-numeric cell (0-based data row / file column).
    """
    fh, owned = _open_text(stream)
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("empty file: missing header row") from None
        if not header or any(name.strip() == "" for name in header):
            raise FormatError("malformed header: empty column name")
        resp_idx: int | None = None
        if response_column is not None:
            try:
                resp_idx = header.index(response_column)
            except ValueError:
                raise MissingResponse(
                    f"response column {response_column!r} not found in header"
                ) from None

        rows: list[list[float]] = []
        for r, record in enumerate(reader):
            if len(record) != len(header):
                raise FormatError(
                    f"row {r} has {len(record)} cells, header has {len(header)}"
                )
            parsed = []
            for c, cell in enumerate(record):
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(r, c, f"non-numeric cell {cell!r} at data row {r}, column {c}") from None
                if not np.isfinite(value):
                    raise ParseError(r, c, f"non-finite cell {cell!r} at data row {r}, column {c}")
                parsed.append(value)
            rows.append(parsed)
        if not rows:
            raise FormatError("no data rows after the header")

        table = np.asarray(rows, dtype=np.float64)
        if resp_idx is None:
            return table, None, list(header)
        pred_cols = [j for j in range(len(header)) if j != resp_idx]
        names = [header[j] for j in pred_cols]
        return table[:, pred_cols], table[:, resp_idx], names
    finally:
        if owned:
            fh.close()


def write_csv(stream, matrix, names, response=None, response_name: str = "y") -> None:
    """Write a numeric CSV (17 significant digits, exact round trip).

    The response column, when given, is appended after the predictors.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise InvalidValue(f"matrix must be 2-D, got shape {matrix.shape}")
    if len(names) != matrix.shape[1]:
        raise InvalidValue("one name per predictor column is required")
    if response is not None and len(response) != matrix.shape[0]:
        raise InvalidValue(
            f"response has {len(response)} entries, matrix has {matrix.shape[0]} rows"
        )
    fh, owned = _open_w_text(stream)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        header = list(names) + ([response_name] if response is not None else [])
        writer.writerow(header)
        fmt = f".{CSV_FLOAT_DIGITS}g"
        for i in range(matrix.shape[0]):
            row = [format(v, fmt) for v in matrix[i].tolist()]
            if response is not None:
                row.append(format(float(response[i]), fmt))
            writer.writerow(row)
    finally:
        if owned:
            fh.close()


def _open_w_text(stream):
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        return open(stream, "w", encoding="utf-8", newline=""), True
    return stream, False


def read_phenotype(stream) -> np.ndarray:
    """Read a phenotype vector: plain text, one finite real per line."""
    fh, owned = _open_text(stream)
    try:
        values = []
        for i, line in enumerate(fh):
            text = line.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise ParseError(i, 0, f"non-numeric phenotype line {i}: {text!r}") from None
            if not np.isfinite(v):
                raise ParseError(i, 0, f"non-finite phenotype line {i}: {text!r}")
            values.append(v)
        if not values:
            raise FormatError("empty phenotype file")
        return np.asarray(values, dtype=np.float64)
    finally:
        if owned:
            fh.close()


# --------------------------------------------------------------------------
# Packed genotypes
# --------------------------------------------------------------------------


def _open_binary(stream, mode):
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        return open(stream, mode), True
    return stream, False


def write_packed(matrix: GenotypeMatrix, stream) -> None:
    """Serialize a genotype matrix to the packed layout (no timestamps,
    deterministic bytes)."""
    fh, owned = _open_binary(stream, "wb")
    try:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, 0, matrix.n, matrix.p))
        for snp_id, chrom in zip(matrix.snp_ids, matrix.chromosomes):
            encoded = snp_id.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise InvalidValue(f"SNP id too long to encode: {snp_id[:32]!r}...")
            if not (0 <= chrom <= 0xFF):
                raise InvalidValue(f"chromosome code {chrom} outside u8 range")
            fh.write(_COLUMN_META.pack(chrom, len(encoded)))
            fh.write(encoded)
        n = matrix.n
        pad = (-n) % 4
        shifts = np.arange(4, dtype=np.uint8) * 2
        for j in range(matrix.p):
            bits = (matrix.codes[:, j] - 1).astype(np.uint8)
            if pad:
                bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
            grouped = bits.reshape(-1, 4)
            packed = (grouped << shifts).sum(axis=1, dtype=np.uint16).astype(np.uint8)
            fh.write(packed.tobytes())
    finally:
        if owned:
            fh.close()


def parse_packed(stream, missing_policy: str = "reject") -> GenotypeMatrix:
    """Decode a packed genotype file.

    ``missing_policy`` is "reject" (error on the first missing code) or
    "impute" (replace each missing entry with the column's modal code,
    ties broken toward the smaller code).

    Raises:
        NotPackedFile: bad magic, unsupported version, or file too short
            to hold the header.
        TruncatedFile: metadata or payload ends early.
        MissingGenotype: a missing code under the reject policy, or a
            fully missing column under impute.
    """
    if missing_policy not in ("reject", "impute"):
        raise InvalidValue(f"missing_policy must be 'reject' or 'impute', got {missing_policy!r}")
    fh, owned = _open_binary(stream, "rb")
    try:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise NotPackedFile("file too short for a packed header")
        magic, version, _flags, n, p = _HEADER.unpack(head)
        if magic != MAGIC:
            raise NotPackedFile(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise NotPackedFile(f"unsupported format version {version}")
        if n < 1 or p < 1:
            raise FormatError(f"declared shape {n} x {p} is empty")

        snp_ids: list[str] = []
        chroms: list[int] = []
        for j in range(p):
            meta = fh.read(_COLUMN_META.size)
            if len(meta) < _COLUMN_META.size:
                raise TruncatedFile(_COLUMN_META.size, len(meta))
            chrom, id_len = _COLUMN_META.unpack(meta)
            raw_id = fh.read(id_len)
            if len(raw_id) < id_len:
                raise TruncatedFile(id_len, len(raw_id))
            try:
                snp_ids.append(raw_id.decode("utf-8"))
            except UnicodeDecodeError:
                raise FormatError(f"column {j} id is not valid UTF-8") from None
            chroms.append(chrom)

        col_bytes = (n + 3) // 4
        expected = p * col_bytes
        payload = fh.read(expected)
        if len(payload) < expected:
            raise TruncatedFile(expected, len(payload))

        raw = np.frombuffer(payload, dtype=np.uint8).reshape(p, col_bytes)
        shifts = np.arange(4, dtype=np.uint8) * 2
        # (p, col_bytes, 4) 2-bit groups, low bits first, flattened per column.
        groups = (raw[:, :, None] >> shifts) & 0b11
        codes = groups.reshape(p, -1)[:, :n].T.astype(np.uint8) + 1

        missing = codes == MISSING_BITS + 1
        if missing.any():
            if missing_policy == "reject":
                rows, cols = np.nonzero(missing)
                first = np.lexsort((rows, cols))[0]
                raise MissingGenotype(column=int(cols[first]), row=int(rows[first]))
            for j in np.nonzero(missing.any(axis=0))[0]:
                col_missing = missing[:, j]
                present = codes[~col_missing, j]
                if present.size == 0:
                    raise MissingGenotype(column=int(j), row=0)
                counts = np.bincount(present, minlength=4)
                codes[col_missing, j] = int(np.argmax(counts[1:4])) + 1
        codes.setflags(write=False)
        return GenotypeMatrix(codes=codes, snp_ids=tuple(snp_ids), chromosomes=tuple(chroms))
    finally:
        if owned:
            fh.close()


def is_packed(path) -> bool:
    """True when the file starts with the packed-genotype magic bytes."""
    with open(path, "rb") as fh:
        return fh.read(len(MAGIC)) == MAGIC


def genotype_from_floats(matrix, names) -> GenotypeMatrix:
    """Build a GenotypeMatrix from float cells, validating the {1,2,3}
    domain.  Column labels of the form "ch<k>:<id>" populate chromosome
    metadata.

    Raises:
        ParseError: first cell (row, column) outside the genotype domain.
    """
    arr = np.asarray(matrix, dtype=np.float64)
    rounded = np.rint(arr)
    bad = ~(np.isfinite(arr) & (rounded == arr) & (arr >= 1) & (arr <= 3))
    if bad.any():
        rows, cols = np.nonzero(bad)
        r, c = int(rows[0]), int(cols[0])
        raise ParseError(r, c, f"value {arr[r, c]!r} at data row {r}, column {c} is not a genotype code")
    parsed = [parse_column_label(name) for name in names]
    return GenotypeMatrix(
        codes=arr.astype(np.uint8),
        snp_ids=tuple(ident for _, ident in parsed),
        chromosomes=tuple(chrom for chrom, _ in parsed),
    )
