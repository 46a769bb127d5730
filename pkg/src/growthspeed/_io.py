import csv
import hashlib
import json


def config_hash(cfg) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _fmt(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    if hasattr(x, "item"):
        return _fmt(x.item())
    if x is None:
        return ""
    return str(x)


def write_csv(path, columns, rows, chash=None):
    """Header row plus rows; an optional leading ``# config_sha256=`` comment line."""
    with open(path, "w", newline="") as fh:
        if chash is not None:
            fh.write(f"# config_sha256={chash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row[c] for c in columns]
            writer.writerow([_fmt(x) for x in row])
