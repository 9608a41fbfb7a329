import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Tuple, Union

from app.exception.exception import LoadError, RecordError


def read_jsonl(path: Union[str, Path]) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """Yield (line_number, record) for every non-blank line of a JSON-lines file."""
    path = Path(path)
    if not path.exists():
        raise LoadError(f"File not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise RecordError(f"invalid JSON ({e.msg})", line_number, str(path))
            if not isinstance(record, dict):
                raise RecordError("record is not an object", line_number, str(path))
            yield line_number, record


def write_jsonl(path: Union[str, Path], records: Iterable[Dict[str, Any]]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count
