"""First-utterance template pools, one plain-text file per intent."""

from pathlib import Path
from typing import Tuple, Union

from .errors import DatagenError


def load_utterances(path: Union[str, Path]) -> Tuple[str, ...]:
    """One utterance per line; blank lines and ``#`` comments are skipped."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DatagenError(f"Cannot read utterances {path}: {e}") from e
    pool = tuple(
        line.strip() for line in lines if line.strip() and not line.lstrip().startswith("#")
    )
    if not pool:
        raise DatagenError(f"Utterance pool {path} is empty")
    return pool
