"""
ListOps dataset files

One sample per line, UTF-8, newline terminated::

    [MAX 3 7 ]<TAB>7<TAB>1,1,1,0

The third field (the gold merge trace) is optional.
"""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from .listops import NUM_CLASSES, ListOpsSample, parse, tokenize
from ..errors import ParseError, VocabError
from ..utils.logging import get_logger

logger = get_logger(__name__)

SPLIT_SUFFIX = ".tsv"
STANDARD_SPLITS = ("train", "val", "test_length", "test_args")


def format_sample(sample: ListOpsSample) -> str:
    fields = [" ".join(sample.tokens), str(sample.label)]
    if sample.gold_trace is not None:
        fields.append(",".join(str(j) for j in sample.gold_trace))
    return "\t".join(fields)


def parse_line(line: str, line_number: Optional[int] = None) -> ListOpsSample:
    fields = line.rstrip("\n").split("\t")
    if len(fields) not in (2, 3):
        raise ParseError(f"expected 2 or 3 tab-separated fields, found {len(fields)}", line_number)

    tokens = fields[0].split()
    if not tokens:
        raise ParseError("empty token field", line_number)
    try:
        tokenize(tokens)
        parse(tokens)
    except (VocabError, ParseError) as e:
        raise ParseError(str(e), line_number) from None

    try:
        label = int(fields[1])
    except ValueError:
        raise ParseError(f"label {fields[1]!r} is not an integer", line_number) from None
    if not 0 <= label < NUM_CLASSES:
        raise ParseError(f"label {label} outside 0..{NUM_CLASSES - 1}", line_number)

    trace = None
    if len(fields) == 3:
        try:
            trace = [int(j) for j in fields[2].split(",")] if fields[2] else []
        except ValueError:
            raise ParseError(f"malformed trace {fields[2]!r}", line_number) from None

    return ListOpsSample(tokens, label, trace)


def write_samples(path: Union[str, Path], samples: Iterable[ListOpsSample]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for sample in samples:
            f.write(format_sample(sample) + "\n")
            count += 1
    return count


def read_samples(path: Union[str, Path]) -> List[ListOpsSample]:
    samples = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            samples.append(parse_line(line, line_number))
    return samples


class FileDatasetStore:
    """A directory of named split files"""

    def __init__(self, directory: Union[str, Path]):
        self.logger = get_logger(__name__)
        self.data_dir = Path(directory)
        self._ensure_data_directory()

    def _ensure_data_directory(self):
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.logger.debug(f"Dataset directory: {self.data_dir}")

    def split_path(self, name: str) -> Path:
        return self.data_dir / f"{name}{SPLIT_SUFFIX}"

    def save_split(self, name: str, samples: List[ListOpsSample]) -> Path:
        path = self.split_path(name)
        count = write_samples(path, samples)
        self.logger.info(f"Wrote {count} samples to {path}")
        return path

    def load_split(self, name: str) -> List[ListOpsSample]:
        path = self.split_path(name)
        if not path.exists():
            raise FileNotFoundError(f"Split file not found: {path}")
        try:
            samples = read_samples(path)
        except ParseError as e:
            error = ParseError(f"{path.name}: {e}")
            error.line_number = e.line_number
            raise error from None
        self.logger.debug(f"Loaded {len(samples)} samples from {path}")
        return samples

    def has_split(self, name: str) -> bool:
        return self.split_path(name).exists()

    def list_splits(self) -> List[str]:
        """Standard splits first, then any others alphabetically"""
        present = {p.stem for p in self.data_dir.glob(f"*{SPLIT_SUFFIX}")}
        ordered = [s for s in STANDARD_SPLITS if s in present]
        return ordered + sorted(present - set(STANDARD_SPLITS))

    def get_stats(self) -> Dict[str, Dict]:
        stats = {}
        for name in self.list_splits():
            try:
                samples = self.load_split(name)
            except ParseError as e:
                self.logger.warning(f"Skipping unreadable split {name}: {e}")
                continue
            lengths = [len(s) for s in samples]
            stats[name] = {
                "samples": len(samples),
                "min_length": min(lengths, default=0),
                "max_length": max(lengths, default=0),
                "mean_length": sum(lengths) / len(lengths) if lengths else 0.0,
                "with_trace": sum(s.gold_trace is not None for s in samples),
                "file_size": self.split_path(name).stat().st_size,
            }
        return stats
