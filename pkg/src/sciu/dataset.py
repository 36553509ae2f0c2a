"""Sample and dataset representation plus line-delimited file I/O.

A dataset file is line-delimited JSON. The first line is a header
{"format": "sciu-dataset", "n_classes": K, "dim": d}; every following line
is one sample record {"id", "features", "label", "true_label"?,
"quality_flag"?}. Floats are written with 17 significant digits so that
save -> load -> save is byte-stable.

`true_label` and `quality_flag` are oracle fields for evaluation only.
Training code must never read them; they are only reachable through the
`oracle_*` accessors, which the metrics module uses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from .errors import ParseError, ValidationError

QUALITY_CLEAN = "clean"
QUALITY_LOW = "low_quality"


@dataclass(frozen=True)
class Sample:
    id: int
    features: np.ndarray
    label: int
    true_label: Optional[int] = None
    quality_flag: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(
            self, "features", np.asarray(self.features, dtype=np.float64)
        )


@dataclass(frozen=True)
class CorrectionEvent:
    sample_id: int
    old_label: int
    new_label: int
    epoch: int

    def __post_init__(self):
        if self.old_label == self.new_label:
            raise ValidationError(
                f"correction for sample {self.sample_id} does not change the label"
            )

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "old_label": self.old_label,
            "new_label": self.new_label,
            "epoch": self.epoch,
        }


@dataclass
class Dataset:
    samples: list[Sample]
    n_classes: int
    dim: int
    _features: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        ids = set()
        for s in self.samples:
            if s.id in ids:
                raise ValidationError(f"duplicate sample id {s.id}")
            ids.add(s.id)
            if not (0 <= s.label < self.n_classes):
                raise ValidationError(
                    f"sample {s.id}: label {s.label} out of range [0, {self.n_classes})"
                )
            if s.true_label is not None and not (0 <= s.true_label < self.n_classes):
                raise ValidationError(
                    f"sample {s.id}: true_label {s.true_label} out of range"
                )
            if s.quality_flag is not None and s.quality_flag not in (
                QUALITY_CLEAN,
                QUALITY_LOW,
            ):
                raise ValidationError(
                    f"sample {s.id}: unknown quality_flag {s.quality_flag!r}"
                )
            if s.features.shape != (self.dim,):
                raise ValidationError(
                    f"sample {s.id}: feature dim {s.features.shape} != ({self.dim},)"
                )
            if not np.all(np.isfinite(s.features)):
                raise ValidationError(f"sample {s.id}: non-finite features")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def ids(self) -> list[int]:
        return [s.id for s in self.samples]

    def features_matrix(self) -> np.ndarray:
        """All features stacked row-wise, cached (samples are immutable)."""
        if self._features is None:
            if self.samples:
                self._features = np.stack([s.features for s in self.samples])
            else:
                self._features = np.zeros((0, self.dim))
        return self._features

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def subset(self, keep_ids: Iterable[int]) -> "Dataset":
        keep = set(keep_ids)
        return Dataset(
            [s for s in self.samples if s.id in keep], self.n_classes, self.dim
        )

    def with_labels(self, new_labels: dict[int, int]) -> "Dataset":
        """New dataset with the given sample labels replaced."""
        out = [
            replace(s, label=new_labels[s.id]) if s.id in new_labels else s
            for s in self.samples
        ]
        return Dataset(out, self.n_classes, self.dim)

    def without_oracle_fields(self) -> "Dataset":
        return Dataset(
            [replace(s, true_label=None, quality_flag=None) for s in self.samples],
            self.n_classes,
            self.dim,
        )

    # Oracle accessors -- evaluation only, never used on a training path.
    def oracle_true_labels(self) -> dict[int, Optional[int]]:
        return {s.id: s.true_label for s in self.samples}

    def oracle_quality_flags(self) -> dict[int, Optional[str]]:
        return {s.id: s.quality_flag for s in self.samples}


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def save_dataset(dataset: Dataset, path) -> None:
    lines = [
        json.dumps(
            {
                "format": "sciu-dataset",
                "n_classes": dataset.n_classes,
                "dim": dataset.dim,
            },
            separators=(",", ":"),
        )
    ]
    for s in dataset.samples:
        feats = ",".join(_fmt_float(v) for v in s.features)
        parts = [f'"id":{s.id}', f'"features":[{feats}]', f'"label":{s.label}']
        if s.true_label is not None:
            parts.append(f'"true_label":{s.true_label}')
        if s.quality_flag is not None:
            parts.append(f'"quality_flag":"{s.quality_flag}"')
        lines.append("{" + ",".join(parts) + "}")
    with open(path, "w") as f:
        f.write("\n".join(lines))
        f.write("\n")


def load_dataset(path) -> Dataset:
    with open(path) as f:
        raw_lines = f.read().splitlines()
    if not raw_lines:
        raise ParseError(f"{path}: empty file, missing header")
    try:
        header = json.loads(raw_lines[0])
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:1: malformed header: {e}") from e
    if not isinstance(header, dict) or header.get("format") != "sciu-dataset":
        raise ParseError(f"{path}:1: not a sciu-dataset header")
    n_classes = header["n_classes"]
    dim = header["dim"]
    samples = []
    for lineno, line in enumerate(raw_lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}:{lineno}: malformed record: {e}") from e
        try:
            samples.append(
                Sample(
                    id=rec["id"],
                    features=np.array(rec["features"], dtype=np.float64),
                    label=rec["label"],
                    true_label=rec.get("true_label"),
                    quality_flag=rec.get("quality_flag"),
                )
            )
        except KeyError as e:
            raise ParseError(f"{path}:{lineno}: missing field {e}") from e
    return Dataset(samples, n_classes=n_classes, dim=dim)


def stratified_split(
    dataset: Dataset, train_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Per-class split preserving class proportions within one sample."""
    if not (0.0 < train_fraction < 1.0):
        raise ValidationError("train_fraction must be in (0, 1)")
    by_class: dict[int, list[Sample]] = {}
    for s in dataset.samples:
        by_class.setdefault(s.label, []).append(s)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5B117]))
    train, test = [], []
    for c in sorted(by_class):
        group = by_class[c]
        if len(group) < 2:
            raise ValidationError(f"class {c} has fewer than 2 samples, cannot split")
        order = rng.permutation(len(group))
        n_train = int(round(train_fraction * len(group)))
        n_train = min(max(n_train, 1), len(group) - 1)
        chosen = set(order[:n_train])
        for i, s in enumerate(group):
            (train if i in chosen else test).append(s)
    train.sort(key=lambda s: s.id)
    test.sort(key=lambda s: s.id)
    return (
        Dataset(train, dataset.n_classes, dataset.dim),
        Dataset(test, dataset.n_classes, dataset.dim),
    )
