"""Dataset source registry and task loading."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Protocol

from hyperpoison.core.config import TaskConfig
from hyperpoison.core.exceptions import DatasetError
from hyperpoison.core.rng import RngStream
from hyperpoison.data.cifar import load_cifar10_binary
from hyperpoison.data.idx import load_idx
from hyperpoison.data.raw import RawImages
from hyperpoison.data.splits import BinaryTask, SplitSpec, make_binary_task
from hyperpoison.data.synthetic import gen_synthetic_gaussians, sample_gaussians

logger = logging.getLogger(__name__)


class DataSource(Protocol):
    """Reads the pooled (train + test) images of a dataset from a directory."""

    default_normalization: str

    def read(self, data_dir: Path) -> RawImages: ...


_SOURCES: dict[str, DataSource] = {}


def register_source(name: str, source: DataSource) -> None:
    _SOURCES[name] = source


def _find(data_dir: Path, stem: str) -> Path:
    for candidate in (data_dir / stem, data_dir / f"{stem}.gz"):
        if candidate.exists():
            return candidate
    raise DatasetError(f"File not found: {data_dir / stem}[.gz]")


class IdxSource:
    default_normalization = "unit_interval"

    def read(self, data_dir: Path) -> RawImages:
        train = load_idx(
            _find(data_dir, "train-images-idx3-ubyte"), _find(data_dir, "train-labels-idx1-ubyte")
        )
        test = load_idx(
            _find(data_dir, "t10k-images-idx3-ubyte"), _find(data_dir, "t10k-labels-idx1-ubyte")
        )
        return train.concat(test)


class CifarSource:
    default_normalization = "symmetric_unit"

    def read(self, data_dir: Path) -> RawImages:
        root = data_dir / "cifar-10-batches-bin"
        if not root.is_dir():
            root = data_dir
        names = [f"data_batch_{i}.bin" for i in range(1, 6)] + ["test_batch.bin"]
        return load_cifar10_binary([root / name for name in names])


register_source("mnist", IdxSource())
register_source("fmnist", IdxSource())
register_source("cifar10", CifarSource())


def load_raw(name: str, data_dir: Optional[str | Path]) -> RawImages:
    source = _SOURCES.get(name)
    if source is None:
        raise DatasetError(
            f"Unsupported dataset: '{name}'. "
            f"Supported datasets: {', '.join(sorted(_SOURCES.keys()))}"
        )
    if data_dir is None:
        raise DatasetError(f"dataset '{name}' needs task.data_dir")
    path = Path(data_dir)
    try:
        logger.info("Loading %s from %s", name, path)
        return source.read(path)
    except DatasetError:
        raise
    except Exception as e:
        raise DatasetError(f"Failed to read {name} from {path}: {e}") from e


def load_task(task: TaskConfig, seed: int) -> BinaryTask:
    """Build the train / validation / test datasets described by ``task``."""
    if task.dataset == "synthetic":
        rng = RngStream(seed, "synthetic")
        train, val = gen_synthetic_gaussians(task.n_train // 2, task.n_val // 2, rng)
        test = sample_gaussians(task.n_test // 2, rng.derive("test"))
        return BinaryTask(train, val, test)
    normalization = task.normalization or _SOURCES[task.dataset].default_normalization
    split = SplitSpec(
        n_train=task.n_train,
        n_val=task.n_val,
        n_test=task.n_test,
        class_pair=task.class_pair,
        normalization=normalization,  # type: ignore[arg-type]
        seed=seed,
    )
    return make_binary_task(load_raw(task.dataset, task.data_dir), split)
