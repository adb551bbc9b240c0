"""Datasets: containers, loaders, synthetic tasks and splits."""

from hyperpoison.data.base import load_raw, load_task, register_source
from hyperpoison.data.cifar import load_cifar10_binary, write_cifar10_binary
from hyperpoison.data.dataset import Dataset
from hyperpoison.data.idx import load_idx, write_idx
from hyperpoison.data.raw import RawImages
from hyperpoison.data.splits import BinaryTask, SplitSpec, make_binary_task, split_indices
from hyperpoison.data.synthetic import gen_synthetic_gaussians, sample_gaussians

__all__ = [
    "BinaryTask",
    "Dataset",
    "RawImages",
    "SplitSpec",
    "gen_synthetic_gaussians",
    "load_cifar10_binary",
    "load_idx",
    "load_raw",
    "load_task",
    "make_binary_task",
    "register_source",
    "sample_gaussians",
    "split_indices",
    "write_cifar10_binary",
    "write_idx",
]
