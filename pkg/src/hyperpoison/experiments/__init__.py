"""Experiment drivers behind the command-line interface."""

from hyperpoison.experiments.attack_sweep import SweepResult, run_attack_sweep
from hyperpoison.experiments.evaluate import run_eval
from hyperpoison.experiments.gradcheck import run_gradient_checks
from hyperpoison.experiments.hyperlearn import HyperlearnOutput, run_hyperlearn_experiment
from hyperpoison.experiments.synth_demo import SynthOutput, run_synth_demo
from hyperpoison.experiments.val_sizes import run_val_size_sweep

__all__ = [
    "HyperlearnOutput",
    "SweepResult",
    "SynthOutput",
    "run_attack_sweep",
    "run_eval",
    "run_gradient_checks",
    "run_hyperlearn_experiment",
    "run_synth_demo",
    "run_val_size_sweep",
]
