"""Differentiable binary classifiers."""

# Import models to trigger registration
from . import logistic, mlp, quadratic  # noqa: F401
from .objective import forward as forward
from .objective import grad_w as grad_w
from .objective import hvp_w as hvp_w
from .objective import loss as loss
from .objective import mixed_hvp_lambda as mixed_hvp_lambda
from .objective import mixed_hvp_poison as mixed_hvp_poison
from .objective import mixed_jvp_poison as mixed_jvp_poison
from .registry import get_model as get_model
from .spec import ModelSpec as ModelSpec
from .spec import ParamVector as ParamVector
from .spec import RegSpec as RegSpec
from .spec import layout_for as layout_for
from .training import TrainTrace as TrainTrace
from .training import default_init_scheme as default_init_scheme
from .training import fit as fit
from .training import init_params as init_params
from .training import sgd_train as sgd_train
