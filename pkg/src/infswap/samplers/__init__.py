"""Experiment models and the name registry used by the command line."""
from .base import Draw, RateModel
from .brownian import (
    BrownianCrossing,
    DyadicPath,
    RandomWalkCrossing,
    SchauderCoefficients,
    coupled_brownian_trial,
    crossing_indicator,
    random_walk_path,
    schauder_function,
    schauder_path,
)
from .discrete import DiscreteModel
from .gaussian import GaussianWalk, exact_probability, gaussian_nd_draw, gaussian_walk_draw
from .geometric import GeometricModel, geometric_via_exponential
from .gibbs import GibbsModel, MetropolisChain, exact_probability_a2, mh_gibbs_draw, rate_4d

REGISTRY = {
    "gaussian": GaussianWalk,
    "gibbs4d": GibbsModel,
    "brownian": BrownianCrossing,
    "random-walk": RandomWalkCrossing,
    "geometric": GeometricModel,
    "discrete": DiscreteModel,
}


def make_model(name: str, **params) -> RateModel:
    try:
        cls = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(REGISTRY)}") from None
    return cls(**params)
