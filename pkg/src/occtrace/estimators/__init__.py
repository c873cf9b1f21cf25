"""Target-class probability estimators behind one common contract."""

from .clustering import kmeans_cluster
from .contract import ProbabilityEstimator
from .forest import (
    DecisionTree,
    ForestEstimator,
    forest_class_probability,
    grow_tree,
    resolve_split_features,
    tree_apply,
    tree_class_probability,
)
from .gmm import GmmModel, fit_gmm_em
from .rbfn import RbfnEstimator, rbf_activation, shared_width

from ..errors import ModelFormatError

ESTIMATOR_KINDS = {"rbfn": RbfnEstimator, "forest": ForestEstimator}


def estimator_from_payload(payload):
    kind = payload.get("kind")
    cls = ESTIMATOR_KINDS.get(kind)
    if cls is None:
        raise ModelFormatError(f"unknown estimator kind {kind!r}")
    return cls.from_payload(payload)


__all__ = [
    "DecisionTree",
    "ESTIMATOR_KINDS",
    "ForestEstimator",
    "GmmModel",
    "ProbabilityEstimator",
    "RbfnEstimator",
    "estimator_from_payload",
    "fit_gmm_em",
    "forest_class_probability",
    "grow_tree",
    "kmeans_cluster",
    "rbf_activation",
    "resolve_split_features",
    "shared_width",
    "tree_apply",
    "tree_class_probability",
]
