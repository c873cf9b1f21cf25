"""One-class classification by artificial-data generation and Bayes combination.

Training sees only target (normal) feature rows. A diagonal Gaussian
reference distribution is fitted to them, artificial rows are sampled from it
to stand in for the complement class, and a class-probability estimator is
trained to tell the two apart. The target density is then recovered in log
space as

    log P(x|T) = log((1 - P(T)) / P(T)) + log P(T|x) - log(1 - P(T|x)) + log P(x|A)

and a rejection threshold is placed at the order statistic of held-out target
scores that realizes the configured target rejection rate. Everything stays
in natural-log space; high-dimensional densities underflow linear floats.
"""

import math
from dataclasses import dataclass

import numpy as np

from .base import ParamsMixin, as_float_matrix, child_seed, ensure_fitted
from .errors import (
    DimensionError,
    NotEnoughDataError,
    ProbabilityRangeError,
    SingleClassError,
)
from .estimators import ForestEstimator, RbfnEstimator
from .metrics import build_confusion, roc_auc, single_point_auc
from .traces import Label

STD_FLOOR = 1e-6
DEFAULT_TRR_GRID = (0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class ReferenceDistribution:
    """Per-attribute Gaussian reference: the density of the artificial class."""

    means: np.ndarray
    stds: np.ndarray

    @property
    def n_features(self):
        return int(self.means.shape[0])


def fit_reference(targets):
    """Per-attribute mean and population standard deviation, floored at 1e-6."""
    X = as_float_matrix(targets, "targets")
    if X.shape[0] < 1:
        raise NotEnoughDataError("reference distribution needs at least one row")
    means = X.mean(axis=0)
    stds = np.sqrt(((X - means[None, :]) ** 2).mean(axis=0))
    return ReferenceDistribution(means=means, stds=np.maximum(stds, STD_FLOOR))


def reference_log_density(ref, x):
    """Log density of the independent-attribute Gaussian reference."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    arr = as_float_matrix(arr, "x")
    if arr.shape[1] != ref.n_features:
        raise DimensionError(
            f"expected vectors of width {ref.n_features}, got {arr.shape[1]}"
        )
    z2 = ((arr - ref.means[None, :]) / ref.stds[None, :]) ** 2
    const = -ref.n_features * _LOG_SQRT_2PI - float(np.log(ref.stds).sum())
    out = const - 0.5 * z2.sum(axis=1)
    return float(out[0]) if single else out


def sample_artificial(ref, n, seed=0):
    """Draw n i.i.d. rows from the reference distribution (seed-deterministic)."""
    if n < 1:
        raise ValueError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((int(n), ref.n_features)) * ref.stds[None, :] + ref.means[None, :]


def combine_bayes(p_target_given_x, log_density_artificial, prior_target):
    """log P(x|T) from the estimator output, the reference log density and the prior.

    Accepts scalars or aligned arrays. The probability arguments must lie
    strictly inside (0, 1).
    """
    p = np.asarray(p_target_given_x, dtype=np.float64)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ProbabilityRangeError("p_target_given_x must lie strictly inside (0, 1)")
    if not 0.0 < prior_target < 1.0:
        raise ProbabilityRangeError("prior_target must lie strictly inside (0, 1)")
    prior_term = math.log((1.0 - prior_target) / prior_target)
    out = prior_term + np.log(p) - np.log(1.0 - p) + np.asarray(log_density_artificial, dtype=np.float64)
    return float(out) if out.ndim == 0 else out


def calibrate_threshold(scores, target_rejection_rate):
    """Order-statistic threshold rejecting exactly floor(trr * n) held-out scores.

    Returns -inf (reject nothing) when floor(trr * n) is zero.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise NotEnoughDataError("calibration needs at least one score")
    trr = float(target_rejection_rate)
    if not 0.0 <= trr < 1.0:
        raise ValueError("target_rejection_rate must lie in [0, 1)")
    reject = math.floor(trr * s.size)
    if reject == 0:
        return float("-inf")
    return float(np.sort(s, kind="stable")[reject - 1])


CONFIG_KEYS = (
    "num_repeats",
    "percentage_heldout",
    "proportion_generated",
    "target_rejection_rate",
    "estimator",
    "m_clusters",
    "min_std",
    "n_trees",
    "h_prime",
    "seed",
)


@dataclass(frozen=True)
class OccConfig:
    """Classifier settings; the defaults are the standard operating point."""

    num_repeats: int = 10
    percentage_heldout: float = 10.0
    proportion_generated: float = 0.5
    target_rejection_rate: float = 0.05
    estimator: str = "rbfn"
    m_clusters: int = 5
    min_std: float = 0.1
    n_trees: int = 100
    h_prime: int | str = "log2"
    seed: int = 0
    cv_folds: int = 10

    def __post_init__(self):
        if self.num_repeats < 1:
            raise ValueError("num_repeats must be >= 1")
        if not 0.0 < self.percentage_heldout < 100.0:
            raise ValueError("percentage_heldout must lie in (0, 100)")
        if not 0.0 < self.proportion_generated < 1.0:
            raise ValueError("proportion_generated must lie in (0, 1)")
        if not 0.0 <= self.target_rejection_rate < 1.0:
            raise ValueError("target_rejection_rate must lie in [0, 1)")
        if self.estimator not in ("rbfn", "forest"):
            raise ValueError("estimator must be 'rbfn' or 'forest'")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")

    @property
    def prior_target(self):
        return 1.0 - self.proportion_generated

    @classmethod
    def from_mapping(cls, mapping):
        unknown = set(mapping) - set(CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: mapping[k] for k in CONFIG_KEYS if k in mapping})

    def to_mapping(self):
        return {k: getattr(self, k) for k in CONFIG_KEYS}


@dataclass(frozen=True)
class TrainingReport:
    heldout_rejection_rate: float
    heldout_auc: float
    cv_tpr: float | None
    cv_auc: float | None
    n_targets: int
    n_artificial: int
    n_heldout: int
    repeat_index: int
    heldout_scores: tuple

    def to_dict(self, include_scores=True):
        doc = {
            "heldout_rejection_rate": self.heldout_rejection_rate,
            "heldout_auc": self.heldout_auc,
            "cv_tpr": self.cv_tpr,
            "cv_auc": self.cv_auc,
            "n_targets": self.n_targets,
            "n_artificial": self.n_artificial,
            "n_heldout": self.n_heldout,
            "repeat_index": self.repeat_index,
        }
        if include_scores:
            doc["heldout_scores"] = list(self.heldout_scores)
        return doc


@dataclass(frozen=True)
class OccScore:
    log_density_target: float
    p_target: float
    log_density_artificial: float
    verdict: Label


@dataclass(eq=False)
class OccModel:
    """A deployable one-class classifier over feature rows."""

    reference: ReferenceDistribution
    estimator: object
    prior_target: float
    log_threshold: float
    config: OccConfig
    report: TrainingReport

    def p_target(self, X):
        return self.estimator.estimate(X)

    def artificial_log_density(self, X):
        return reference_log_density(self.reference, X)

    def score_rows(self, X):
        """log P(x|T) for each row."""
        X = as_float_matrix(X, "X")
        return combine_bayes(
            self.estimator.estimate(X),
            reference_log_density(self.reference, X),
            self.prior_target,
        )

    def verdicts(self, X):
        """Label.ATTACK where the score is at or below the threshold."""
        scores = self.score_rows(X)
        return np.where(scores <= self.log_threshold, int(Label.ATTACK), int(Label.NORMAL))

    def classify(self, x):
        p = self.estimator.estimate(np.asarray(x, dtype=np.float64))
        log_a = reference_log_density(self.reference, x)
        score = combine_bayes(p, log_a, self.prior_target)
        verdict = Label.ATTACK if score <= self.log_threshold else Label.NORMAL
        return OccScore(
            log_density_target=float(score),
            p_target=float(p),
            log_density_artificial=float(log_a),
            verdict=verdict,
        )

    def with_threshold(self, log_threshold):
        return OccModel(
            reference=self.reference,
            estimator=self.estimator,
            prior_target=self.prior_target,
            log_threshold=float(log_threshold),
            config=self.config,
            report=self.report,
        )


def _estimator_for(cfg, seed):
    if cfg.estimator == "rbfn":
        return RbfnEstimator(m_clusters=cfg.m_clusters, min_std=cfg.min_std, seed=seed)
    return ForestEstimator(n_trees=cfg.n_trees, split_features=cfg.h_prime, seed=seed)


def _combined_scores(estimator, ref, prior, X):
    return combine_bayes(
        estimator.estimate(X), reference_log_density(ref, X), prior
    )


def _fit_repeat(X, cfg, repeat_index):
    seed_r = child_seed(cfg.seed, 1, repeat_index)
    n = X.shape[0]
    n_held = max(1, int(n * cfg.percentage_heldout / 100.0))
    perm = np.random.default_rng(child_seed(seed_r, 0)).permutation(n)
    held_idx, train_idx = perm[:n_held], perm[n_held:]
    X_train, X_held = X[train_idx], X[held_idx]

    ref = fit_reference(X_train)
    p_gen = cfg.proportion_generated
    n_art = max(1, int(round(X_train.shape[0] * p_gen / (1.0 - p_gen))))
    artificial = sample_artificial(ref, n_art, seed=child_seed(seed_r, 1))

    union = np.vstack([X_train, artificial])
    labels = np.concatenate([np.ones(X_train.shape[0]), np.zeros(n_art)])
    estimator = _estimator_for(cfg, child_seed(seed_r, 2)).fit(union, labels)

    prior = cfg.prior_target
    held_scores = _combined_scores(estimator, ref, prior, X_held)
    threshold = calibrate_threshold(held_scores, cfg.target_rejection_rate)
    rejection = float(np.mean(held_scores <= threshold))

    probe = sample_artificial(ref, X_held.shape[0], seed=child_seed(seed_r, 3))
    probe_scores = _combined_scores(estimator, ref, prior, probe)
    auc = roc_auc(
        np.concatenate([held_scores, probe_scores]),
        [Label.NORMAL] * held_scores.shape[0] + [Label.ATTACK] * probe_scores.shape[0],
    )
    return {
        "estimator": estimator,
        "reference": ref,
        "threshold": threshold,
        "rejection": rejection,
        "heldout_auc": auc,
        "heldout_scores": held_scores,
        "X_train": X_train,
        "artificial": artificial,
    }


def _cross_validate(X_train, artificial, ref, cfg):
    """K-fold validation of the combined density on the labeled union."""
    folds = min(cfg.cv_folds, X_train.shape[0], artificial.shape[0])
    if folds < 2:
        return None, None
    prior = cfg.prior_target
    rng = np.random.default_rng(child_seed(cfg.seed, 2))
    t_order = rng.permutation(X_train.shape[0])
    a_order = rng.permutation(artificial.shape[0])
    t_folds = np.array_split(t_order, folds)
    a_folds = np.array_split(a_order, folds)
    tprs, aucs = [], []
    for f in range(folds):
        t_test, a_test = t_folds[f], a_folds[f]
        t_fit = np.concatenate([t_folds[g] for g in range(folds) if g != f])
        a_fit = np.concatenate([a_folds[g] for g in range(folds) if g != f])
        union = np.vstack([X_train[t_fit], artificial[a_fit]])
        labels = np.concatenate([np.ones(t_fit.shape[0]), np.zeros(a_fit.shape[0])])
        est = _estimator_for(cfg, child_seed(cfg.seed, 3, f)).fit(union, labels)
        fit_scores = _combined_scores(est, ref, prior, X_train[t_fit])
        fold_thr = calibrate_threshold(fit_scores, cfg.target_rejection_rate)
        s_t = _combined_scores(est, ref, prior, X_train[t_test])
        s_a = _combined_scores(est, ref, prior, artificial[a_test])
        tprs.append(float(np.mean(s_t > fold_thr)))
        aucs.append(
            roc_auc(
                np.concatenate([s_t, s_a]),
                [Label.NORMAL] * s_t.shape[0] + [Label.ATTACK] * s_a.shape[0],
            )
        )
    return float(np.mean(tprs)), float(np.mean(aucs))


def train_occ(targets, cfg):
    """Train the one-class classifier on target feature rows.

    The procedure runs ``num_repeats`` independently seeded repetitions
    (held-out split, reference fit, artificial sampling, estimator fit,
    threshold calibration) and keeps the repetition with the median held-out
    AUC. Cross-validated TPR/AUC of the kept configuration are recorded in
    the training report. Deterministic in (targets, cfg).
    """
    X = as_float_matrix(targets, "targets")
    if X.shape[0] < 20:
        raise NotEnoughDataError(
            f"training needs at least 20 target rows for the held-out split, got {X.shape[0]}"
        )
    repeats = [_fit_repeat(X, cfg, r) for r in range(cfg.num_repeats)]
    aucs = np.asarray([r["heldout_auc"] for r in repeats])
    chosen_index = int(np.argsort(aucs, kind="stable")[(len(repeats) - 1) // 2])
    chosen = repeats[chosen_index]

    cv_tpr, cv_auc = _cross_validate(
        chosen["X_train"], chosen["artificial"], chosen["reference"], cfg
    )
    report = TrainingReport(
        heldout_rejection_rate=chosen["rejection"],
        heldout_auc=float(chosen["heldout_auc"]),
        cv_tpr=cv_tpr,
        cv_auc=cv_auc,
        n_targets=int(X.shape[0]),
        n_artificial=int(chosen["artificial"].shape[0]),
        n_heldout=int(chosen["heldout_scores"].shape[0]),
        repeat_index=chosen_index,
        heldout_scores=tuple(float(s) for s in chosen["heldout_scores"]),
    )
    return OccModel(
        reference=chosen["reference"],
        estimator=chosen["estimator"],
        prior_target=cfg.prior_target,
        log_threshold=float(chosen["threshold"]),
        config=cfg,
        report=report,
    )


def sweep_trr(build_model, validation_rows, truth, grid=None):
    """Evaluate a grid of rejection rates and pick the AUC-maximizing one.

    ``build_model`` maps a rejection rate to a calibrated OccModel. For each
    grid value the validation set is hard-classified and the area under the
    one-point operating curve recorded. Ties resolve toward the smallest
    rate. Returns (best_trr, [(trr, auc), ...]) with the curve in grid order.
    """
    grid = tuple(DEFAULT_TRR_GRID if grid is None else grid)
    if not grid:
        raise ValueError("grid must contain at least one rejection rate")
    truth = [int(v) for v in truth]
    has_normal = any(v == int(Label.NORMAL) for v in truth)
    has_other = any(v != int(Label.NORMAL) for v in truth)
    if not (has_normal and has_other):
        raise SingleClassError("validation set must contain both classes")
    X = as_float_matrix(validation_rows, "validation_rows")
    curve = []
    for trr in grid:
        model = build_model(trr)
        cm = build_confusion(truth, model.verdicts(X))
        curve.append((float(trr), float(single_point_auc(cm))))
    best_trr = min(curve, key=lambda point: (-point[1], point[0]))[0]
    return best_trr, curve


class OneClassBayesClassifier(ParamsMixin):
    """Estimator-style facade over train_occ for ecosystem composition.

    fit() takes target rows only; predict() returns +1 for accepted (target)
    rows and -1 for rejected (anomalous) rows, following the usual one-class
    convention.
    """

    def __init__(self, num_repeats=10, percentage_heldout=10.0,
                 proportion_generated=0.5, target_rejection_rate=0.05,
                 estimator="rbfn", m_clusters=5, min_std=0.1, n_trees=100,
                 h_prime="log2", seed=0, cv_folds=10):
        self.num_repeats = num_repeats
        self.percentage_heldout = percentage_heldout
        self.proportion_generated = proportion_generated
        self.target_rejection_rate = target_rejection_rate
        self.estimator = estimator
        self.m_clusters = m_clusters
        self.min_std = min_std
        self.n_trees = n_trees
        self.h_prime = h_prime
        self.seed = seed
        self.cv_folds = cv_folds
        self.model_ = None

    def fit(self, X, y=None):
        self.model_ = train_occ(X, OccConfig(**self.get_params()))
        return self

    def score_samples(self, X):
        ensure_fitted(self, "model_")
        return self.model_.score_rows(X)

    def decision_function(self, X):
        return self.score_samples(X) - self.model_.log_threshold

    def predict(self, X):
        ensure_fitted(self, "model_")
        v = self.model_.verdicts(X)
        return np.where(v == int(Label.NORMAL), 1, -1)
