"""Model persistence: one self-describing, versioned JSON text document.

The file carries the window configuration, the eigenbasis (mean, eigenvalues,
eigenvectors in row-major order), the fitted one-class classifier (reference
distribution, estimator payload, prior, threshold), the training report and
deterministic creation metadata. Reals are written as shortest round-trip
decimal text, so save/load is lossless for 64-bit floats and equal models
serialize byte-identically. An infinite threshold is stored as the string
"-inf".
"""

import dataclasses
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .eigen import EigenModel
from .errors import DimensionError, ModelFormatError
from .estimators import estimator_from_payload
from .occ import OccConfig, OccModel, ReferenceDistribution, TrainingReport
from .windows import WindowConfig

FORMAT_NAME = "occ-model"
FORMAT_VERSION = 1


@dataclass(eq=False)
class DetectorModel:
    """Everything needed to score raw traces: windowing, eigenbasis, classifier."""

    window_config: WindowConfig
    eigen: EigenModel
    occ: OccModel
    meta: dict

    def project_windows(self, window_rows):
        rows = np.asarray(window_rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.window_config.size:
            raise DimensionError(
                f"windows have width {rows.shape[-1]}, model expects {self.window_config.size}"
            )
        return self.eigen.project_rows(rows)

    def score_windows(self, window_rows):
        """(scores, verdicts) for raw window rows."""
        feats = self.project_windows(window_rows)
        return self.occ.score_rows(feats), self.occ.verdicts(feats)


def _finite_or_sentinel(value):
    v = float(value)
    if v == float("-inf"):
        return "-inf"
    if v == float("inf"):
        return "inf"
    return v


def _from_sentinel(value):
    if isinstance(value, str):
        return float(value)
    return float(value)


def model_to_document(model):
    wc = model.window_config
    eig = model.eigen
    occ = model.occ
    return {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "created_by": f"occtrace {__version__}",
        "meta": dict(model.meta),
        "window": {
            "size": wc.size,
            "shift": wc.shift,
            "pad": wc.pad,
            "drop_incomplete": wc.drop_incomplete,
        },
        "eigen": {
            "dim": eig.dim,
            "n_components": eig.n_components,
            "center_before_project": eig.center_before_project,
            "mean": eig.mean.tolist(),
            "eigenvalues": eig.eigenvalues.tolist(),
            "eigenvectors_row_major": eig.eigenvectors.reshape(-1).tolist(),
        },
        "occ": {
            "prior_target": occ.prior_target,
            "log_threshold": _finite_or_sentinel(occ.log_threshold),
            "reference": {
                "means": occ.reference.means.tolist(),
                "stds": occ.reference.stds.tolist(),
            },
            "estimator": occ.estimator.to_payload(),
            "config": dataclasses.asdict(occ.config),
            "training_report": occ.report.to_dict(include_scores=True),
        },
    }


def document_to_model(doc):
    if doc.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"not a {FORMAT_NAME} document")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format_version {doc.get('format_version')!r}; expected {FORMAT_VERSION}"
        )
    w = doc["window"]
    window_config = WindowConfig(
        size=int(w["size"]),
        shift=int(w["shift"]),
        pad=float(w["pad"]),
        drop_incomplete=bool(w["drop_incomplete"]),
    )
    e = doc["eigen"]
    dim, k = int(e["dim"]), int(e["n_components"])
    eigen = EigenModel(
        mean=np.asarray(e["mean"], dtype=np.float64),
        eigenvalues=np.asarray(e["eigenvalues"], dtype=np.float64),
        eigenvectors=np.asarray(e["eigenvectors_row_major"], dtype=np.float64).reshape(dim, k),
        center_before_project=bool(e["center_before_project"]),
    )
    o = doc["occ"]
    reference = ReferenceDistribution(
        means=np.asarray(o["reference"]["means"], dtype=np.float64),
        stds=np.asarray(o["reference"]["stds"], dtype=np.float64),
    )
    report_doc = o["training_report"]
    report = TrainingReport(
        heldout_rejection_rate=float(report_doc["heldout_rejection_rate"]),
        heldout_auc=float(report_doc["heldout_auc"]),
        cv_tpr=None if report_doc["cv_tpr"] is None else float(report_doc["cv_tpr"]),
        cv_auc=None if report_doc["cv_auc"] is None else float(report_doc["cv_auc"]),
        n_targets=int(report_doc["n_targets"]),
        n_artificial=int(report_doc["n_artificial"]),
        n_heldout=int(report_doc["n_heldout"]),
        repeat_index=int(report_doc["repeat_index"]),
        heldout_scores=tuple(float(s) for s in report_doc.get("heldout_scores", ())),
    )
    occ = OccModel(
        reference=reference,
        estimator=estimator_from_payload(o["estimator"]),
        prior_target=float(o["prior_target"]),
        log_threshold=_from_sentinel(o["log_threshold"]),
        config=OccConfig(**o["config"]),
        report=report,
    )
    return DetectorModel(
        window_config=window_config, eigen=eigen, occ=occ, meta=dict(doc.get("meta", {}))
    )


def dumps_model(model):
    return json.dumps(model_to_document(model), indent=2, allow_nan=False) + "\n"


def save_model(model, path):
    """Serialize and atomically replace; a failed save leaves no partial file."""
    text = dumps_model(model)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=".occ-model-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    return target


def load_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file {path} is not valid JSON: {exc}") from exc
    return document_to_model(doc)
