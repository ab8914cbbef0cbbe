"""Beam codebook learning from angular power scans."""

import json

from ._beamcodex import (
    AngularPowerScan,
    Beam,
    BeamCandidate,
    GainGapConfig,
    InfeasibleGainTarget,
    InvalidInput,
    aperture_bins,
    beam_gain,
    content_hash,
    extract_candidates,
    init_alpha,
    isotropic_power,
    max_gain,
    preset_names,
    read_scans_csv,
    remove_redundant,
    version,
    write_scans_csv,
)
from . import _beamcodex

__version__ = version()


def generate(preset, n_locations, seed=0, jobs=1):
    """Synthetic scans plus their ground truth as a dict."""
    scans, truth = _beamcodex.generate(preset, n_locations, seed, jobs)
    return scans, json.loads(truth)


def build_codebook(scans, cfg=None, seed=0, n_iter=50, jobs=1):
    """Learn a codebook; returns its JSON document as a dict."""
    return json.loads(_beamcodex.build_codebook_json(scans, cfg or GainGapConfig(), seed, n_iter, jobs))


def evaluate(scans, strategy="codebook", codebook=None, cfg=None, levels=6,
             dir_error_deg=0.0, probe_noise_db=0.0, seed=0, jobs=1):
    if strategy == "codebook" and codebook is None:
        raise ValueError("strategy 'codebook' needs a codebook")
    if cfg is None:
        cfg = GainGapConfig()
        if codebook is not None:
            cfg.gamma_db = codebook["gamma_db"]
    doc = json.dumps(codebook) if codebook is not None else "{}"
    return json.loads(_beamcodex.evaluate_json(scans, doc, strategy, levels, cfg,
                                               dir_error_deg, probe_noise_db, seed, jobs))
