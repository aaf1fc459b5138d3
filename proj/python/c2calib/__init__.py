"""Camera-projector self-calibration from an unknown cuboid corner.

The heavy lifting lives in the C++ extension; this package adds small
JSON-friendly wrappers so scripts can work with plain dicts.
"""

import json as _json

from c2calib._core import (
    GeometryError,
    __version__,
    calibrate as _calibrate,
    decompose,
    default_scene_spec as _default_scene_spec,
    estimate_homography,
    evaluate_sphere as _evaluate_sphere,
    iac,
    project,
    random_scene_spec as _random_scene_spec,
    reconstruct as _reconstruct,
    resect_dlt,
    simulate as _simulate,
    solve_c2,
    sweep as _sweep,
    triangulate,
)

__all__ = [
    "GeometryError",
    "__version__",
    "calibrate",
    "decompose",
    "default_scene_spec",
    "estimate_homography",
    "evaluate_sphere",
    "iac",
    "project",
    "random_scene_spec",
    "reconstruct",
    "resect_dlt",
    "simulate",
    "solve_c2",
    "sweep",
    "triangulate",
]


def default_scene_spec():
    """Paper-scale synthetic scene spec as a dict."""
    return _json.loads(_default_scene_spec())


def random_scene_spec(seed, sigma_px=0.0, samples_per_face=200):
    """Randomized visible paper-scale scene spec as a dict."""
    return _json.loads(_random_scene_spec(seed, sigma_px, samples_per_face))


def simulate(spec):
    """Generate a synthetic scene; returns dicts for matches/gt (and sphere)."""
    raw = _simulate(_json.dumps(spec) if isinstance(spec, dict) else spec)
    return {key: _json.loads(value) for key, value in raw.items()}


def calibrate(matches, gt=None, **kwargs):
    """Run the full calibration pipeline on a match dict; returns the report dict."""
    matches_json = _json.dumps(matches) if isinstance(matches, dict) else matches
    gt_json = "" if gt is None else (_json.dumps(gt) if isinstance(gt, dict) else gt)
    return _json.loads(_calibrate(matches_json, gt_json=gt_json, **kwargs))


def sweep(matches, **kwargs):
    """Objective curve over a focal grid: (f_star, samples array)."""
    matches_json = _json.dumps(matches) if isinstance(matches, dict) else matches
    return _sweep(matches_json, **kwargs)


def reconstruct(report, matches):
    """Triangulate all matches; rows are (x, y, z, face_label)."""
    report_json = _json.dumps(report) if isinstance(report, dict) else report
    matches_json = _json.dumps(matches) if isinstance(matches, dict) else matches
    return _reconstruct(report_json, matches_json)


def evaluate_sphere(report, sphere):
    """Sphere-fit evaluation of a calibration report."""
    report_json = _json.dumps(report) if isinstance(report, dict) else report
    sphere_json = _json.dumps(sphere) if isinstance(sphere, dict) else sphere
    return _evaluate_sphere(report_json, sphere_json)
