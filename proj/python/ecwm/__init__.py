"""Crosswise-model prevalence estimation with one-saying and random-answering corrections."""

import json

from ._ecwm import (
    EcwmError,
    __version__,
    expected_bias,
    fit,
    gamma_delta_pi,
    response_probs,
    simulate_csv,
    solve_beta,
)
from ._ecwm import fit_survey_json as _fit_survey_json


def fit_survey(csv_text, **settings):
    """Run the calibration and model ladder on survey CSV text; returns the report as a dict."""
    return json.loads(_fit_survey_json(csv_text, settings))


__all__ = [
    "EcwmError",
    "__version__",
    "expected_bias",
    "fit",
    "fit_survey",
    "gamma_delta_pi",
    "response_probs",
    "simulate_csv",
    "solve_beta",
]
