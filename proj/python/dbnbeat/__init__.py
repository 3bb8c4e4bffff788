from ._dbnbeat import (
    ParseError,
    annotate,
    annotation_likelihood,
    beat_window,
    binomial_pmf_general,
    detect_abp_pulses,
    detect_qrs,
    generate,
    hr_likelihood,
    peak_probability,
    score,
)

__all__ = [
    "ParseError",
    "annotate",
    "annotation_likelihood",
    "beat_window",
    "binomial_pmf_general",
    "detect_abp_pulses",
    "detect_qrs",
    "generate",
    "hr_likelihood",
    "peak_probability",
    "score",
]
