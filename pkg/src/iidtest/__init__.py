"""Portmanteau tests for the i.i.d. hypothesis on a scalar time series.

The tests combine lagged auto- and cross-correlations of several transforms
of the series (by default x and |x|), so that both linear dependence and
volatility clustering are detected by one chi-squared statistic.
"""

from .estimators import Basis, CorrelationMode, TestFunction, TestFunctionSet, build_stack
from .exceptions import (
    DataError,
    DegenerateSeriesError,
    IIDTestError,
    NotPositiveDefiniteError,
    ParameterError,
    StationarityError,
)
from .iidtests import (
    LJUNG_L,
    PLAIN_T,
    WHITENED_L,
    WHITENED_T,
    TestKind,
    TestResult,
    TestVariant,
    classic_box_pierce,
    classic_ljung_box,
    ljung_box_abs,
    new_test,
    run_test,
    run_tests,
    statistic_ljung_L,
    statistic_plain_T,
    statistic_whitened,
)
from .rand_models import Family, InnovationLaw, ModelSpec, SeedSpec, simulate

__version__ = "0.1.0"
