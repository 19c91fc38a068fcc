"""Optimal train/test splitting ratio for tabular data.

The test fraction 1 / (sqrt(p) + 1) minimizes the mean square of the
hold-out error estimate of a linear regression with p coefficients. This
package estimates p by stepwise selection over an expanded feature set,
executes the split, and checks the underlying risk formulas by simulation.
"""

from .data import Dataset, load_csv
from .errors import (ConfigError, DataError, EmptyCandidateSetError, OptisplitError,
                     RankDeficiencyError, SizeError)
from .features import FeatureDescriptor, ModelMatrix, expand_features
from .ols import FitResult, fit_ols
from .report import AnalyzeReport
from .selection import SelectionResult, aic, estimate_p, mallows_cp, stepwise
from .splitter import (SplitPlan, energy_distance, energy_split, materialize_split,
                       random_split)
from .theory import (SplitRatio, TraceStats, asymptotic_mse, compute_trace_stats,
                     conditional_mean_error, conditional_var_error, exact_mse, optimal_ratio,
                     three_way_ratios)

__version__ = "0.1.0"
